"""
Skeletons, local spherical coordinates, and the round trip
==========================================================

A pose is stored per joint as (radius, polar angle, azimuth) in the frame of
its parent bone.  This script walks through the built-in layouts, builds a
pose, and shows the cartesian <-> spherical conversion is exact.
"""

import numpy as np

import posesynth as ps

for layout_id in ("h36m17", "smpl24"):
    lay = ps.get_layout(layout_id)
    print(f"{layout_id}: {lay.joint_count} joints, "
          f"bones {lay.bone_lengths.min():.3f}..{lay.bone_lengths.max():.3f} m")

lay = ps.get_layout("h36m17")
print("\njoint tree (child <- kinematic parent):")
for c in range(1, lay.joint_count):
    print(f"  {lay.joint_names[c]:<15} <- {lay.joint_names[int(lay.kinematic_parent[c])]}")

# a random pose drawn inside the biologic ranges
rng = np.random.default_rng(0)
params = ps.random_params(lay, rng)          # (J-1, 3) spherical triples
pose = ps.spherical_to_cart(params, lay)     # (J, 3) cartesian joints
print(f"\npose extent: x {np.ptp(pose[:,0]):.2f}  y {np.ptp(pose[:,1]):.2f}  "
      f"z {np.ptp(pose[:,2]):.2f} m")

# bone lengths are exactly the rho parameters
for c in (1, 5, 10):
    p = int(lay.kinematic_parent[c])
    print(f"|{lay.joint_names[c]} - {lay.joint_names[p]}| = "
          f"{np.linalg.norm(pose[c] - pose[p]):.4f}  (rho {params[c-1,0]:.4f})")

# and back again
back = ps.cart_to_spherical(pose, lay)
err = np.abs(back[:, :2] - params[:, :2]).max()
err_phi = np.abs(ps.angle_delta(back[:, 2], params[:, 2])).max()
print(f"\nround-trip error: {max(err, err_phi):.2e}")
