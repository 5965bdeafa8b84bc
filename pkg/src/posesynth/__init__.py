"""posesynth: synthetic 3D human pose generation from a handful of seed
poses, and a 2D-to-3D lifting network trained purely on the synthetic data."""

from .layouts import (JointLayout, builtin_layout_ids, get_layout,
                      load_layout_file, resolve_layout, save_layout_file,
                      validate_layout)
from .spherical import (angle_delta, cart_to_spherical, local_frame,
                        random_params, spherical_to_cart, template_params)
from .histograms import (BINS, DiffusionSchedule, DistributionSet, alpha,
                         diffuse, init_from_seeds, laplacian_step,
                         load_snapshot, save_snapshot, seed_weights)
from .sampling import EmpiricalTracker, generate, generate_batch, sample_bin
from .seedlift import (AnnotatedPose2D, HeadTriangleSpec, LiftResult,
                       lift, select_seed_sets, signs_from_pose, solve_scale,
                       triangle_residuals)
from .camera import (ViewSchedule, normalize_2d, normalize_3d, project,
                     rotate_pose, sample_rotation, view_sigma)
from .network import (LifterParams, OptimizerState, adam_step, forward,
                      init_params)
from .training import (TrainResult, backward, batch_losses, loss2d, loss3d,
                       predict_poses, total_loss, train, zero_depth_baseline)
from .metrics import EvalReport, PRReport, evaluate_poses, mpjpe, pck, precision_recall
from .config import RunConfig, TrainConfig, load_run_config
from . import errors

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
