// Orbitable orthographic preview of the lifted skeleton. Mirrors the service
// camera model: rotate, drop z, no perspective.

export type Camera = { yaw: number; pitch: number };

export function rotationMatrix(cam: Camera): number[][] {
  const cy = Math.cos(cam.yaw), sy = Math.sin(cam.yaw);
  const cp = Math.cos(cam.pitch), sp = Math.sin(cam.pitch);
  // Rx(pitch) * Ry(yaw)
  return [
    [cy, 0, sy],
    [sp * sy, cp, -sp * cy],
    [-cp * sy, sp, cp * cy],
  ];
}

export type Projected = { xy: number[][]; depth: number[] };

/** Rotate about the root-centered origin, keep (x, y), depth = rotated z. */
export function projectOrtho(joints: number[][], cam: Camera): Projected {
  const r = rotationMatrix(cam);
  const xy: number[][] = [];
  const depth: number[] = [];
  for (const [x, y, z] of joints) {
    xy.push([
      r[0][0] * x + r[0][1] * y + r[0][2] * z,
      r[1][0] * x + r[1][1] * y + r[1][2] * z,
    ]);
    depth.push(r[2][0] * x + r[2][1] * y + r[2][2] * z);
  }
  return { xy, depth };
}

export type Fit = { scale: number; ox: number; oy: number };

/** Map projected coordinates into a w x h canvas with some margin. */
export function fitToCanvas(xy: number[][], w: number, h: number, margin = 0.1): Fit {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const [x, y] of xy) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const span = Math.max(maxX - minX, maxY - minY, 1e-9);
  const scale = (1 - 2 * margin) * Math.min(w, h) / span;
  return {
    scale,
    ox: w / 2 - scale * (minX + maxX) / 2,
    oy: h / 2 + scale * (minY + maxY) / 2,
  };
}

export function drawSkeleton3D(
  ctx: CanvasRenderingContext2D,
  joints: number[][],
  parents: number[],
  clampFlags: boolean[],
  cam: Camera,
  w: number,
  h: number,
) {
  ctx.clearRect(0, 0, w, h);
  const { xy, depth } = projectOrtho(joints, cam);
  const fit = fitToCanvas(xy, w, h);
  const px = (i: number) => fit.ox + fit.scale * xy[i][0];
  const py = (i: number) => fit.oy - fit.scale * xy[i][1]; // canvas y grows down

  // bones back-to-front so nearer ones paint over farther ones
  const bones: number[] = [];
  for (let j = 0; j < parents.length; j++) if (parents[j] >= 0) bones.push(j);
  bones.sort((a, b) => (depth[a] + depth[parents[a]]) - (depth[b] + depth[parents[b]]));

  for (const j of bones) {
    const p = parents[j];
    ctx.beginPath();
    ctx.moveTo(px(p), py(p));
    ctx.lineTo(px(j), py(j));
    ctx.lineWidth = clampFlags[j] ? 4 : 2.5;
    ctx.strokeStyle = clampFlags[j] ? "#e07020" : "#3a7bd5";
    ctx.stroke();
  }
  for (let j = 0; j < joints.length; j++) {
    ctx.beginPath();
    ctx.arc(px(j), py(j), j === 0 ? 5 : 3.5, 0, 2 * Math.PI);
    ctx.fillStyle = j === 0 ? "#222" : clampFlags[j] ? "#e07020" : "#155a9c";
    ctx.fill();
  }
}
