// Image-space view: keypoints, bones and the per-joint sign badges.

import { LayoutInfo } from "./types.js";

export const DOT_RADIUS = 7;

export type View2D = {
  // canvas px = (image px - pan) * zoom
  zoom: number;
  panX: number;
  panY: number;
};

export function toCanvas(v: View2D, x: number, y: number): [number, number] {
  return [(x - v.panX) * v.zoom, (y - v.panY) * v.zoom];
}

export function toImage(v: View2D, cx: number, cy: number): [number, number] {
  return [cx / v.zoom + v.panX, cy / v.zoom + v.panY];
}

/** Fit the keypoint bounding box into the canvas. */
export function fitView(points: number[][], w: number, h: number, margin = 60): View2D {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(maxX - minX, 1);
  const spanY = Math.max(maxY - minY, 1);
  const zoom = Math.min((w - 2 * margin) / spanX, (h - 2 * margin) / spanY);
  return {
    zoom,
    panX: minX - (w / zoom - spanX) / 2,
    panY: minY - (h / zoom - spanY) / 2,
  };
}

/** Index of the keypoint under the cursor, or -1. */
export function hitTest(v: View2D, points: number[][], cx: number, cy: number): number {
  let best = -1;
  let bestD = DOT_RADIUS * 1.8;
  for (let j = 0; j < points.length; j++) {
    const [x, y] = toCanvas(v, points[j][0], points[j][1]);
    const d = Math.hypot(x - cx, y - cy);
    if (d < bestD) { best = j; bestD = d; }
  }
  return best;
}

export function drawAnnotation(
  ctx: CanvasRenderingContext2D,
  layout: LayoutInfo,
  points: number[][],
  signs: number[],
  clampFlags: boolean[] | null,
  v: View2D,
  w: number,
  h: number,
  image: CanvasImageSource | null,
  selected: number,
) {
  ctx.clearRect(0, 0, w, h);
  if (image) {
    ctx.save();
    ctx.globalAlpha = 0.9;
    ctx.setTransform(v.zoom, 0, 0, v.zoom, -v.panX * v.zoom, -v.panY * v.zoom);
    ctx.drawImage(image, 0, 0);
    ctx.restore();
  }

  const parents = layout.kinematic_parent;
  for (let j = 0; j < points.length; j++) {
    const p = parents[j];
    if (p < 0) continue;
    const [x0, y0] = toCanvas(v, points[p][0], points[p][1]);
    const [x1, y1] = toCanvas(v, points[j][0], points[j][1]);
    ctx.beginPath();
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
    ctx.lineWidth = 2;
    ctx.strokeStyle = clampFlags && clampFlags[j] ? "#e07020" : "rgba(40,160,70,0.85)";
    ctx.stroke();
  }

  for (let j = 0; j < points.length; j++) {
    const [x, y] = toCanvas(v, points[j][0], points[j][1]);
    const front = signs[j] >= 0;
    ctx.beginPath();
    ctx.arc(x, y, DOT_RADIUS, 0, 2 * Math.PI);
    ctx.fillStyle = j === 0 ? "#222" : front ? "#2e9e4f" : "#3a5fd0";
    ctx.fill();
    if (j === selected) {
      ctx.lineWidth = 3;
      ctx.strokeStyle = "#d02070";
      ctx.stroke();
    }
    // front/behind marker; the root has no parent so no sign to show
    if (j > 0) {
      ctx.fillStyle = "#fff";
      ctx.font = "bold 9px sans-serif";
      ctx.textAlign = "center";
      ctx.textBaseline = "middle";
      ctx.fillText(front ? "+" : "−", x, y + 0.5);
    }
  }
}
