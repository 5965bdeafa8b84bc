// A hand-resolvable fetch double. Tests pop pending requests and answer them
// in whatever order they want, which is how we exercise the stale-response
// rules without a real server.

import { FetchLike } from "../src/api.js";
import { LayoutInfo } from "../src/types.js";

export const chain4: LayoutInfo = {
  layout_id: "chain4",
  format_version: 1,
  joint_names: ["root", "a", "b", "c"],
  kinematic_parent: [-1, 0, 1, 1],
  markov_parent: [-1, 0, 1, 1],
  bone_lengths: [0.5, 0.4, 0.3],
  head_triangle: { a: 1, b: 2, c: 3 },
  range_limits: null,
};

export type Pending = {
  url: string;
  body: string;
  resolve: (r: { status: number; text(): Promise<string> }) => void;
};

export function makeQueue(): { fetchFn: FetchLike; pending: Pending[] } {
  const pending: Pending[] = [];
  const fetchFn: FetchLike = (url, init) =>
    new Promise((resolve) => {
      pending.push({ url, body: init?.body ?? "", resolve });
    });
  return { fetchFn, pending };
}

export function respond(p: Pending, status: number, text: string) {
  p.resolve({ status, text: async () => text });
}

// Deterministic stand-in for the service: same request body, same bytes.
export function liftAnswerFor(body: string): string {
  const req = JSON.parse(body);
  const joints = req.keypoints_px.map((kp: number[], j: number) => [
    kp[0] / 100,
    kp[1] / 100,
    j === 0 ? 0 : req.signs[j] * 0.01 * j,
  ]);
  return JSON.stringify({
    clamp_flags: req.signs.map(() => false),
    joints_3d: joints,
    lambda_prop: 100.0,
  });
}

export function answerNext(pending: Pending[]) {
  const p = pending.shift()!;
  respond(p, 200, liftAnswerFor(p.body));
}

export const flush = () => new Promise<void>((r) => setTimeout(r, 0));
