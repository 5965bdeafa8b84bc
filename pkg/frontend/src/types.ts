// Wire types for the posesynth HTTP service. The UI does no lifting math of
// its own: every 3D pose on screen came back from POST /lift verbatim.

export type LayoutInfo = {
  layout_id: string;
  format_version: number;
  joint_names: string[];
  kinematic_parent: number[];
  markov_parent: number[];
  bone_lengths: number[];
  head_triangle: { a: number; b: number; c: number };
  range_limits: any;
};

export type LiftRequest = {
  layout_id: string;
  keypoints_px: number[][];
  signs: number[];
  image_ref?: string;
  head_spec?: { alpha?: number; beta?: number; ab_meters?: number };
};

export type LiftResponse = {
  lambda_prop: number;
  joints_3d: number[][];
  clamp_flags: boolean[];
};

export type SeedEntry = {
  image_ref: string;
  keypoints_px: number[][];
  signs: number[];
  layout_id: string;
};

export type ServiceError = {
  code: string;
  message: string;
  joint?: number;
  residuals?: number[][];
};
