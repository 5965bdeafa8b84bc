import { ApiClient, ApiError, LiftAnswer } from "./api.js";
import { LayoutInfo, LiftResponse, SeedEntry } from "./types.js";

/** A lift response together with the exact inputs that produced it. */
export type Acknowledged = {
  requestId: number;
  keypoints: number[][];
  signs: number[];
  result: LiftResponse;
  bodyText: string;
};

function copyPoints(pts: number[][]): number[][] {
  return pts.map((p) => [p[0], p[1]]);
}

function sameInputs(a: number[][], b: number[][], sa: number[], sb: number[]) {
  if (a.length !== b.length || sa.length !== sb.length) return false;
  for (let i = 0; i < a.length; i++) {
    if (a[i][0] !== b[i][0] || a[i][1] !== b[i][1]) return false;
  }
  for (let i = 0; i < sa.length; i++) if (sa[i] !== sb[i]) return false;
  return true;
}

/**
 * One image's annotation state: editable 2D keypoints, per-joint depth signs,
 * and the last acknowledged lift from the service.
 *
 * Requests carry monotonically increasing ids; a response is applied only if
 * it answers the newest request, so a slow earlier lift can never overwrite a
 * later one. The rendered 3D pose therefore always matches `displayed`.
 */
export class AnnotationSession {
  readonly layout: LayoutInfo;
  imageRef: string;
  keypoints: number[][];
  signs: number[];
  lastError: ApiError | null = null;
  onUpdate: () => void = () => {};

  private api: ApiClient;
  private issued = 0;
  private settled = 0;
  private ack: Acknowledged | null = null;

  constructor(api: ApiClient, layout: LayoutInfo, keypoints: number[][], imageRef = "") {
    if (keypoints.length !== layout.joint_names.length) {
      throw new Error(`expected ${layout.joint_names.length} keypoints, got ${keypoints.length}`);
    }
    this.api = api;
    this.layout = layout;
    this.imageRef = imageRef;
    this.keypoints = copyPoints(keypoints);
    this.signs = layout.joint_names.map(() => 1);
  }

  get displayed(): Acknowledged | null {
    return this.ack;
  }

  /** True while the newest lift request has not settled yet. */
  get inFlight(): boolean {
    return this.issued !== this.settled;
  }

  /** True when the editable state differs from what the shown 3D pose used. */
  get dirty(): boolean {
    if (!this.ack) return true;
    return !sameInputs(this.keypoints, this.ack.keypoints, this.signs, this.ack.signs);
  }

  get canExport(): boolean {
    return this.ack !== null && !this.inFlight && !this.dirty;
  }

  setSign(joint: number, sign: number): Promise<void> {
    this.signs[joint] = sign;
    return this.relift();
  }

  toggleSign(joint: number): Promise<void> {
    return this.setSign(joint, -this.signs[joint]);
  }

  /** Drag update only; callers re-lift when the gesture ends. */
  moveKeypoint(joint: number, x: number, y: number): void {
    this.keypoints[joint] = [x, y];
    this.onUpdate();
  }

  loadEntry(entry: SeedEntry): Promise<void> {
    this.keypoints = copyPoints(entry.keypoints_px);
    this.signs = entry.signs.slice();
    this.imageRef = entry.image_ref ?? "";
    return this.relift();
  }

  async relift(): Promise<void> {
    const id = ++this.issued;
    const keypoints = copyPoints(this.keypoints);
    const signs = this.signs.slice();
    this.onUpdate();
    let answer: LiftAnswer | null = null;
    let failure: ApiError | null = null;
    try {
      answer = await this.api.lift({
        layout_id: this.layout.layout_id,
        keypoints_px: keypoints,
        signs,
      });
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      failure = err;
    }
    if (id !== this.issued) return; // superseded; a newer request owns the state
    this.settled = id;
    if (answer) {
      this.ack = { requestId: id, keypoints, signs, result: answer.result, bodyText: answer.bodyText };
      this.lastError = null;
    } else {
      this.lastError = failure;
    }
    this.onUpdate();
  }

  /**
   * Seed-file text for the exact inputs behind the displayed pose. Blocked
   * while a lift is pending or edits have not been lifted yet, so the file
   * always re-lifts to the very response the user is looking at.
   */
  exportSeed(): string {
    if (!this.canExport || !this.ack) {
      throw new Error("export blocked: lift in flight or unlifted edits");
    }
    const entry: SeedEntry = {
      image_ref: this.imageRef,
      keypoints_px: this.ack.keypoints,
      signs: this.ack.signs,
      layout_id: this.layout.layout_id,
    };
    return JSON.stringify([entry], null, 2) + "\n";
  }
}
