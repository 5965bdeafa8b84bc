import { LayoutInfo, LiftRequest, LiftResponse, ServiceError } from "./types.js";

export class ApiError extends Error {
  code: string;
  status: number;
  detail: ServiceError;

  constructor(status: number, detail: ServiceError) {
    super(`${detail.code}: ${detail.message}`);
    this.code = detail.code;
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (url: string, init?: any) => Promise<{
  status: number;
  text(): Promise<string>;
}>;

/** Lifted pose plus the exact response text the service sent. */
export type LiftAnswer = { result: LiftResponse; bodyText: string };

export class ApiClient {
  private baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async post(path: string, body: string) {
    return this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body,
    });
  }

  private static async fail(status: number, text: string): Promise<never> {
    let detail: ServiceError;
    try {
      detail = JSON.parse(text).error;
    } catch {
      detail = { code: "bad_response", message: text.slice(0, 200) };
    }
    throw new ApiError(status, detail);
  }

  async layouts(): Promise<LayoutInfo[]> {
    const res = await this.fetchFn(this.baseUrl + "/layouts");
    const text = await res.text();
    if (res.status !== 200) await ApiClient.fail(res.status, text);
    return JSON.parse(text).layouts;
  }

  // The raw text is kept alongside the parsed response so callers can
  // compare or persist the service bytes without re-serializing.
  async lift(req: LiftRequest): Promise<LiftAnswer> {
    const res = await this.post("/lift", JSON.stringify(req));
    const text = await res.text();
    if (res.status !== 200) await ApiClient.fail(res.status, text);
    return { result: JSON.parse(text), bodyText: text };
  }

  async saveSeed(fileText: string): Promise<{ id: string; count: number }> {
    const res = await this.post("/seeds", fileText);
    const text = await res.text();
    if (res.status !== 201) await ApiClient.fail(res.status, text);
    return JSON.parse(text);
  }
}
