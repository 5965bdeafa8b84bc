import { describe, expect, test } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { makeQueue, respond } from "./fake_service.js";

describe("ApiClient", () => {
  test("lift returns the response text exactly as sent", async () => {
    const { fetchFn, pending } = makeQueue();
    const api = new ApiClient("http://x/", fetchFn);
    const p = api.lift({ layout_id: "h36m17", keypoints_px: [[1, 2]], signs: [1] });
    expect(pending[0].url).toBe("http://x/lift");
    const raw = '{"clamp_flags":[false],"joints_3d":[[0.1,0.2,0.0]],"lambda_prop":3.5}';
    respond(pending.shift()!, 200, raw);
    const { result, bodyText } = await p;
    expect(bodyText).toBe(raw);
    expect(result.lambda_prop).toBe(3.5);
  });

  test("service error envelopes become ApiError", async () => {
    const { fetchFn, pending } = makeQueue();
    const api = new ApiClient("", fetchFn);
    const p = api.lift({ layout_id: "h36m17", keypoints_px: [], signs: [] });
    respond(pending.shift()!, 400, JSON.stringify({
      error: { code: "missing_sign", message: "joint 5 lacks a sign", joint: 5 },
    }));
    const err = await p.catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.code).toBe("missing_sign");
    expect(err.detail.joint).toBe(5);
  });

  test("a non-JSON error body still raises a usable error", async () => {
    const { fetchFn, pending } = makeQueue();
    const api = new ApiClient("", fetchFn);
    const p = api.layouts();
    respond(pending.shift()!, 502, "<html>bad gateway</html>");
    const err = await p.catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("bad_response");
    expect(err.status).toBe(502);
  });

  test("saveSeed posts the file text verbatim and expects 201", async () => {
    const { fetchFn, pending } = makeQueue();
    const api = new ApiClient("", fetchFn);
    const fileText = '[{"image_ref":"a","keypoints_px":[[1,2]],"signs":[1],"layout_id":"x"}]\n';
    const p = api.saveSeed(fileText);
    expect(pending[0].url).toBe("/seeds");
    expect(pending[0].body).toBe(fileText);
    respond(pending.shift()!, 201, '{"id":"abcdef012345","count":1}');
    expect((await p).id).toBe("abcdef012345");
  });
});
