import { describe, expect, test } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationSession } from "../src/session.js";
import { answerNext, chain4, flush, liftAnswerFor, makeQueue, respond } from "./fake_service.js";

const START = [[100, 100], [150, 120], [200, 160], [160, 210]];

function makeSession() {
  const { fetchFn, pending } = makeQueue();
  const session = new AnnotationSession(new ApiClient("", fetchFn), chain4, START, "img.jpg");
  return { session, pending };
}

describe("lifting and acknowledgement", () => {
  test("applies the response and clears in-flight", async () => {
    const { session, pending } = makeSession();
    expect(session.displayed).toBeNull();
    const done = session.relift();
    expect(session.inFlight).toBe(true);
    expect(pending.length).toBe(1);
    const raw = liftAnswerFor(pending[0].body);
    answerNext(pending);
    await done;
    expect(session.inFlight).toBe(false);
    expect(session.displayed!.bodyText).toBe(raw);
    expect(session.displayed!.result.lambda_prop).toBe(100);
    expect(session.dirty).toBe(false);
  });

  test("request ids increase monotonically across acks", async () => {
    const { session, pending } = makeSession();
    const ids: number[] = [];
    for (let i = 0; i < 3; i++) {
      const done = session.relift();
      answerNext(pending);
      await done;
      ids.push(session.displayed!.requestId);
    }
    expect(ids[0]).toBeLessThan(ids[1]);
    expect(ids[1]).toBeLessThan(ids[2]);
  });

  test("a stale response never overwrites a newer one", async () => {
    const { session, pending } = makeSession();
    const first = session.relift();          // request 1, left pending
    const second = session.toggleSign(2);    // request 2
    expect(pending.length).toBe(2);

    const stale = pending.shift()!;          // answer 2 before 1
    answerNext(pending);
    await second;
    const shown = session.displayed!;
    expect(shown.signs[2]).toBe(-1);

    respond(stale, 200, liftAnswerFor(stale.body));
    await first;
    expect(session.displayed).toBe(shown);   // untouched by the late reply
    expect(session.displayed!.bodyText).toBe(shown.bodyText);
  });

  test("an old response arriving while a newer request is pending is dropped", async () => {
    const { session, pending } = makeSession();
    const first = session.relift();
    void session.toggleSign(1);
    answerNext(pending);                     // answers request 1 (the old one)
    await first;
    expect(session.displayed).toBeNull();    // still waiting on request 2
    expect(session.inFlight).toBe(true);
    answerNext(pending);
    await flush();
    expect(session.displayed!.signs[1]).toBe(-1);
    expect(session.inFlight).toBe(false);
  });

  test("toggle and toggle back reproduce the exact same bytes", async () => {
    const { session, pending } = makeSession();
    const a = session.relift(); answerNext(pending); await a;
    const before = session.displayed!.bodyText;
    const b = session.toggleSign(3); answerNext(pending); await b;
    expect(session.displayed!.bodyText).not.toBe(before);
    const c = session.toggleSign(3); answerNext(pending); await c;
    expect(session.displayed!.bodyText).toBe(before);
    expect(session.signs[3]).toBe(1);
  });
});

describe("editing", () => {
  test("moveKeypoint marks dirty without issuing a request", async () => {
    const { session, pending } = makeSession();
    const a = session.relift(); answerNext(pending); await a;
    expect(session.dirty).toBe(false);
    session.moveKeypoint(2, 300, 300);
    expect(session.dirty).toBe(true);
    expect(pending.length).toBe(0);
    const b = session.relift(); answerNext(pending); await b;
    expect(session.dirty).toBe(false);
    expect(session.displayed!.keypoints[2]).toEqual([300, 300]);
  });

  test("a failed lift keeps the previous pose and records the error", async () => {
    const { session, pending } = makeSession();
    const a = session.relift(); answerNext(pending); await a;
    const shown = session.displayed!;

    const b = session.toggleSign(1);
    respond(pending.shift()!, 422, JSON.stringify({
      error: { code: "no_real_solution", message: "triangle admits no scale" },
    }));
    await b;
    expect(session.displayed).toBe(shown);
    expect(session.lastError!.code).toBe("no_real_solution");
    expect(session.lastError!.status).toBe(422);
    expect(session.inFlight).toBe(false);
    expect(session.dirty).toBe(true);        // signs no longer match the shown pose

    const c = session.toggleSign(1);         // flip back and recover
    answerNext(pending);
    await c;
    expect(session.lastError).toBeNull();
    expect(session.dirty).toBe(false);
  });

  test("loadEntry replaces state and re-lifts", async () => {
    const { session, pending } = makeSession();
    const entry = {
      image_ref: "other.png",
      keypoints_px: [[0, 0], [10, 0], [20, 0], [30, 0]],
      signs: [1, -1, 1, -1],
      layout_id: "chain4",
    };
    const done = session.loadEntry(entry);
    answerNext(pending);
    await done;
    expect(session.imageRef).toBe("other.png");
    expect(session.signs).toEqual([1, -1, 1, -1]);
    expect(session.displayed!.keypoints[3]).toEqual([30, 0]);
  });
});

describe("export", () => {
  test("blocked while in flight or dirty, allowed when settled", async () => {
    const { session, pending } = makeSession();
    expect(session.canExport).toBe(false);
    expect(() => session.exportSeed()).toThrow(/blocked/);

    const a = session.relift();
    expect(session.canExport).toBe(false);   // in flight
    answerNext(pending);
    await a;
    expect(session.canExport).toBe(true);

    session.moveKeypoint(1, 5, 5);
    expect(session.canExport).toBe(false);   // dirty
    expect(() => session.exportSeed()).toThrow(/blocked/);
    const b = session.relift(); answerNext(pending); await b;
    expect(session.canExport).toBe(true);
  });

  test("exports the acknowledged inputs in the seed file schema", async () => {
    const { session, pending } = makeSession();
    const a = session.toggleSign(2); answerNext(pending); await a;
    const text = session.exportSeed();
    expect(text.endsWith("\n")).toBe(true);
    const parsed = JSON.parse(text);
    expect(Array.isArray(parsed)).toBe(true);
    expect(parsed.length).toBe(1);
    expect(Object.keys(parsed[0]).sort()).toEqual(
      ["image_ref", "keypoints_px", "layout_id", "signs"]);
    expect(parsed[0].layout_id).toBe("chain4");
    expect(parsed[0].image_ref).toBe("img.jpg");
    expect(parsed[0].signs).toEqual([1, 1, -1, 1]);
    expect(parsed[0].keypoints_px).toEqual(START);
  });
});
