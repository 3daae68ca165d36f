import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { type RecordedCall, stubFetch } from "./helpers.js";

describe("ApiClient", () => {
  it("fetches service info from /config", async () => {
    const calls: RecordedCall[] = [];
    const api = new ApiClient(stubFetch(calls));
    const info = await api.config();
    expect(info.levels).toBe(10);
    expect(info.weights.lexical + info.weights.semantic + info.weights.self_eval).toBeCloseTo(
      1.0,
      9,
    );
    expect(calls[0].path).toBe("/config");
  });

  it("sends the exact tag for every level 0..10", async () => {
    const calls: RecordedCall[] = [];
    const api = new ApiClient(stubFetch(calls));
    for (let level = 0; level <= 10; level++) {
      await api.verify({ knowledge: "k", context: "c", tag: level });
    }
    const bodies = calls.map((c) => c.body as { tag: number });
    expect(bodies.map((b) => b.tag)).toEqual([0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
  });

  it("posts verify requests as JSON with knowledge and context", async () => {
    const calls: RecordedCall[] = [];
    const api = new ApiClient(stubFetch(calls));
    await api.verify({ knowledge: "the passage", context: "the question", tag: 4 });
    expect(calls[0].path).toBe("/verify");
    expect(calls[0].body).toEqual({ knowledge: "the passage", context: "the question", tag: 4 });
  });

  it("returns the server report untouched", async () => {
    const api = new ApiClient(stubFetch([]));
    const report = await api.verify({ knowledge: "facts", context: "q", tag: 10 });
    expect(report.measured_tag).toBe(10);
    expect(report.deviation).toBe(0);
    expect(report.breakdown.final).toBe(1.0);
  });

  it("surfaces HTTP errors with status and detail", async () => {
    const api = new ApiClient(
      stubFetch([], { verifyStatus: 422, verifyDetail: '{"detail":"knowledge must be non-empty"}' }),
    );
    const failure = api.verify({ knowledge: " ", context: "c", tag: 5 });
    await expect(failure).rejects.toBeInstanceOf(ApiError);
    await expect(failure).rejects.toMatchObject({ status: 422 });
  });
});
