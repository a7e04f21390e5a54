import { describe, expect, it } from "vitest";

import {
  ApiClient,
  ApiError,
  NextResponseSchema,
  isItem,
} from "../src/api.js";

const ITEM = {
  item_token: "r1-i4",
  item_index: 4,
  features: [0.5, -1.0],
  suggested_label: 1,
  class_names: ["a", "b"],
  tier: "hard",
};

describe("schemas", () => {
  it("parses an item payload", () => {
    const parsed = NextResponseSchema.parse(ITEM);
    expect(isItem(parsed)).toBe(true);
  });

  it("parses a phase payload", () => {
    const parsed = NextResponseSchema.parse({ phase: "training" });
    expect(isItem(parsed)).toBe(false);
  });

  it("rejects malformed payloads", () => {
    expect(() => NextResponseSchema.parse({ item_token: 5 })).toThrow();
    expect(() => NextResponseSchema.parse({ phase: "resting" })).toThrow();
  });
});

function respond(status: number, body: unknown) {
  return new Response(JSON.stringify(body), { status });
}

describe("ApiClient", () => {
  it("returns null from ratios on 409", async () => {
    const api = new ApiClient("http://x", async () =>
      respond(409, { detail: "missing category" }),
    );
    expect(await api.ratios("s")).toBeNull();
  });

  it("throws ApiError with the status for other failures", async () => {
    const api = new ApiClient("http://x", async () => respond(404, {}));
    await expect(api.next("s")).rejects.toMatchObject({ status: 404 });
  });

  it("does not retry submissions the server rejected", async () => {
    let calls = 0;
    const api = new ApiClient("http://x", async () => {
      calls += 1;
      return respond(409, { detail: "wrong token" });
    });
    await expect(api.submitLabel("s", "t", 0, 10)).rejects.toBeInstanceOf(
      ApiError,
    );
    expect(calls).toBe(1);
  });

  it("retries submissions dropped by the network", async () => {
    let calls = 0;
    const api = new ApiClient("http://x", async () => {
      calls += 1;
      if (calls < 3) throw new TypeError("network error");
      return respond(200, { accepted: true });
    });
    await api.submitLabel("s", "t", 0, 10);
    expect(calls).toBe(3);
  });
});
