import { describe, expect, it } from "vitest";

import {
  ApiClient,
  ApiError,
  clearDraft,
  loadDraft,
  saveDraft,
  uploadWithRetry,
} from "../src/api.js";
import type { FetchLike } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

const SAMPLES = [
  { t: 0, srr: 5 },
  { t: 0.1, srr: 5 },
];

describe("uploadWithRetry", () => {
  const noSleep = async () => {};

  it("retries server errors and succeeds", async () => {
    let calls = 0;
    const fetchImpl: FetchLike = async () => {
      calls += 1;
      return calls < 3
        ? jsonResponse(500, { code: "boom", message: "try again" })
        : jsonResponse(201, { stored_samples: 2 });
    };
    const api = new ApiClient("", fetchImpl);
    const result = await uploadWithRetry(api, "s1", SAMPLES, {
      attempts: 3,
      delayMs: 0,
      sleep: noSleep,
    });
    expect(result.stored_samples).toBe(2);
    expect(calls).toBe(3);
  });

  it("does not retry client errors", async () => {
    let calls = 0;
    const fetchImpl: FetchLike = async () => {
      calls += 1;
      return jsonResponse(409, {
        code: "already_submitted",
        message: "stored",
      });
    };
    const api = new ApiClient("", fetchImpl);
    await expect(
      uploadWithRetry(api, "s1", SAMPLES, {
        attempts: 3,
        delayMs: 0,
        sleep: noSleep,
      }),
    ).rejects.toMatchObject({ status: 409, code: "already_submitted" });
    expect(calls).toBe(1);
  });

  it("gives up after the configured attempts", async () => {
    let calls = 0;
    const fetchImpl: FetchLike = async () => {
      calls += 1;
      throw new Error("network down");
    };
    const api = new ApiClient("", fetchImpl);
    await expect(
      uploadWithRetry(api, "s1", SAMPLES, {
        attempts: 2,
        delayMs: 0,
        sleep: noSleep,
      }),
    ).rejects.toThrow("network down");
    expect(calls).toBe(2);
  });
});

describe("api client", () => {
  it("surfaces structured error bodies", async () => {
    const fetchImpl: FetchLike = async () =>
      jsonResponse(404, { code: "scenario_not_found", message: "nope" });
    const api = new ApiClient("", fetchImpl);
    try {
      await api.getFrames("missing", "O");
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).code).toBe("scenario_not_found");
    }
  });

  it("requests the population it was asked for", async () => {
    let url = "";
    const fetchImpl: FetchLike = async (input) => {
      url = input;
      return jsonResponse(200, { frames: [], furniture: [] });
    };
    await new ApiClient("", fetchImpl).getFrames("hrs", "A+R");
    expect(url).toContain("/api/scenarios/hrs/frames");
    expect(url).toContain("population=A%2BR");
  });
});

describe("draft persistence", () => {
  function fakeStorage(): Storage {
    const map = new Map<string, string>();
    return {
      get length() {
        return map.size;
      },
      clear: () => map.clear(),
      getItem: (k) => map.get(k) ?? null,
      key: (i) => [...map.keys()][i] ?? null,
      removeItem: (k) => void map.delete(k),
      setItem: (k, v) => void map.set(k, v),
    };
  }

  it("round-trips and clears", () => {
    const storage = fakeStorage();
    expect(loadDraft(storage)).toBeNull();
    saveDraft(storage, { sessionId: "s1", samples: SAMPLES });
    expect(loadDraft(storage)).toEqual({ sessionId: "s1", samples: SAMPLES });
    clearDraft(storage);
    expect(loadDraft(storage)).toBeNull();
  });
});
