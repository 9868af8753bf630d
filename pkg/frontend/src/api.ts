/** Typed client for the rating service; the UI's only backend dependency. */

import type {
  FramesResponse,
  Population,
  RatingSample,
  ScenarioSummary,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let code = "error";
    let message = resp.statusText;
    try {
      const body = await resp.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(resp.status, code, message);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  listScenarios(): Promise<ScenarioSummary[]> {
    return this.get<ScenarioSummary[]>("/api/scenarios");
  }

  getFrames(scenarioId: string, population: Population): Promise<FramesResponse> {
    const q = new URLSearchParams({ population });
    return this.get<FramesResponse>(
      `/api/scenarios/${encodeURIComponent(scenarioId)}/frames?${q}`,
    );
  }

  async createSession(
    raterId: string,
    scenarioId: string,
    population: Population,
  ): Promise<string> {
    const body = await this.post<{ session_id: string }>("/api/sessions", {
      rater_id: raterId,
      scenario_id: scenarioId,
      population,
    });
    return body.session_id;
  }

  submitRating(
    sessionId: string,
    samples: RatingSample[],
  ): Promise<{ stored_samples: number }> {
    return this.post(`/api/sessions/${encodeURIComponent(sessionId)}/ratings`, {
      samples,
    });
  }

  private async get<T>(path: string): Promise<T> {
    return unwrap<T>(await this.fetchImpl(this.base + path));
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    return unwrap<T>(
      await this.fetchImpl(this.base + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }
}

export interface RetryOptions {
  attempts: number;
  delayMs: number;
  sleep?: (ms: number) => Promise<void>;
}

/**
 * Upload a finished rating trace, retrying transient failures. Client errors
 * (4xx) are not retried: resending the same bad payload cannot succeed.
 */
export async function uploadWithRetry(
  api: ApiClient,
  sessionId: string,
  samples: RatingSample[],
  opts: RetryOptions = { attempts: 3, delayMs: 1000 },
): Promise<{ stored_samples: number }> {
  const sleep =
    opts.sleep ?? ((ms: number) => new Promise((r) => setTimeout(r, ms)));
  let lastError: unknown;
  for (let attempt = 0; attempt < opts.attempts; attempt++) {
    try {
      return await api.submitRating(sessionId, samples);
    } catch (err) {
      if (err instanceof ApiError && err.status < 500) {
        throw err;
      }
      lastError = err;
      if (attempt + 1 < opts.attempts) {
        await sleep(opts.delayMs * (attempt + 1));
      }
    }
  }
  throw lastError;
}

const DRAFT_KEY = "avor-rating-draft";

export interface Draft {
  sessionId: string;
  samples: RatingSample[];
}

/** Persist an unsent trace so a reload can retry the upload. */
export function saveDraft(storage: Storage, draft: Draft): void {
  storage.setItem(DRAFT_KEY, JSON.stringify(draft));
}

export function loadDraft(storage: Storage): Draft | null {
  const raw = storage.getItem(DRAFT_KEY);
  if (raw === null) {
    return null;
  }
  try {
    return JSON.parse(raw) as Draft;
  } catch {
    return null;
  }
}

export function clearDraft(storage: Storage): void {
  storage.removeItem(DRAFT_KEY);
}
