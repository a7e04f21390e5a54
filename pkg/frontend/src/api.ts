import { z } from "zod";

export const ItemViewSchema = z.object({
  item_token: z.string(),
  item_index: z.number().int(),
  features: z.array(z.number()),
  suggested_label: z.number().int(),
  class_names: z.array(z.string()),
  tier: z.enum(["hard", "intermediate", "easy"]),
  thumbnail: z.string().nullish(),
});

export const PhaseSchema = z.object({
  phase: z.enum(["selecting", "awaiting_labels", "training", "done"]),
});

export const NextResponseSchema = z.union([ItemViewSchema, PhaseSchema]);

export const TierCountSchema = z.object({
  selected: z.number().int(),
  suggestion_correct: z.number().int(),
});

export const MetricsSchema = z.object({
  round: z.number().int(),
  test_accuracy: z.number(),
  cost_cumulative: z.number(),
  tiers: z.record(TierCountSchema),
  phase: z.string(),
});

export const RatioStatsSchema = z.object({
  mean_cv: z.number(),
  median_cv: z.number(),
  mean_ca: z.number(),
  median_ca: z.number(),
  mean_ratio: z.number(),
  median_ratio: z.number(),
});

export type ItemView = z.infer<typeof ItemViewSchema>;
export type NextResponse = z.infer<typeof NextResponseSchema>;
export type Metrics = z.infer<typeof MetricsSchema>;
export type RatioStats = z.infer<typeof RatioStatsSchema>;

export function isItem(next: NextResponse): next is ItemView {
  return "item_token" in next;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

type FetchLike = typeof fetch;

/** Typed client for the labeling session service. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      throw new ApiError(`${path} failed with ${res.status}`, res.status);
    }
    return res;
  }

  async createSession(): Promise<string> {
    const res = await this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ config: {} }),
    });
    const body = (await res.json()) as { session_id: string };
    return body.session_id;
  }

  async next(sessionId: string): Promise<NextResponse> {
    const res = await this.request(`/sessions/${sessionId}/next`);
    return NextResponseSchema.parse(await res.json());
  }

  /**
   * Submit a label. The server treats resubmission of a completed token as a
   * no-op, so transient network failures are retried with the same token.
   */
  async submitLabel(
    sessionId: string,
    itemToken: string,
    finalLabel: number,
    clientElapsedMs: number,
    retries = 3,
  ): Promise<void> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= retries; attempt++) {
      try {
        await this.request(`/sessions/${sessionId}/labels`, {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify({
            item_token: itemToken,
            final_label: finalLabel,
            client_elapsed_ms: Math.round(clientElapsedMs),
          }),
        });
        return;
      } catch (err) {
        if (err instanceof ApiError) throw err; // server rejected, not network
        lastError = err;
      }
    }
    throw lastError;
  }

  async metrics(sessionId: string): Promise<Metrics> {
    const res = await this.request(`/sessions/${sessionId}/metrics`);
    return MetricsSchema.parse(await res.json());
  }

  /** Returns null while either timing category is still empty (409). */
  async ratios(sessionId: string): Promise<RatioStats | null> {
    try {
      const res = await this.request(`/sessions/${sessionId}/stats/ratios`);
      return RatioStatsSchema.parse(await res.json());
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) return null;
      throw err;
    }
  }
}
