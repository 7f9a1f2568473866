/** Typed client for the review service. Never invents data: everything the
 * UI shows comes straight from these endpoints. */

import type {
  ExpertiseEntry,
  QueueItem,
  RecomputeResult,
  Report,
  ReviewItem,
  VerdictRecord,
  VerdictSubmission,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseJson(response: Response): Promise<unknown> {
  const text = await response.text();
  try {
    return text ? JSON.parse(text) : {};
  } catch {
    throw new ApiError(response.status, `invalid JSON from server: ${text.slice(0, 120)}`);
  }
}

export class ReviewClient {
  constructor(readonly baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    const body = await parseJson(response);
    if (!response.ok) {
      const message = (body as { error?: string }).error ?? response.statusText;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    const body = await parseJson(response);
    if (!response.ok) {
      const message = (body as { error?: string }).error ?? response.statusText;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  async queue(): Promise<QueueItem[]> {
    const payload = await this.get<{ items: QueueItem[] }>("/queue");
    return payload.items;
  }

  async item(imageId: string): Promise<ReviewItem> {
    return this.get<ReviewItem>(`/item/${encodeURIComponent(imageId)}`);
  }

  async submitVerdict(verdict: VerdictSubmission): Promise<VerdictRecord> {
    const payload = await this.post<{ ok: boolean; verdict: VerdictRecord }>(
      "/verdict",
      verdict,
    );
    return payload.verdict;
  }

  async recompute(): Promise<RecomputeResult> {
    return this.post<RecomputeResult>("/recompute", {});
  }

  async report(): Promise<Report> {
    return this.get<Report>("/report");
  }

  async expertise(): Promise<ExpertiseEntry[]> {
    const payload = await this.get<{ expertise: ExpertiseEntry[] }>("/expertise");
    return payload.expertise;
  }
}
