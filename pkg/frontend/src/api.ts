import { CaseOutcome, CaseRequest, Resolution, ReviewItem } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export interface HealthInfo {
  status: string;
  kernel_backend: string;
  classes: number;
}

/** Thin typed client over the pipeline service. Optionally records every
 * request/response pair, which the tests use to prove that displayed values
 * originate from API responses. */
export class ApiClient {
  recording: { url: string; body: unknown; response: unknown }[] | null = null;

  constructor(private base: string, private token?: string) {}

  startRecording(): void {
    this.recording = [];
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let payload: unknown = null;
    const text = await response.text();
    if (text) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = text;
      }
    }
    if (!response.ok) {
      const detail =
        payload && typeof payload === "object" && "detail" in payload
          ? String((payload as { detail: unknown }).detail)
          : String(payload);
      throw new ApiError(response.status, detail);
    }
    if (this.recording) {
      this.recording.push({ url: path, body: body ?? null, response: payload });
    }
    return payload as T;
  }

  health(): Promise<HealthInfo> {
    return this.request("GET", "/health");
  }

  submitCase(req: CaseRequest): Promise<CaseOutcome> {
    return this.request("POST", "/cases", req);
  }

  getCase(caseId: string): Promise<CaseOutcome> {
    return this.request("GET", `/cases/${encodeURIComponent(caseId)}`);
  }

  async listQueue(status?: "pending" | "resolved"): Promise<ReviewItem[]> {
    const suffix = status ? `?status=${status}` : "";
    const body = await this.request<{ items: ReviewItem[] }>("GET", `/queue${suffix}`);
    return body.items;
  }

  resolve(itemId: string, resolution: Resolution, resolver: string): Promise<ReviewItem> {
    return this.request("POST", `/queue/${encodeURIComponent(itemId)}/resolve`, {
      ...resolution,
      resolver,
    });
  }

  metricsSummary(): Promise<Record<string, number | string>> {
    return this.request("GET", "/metrics/summary");
  }
}
