import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { renderOutcome } from "../src/render.js";
import { completedOutcome } from "./fixtures.js";

function mockFetch(status: number, payload: unknown) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = vi.fn(async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  });
  vi.stubGlobal("fetch", fn);
  return calls;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("posts the case body to /cases", async () => {
    const outcome = completedOutcome();
    const calls = mockFetch(200, outcome);
    const api = new ApiClient("http://svc");
    const result = await api.submitCase({ symptom_text: "fever" });
    expect(result.case_id).toBe(outcome.case_id);
    expect(calls[0].url).toBe("http://svc/cases");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ symptom_text: "fever" });
  });

  it("raises ApiError with the server detail on non-2xx", async () => {
    mockFetch(409, { detail: "already resolved" });
    const api = new ApiClient("");
    await expect(
      api.resolve("rv-000001", { action: "confirm_label" }, "dr-a"),
    ).rejects.toMatchObject({ status: 409, detail: "already resolved" });
  });

  it("sends the bearer token when configured", async () => {
    const calls = mockFetch(200, { items: [] });
    const api = new ApiClient("", "sesame");
    await api.listQueue("pending");
    const headers = calls[0].init?.headers as Record<string, string>;
    expect(headers["Authorization"]).toBe("Bearer sesame");
    expect(calls[0].url).toBe("/queue?status=pending");
  });

  it("recorded responses account for every number the view displays", async () => {
    const outcome = completedOutcome();
    mockFetch(200, outcome);
    const api = new ApiClient("");
    api.startRecording();
    const received = await api.submitCase({ symptom_text: "fever" });
    const node = renderOutcome(received);

    // every numeric string in the rendered view must be the formatting of a
    // number present in the recorded API response: the console adds nothing
    const recorded = api.recording![0].response as object;
    const numbers = new Set<string>();
    const walk = (value: unknown): void => {
      if (typeof value === "number") {
        numbers.add(value.toFixed(4));
        numbers.add(value.toExponential(3));
        numbers.add(`${(value * 100).toFixed(1)}%`);
        numbers.add(String(value));
      } else if (typeof value === "string") {
        // ids and labels pass through verbatim; admit their digit fragments
        for (const digits of value.match(/\d+/g) ?? []) numbers.add(digits);
      } else if (Array.isArray(value)) {
        value.forEach(walk);
      } else if (value && typeof value === "object") {
        Object.values(value).forEach(walk);
      }
    };
    walk(recorded);

    const displayed = (node.textContent ?? "").match(
      /\d+\.\d+(?:e[+-]\d+)?%?|\b\d+\b/g,
    ) ?? [];
    for (const fragment of displayed) {
      expect(numbers.has(fragment), `displayed ${fragment} not in response`).toBe(true);
    }
    expect(displayed.length).toBeGreaterThan(5);
  });
});

describe("ApiError", () => {
  it("formats status and detail", () => {
    const error = new ApiError(404, "unknown case");
    expect(error.message).toContain("404");
    expect(error.message).toContain("unknown case");
  });
});
