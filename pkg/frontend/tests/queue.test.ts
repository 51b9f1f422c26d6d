import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { QueueController } from "../src/queue.js";
import { ReviewItem } from "../src/types.js";
import { pendingItem } from "./fixtures.js";

function makeController(api: Partial<ApiClient>) {
  const changes: ReviewItem[][] = [];
  const notices: { message: string; kind: string }[] = [];
  const controller = new QueueController(api as ApiClient, {
    onChange: (items) => changes.push(items.map((i) => ({ ...i }))),
    onNotice: (message, kind) => notices.push({ message, kind }),
  });
  return { controller, changes, notices };
}

describe("queue controller", () => {
  it("refresh loads items from the server", async () => {
    const item = pendingItem();
    const { controller, changes } = makeController({
      listQueue: vi.fn(async () => [item]),
    });
    await controller.refresh();
    expect(controller.pending().length).toBe(1);
    expect(changes.length).toBe(1);
  });

  it("resolve applies an optimistic update then reconciles with the server", async () => {
    const item = pendingItem();
    const serverItem: ReviewItem = {
      ...item,
      status: "resolved",
      resolution: { action: "confirm_label" },
      resolver: "dr-a",
      resolved_at: "2026-01-02T00:00:00+00:00",
    };
    let resolveServer!: (value: ReviewItem) => void;
    const { controller, changes } = makeController({
      listQueue: vi.fn(async () => [item]),
      resolve: vi.fn(
        () => new Promise<ReviewItem>((resolve) => (resolveServer = resolve)),
      ),
    });
    await controller.refresh();
    const inFlight = controller.resolve(item, { action: "confirm_label" }, "dr-a");
    // optimistic: item already reads resolved before the server answers
    expect(controller.resolved().length).toBe(1);
    resolveServer(serverItem);
    await inFlight;
    expect(controller.items[0].resolved_at).toBe(serverItem.resolved_at);
    expect(changes.length).toBe(3); // refresh, optimistic, reconciled
  });

  it("conflict (409) refreshes from the server and notifies", async () => {
    const item = pendingItem();
    const serverSide: ReviewItem = { ...item, status: "resolved", resolver: "dr-x" };
    const { controller, notices } = makeController({
      listQueue: vi
        .fn()
        .mockResolvedValueOnce([item])
        .mockResolvedValueOnce([serverSide]),
      resolve: vi.fn(async () => {
        throw new ApiError(409, "already resolved");
      }),
    });
    await controller.refresh();
    await controller.resolve(item, { action: "confirm_label" }, "dr-a");
    expect(notices.length).toBe(1);
    expect(notices[0].kind).toBe("error");
    // the queue now reflects the server's winner
    expect(controller.items[0].resolver).toBe("dr-x");
  });

  it("other failures roll the optimistic update back", async () => {
    const item = pendingItem();
    const { controller, notices } = makeController({
      listQueue: vi.fn(async () => [item]),
      resolve: vi.fn(async () => {
        throw new ApiError(500, "boom");
      }),
    });
    await controller.refresh();
    await controller.resolve(item, { action: "confirm_label" }, "dr-a");
    expect(controller.pending().length).toBe(1);
    expect(controller.items[0].status).toBe("pending");
    expect(notices[0].message).toContain("boom");
  });
});
