import { ApiClient, ApiError } from "./api.js";
import { Resolution, ReviewItem } from "./types.js";

export interface QueueEvents {
  onChange: (items: ReviewItem[]) => void;
  onNotice: (message: string, kind: "info" | "error") => void;
}

/** Queue state with optimistic adjudication.
 *
 * A resolve marks the item locally, posts to the server, and reconciles the
 * local copy with the server's item. On a conflict (someone else resolved it
 * first) the queue is re-fetched and the user notified; the server always
 * wins.
 */
export class QueueController {
  items: ReviewItem[] = [];

  constructor(private api: ApiClient, private events: QueueEvents) {}

  async refresh(): Promise<void> {
    this.items = await this.api.listQueue();
    this.events.onChange(this.items);
  }

  pending(): ReviewItem[] {
    return this.items.filter((item) => item.status === "pending");
  }

  resolved(): ReviewItem[] {
    return this.items.filter((item) => item.status === "resolved");
  }

  async resolve(item: ReviewItem, resolution: Resolution, resolver: string): Promise<void> {
    const index = this.items.findIndex((i) => i.item_id === item.item_id);
    if (index < 0) return;
    const original = this.items[index];
    // optimistic update; the server response replaces it
    this.items[index] = {
      ...original,
      status: "resolved",
      resolution,
      resolver,
    };
    this.events.onChange(this.items);
    try {
      const confirmed = await this.api.resolve(item.item_id, resolution, resolver);
      this.items[index] = confirmed;
      this.events.onChange(this.items);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.events.onNotice(
          `${item.case_id} was already resolved elsewhere; refreshed`, "error");
        await this.refresh();
        return;
      }
      this.items[index] = original; // roll the optimistic update back
      this.events.onChange(this.items);
      const detail = error instanceof Error ? error.message : String(error);
      this.events.onNotice(`resolve failed: ${detail}`, "error");
    }
  }
}
