/** Offline retry queue: a submission survives reloads until acknowledged. */

import { ApiClient, DuplicateError, NetworkError } from "./api.js";
import { RatingBody } from "./types.js";

const STORAGE_KEY = "annotator.pendingRatings";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export class RetryQueue {
  private pending: RatingBody[] = [];

  constructor(private readonly storage: StorageLike) {
    const raw = storage.getItem(STORAGE_KEY);
    if (raw) {
      try {
        this.pending = JSON.parse(raw) as RatingBody[];
      } catch {
        this.pending = [];
      }
    }
  }

  get size(): number {
    return this.pending.length;
  }

  snapshot(): RatingBody[] {
    return this.pending.map((body) => ({ ...body }));
  }

  enqueue(body: RatingBody): void {
    this.pending.push(body);
    this.persist();
  }

  /**
   * Try to deliver every queued rating. Acknowledged and duplicate entries
   * leave the queue; transport failures keep theirs for the next flush.
   * Returns the number delivered (duplicates count as delivered).
   */
  async flush(client: ApiClient): Promise<number> {
    const kept: RatingBody[] = [];
    let delivered = 0;
    for (let i = 0; i < this.pending.length; i++) {
      const body = this.pending[i]!;
      try {
        await client.submitRating(body);
        delivered += 1;
      } catch (err) {
        if (err instanceof DuplicateError) {
          delivered += 1;
        } else if (err instanceof NetworkError) {
          kept.push(body);
        } else {
          // Validation-style rejection: keep everything unprocessed visible
          // rather than lose data, then surface the error.
          kept.push(body, ...this.pending.slice(i + 1));
          this.pending = kept;
          this.persist();
          throw err;
        }
      }
    }
    this.pending = kept;
    this.persist();
    return delivered;
  }

  private persist(): void {
    this.storage.setItem(STORAGE_KEY, JSON.stringify(this.pending));
  }
}
