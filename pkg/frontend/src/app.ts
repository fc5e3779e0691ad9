/** Session controller: fetch task, collect a rating, submit, advance. */

import { ApiClient, ApiError, DuplicateError, NetworkError } from "./api.js";
import { FormState, initialFormState, isComplete, toRatingBody } from "./form.js";
import { applyKey } from "./keyboard.js";
import { RetryQueue } from "./queue.js";
import { renderDone, renderError, renderTask } from "./render.js";
import { TaskView } from "./types.js";

export interface AppConfig {
  evaluatorId: string;
  container: HTMLElement;
  client: ApiClient;
  queue: RetryQueue;
}

export class AnnotatorApp {
  private task: TaskView | null = null;
  private form: FormState | null = null;

  constructor(private readonly cfg: AppConfig) {}

  get currentTask(): TaskView | null {
    return this.task;
  }

  get currentForm(): FormState | null {
    return this.form;
  }

  async start(): Promise<void> {
    // Deliver anything stranded by an earlier reload before fetching work.
    try {
      await this.cfg.queue.flush(this.cfg.client);
    } catch {
      // Server-rejected leftovers stay queued; keep going.
    }
    await this.advance();
  }

  async advance(): Promise<void> {
    try {
      const next = await this.cfg.client.nextTask(this.cfg.evaluatorId);
      this.task = next.task;
      if (!this.task) {
        this.form = null;
        renderDone(this.cfg.container);
        return;
      }
      this.form = initialFormState(this.task);
      this.redraw();
    } catch (err) {
      if (err instanceof ApiError) {
        renderError(this.cfg.container, `cannot fetch tasks: ${err.message}`);
      } else {
        renderError(this.cfg.container, "network unavailable; reload to retry");
      }
    }
  }

  handleKey(key: string): void {
    if (!this.task || !this.form) return;
    if (key === "Enter") {
      void this.submit();
      return;
    }
    if (applyKey(this.form, key)) {
      this.redraw();
    }
  }

  setIntent(field: "category" | "interrogative", value: string): void {
    if (this.form?.kind !== "qa_quality") return;
    if (field === "category") {
      this.form.intentCategory = value || null;
    } else {
      this.form.intentInterrogative = value || null;
    }
    this.redraw();
  }

  async submit(): Promise<void> {
    if (!this.task || !this.form || !isComplete(this.form)) return;
    const body = toRatingBody(this.form, this.task.item_id, this.cfg.evaluatorId);
    try {
      await this.cfg.client.submitRating(body);
    } catch (err) {
      if (err instanceof NetworkError) {
        // No data loss: queue locally and keep annotating is not possible
        // without the server, so surface the situation instead.
        this.cfg.queue.enqueue(body);
        renderError(
          this.cfg.container,
          "submission stored locally; it will be retried on reload",
        );
        return;
      }
      if (err instanceof DuplicateError) {
        renderError(this.cfg.container, `already rated: ${err.message}`);
        await this.advance();
        return;
      }
      if (err instanceof ApiError) {
        renderError(this.cfg.container, `rejected: ${err.message}`);
        return;
      }
      throw err;
    }
    await this.advance();
  }

  private redraw(): void {
    if (this.task && this.form) {
      renderTask(this.cfg.container, this.task, this.form);
    }
  }
}
