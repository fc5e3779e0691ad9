/** Browser bootstrap: wire the controller to the real DOM and fetch. */

import { AnnotatorApp } from "./app.js";
import { createClient } from "./api.js";
import { RetryQueue } from "./queue.js";

function requireEvaluator(): string {
  const params = new URLSearchParams(window.location.search);
  const evaluator = params.get("evaluator");
  if (!evaluator) {
    throw new Error("open this page as /?evaluator=<your id>");
  }
  return evaluator;
}

export function boot(): AnnotatorApp {
  const container = document.getElementById("app");
  if (!container) throw new Error("missing #app container");

  const app = new AnnotatorApp({
    evaluatorId: requireEvaluator(),
    container,
    client: createClient(""),
    queue: new RetryQueue(window.localStorage),
  });

  document.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    if (target && target.tagName === "SELECT") return;
    app.handleKey(event.key);
  });
  container.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    if (target?.id === "submit") void app.submit();
  });
  container.addEventListener("change", (event) => {
    const target = event.target as HTMLSelectElement | null;
    if (!target || target.tagName !== "SELECT") return;
    const field = target.getAttribute("data-field");
    if (field === "category" || field === "interrogative") {
      app.setIntent(field, target.value);
    }
  });

  void app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
