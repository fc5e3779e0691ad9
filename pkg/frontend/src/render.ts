/** DOM rendering for task views and the rating form.
 *
 * All dynamic content goes through textContent, and the view model only ever
 * contains neutral labels (A/B/C), so no system identifier can reach the DOM.
 */

import { ComparisonFormState, FormState, QaFormState, missingFields } from "./form.js";
import {
  BINARY_CRITERIA,
  COMPARISON_LABELS,
  ComparisonPayload,
  INTENT_CATEGORIES,
  INTERROGATIVES,
  LIKERT_DIMENSIONS,
  QaPayload,
  TaskView,
  isComparisonPayload,
} from "./types.js";

function el(
  doc: Document,
  tag: string,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElement {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderQaPanel(doc: Document, payload: QaPayload, state: QaFormState): HTMLElement {
  const panel = el(doc, "section", { class: "qa-panel" });
  panel.appendChild(el(doc, "h2", {}, "Question"));
  panel.appendChild(el(doc, "blockquote", { class: "question" }, payload.question));
  panel.appendChild(el(doc, "h2", {}, "Answer"));
  panel.appendChild(el(doc, "blockquote", { class: "answer" }, payload.answer));

  const list = el(doc, "div", { class: "criteria", role: "group" });
  BINARY_CRITERIA.forEach((criterion, row) => {
    const value = state.binary[criterion];
    const rowEl = el(doc, "div", {
      class: `criterion-row${row === state.activeRow ? " active" : ""}`,
      "data-criterion": criterion,
    });
    rowEl.appendChild(el(doc, "span", { class: "criterion-name" }, criterion));
    rowEl.appendChild(el(doc, "span", { class: "criterion-value" },
      value === undefined ? "-" : value === 1 ? "yes" : "no"));
    list.appendChild(rowEl);
  });
  panel.appendChild(list);

  const intents = el(doc, "div", { class: "intent-pickers" });
  const categorySelect = el(doc, "select", { id: "intent-category", "data-field": "category" });
  categorySelect.appendChild(el(doc, "option", { value: "" }, "intent category..."));
  for (const category of INTENT_CATEGORIES) {
    const option = el(doc, "option", { value: category }, category);
    if (state.intentCategory === category) option.setAttribute("selected", "selected");
    categorySelect.appendChild(option);
  }
  const interrogativeSelect = el(doc, "select", {
    id: "intent-interrogative",
    "data-field": "interrogative",
  });
  interrogativeSelect.appendChild(el(doc, "option", { value: "" }, "question word..."));
  for (const word of INTERROGATIVES) {
    const option = el(doc, "option", { value: word }, word);
    if (state.intentInterrogative === word) option.setAttribute("selected", "selected");
    interrogativeSelect.appendChild(option);
  }
  intents.appendChild(categorySelect);
  intents.appendChild(interrogativeSelect);
  panel.appendChild(intents);

  panel.appendChild(el(doc, "p", { class: "unclear" },
    state.unclear ? "flagged unclear: a second reviewer will see this item" : ""));
  return panel;
}

function renderComparisonPanel(
  doc: Document,
  payload: ComparisonPayload,
  state: ComparisonFormState,
): HTMLElement {
  const panel = el(doc, "section", { class: "comparison-panel" });
  panel.appendChild(el(doc, "h2", {}, "Question"));
  panel.appendChild(el(doc, "blockquote", { class: "question" }, payload.question));

  const columns = el(doc, "div", { class: "answers" });
  for (const label of COMPARISON_LABELS) {
    const column = el(doc, "article", {
      class: `answer-panel${state.activeLabel === label ? " active" : ""}`,
      "data-label": label,
    });
    column.appendChild(el(doc, "h3", {}, `Answer ${label}`));
    column.appendChild(el(doc, "p", { class: "answer-text" }, payload.answers[label] ?? ""));
    const scores = el(doc, "dl", { class: "scores" });
    LIKERT_DIMENSIONS.forEach((dimension, row) => {
      scores.appendChild(el(doc, "dt", {
        class: row === state.activeRow && state.activeLabel === label ? "active" : "",
      }, dimension));
      const value = state.likert[label][dimension];
      scores.appendChild(el(doc, "dd", {}, value === undefined ? "-" : String(value)));
    });
    column.appendChild(scores);
    columns.appendChild(column);
  }
  panel.appendChild(columns);

  const preference = el(doc, "p", { class: "preference" },
    state.preference ? `preferred: ${state.preference}` : "no preference selected");
  panel.appendChild(preference);
  return panel;
}

export function renderTask(
  container: HTMLElement,
  task: TaskView,
  state: FormState,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const header = el(doc, "header", {});
  header.appendChild(el(doc, "span", { class: "item-id" }, task.item_id));
  if (task.remaining !== undefined) {
    header.appendChild(el(doc, "span", { class: "remaining" }, `${task.remaining} remaining`));
  }
  container.appendChild(header);

  if (task.kind === "qa_quality" && !isComparisonPayload(task.kind, task.payload)) {
    container.appendChild(renderQaPanel(doc, task.payload as QaPayload, state as QaFormState));
  } else if (isComparisonPayload(task.kind, task.payload)) {
    container.appendChild(
      renderComparisonPanel(doc, task.payload, state as ComparisonFormState));
  }

  const missing = missingFields(state);
  const submit = el(doc, "button", { id: "submit", type: "button" }, "Submit (Enter)");
  if (missing.length > 0) {
    submit.setAttribute("disabled", "disabled");
    submit.setAttribute("title", `missing: ${missing.join(", ")}`);
  }
  container.appendChild(submit);
}

export function renderDone(container: HTMLElement): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  container.appendChild(el(doc, "h2", { class: "done" }, "All assigned items are rated."));
  container.appendChild(el(doc, "p", {}, "Thank you; you can close this window."));
}

export function renderError(container: HTMLElement, message: string): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  container.appendChild(el(doc, "div", { class: "error-banner", role: "alert" }, message));
}
