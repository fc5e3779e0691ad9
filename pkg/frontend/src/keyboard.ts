/** Keyboard-first controls.
 *
 * QA-quality tasks:
 *   j / k         move between criterion rows
 *   y / n         mark the active criterion satisfied / not satisfied
 *   u             toggle the "unclear, escalate" flag
 *
 * Comparison tasks:
 *   a / b / c / u pick the preferred answer (u = undecided)
 *   j / k         move between Likert dimension rows
 *   tab-like h/l  move between answer columns A/B/C
 *   1..5          score the active column and row, then advance a row
 *
 * Returns true when the key changed the form state.
 */

import { ComparisonFormState, FormState, QaFormState, setBinary, setLikert } from "./form.js";
import {
  AnswerLabel,
  BINARY_CRITERIA,
  COMPARISON_LABELS,
  LIKERT_DIMENSIONS,
} from "./types.js";

function qaKey(state: QaFormState, key: string): boolean {
  const rows = BINARY_CRITERIA.length;
  switch (key) {
    case "j":
      state.activeRow = (state.activeRow + 1) % rows;
      return true;
    case "k":
      state.activeRow = (state.activeRow + rows - 1) % rows;
      return true;
    case "y":
    case "n": {
      const criterion = BINARY_CRITERIA[state.activeRow];
      if (!criterion) return false;
      setBinary(state, criterion, key === "y" ? 1 : 0);
      state.activeRow = (state.activeRow + 1) % rows;
      return true;
    }
    case "u":
      state.unclear = !state.unclear;
      return true;
    default:
      return false;
  }
}

function comparisonKey(state: ComparisonFormState, key: string): boolean {
  const rows = LIKERT_DIMENSIONS.length;
  if (key >= "1" && key <= "5") {
    const dimension = LIKERT_DIMENSIONS[state.activeRow];
    if (!dimension) return false;
    if (!setLikert(state, state.activeLabel, dimension, Number(key))) return false;
    state.activeRow = (state.activeRow + 1) % rows;
    return true;
  }
  switch (key) {
    case "a":
    case "b":
    case "c": {
      const label = key.toUpperCase() as AnswerLabel;
      state.preference = label;
      return true;
    }
    case "u":
      state.preference = "undecided";
      return true;
    case "j":
      state.activeRow = (state.activeRow + 1) % rows;
      return true;
    case "k":
      state.activeRow = (state.activeRow + rows - 1) % rows;
      return true;
    case "h":
    case "l": {
      const labels = COMPARISON_LABELS;
      const i = labels.indexOf(state.activeLabel);
      const next = key === "l" ? (i + 1) % labels.length : (i + labels.length - 1) % labels.length;
      state.activeLabel = labels[next] ?? "A";
      return true;
    }
    default:
      return false;
  }
}

export function applyKey(state: FormState, key: string): boolean {
  return state.kind === "qa_quality"
    ? qaKey(state, key.toLowerCase())
    : comparisonKey(state, key.toLowerCase());
}
