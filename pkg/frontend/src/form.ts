/** Rating form state: a pure model the DOM renders from and keys mutate. */

import {
  AnswerLabel,
  BINARY_CRITERIA,
  BinaryCriterion,
  COMPARISON_LABELS,
  LIKERT_DIMENSIONS,
  Preference,
  RatingBody,
  TaskView,
} from "./types.js";

export interface QaFormState {
  kind: "qa_quality";
  binary: Partial<Record<BinaryCriterion, 0 | 1>>;
  intentCategory: string | null;
  intentInterrogative: string | null;
  unclear: boolean;
  /** Criterion row the next keystroke applies to. */
  activeRow: number;
}

export interface ComparisonFormState {
  kind: "system_comparison";
  preference: Preference | null;
  likert: Record<AnswerLabel, Partial<Record<string, number>>>;
  /** Label column and dimension row the next digit applies to. */
  activeLabel: AnswerLabel;
  activeRow: number;
}

export type FormState = QaFormState | ComparisonFormState;

export function initialFormState(task: TaskView): FormState {
  if (task.kind === "qa_quality") {
    return {
      kind: "qa_quality",
      binary: {},
      intentCategory: null,
      intentInterrogative: null,
      unclear: false,
      activeRow: 0,
    };
  }
  return {
    kind: "system_comparison",
    preference: null,
    likert: { A: {}, B: {}, C: {} },
    activeLabel: "A",
    activeRow: 0,
  };
}

/** Missing required fields, empty when the form may be submitted. */
export function missingFields(state: FormState): string[] {
  const missing: string[] = [];
  if (state.kind === "qa_quality") {
    for (const criterion of BINARY_CRITERIA) {
      if (state.binary[criterion] === undefined) missing.push(`criterion:${criterion}`);
    }
    if (!state.intentCategory) missing.push("intent:category");
    if (!state.intentInterrogative) missing.push("intent:interrogative");
  } else {
    if (!state.preference) missing.push("preference");
    for (const label of COMPARISON_LABELS) {
      for (const dimension of LIKERT_DIMENSIONS) {
        if (state.likert[label][dimension] === undefined) {
          missing.push(`likert:${label}:${dimension}`);
        }
      }
    }
  }
  return missing;
}

export function isComplete(state: FormState): boolean {
  return missingFields(state).length === 0;
}

/** Clamp-free setter: rejects out-of-range values outright. */
export function setLikert(
  state: ComparisonFormState,
  label: AnswerLabel,
  dimension: string,
  value: number,
): boolean {
  if (!Number.isInteger(value) || value < 1 || value > 5) return false;
  if (!(LIKERT_DIMENSIONS as readonly string[]).includes(dimension)) return false;
  state.likert[label][dimension] = value;
  return true;
}

export function setBinary(state: QaFormState, criterion: BinaryCriterion, value: 0 | 1): void {
  state.binary[criterion] = value;
}

export function toRatingBody(
  state: FormState,
  itemId: string,
  evaluatorId: string,
): RatingBody {
  if (state.kind === "qa_quality") {
    return {
      item_id: itemId,
      evaluator_id: evaluatorId,
      kind: "qa_quality",
      binary: { ...state.binary } as Record<string, number>,
      intent_category: state.intentCategory ?? undefined,
      intent_interrogative: state.intentInterrogative ?? undefined,
      unclear: state.unclear,
    };
  }
  const likert: Record<string, Record<string, number>> = {};
  for (const label of COMPARISON_LABELS) {
    likert[label] = { ...state.likert[label] } as Record<string, number>;
  }
  return {
    item_id: itemId,
    evaluator_id: evaluatorId,
    kind: "system_comparison",
    preference: state.preference ?? undefined,
    likert,
  };
}
