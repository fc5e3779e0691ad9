/** Wire types for the annotation service /v1 API. */

export const COMPARISON_LABELS = ["A", "B", "C"] as const;
export type AnswerLabel = (typeof COMPARISON_LABELS)[number];

export type Preference = AnswerLabel | "undecided";

export const LIKERT_DIMENSIONS = [
  "relatedness",
  "understandability",
  "usefulness",
  "accuracy",
  "completeness",
] as const;
export type LikertDimension = (typeof LIKERT_DIMENSIONS)[number];

export const BINARY_CRITERIA = [
  "relatedness",
  "usefulness",
  "understandability",
  "accuracy",
  "completeness",
] as const;
export type BinaryCriterion = (typeof BINARY_CRITERIA)[number];

export const INTENT_CATEGORIES = [
  "functionality",
  "explanation",
  "purpose",
  "property",
  "workflow",
  "example usage",
  "programming concepts",
  "relationship",
  "referencing",
  "reasoning",
  "best practices",
  "knowledge recall",
  "other",
] as const;
export type IntentCategory = (typeof INTENT_CATEGORIES)[number];

export const INTERROGATIVES = [
  "how",
  "what",
  "explain",
  "why",
  "where",
  "describe",
  "which",
  "when",
  "whom",
  "who",
] as const;
export type Interrogative = (typeof INTERROGATIVES)[number];

export type TaskKind = "qa_quality" | "system_comparison";

/** Payload of a QA-quality review task. */
export interface QaPayload {
  question: string;
  answer: string;
  pair_id?: string;
}

/** Payload of a blinded comparison task: answers keyed by neutral label only. */
export interface ComparisonPayload {
  question: string;
  answers: Record<AnswerLabel, string>;
}

export interface TaskView {
  item_id: string;
  kind: TaskKind;
  payload: QaPayload | ComparisonPayload;
  remaining?: number;
}

export interface NextTaskResponse {
  task: TaskView | null;
  remaining: number;
}

/** Body of POST /v1/ratings. */
export interface RatingBody {
  item_id: string;
  evaluator_id: string;
  kind: TaskKind;
  binary?: Record<string, number>;
  likert?: Record<string, Record<string, number>>;
  preference?: Preference;
  intent_category?: string;
  intent_interrogative?: string;
  unclear?: boolean;
}

export interface SubmitResponse {
  status: string;
  item_id: string;
  remaining: number;
}

export function isComparisonPayload(
  kind: TaskKind,
  payload: TaskView["payload"],
): payload is ComparisonPayload {
  return kind === "system_comparison" && "answers" in payload;
}
