import { describe, expect, it } from "vitest";

import {
  ComparisonFormState,
  QaFormState,
  initialFormState,
  isComplete,
  missingFields,
  setLikert,
  toRatingBody,
} from "../src/form.js";
import { BINARY_CRITERIA, COMPARISON_LABELS, LIKERT_DIMENSIONS, TaskView } from "../src/types.js";

const qaTask: TaskView = {
  item_id: "qa-001",
  kind: "qa_quality",
  payload: { question: "what is q?", answer: "it is a.", pair_id: "p1" },
};

const cmpTask: TaskView = {
  item_id: "cmp-001",
  kind: "system_comparison",
  payload: { question: "compare?", answers: { A: "one", B: "two", C: "three" } },
};

function filledQa(): QaFormState {
  const state = initialFormState(qaTask) as QaFormState;
  for (const criterion of BINARY_CRITERIA) state.binary[criterion] = 1;
  state.intentCategory = "functionality";
  state.intentInterrogative = "how";
  return state;
}

function filledComparison(): ComparisonFormState {
  const state = initialFormState(cmpTask) as ComparisonFormState;
  state.preference = "A";
  for (const label of COMPARISON_LABELS) {
    for (const dimension of LIKERT_DIMENSIONS) {
      setLikert(state, label, dimension, 3);
    }
  }
  return state;
}

describe("missingFields", () => {
  it("blocks an empty qa form", () => {
    const state = initialFormState(qaTask);
    expect(isComplete(state)).toBe(false);
    expect(missingFields(state)).toContain("criterion:relatedness");
    expect(missingFields(state)).toContain("intent:category");
  });

  it("blocks a comparison form until every cell and the preference are set", () => {
    const state = initialFormState(cmpTask) as ComparisonFormState;
    expect(missingFields(state)).toContain("preference");
    expect(missingFields(state)).toContain("likert:C:completeness");
    const filled = filledComparison();
    expect(missingFields(filled)).toEqual([]);
    expect(isComplete(filled)).toBe(true);
  });

  it("accepts a fully filled qa form", () => {
    expect(isComplete(filledQa())).toBe(true);
  });
});

describe("setLikert", () => {
  it("rejects out-of-range values", () => {
    const state = initialFormState(cmpTask) as ComparisonFormState;
    expect(setLikert(state, "A", "accuracy", 6)).toBe(false);
    expect(setLikert(state, "A", "accuracy", 0)).toBe(false);
    expect(setLikert(state, "A", "accuracy", 2.5)).toBe(false);
    expect(state.likert.A.accuracy).toBeUndefined();
  });

  it("rejects unknown dimensions", () => {
    const state = initialFormState(cmpTask) as ComparisonFormState;
    expect(setLikert(state, "A", "speed", 3)).toBe(false);
  });

  it("accepts the legal range", () => {
    const state = initialFormState(cmpTask) as ComparisonFormState;
    for (const value of [1, 2, 3, 4, 5]) {
      expect(setLikert(state, "B", "usefulness", value)).toBe(true);
    }
    expect(state.likert.B.usefulness).toBe(5);
  });
});

describe("toRatingBody", () => {
  it("serializes a qa rating with intent", () => {
    const body = toRatingBody(filledQa(), "qa-001", "alice");
    expect(body).toEqual({
      item_id: "qa-001",
      evaluator_id: "alice",
      kind: "qa_quality",
      binary: {
        relatedness: 1,
        usefulness: 1,
        understandability: 1,
        accuracy: 1,
        completeness: 1,
      },
      intent_category: "functionality",
      intent_interrogative: "how",
      unclear: false,
    });
  });

  it("serializes a comparison rating with all labels", () => {
    const body = toRatingBody(filledComparison(), "cmp-001", "bob");
    expect(body.kind).toBe("system_comparison");
    expect(body.preference).toBe("A");
    expect(Object.keys(body.likert ?? {})).toEqual(["A", "B", "C"]);
    expect(body.likert?.C?.completeness).toBe(3);
  });
});
