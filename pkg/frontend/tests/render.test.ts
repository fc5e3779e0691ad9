import { beforeEach, describe, expect, it } from "vitest";

import { ComparisonFormState, initialFormState } from "../src/form.js";
import { renderDone, renderError, renderTask } from "../src/render.js";
import { TaskView } from "../src/types.js";

const cmpTask: TaskView = {
  item_id: "cmp-9",
  kind: "system_comparison",
  payload: {
    question: "How does dispatch work?",
    answers: { A: "first", B: "second", C: "third" },
  },
  remaining: 3,
};

const qaTask: TaskView = {
  item_id: "qa-9",
  kind: "qa_quality",
  payload: { question: "What is returned?", answer: "A digest." },
  remaining: 1,
};

describe("renderTask", () => {
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<main id="app"></main>';
    container = document.getElementById("app")!;
  });

  it("comparison items show exactly three labeled panels", () => {
    renderTask(container, cmpTask, initialFormState(cmpTask));
    const panels = container.querySelectorAll(".answer-panel");
    expect(panels).toHaveLength(3);
    const titles = [...panels].map((p) => p.querySelector("h3")?.textContent);
    expect(titles).toEqual(["Answer A", "Answer B", "Answer C"]);
  });

  it("shows the remaining count", () => {
    renderTask(container, cmpTask, initialFormState(cmpTask));
    expect(container.querySelector(".remaining")?.textContent).toBe("3 remaining");
  });

  it("submit stays disabled until the form is complete", () => {
    const state = initialFormState(cmpTask) as ComparisonFormState;
    renderTask(container, cmpTask, state);
    expect(container.querySelector("#submit")?.hasAttribute("disabled")).toBe(true);

    state.preference = "A";
    for (const label of ["A", "B", "C"] as const) {
      for (const dimension of [
        "relatedness", "understandability", "usefulness", "accuracy", "completeness",
      ]) {
        state.likert[label][dimension] = 3;
      }
    }
    renderTask(container, cmpTask, state);
    expect(container.querySelector("#submit")?.hasAttribute("disabled")).toBe(false);
  });

  it("qa items render both texts and five criteria rows", () => {
    renderTask(container, qaTask, initialFormState(qaTask));
    expect(container.querySelector(".question")?.textContent).toBe("What is returned?");
    expect(container.querySelector(".answer")?.textContent).toBe("A digest.");
    expect(container.querySelectorAll(".criterion-row")).toHaveLength(5);
  });

  it("escapes markup in payload text", () => {
    const hostile: TaskView = {
      item_id: "qa-x",
      kind: "qa_quality",
      payload: { question: "<img src=x onerror=alert(1)>", answer: "<b>bold</b>" },
    };
    renderTask(container, hostile, initialFormState(hostile));
    expect(container.querySelector("img")).toBeNull();
    expect(container.querySelector("b")).toBeNull();
    expect(container.querySelector(".question")?.textContent).toContain("<img");
  });

  it("done and error screens replace the task", () => {
    renderTask(container, qaTask, initialFormState(qaTask));
    renderDone(container);
    expect(container.querySelector(".done")).not.toBeNull();
    renderError(container, "unknown evaluator");
    expect(container.querySelector(".error-banner")?.textContent).toBe("unknown evaluator");
  });
});
