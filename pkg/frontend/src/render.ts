/** DOM rendering for the seven question types and the session chrome. */

import type { PublicQuestion } from "./api.js";
import { ResponseFormState, normalizeClick } from "./responses.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function radioList(
  name: string,
  labels: string[],
  onPick: (index: number) => void,
): HTMLElement {
  const list = el("div", "options");
  labels.forEach((label, index) => {
    const row = el("label", "option-row");
    const input = document.createElement("input");
    input.type = "radio";
    input.name = name;
    input.addEventListener("change", () => onPick(index));
    row.append(input, document.createTextNode(" " + label));
    list.append(row);
  });
  return list;
}

export function renderQuestion(
  question: PublicQuestion,
  state: ResponseFormState,
  onChanged: () => void,
): HTMLElement {
  const root = el("div", "question");
  root.append(el("p", "stem", question.stem));

  switch (question.type) {
    case "true_false":
      root.append(
        radioList("tf", ["True", "False"], (index) => {
          state.selectedIndex = index;
          onChanged();
        }),
      );
      break;
    case "multiple_choice":
      root.append(
        radioList("mc", question.options ?? [], (index) => {
          state.selectedIndex = index;
          onChanged();
        }),
      );
      break;
    case "multiple_response": {
      const list = el("div", "options");
      (question.options ?? []).forEach((label, index) => {
        const row = el("label", "option-row");
        const input = document.createElement("input");
        input.type = "checkbox";
        input.addEventListener("change", () => {
          if (input.checked) state.selectedSet.add(index);
          else state.selectedSet.delete(index);
          onChanged();
        });
        row.append(input, document.createTextNode(" " + label));
        list.append(row);
      });
      root.append(list);
      break;
    }
    case "fill_in_blank":
    case "numeric_range": {
      const input = document.createElement("input");
      input.type = "text";
      input.className = "text-answer";
      input.placeholder = question.type === "numeric_range" ? "number" : "answer";
      input.addEventListener("input", () => {
        state.text = input.value;
        onChanged();
      });
      root.append(input);
      break;
    }
    case "matching": {
      const table = el("div", "matching");
      const rights = question.rights ?? [];
      for (const left of question.lefts ?? []) {
        const row = el("div", "match-row");
        row.append(el("span", "match-left", left + " "));
        const select = document.createElement("select");
        const empty = document.createElement("option");
        empty.value = "";
        empty.textContent = "choose";
        select.append(empty);
        for (const right of rights) {
          const option = document.createElement("option");
          option.value = right;
          option.textContent = right;
          select.append(option);
        }
        select.addEventListener("change", () => {
          if (select.value) state.matches.set(left, select.value);
          else state.matches.delete(left);
          onChanged();
        });
        row.append(select);
        table.append(row);
      }
      root.append(table);
      break;
    }
    case "hotspot": {
      const wrapper = el("div", "hotspot");
      const img = document.createElement("img");
      img.src = question.image_ref ?? "";
      img.alt = "click the target region";
      const marker = el("div", "hotspot-marker");
      marker.style.display = "none";
      img.addEventListener("click", (event) => {
        const rect = img.getBoundingClientRect();
        state.point = normalizeClick(
          event.clientX - rect.left,
          event.clientY - rect.top,
          rect.width,
          rect.height,
        );
        marker.style.display = "block";
        marker.style.left = `${state.point.x * 100}%`;
        marker.style.top = `${state.point.y * 100}%`;
        onChanged();
      });
      wrapper.append(img, marker);
      root.append(wrapper);
      break;
    }
    default:
      root.append(el("div", "error-panel", `unsupported question type: ${question.type}`));
  }
  return root;
}

export interface FeedbackScreenElements {
  root: HTMLElement;
  continueButton: HTMLButtonElement;
  remainingLabel: HTMLElement;
  errorLabel: HTMLElement;
}

export function renderFeedbackScreen(
  result: "correct" | "incorrect",
  feedbackText: string | null,
): FeedbackScreenElements {
  const root = el("div", "feedback-screen locked");
  const banner = el(
    "div",
    result === "correct" ? "banner banner-correct" : "banner banner-incorrect",
    result === "correct" ? "Correct" : "Incorrect",
  );
  root.append(banner);
  if (feedbackText) {
    root.append(el("div", "feedback-text", feedbackText));
  }
  const remainingLabel = el("div", "lock-remaining");
  const errorLabel = el("div", "lock-error");
  const continueButton = document.createElement("button");
  continueButton.className = "continue";
  continueButton.textContent = "Continue";
  continueButton.disabled = true;
  root.append(remainingLabel, errorLabel, continueButton);
  return { root, continueButton, remainingLabel, errorLabel };
}
