/** Pure helpers that turn form state into API response payloads. */

import type { PublicQuestion, ResponsePayload } from "./api.js";

/** Map a click inside the rendered image to normalized [0,1]^2 coordinates. */
export function normalizeClick(
  offsetX: number,
  offsetY: number,
  width: number,
  height: number,
): { x: number; y: number } {
  const clamp = (v: number) => Math.min(1, Math.max(0, v));
  return { x: clamp(offsetX / width), y: clamp(offsetY / height) };
}

export class ResponseFormState {
  selectedIndex: number | null = null;
  selectedSet = new Set<number>();
  text = "";
  matches = new Map<string, string>();
  point: { x: number; y: number } | null = null;

  constructor(private readonly question: PublicQuestion) {}

  /** The payload to submit, or null while the form is incomplete. */
  payload(): ResponsePayload | null {
    switch (this.question.type) {
      case "true_false":
        if (this.selectedIndex === null) return null;
        return this.selectedIndex === 0;
      case "multiple_choice":
        return this.selectedIndex;
      case "multiple_response":
        return [...this.selectedSet].sort((a, b) => a - b);
      case "fill_in_blank":
        return this.text;
      case "numeric_range":
        return this.text.trim() === "" ? null : this.text.trim();
      case "matching": {
        const lefts = this.question.lefts ?? [];
        if (lefts.some((left) => !this.matches.has(left))) return null;
        const mapping: Record<string, string> = {};
        for (const left of lefts) mapping[left] = this.matches.get(left)!;
        return mapping;
      }
      case "hotspot":
        return this.point;
      default:
        return null;
    }
  }
}
