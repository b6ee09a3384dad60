/**
 * HTTP client for the quiz service, plus the disclosure guard.
 *
 * Every payload that comes back from the server passes through
 * `assertSafeView` before any other code sees it: if the server ever leaked
 * answer keys, weights, or feedback for unanswered questions, the client
 * refuses the payload outright instead of caching it.
 */

export interface PublicQuestion {
  id: string;
  type:
    | "true_false"
    | "multiple_choice"
    | "multiple_response"
    | "fill_in_blank"
    | "matching"
    | "numeric_range"
    | "hotspot";
  stem: string;
  options?: string[];
  lefts?: string[];
  rights?: string[];
  image_ref?: string;
}

export interface FeedbackPanel {
  result: "correct" | "incorrect";
  feedback_text: string | null;
}

export interface SessionView {
  session_id: string;
  phase: "presenting" | "feedback_locked" | "finished";
  quiz_code: string;
  mode: "CPT" | "CET";
  category: "QC1" | "QC2" | "QC3";
  progress: { answered: number; total: number };
  question: PublicQuestion | null;
  lock_remaining_seconds?: number;
  deadline_remaining_seconds?: number;
  feedback?: FeedbackPanel;
  percentage?: number;
  finished_reason?: "completed" | "deadline_expired";
}

export interface AnswerResult {
  view: SessionView;
  result?: "correct" | "incorrect";
  feedback_text?: string | null;
}

export interface QuizInfo {
  code: string;
  subject: string;
  topic: string;
  category: string;
  mode: string;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
  details?: Record<string, unknown>;
}

export type ResponsePayload =
  | boolean
  | number
  | string
  | number[]
  | Record<string, string>
  | { x: number; y: number };

/** Field names that must never reach the client while a question is open. */
const FORBIDDEN_KEYS = [
  "is_correct",
  "weight",
  "weight_percent",
  "weights",
  "detailed_feedback",
  "short_feedback",
  "correct",
  "spec",
  "regions",
  "accepted",
  "intervals",
  "pairs",
  "credit",
  "feedback_wrong",
  "feedback_right",
];

/** Keys that legitimately carry feedback for an *answered* question. */
const ALLOWED_FEEDBACK_KEYS = new Set(["feedback", "feedback_text", "result"]);

export class DisclosureError extends Error {
  constructor(public readonly key: string) {
    super(`server payload leaked a forbidden field: ${key}`);
  }
}

function walk(value: unknown, visit: (key: string) => void): void {
  if (Array.isArray(value)) {
    for (const item of value) walk(item, visit);
  } else if (value !== null && typeof value === "object") {
    for (const [key, item] of Object.entries(value as Record<string, unknown>)) {
      visit(key);
      walk(item, visit);
    }
  }
}

/**
 * Reject any payload carrying answer-key material. When `allowFeedback` is
 * false (evaluation mode), keys naming feedback at all are rejected too.
 */
export function assertSafeView(payload: unknown, allowFeedback = true): void {
  walk(payload, (key) => {
    if (FORBIDDEN_KEYS.includes(key)) {
      throw new DisclosureError(key);
    }
    if (!allowFeedback && ALLOWED_FEEDBACK_KEYS.has(key)) {
      throw new DisclosureError(key);
    }
  });
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

async function decode(response: { status: number; json(): Promise<unknown> }): Promise<unknown> {
  const body = await response.json().catch(() => ({}));
  if (response.status >= 400) {
    const err = (body ?? {}) as Record<string, unknown>;
    throw <ApiError>{
      status: response.status,
      code: typeof err.code === "string" ? err.code : "error",
      message: typeof err.message === "string" ? err.message : `HTTP ${response.status}`,
      details: (err.details as Record<string, unknown>) ?? undefined,
    };
  }
  return body;
}

export function isApiError(value: unknown): value is ApiError {
  return (
    typeof value === "object" &&
    value !== null &&
    typeof (value as ApiError).status === "number" &&
    typeof (value as ApiError).code === "string"
  );
}

export class ApiClient {
  /** True while the session runs in evaluation mode: no feedback may appear. */
  private strictMode = false;

  constructor(private readonly fetchImpl: FetchLike, private readonly base = "") {}

  setStrict(strict: boolean): void {
    this.strictMode = strict;
  }

  private guard<T>(payload: unknown): T {
    assertSafeView(payload, !this.strictMode);
    return payload as T;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.base + path);
    return this.guard<T>(await decode(response));
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === undefined ? "{}" : JSON.stringify(body),
    });
    return this.guard<T>(await decode(response));
  }

  listQuizzes(): Promise<QuizInfo[]> {
    return this.get<QuizInfo[]>("/api/quizzes");
  }

  async createSession(quizCode: string, studentId: string, mode: string): Promise<SessionView> {
    const view = await this.post<SessionView>("/api/sessions", {
      quiz_code: quizCode,
      student_id: studentId,
      mode,
    });
    this.setStrict(view.mode === "CET");
    return view;
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.get<SessionView>(`/api/sessions/${sessionId}`);
  }

  answer(sessionId: string, response: ResponsePayload): Promise<AnswerResult> {
    return this.post<AnswerResult>(`/api/sessions/${sessionId}/answer`, { response });
  }

  acknowledge(sessionId: string): Promise<SessionView> {
    return this.post<SessionView>(`/api/sessions/${sessionId}/ack`);
  }
}
