/** Application bootstrap: session flow wiring against the live service. */

import { ApiClient, isApiError, type SessionView } from "./api.js";
import { CountdownModel } from "./countdown.js";
import { LockScreenController, type ContinueControl } from "./lock.js";
import { renderFeedbackScreen, renderQuestion } from "./render.js";
import { ResponseFormState } from "./responses.js";

const api = new ApiClient((url, init) => fetch(url, init));
const app = document.getElementById("app")!;

let activeSessionId: string | null = null;
let lockController: LockScreenController | null = null;
let countdown: CountdownModel | null = null;
let submitting = false;

// While a feedback screen is locked, swallow keyboard shortcuts so nothing
// can drive the page past it; the controller is the only way forward.
document.addEventListener(
  "keydown",
  (event) => {
    if (lockController && !lockController.hasPassed()) {
      event.preventDefault();
      event.stopPropagation();
    }
  },
  true,
);

window.setInterval(() => {
  lockController?.tick(1);
  countdown?.tick(1);
}, 1000);

function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

async function showLobby(): Promise<void> {
  clear(app);
  const heading = document.createElement("h1");
  heading.textContent = "Quizzes";
  app.append(heading);
  const quizzes = await api.listQuizzes();
  const form = document.createElement("div");
  form.className = "lobby";
  const student = document.createElement("input");
  student.placeholder = "student id";
  form.append(student);
  for (const quiz of quizzes) {
    const button = document.createElement("button");
    button.textContent = `${quiz.code} — ${quiz.subject} / ${quiz.topic} (${quiz.category}, ${quiz.mode})`;
    button.addEventListener("click", async () => {
      if (!student.value) {
        student.focus();
        return;
      }
      const view = await api.createSession(quiz.code, student.value, quiz.mode);
      activeSessionId = view.session_id;
      renderView(view);
    });
    form.append(button);
  }
  app.append(form);
}

function renderView(view: SessionView): void {
  clear(app);
  lockController = null;

  const header = document.createElement("div");
  header.className = "session-header";
  header.textContent = `${view.quiz_code} — ${view.progress.answered}/${view.progress.total}`;
  app.append(header);

  if (view.mode === "CET" && view.phase !== "finished") {
    const clock = document.createElement("div");
    clock.className = "countdown";
    countdown = new CountdownModel(view.deadline_remaining_seconds ?? 0);
    const repaint = () => (clock.textContent = countdown!.display());
    countdown.onExpired(() => {
      void refresh(); // the server decides; fetch the recorded outcome
    });
    window.setInterval(repaint, 500);
    repaint();
    app.append(clock);
  } else {
    countdown = null;
  }

  if (view.phase === "finished") {
    const done = document.createElement("div");
    done.className = "finished";
    done.textContent =
      view.finished_reason === "deadline_expired"
        ? `Time is up. Recorded score: ${view.percentage}%`
        : `Finished. Score: ${view.percentage}%`;
    app.append(done);
    return;
  }

  if (view.phase === "feedback_locked" && view.feedback) {
    const screen = renderFeedbackScreen(view.feedback.result, view.feedback.feedback_text);
    const control: ContinueControl = {
      setDisabled: (disabled) => (screen.continueButton.disabled = disabled),
      setRemaining: (seconds) =>
        (screen.remainingLabel.textContent =
          seconds > 0 ? `locked for another ${Math.ceil(seconds)}s` : "you may continue"),
      showError: (message) => (screen.errorLabel.textContent = message),
    };
    const controller = new LockScreenController(
      api,
      view.session_id,
      view.lock_remaining_seconds ?? 0,
      control,
    );
    lockController = controller;
    screen.continueButton.addEventListener("click", async () => {
      const passed = await controller.requestContinue();
      if (passed) {
        lockController = null;
        renderView(controller.viewAfterPass()!);
      }
    });
    app.append(screen.root);
    return;
  }

  if (!view.question) return;
  const state = new ResponseFormState(view.question);
  const submit = document.createElement("button");
  submit.className = "submit";
  submit.textContent = "Submit answer";
  submit.disabled = true;
  const body = renderQuestion(view.question, state, () => {
    submit.disabled = state.payload() === null || submitting;
  });
  submit.addEventListener("click", async () => {
    const payload = state.payload();
    if (payload === null || submitting) return;
    submitting = true;
    submit.disabled = true;
    try {
      const result = await api.answer(view.session_id, payload);
      if (countdown && result.view.deadline_remaining_seconds !== undefined) {
        countdown.resync(result.view.deadline_remaining_seconds);
      }
      renderView(result.view);
    } catch (err) {
      if (isApiError(err) && err.status === 410) {
        await refresh();
      } else {
        submit.disabled = false;
        alert(isApiError(err) ? err.message : "network error");
      }
    } finally {
      submitting = false;
    }
  });
  app.append(body, submit);
}

async function refresh(): Promise<void> {
  if (!activeSessionId) return;
  renderView(await api.getSession(activeSessionId));
}

void showLobby();
