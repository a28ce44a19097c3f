/** Browser entry point: wires the API client, batch store, and panels.
 *
 * One mutating request at a time: controls are disabled while a call is in
 * flight, and server rejections surface as banners without losing local
 * input.
 */

import { ApiClient, ApiError } from "./api.js";
import { BatchStore } from "./store.js";
import type { Label, SessionSummary } from "./types.js";
import {
  renderAnnotationHistory,
  renderBanner,
  renderBatch,
  renderMetricsChart,
  renderMetricsTable,
  renderZeroState,
} from "./views.js";

interface AppState {
  client: ApiClient;
  sessionId: string | null;
  summary: SessionSummary | null;
  batch: BatchStore | null;
  busy: boolean;
  banner: { kind: "error" | "info"; message: string } | null;
}

const state: AppState = {
  client: new ApiClient(resolveBaseUrl()),
  sessionId: null,
  summary: null,
  batch: null,
  busy: false,
  banner: null,
};

function resolveBaseUrl(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? window.location.origin;
}

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function setBanner(kind: "error" | "info", message: string): void {
  state.banner = { kind, message };
  element("banner-slot").innerHTML = renderBanner(kind, message);
}

function clearBanner(): void {
  state.banner = null;
  element("banner-slot").innerHTML = "";
}

async function guarded(action: () => Promise<void>): Promise<void> {
  if (state.busy) return;
  state.busy = true;
  document.body.classList.add("busy");
  try {
    clearBanner();
    await action();
  } catch (error) {
    if (error instanceof ApiError) {
      setBanner("error", `[${error.code}] ${error.message}`);
    } else {
      setBanner("error", String(error));
    }
  } finally {
    state.busy = false;
    document.body.classList.remove("busy");
    renderAll();
  }
}

async function refreshSession(): Promise<void> {
  if (!state.sessionId) return;
  state.summary = await state.client.summary(state.sessionId);
  const history = await state.client.history(state.sessionId);
  element("metrics-table").innerHTML = renderMetricsTable(history.evaluations);
  element("metrics-chart").innerHTML = renderMetricsChart(history.evaluations);
  element("annotation-history").innerHTML = renderAnnotationHistory(history.annotations);
  const prompt = await state.client.prompt(state.sessionId);
  element("prompt-preview").textContent = prompt.prompt;
  element("session-status").textContent =
    `session ${state.summary.session_id} · iteration ${state.summary.iteration} · ` +
    `phase ${state.summary.phase} · ${state.summary.demonstration_count} demonstration(s)`;
}

function renderAll(): void {
  const slot = element("batch-slot");
  if (state.batch) {
    slot.innerHTML = renderBatch(state.batch);
  } else if (state.summary) {
    slot.innerHTML = renderZeroState();
  } else {
    slot.innerHTML = "";
  }
  const hasSession = state.sessionId !== null;
  element<HTMLButtonElement>("next-iteration").disabled = !hasSession || state.batch !== null;
  element<HTMLButtonElement>("run-evaluation").disabled = !hasSession;
}

async function connect(): Promise<void> {
  const sessionId = element<HTMLInputElement>("session-id-input").value.trim();
  if (!sessionId) throw new ApiError("validation", "enter a session id", 0);
  state.sessionId = sessionId;
  state.batch = null;
  await refreshSession();
  const summary = state.summary;
  if (summary && summary.phase === "awaiting_annotation") {
    setBanner("info", "a batch is already awaiting annotation; run the iteration view again");
  }
}

async function nextIteration(): Promise<void> {
  if (!state.sessionId) return;
  const response = await state.client.iterate(state.sessionId);
  state.batch = new BatchStore(response.pending, response.iteration, response.require_explanation);
  await refreshSession();
}

async function submitBatch(): Promise<void> {
  if (!state.sessionId || !state.batch || !state.batch.canSubmit()) return;
  state.batch.submitting = true;
  renderAll();
  try {
    await state.client.submitAnnotations(state.sessionId, state.batch.buildSubmissions());
    state.batch = null;
    setBanner("info", "batch recorded — run evaluation or start the next iteration");
  } finally {
    if (state.batch) state.batch.submitting = false;
  }
  await refreshSession();
}

async function runEvaluation(): Promise<void> {
  if (!state.sessionId) return;
  const report = await state.client.evaluate(state.sessionId);
  setBanner("info", `evaluated iteration ${report.iteration}: f1 ${report.f1}`);
  await refreshSession();
}

function bindEvents(): void {
  element("connect").addEventListener("click", () => void guarded(connect));
  element("next-iteration").addEventListener("click", () => void guarded(nextIteration));
  element("run-evaluation").addEventListener("click", () => void guarded(runEvaluation));

  const slot = element("batch-slot");
  slot.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.id === "submit-batch") {
      void guarded(submitBatch);
      return;
    }
    const label = target.dataset.label;
    const pairId = target.dataset.pair;
    if (label !== undefined && pairId && state.batch) {
      state.batch.setLabel(pairId, Number(label) as Label);
      const card = target.closest<HTMLElement>("[data-index]");
      if (card) state.batch.focusIndex = Number(card.dataset.index);
      renderAll();
    }
  });
  slot.addEventListener("input", (event) => {
    const target = event.target as HTMLTextAreaElement;
    const pairId = target.dataset.explanation;
    if (pairId && state.batch) {
      state.batch.setExplanation(pairId, target.value);
      // update completeness marker without re-rendering (keeps the caret)
      const card = target.closest<HTMLElement>("[data-card]");
      const stateTag = card?.querySelector(".card-state");
      if (card && stateTag && state.batch) {
        const complete = state.batch.cardComplete(state.batch.card(pairId));
        stateTag.textContent = complete ? "ready" : "needs input";
        stateTag.classList.toggle("done", complete);
      }
      const submit = document.getElementById("submit-batch") as HTMLButtonElement | null;
      if (submit) submit.disabled = !state.batch.canSubmit();
    }
  });

  document.addEventListener("keydown", (event) => {
    if (!state.batch || event.target instanceof HTMLTextAreaElement) return;
    if (event.target instanceof HTMLInputElement) return;
    if (event.key === "1" || event.key === "0") {
      state.batch.labelFocused(Number(event.key) as Label);
      renderAll();
    } else if (event.key === "ArrowDown" || event.key === "ArrowRight") {
      state.batch.focusNext();
      renderAll();
    } else if (event.key === "ArrowUp" || event.key === "ArrowLeft") {
      state.batch.focusPrevious();
      renderAll();
    }
  });
}

document.addEventListener("DOMContentLoaded", () => {
  bindEvents();
  renderAll();
});
