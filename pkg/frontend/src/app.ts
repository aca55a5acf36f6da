// Application wiring: one active session per tab, every render driven
// by the latest service response (no optimistic updates), errors shown
// inline with a retry that re-runs the failed request.

import {
  createSession,
  getSession,
  listModels,
  postAnswer,
  type ModelSummary,
  type SessionView,
} from "./api.js";
import {
  renderError,
  renderHistory,
  renderModelPicker,
  renderPosteriors,
  renderQuestion,
  type PromptMap,
} from "./view.js";

interface AppState {
  apiBase: string;
  prompts: PromptMap;
  models: ModelSummary[];
  session: SessionView | null;
  // Server responses observed in this tab, for review-flow deltas.
  snapshots: SessionView[];
  showReview: boolean;
}

function apiBaseFromLocation(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  if (override) return override.replace(/\/$/, "");
  // Served by the session service itself (under /ui) the API is
  // same-origin; a separate static host needs ?api=http://host:port.
  return window.location.origin;
}

async function loadPrompts(): Promise<PromptMap> {
  try {
    const response = await fetch("prompts.json");
    if (!response.ok) return {};
    return (await response.json()) as PromptMap;
  } catch {
    return {};
  }
}

function boot(root: HTMLElement): void {
  const state: AppState = {
    apiBase: apiBaseFromLocation(),
    prompts: {},
    models: [],
    session: null,
    snapshots: [],
    showReview: false,
  };

  const errorSlot = document.createElement("div");
  errorSlot.className = "error-slot";
  const content = document.createElement("div");
  content.className = "content";
  root.appendChild(errorSlot);
  root.appendChild(content);

  function showError(error: unknown, retry: () => void): void {
    const message = error instanceof Error ? error.message : String(error);
    errorSlot.replaceChildren(renderError(message, () => {
      errorSlot.replaceChildren();
      retry();
    }));
  }

  function run(action: () => Promise<void>): void {
    errorSlot.replaceChildren();
    action().catch((error) => showError(error, () => run(action)));
  }

  function absorb(view: SessionView): void {
    state.session = view;
    state.snapshots.push(view);
    render();
  }

  function render(): void {
    const view = state.session;
    if (view === null) {
      content.replaceChildren(
        renderModelPicker(state.models, (modelId) =>
          run(async () => absorb(
            await createSession(state.apiBase, modelId)))));
      return;
    }
    const pieces: HTMLElement[] = [];
    const header = document.createElement("header");
    header.className = "session-header";
    const title = document.createElement("h1");
    title.textContent = view.model_id;
    header.appendChild(title);
    const toggle = document.createElement("button");
    toggle.className = "review-toggle";
    toggle.textContent = state.showReview ? "back to questions" : "review";
    toggle.addEventListener("click", () => {
      state.showReview = !state.showReview;
      run(async () => absorb(
        await getSession(state.apiBase, view.session_id)));
    });
    header.appendChild(toggle);
    pieces.push(header);
    pieces.push(renderPosteriors(view));
    if (state.showReview) {
      pieces.push(renderHistory(view, state.snapshots));
    } else {
      pieces.push(renderQuestion(view, state.prompts, (gateId, answer) =>
        run(async () => absorb(
          await postAnswer(state.apiBase, view.session_id, gateId, answer)))));
    }
    content.replaceChildren(...pieces);
  }

  run(async () => {
    state.prompts = await loadPrompts();
    state.models = await listModels(state.apiBase);
    render();
  });
}

const root = document.getElementById("app");
if (root !== null) {
  boot(root);
}
