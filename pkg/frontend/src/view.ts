// DOM builders. Pure functions from service payloads to elements: the
// numbers on screen are the payload numbers verbatim (String(value), no
// rounding, no recomputation), which is what the contract test checks.

import type { ModelSummary, Posterior, SessionView } from "./api.js";

export type PromptMap = Record<string, string>;

export function formatValue(value: number): string {
  return String(value);
}

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

export function renderModelPicker(
  models: ModelSummary[],
  onPick: (modelId: string) => void,
): HTMLElement {
  const panel = el("section", "model-picker");
  panel.appendChild(el("h2", undefined, "Start a session"));
  const list = el("ul", "model-list");
  for (const model of models) {
    const item = el("li", "model-item");
    const button = el("button", "model-pick");
    button.textContent = model.name || model.id;
    button.dataset.modelId = model.id;
    button.addEventListener("click", () => onPick(model.id));
    item.appendChild(button);
    item.appendChild(
      el("span", "model-meta",
         `${model.skill_count} skills, ${model.gate_count} questions`));
    list.appendChild(item);
  }
  panel.appendChild(list);
  return panel;
}

export function renderPosteriors(view: SessionView): HTMLElement {
  const panel = el("section", "posteriors");
  panel.appendChild(el("h2", undefined, "Skills"));
  for (const posterior of view.posteriors) {
    panel.appendChild(renderPosteriorRow(posterior));
  }
  return panel;
}

function renderPosteriorRow(posterior: Posterior): HTMLElement {
  const row = el("div", "posterior-row");
  row.dataset.skill = posterior.skill;
  row.appendChild(el("span", "skill-name", posterior.name || posterior.skill));
  const track = el("div", "bar-track");
  const fill = el("div", "bar-fill");
  fill.style.width = `${posterior.posterior_true * 100}%`;
  track.appendChild(fill);
  track.title =
    `evidence: ${posterior.absorbed_count} absorbed, ` +
    `${posterior.joint_count} jointly conditioned`;
  row.appendChild(track);
  const value = el("span", "bar-value", formatValue(posterior.posterior_true));
  value.dataset.value = formatValue(posterior.posterior_true);
  row.appendChild(value);
  return row;
}

export function renderQuestion(
  view: SessionView,
  prompts: PromptMap,
  onAnswer: (gateId: string, answer: "yes" | "no") => void,
): HTMLElement {
  const panel = el("section", "question");
  panel.appendChild(
    el("p", "progress",
       `${view.answered_count} / ${view.total_gates} answered`));
  if (view.status === "finished" || view.suggested_next_question === null) {
    panel.appendChild(el("p", "finished", "All questions answered."));
    return panel;
  }
  const gateId = view.suggested_next_question;
  const prompt = prompts[gateId];
  // Models carry no prompt text of their own; the gate id is the
  // canonical fallback so the learner always sees which question is up.
  panel.appendChild(el("p", "question-prompt", prompt ?? gateId));
  if (prompt !== undefined) {
    panel.appendChild(el("p", "question-gate", gateId));
  }
  const buttons = el("div", "answer-buttons");
  for (const answer of ["yes", "no"] as const) {
    const button = el("button", `answer-${answer}`, answer);
    button.addEventListener("click", () => onAnswer(gateId, answer));
    buttons.appendChild(button);
  }
  panel.appendChild(buttons);
  return panel;
}

// The review timeline shows, under each answer, how much each skill bar
// moved. Deltas are differences of two server-reported posteriors from
// the snapshots collected in this tab; answers recorded before the tab
// attached (a resumed session) show no delta rather than a made-up one.
export function renderHistory(
  view: SessionView,
  snapshots: SessionView[],
): HTMLElement {
  const panel = el("section", "review");
  panel.appendChild(el("h2", undefined, "Review"));
  const timeline = el("ol", "timeline");
  for (const [index, entry] of view.history.entries()) {
    const item = el("li", "history-item");
    item.dataset.gateId = entry.gate_id;
    item.appendChild(el("span", "history-gate", entry.gate_id));
    item.appendChild(el("span", "history-answer", entry.answer));
    item.appendChild(el("span", "history-time", entry.timestamp));
    const deltas = historyDeltas(index, snapshots);
    if (deltas !== null) {
      item.appendChild(deltas);
    }
    timeline.appendChild(item);
  }
  panel.appendChild(timeline);
  return panel;
}

function snapshotAt(
  snapshots: SessionView[],
  answeredCount: number,
): SessionView | undefined {
  return snapshots.find((s) => s.answered_count === answeredCount);
}

function historyDeltas(
  index: number,
  snapshots: SessionView[],
): HTMLElement | null {
  const before = snapshotAt(snapshots, index);
  const after = snapshotAt(snapshots, index + 1);
  if (before === undefined || after === undefined) return null;
  const list = el("ul", "history-deltas");
  for (const [i, posterior] of after.posteriors.entries()) {
    const delta = posterior.posterior_true - before.posteriors[i].posterior_true;
    if (delta === 0) continue;
    const sign = delta > 0 ? "+" : "";
    const item = el(
      "li", "delta",
      `${posterior.name || posterior.skill} ${sign}${delta.toFixed(4)}`);
    item.dataset.skill = posterior.skill;
    item.dataset.delta = String(delta);
    list.appendChild(item);
  }
  return list;
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "error-banner");
  banner.appendChild(el("span", "error-message", message));
  const retry = el("button", "error-retry", "retry");
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}
