// Typed client for the session service. Every number the UI shows
// comes out of these payloads; the client never computes probabilities.

export interface ModelSummary {
  id: string;
  name: string;
  skill_count: number;
  gate_count: number;
}

export interface Posterior {
  skill: string;
  name: string;
  posterior_true: number;
  absorbed_count: number;
  joint_count: number;
}

export interface HistoryEntry {
  gate_id: string;
  answer: string;
  timestamp: string;
}

export interface SessionView {
  session_id: string;
  model_id: string;
  status: "active" | "finished";
  posteriors: Posterior[];
  history: HistoryEntry[];
  answered_count: number;
  total_gates: number;
  suggested_next_question: string | null;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(describeDetail(status, detail));
    this.name = "ApiError";
  }
}

function describeDetail(status: number, detail: unknown): string {
  if (typeof detail === "string") return detail;
  if (detail && typeof detail === "object" && "error" in detail) {
    return String((detail as { error: unknown }).error);
  }
  return `request failed with status ${status}`;
}

async function request<T>(
  apiBase: string,
  path: string,
  init?: RequestInit,
): Promise<T> {
  const response = await fetch(apiBase + path, init);
  if (!response.ok) {
    let detail: unknown = response.statusText;
    try {
      detail = ((await response.json()) as { detail?: unknown }).detail ?? detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export async function listModels(apiBase: string): Promise<ModelSummary[]> {
  const payload = await request<{ models: ModelSummary[] }>(apiBase, "/models");
  return payload.models;
}

export function createSession(
  apiBase: string,
  modelId: string,
): Promise<SessionView> {
  return request<SessionView>(apiBase, "/sessions", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ model_id: modelId }),
  });
}

export function getSession(
  apiBase: string,
  sessionId: string,
): Promise<SessionView> {
  return request<SessionView>(apiBase, `/sessions/${sessionId}`);
}

export function postAnswer(
  apiBase: string,
  sessionId: string,
  gateId: string,
  answer: "yes" | "no",
): Promise<SessionView> {
  return request<SessionView>(apiBase, `/sessions/${sessionId}/answers`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ gate_id: gateId, answer }),
  });
}
