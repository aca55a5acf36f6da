"""Session service: interactive assessment over HTTP.

Sessions are event-sourced: the store keeps only the answer history, and
every response recomputes posteriors from that history through
:func:`skillgate.inference.infer_posteriors`.  Service numbers are
therefore bit-identical to direct library calls by construction — there
is no cached state to drift.

Storage is a single sqlite database in WAL mode (write-ahead durability,
single-binary deployment).  Mutations are serialized per process; the
unique (session, gate) index makes duplicate answers a conflict even
across processes.
"""

from __future__ import annotations

import datetime
import sqlite3
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict

from .cat import load_cat_model
from .errors import InconsistentEvidenceError, ParseError
from .formats import parse_model
from .inference import Observation, infer_posteriors, suggest_next_question
from .model import AssessmentModel, GateKind

__all__ = ["create_app", "CAT_MODEL_ID"]

CAT_MODEL_ID = "cat"

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY,
    model_id   TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS answers (
    session_id TEXT    NOT NULL REFERENCES sessions(session_id),
    seq        INTEGER NOT NULL,
    gate_id    TEXT    NOT NULL,
    answer     TEXT    NOT NULL,
    created_at TEXT    NOT NULL,
    PRIMARY KEY (session_id, seq),
    UNIQUE (session_id, gate_id)
);
"""


class CreateSessionRequest(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_id: str


class AnswerRequest(BaseModel):
    gate_id: str
    answer: str  # "yes" | "no"


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class _Store:
    """Sqlite-backed session store; all writes behind one lock."""

    def __init__(self, db_path: str):
        self._conn = sqlite3.connect(db_path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA foreign_keys=ON")
        self._conn.executescript(_SCHEMA)
        self._conn.commit()
        self.lock = threading.Lock()

    def create_session(self, model_id: str) -> str:
        session_id = uuid.uuid4().hex
        with self.lock:
            self._conn.execute(
                "INSERT INTO sessions (session_id, model_id, created_at) VALUES (?, ?, ?)",
                (session_id, model_id, _now()))
            self._conn.commit()
        return session_id

    def get_session(self, session_id: str) -> tuple[str, str] | None:
        row = self._conn.execute(
            "SELECT model_id, created_at FROM sessions WHERE session_id = ?",
            (session_id,)).fetchone()
        return None if row is None else (row[0], row[1])

    def history(self, session_id: str) -> list[tuple[str, str, str]]:
        rows = self._conn.execute(
            "SELECT gate_id, answer, created_at FROM answers "
            "WHERE session_id = ? ORDER BY seq", (session_id,)).fetchall()
        return [(r[0], r[1], r[2]) for r in rows]

    def append_answer(self, session_id: str, gate_id: str, answer: str) -> None:
        with self.lock:
            seq = self._conn.execute(
                "SELECT COALESCE(MAX(seq), 0) + 1 FROM answers WHERE session_id = ?",
                (session_id,)).fetchone()[0]
            self._conn.execute(
                "INSERT INTO answers (session_id, seq, gate_id, answer, created_at) "
                "VALUES (?, ?, ?, ?, ?)",
                (session_id, seq, gate_id, answer, _now()))
            self._conn.commit()

    def close(self) -> None:
        self._conn.close()


def _load_models(models_dir: str | Path | None) -> dict[str, AssessmentModel]:
    models: dict[str, AssessmentModel] = {CAT_MODEL_ID: load_cat_model()}
    if models_dir is not None:
        for path in sorted(Path(models_dir).glob("*.json")):
            try:
                models[path.stem] = parse_model(path.read_text(encoding="utf-8"))
            except ParseError as exc:
                raise ParseError(f"model file {path.name}: {exc}", code=exc.code) from None
    return models


def _evidence_from_history(
    model: AssessmentModel, history: list[tuple[str, str, str]]
) -> dict[str, Observation]:
    gates = model.gate_by_id()
    evidence: dict[str, Observation] = {}
    for gate_id, answer, _ts in history:
        kind = gates[gate_id].kind
        correct = answer == "yes"
        if kind is GateKind.AND:
            obs = Observation.DISTINGUISHED if correct else Observation.NON_DISTINGUISHED
        else:
            obs = Observation.NON_DISTINGUISHED if correct else Observation.DISTINGUISHED
        evidence[gate_id] = obs
    return evidence


def create_app(
    models_dir: str | Path | None = None,
    data_dir: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around a models directory and a data directory.

    The bundled study model is always available under the id "cat"; any
    ``*.json`` model documents in ``models_dir`` are loaded under their
    file stems.  ``data_dir`` holds the session database; None keeps
    sessions in memory (useful for tests, not durable).  ``ui_dir``, when
    given, is a built static UI served under /ui.
    """
    models = _load_models(models_dir)
    if data_dir is None:
        db_path = ":memory:"
    else:
        Path(data_dir).mkdir(parents=True, exist_ok=True)
        db_path = str(Path(data_dir) / "sessions.db")
    store = _Store(db_path)

    app = FastAPI(title="skillgate session service")
    app.state.store = store
    app.state.models = models
    # The browser UI may be hosted anywhere (it is a static build), so
    # cross-origin calls are allowed; there is no auth to protect.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    def _model_or_404(model_id: str) -> AssessmentModel:
        if model_id not in models:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}")
        return models[model_id]

    def _session_view(session_id: str) -> dict:
        found = store.get_session(session_id)
        if found is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        model_id, _created = found
        model = models[model_id]
        history = store.history(session_id)
        evidence = _evidence_from_history(model, history)
        try:
            posteriors = infer_posteriors(model, evidence)
        except InconsistentEvidenceError as exc:
            # unreachable through the API (answers are validated before
            # persisting) but a hand-edited store must not crash the view
            raise HTTPException(
                status_code=422,
                detail={"error": str(exc), "gates": list(exc.gate_ids)}) from None
        finished = len(history) >= len(model.gates)
        suggestion = None
        if not finished:
            suggestion = suggest_next_question(model, evidence)
        return {
            "session_id": session_id,
            "model_id": model_id,
            "status": "finished" if finished else "active",
            "posteriors": [
                {
                    "skill": sp.skill_id,
                    "name": model.skill_by_id()[sp.skill_id].name,
                    "posterior_true": sp.posterior_true,
                    "absorbed_count": sp.absorbed_count,
                    "joint_count": sp.joint_count,
                }
                for sp in posteriors
            ],
            "history": [
                {"gate_id": g, "answer": a, "timestamp": ts} for g, a, ts in history
            ],
            "answered_count": len(history),
            "total_gates": len(model.gates),
            "suggested_next_question": suggestion,
        }

    @app.get("/models")
    def list_models() -> dict:
        return {
            "models": [
                {
                    "id": model_id,
                    "name": m.name,
                    "skill_count": len(m.skills),
                    "gate_count": len(m.gates),
                }
                for model_id, m in sorted(models.items())
            ]
        }

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest) -> dict:
        _model_or_404(req.model_id)
        session_id = store.create_session(req.model_id)
        return _session_view(session_id)

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict:
        return _session_view(session_id)

    @app.post("/sessions/{session_id}/answers")
    def post_answer(session_id: str, req: AnswerRequest) -> dict:
        found = store.get_session(session_id)
        if found is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        model = models[found[0]]
        if req.gate_id not in model.gate_by_id():
            raise HTTPException(status_code=404, detail=f"unknown gate {req.gate_id!r}")
        answer = req.answer.strip().lower()
        if answer not in ("yes", "no"):
            raise HTTPException(status_code=422, detail="answer must be yes or no")
        with store.lock:
            history = store.history(session_id)
            if any(g == req.gate_id for g, _a, _ts in history):
                raise HTTPException(
                    status_code=409,
                    detail=f"gate {req.gate_id!r} already answered in this session")
        # Validate the would-be evidence before persisting so an
        # impossible answer leaves the session unchanged.
        trial = _evidence_from_history(
            model, history + [(req.gate_id, answer, "")])
        try:
            infer_posteriors(model, trial)
        except InconsistentEvidenceError as exc:
            raise HTTPException(
                status_code=422,
                detail={"error": str(exc), "gates": list(exc.gate_ids)}) from None
        try:
            store.append_answer(session_id, req.gate_id, answer)
        except sqlite3.IntegrityError:
            raise HTTPException(
                status_code=409,
                detail=f"gate {req.gate_id!r} already answered in this session") from None
        return _session_view(session_id)

    return app
