"""Record live service responses as JSON fixtures for the UI tests.

The UI contract test replays these recordings and asserts that rendered
numbers equal payload numbers, so the fixtures must be genuine service
output.  Run from the frontend directory after changing the service:

    python3 scripts/record-fixtures.py
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from skillgate.formats import serialize_model
from skillgate.model import AssessmentModel, GateInput, GateKind, NoisyGate, SkillVariable
from skillgate.service import create_app

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# A tiny demo model with a single-skill strength-0.9 gate: answering it
# "no" must visibly drag the skill bar toward 0.
DEMO = AssessmentModel(
    skills=(
        SkillVariable(id="loops", name="Loops", prior_true=0.5),
        SkillVariable(id="arrays", name="Arrays", prior_true=0.5),
    ),
    gates=(
        NoisyGate(id="d1", kind=GateKind.AND,
                  inputs=(GateInput("loops", 0.9),)),
        NoisyGate(id="d2", kind=GateKind.AND, leak_strength=0.2,
                  inputs=(GateInput("loops", 0.4), GateInput("arrays", 0.7))),
    ),
    name="Demo", version="1",
)


def dump(name: str, payload) -> None:
    path = OUT / name
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as models_dir:
        (Path(models_dir) / "demo.json").write_text(serialize_model(DEMO), encoding="utf-8")
        with TestClient(create_app(models_dir=models_dir)) as client:
            dump("models.json", client.get("/models").json())

            fresh = client.post("/sessions", json={"model_id": "cat"}).json()
            dump("fresh_session.json", fresh)

            sid = fresh["session_id"]
            steps = []
            for gate_id, answer in (("1.1", "yes"), ("2.2", "no"), ("7.1", "yes")):
                steps.append(client.post(
                    f"/sessions/{sid}/answers",
                    json={"gate_id": gate_id, "answer": answer}).json())
            dump("cat_sequence.json", {
                "steps": steps,
                "final": client.get(f"/sessions/{sid}").json(),
            })

            before = client.post("/sessions", json={"model_id": "demo"}).json()
            after = client.post(
                f"/sessions/{before['session_id']}/answers",
                json={"gate_id": "d1", "answer": "no"}).json()
            dump("wrong_answer_strong_gate.json", {"before": before, "after": after})


if __name__ == "__main__":
    main()
