"""Shared generators for randomized tests.

Everything is seeded through ``random.Random`` instances created by the
tests themselves, so failures reproduce exactly.
"""

from __future__ import annotations

import random

import pytest

from skillgate.inference import Observation
from skillgate.model import (
    AssessmentModel,
    GateInput,
    GateKind,
    NoisyGate,
    SkillVariable,
)


def random_model(
    rng: random.Random,
    max_skills: int = 8,
    max_gates: int = 10,
    allow_extreme: bool = False,
) -> AssessmentModel:
    """A valid random model with mixed gate kinds and optional leaks.

    With ``allow_extreme`` strengths may hit exactly 0 or 1 and priors 0
    or 1, exercising the boundary branches.
    """
    n_skills = rng.randint(1, max_skills)

    def prior() -> float:
        if allow_extreme and rng.random() < 0.15:
            return rng.choice((0.0, 1.0))
        return rng.uniform(0.05, 0.95)

    def strength() -> float:
        if allow_extreme and rng.random() < 0.2:
            return rng.choice((0.0, 1.0))
        return rng.uniform(0.05, 0.95)

    skills = tuple(
        SkillVariable(id=f"s{i}", prior_true=prior()) for i in range(n_skills)
    )
    gates = []
    for j in range(rng.randint(1, max_gates)):
        kind = rng.choice((GateKind.OR, GateKind.AND))
        width = rng.randint(1, min(8, n_skills))
        picked = rng.sample(range(n_skills), width)
        inputs = tuple(GateInput(skill_id=f"s{i}", strength=strength()) for i in picked)
        leak = None if rng.random() < 0.5 else rng.uniform(0.0, 0.9)
        gates.append(NoisyGate(id=f"g{j}", kind=kind, inputs=inputs, leak_strength=leak))
    return AssessmentModel(skills=skills, gates=tuple(gates))


def random_evidence(
    rng: random.Random, model: AssessmentModel, p_dist: float = 0.4, p_nd: float = 0.4
) -> dict[str, Observation]:
    """Observe each gate with the given probabilities, else leave it out."""
    evidence: dict[str, Observation] = {}
    for g in model.gates:
        r = rng.random()
        if r < p_dist:
            evidence[g.id] = Observation.DISTINGUISHED
        elif r < p_dist + p_nd:
            evidence[g.id] = Observation.NON_DISTINGUISHED
    return evidence


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20250817)


# One verdict line per acceptance criterion.  Tests append here and the
# summary hook below echoes the lines after the run, where pytest's
# output capture cannot swallow them.
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter) -> None:
    if not acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_lines:
        terminalreporter.write_line(line)
