"""Domain types for bipartite skill-question models.

A model is a two-layer network: parentless Boolean skill variables and
childless Boolean question nodes ("gates") whose conditional tables are
noisy logical functions of the skills they draw on.  Each gate kind has a
distinguished output state, forced whenever every input sits in it:

* OR gates distinguish state 0 — with every cause absent the effect is
  certainly absent.
* AND gates distinguish state 1 — with every skill present the task is
  certainly solved (up to an optional leak).

Each arc carries a strength in [0, 1]: the elicited importance of the
skill for the question.  Internally the complementary noise parameter
``lambda = 1 - strength`` multiplies into the gate's closed form.  A
strength of 0 (lambda 1) is equivalent to the arc being absent.  A leaky
gate additionally carries ``leak_strength = 1 - lambda0``, the probability
that the output escapes its distinguished state despite all inputs being
distinguished (a slip for AND, a random guess for OR).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

__all__ = [
    "GateKind",
    "SkillVariable",
    "GateInput",
    "NoisyGate",
    "AssessmentModel",
    "Violation",
    "validate_model",
    "effective_pi",
]


class GateKind(enum.Enum):
    """Gate logic; the value doubles as the serialized name."""

    OR = "or"
    AND = "and"

    @property
    def distinguished_state(self) -> int:
        """The output state forced when every input is in it."""
        return 0 if self is GateKind.OR else 1


@dataclass(frozen=True)
class SkillVariable:
    """A Boolean latent skill.

    ``prior_true`` is the prior probability that the skill is possessed
    (state 1), independent of any gate kind.  The per-gate marginal pi of
    the non-distinguished state is derived via :func:`effective_pi`.
    """

    id: str
    name: str = ""
    prior_true: float = 0.5


@dataclass(frozen=True)
class GateInput:
    """One skill-to-gate arc with its elicited strength (= 1 - lambda)."""

    skill_id: str
    strength: float

    @property
    def lam(self) -> float:
        return 1.0 - self.strength


@dataclass(frozen=True)
class NoisyGate:
    """One question node.

    ``inputs`` is ordered; declaration order breaks ties wherever the
    package must pick between gates or skills deterministically.
    ``leak_strength`` is ``1 - lambda0``; ``None`` means non-leaky.
    """

    id: str
    kind: GateKind
    inputs: tuple[GateInput, ...]
    leak_strength: float | None = None

    @property
    def leak_lam0(self) -> float:
        """Multiplier lambda0 applied to the distinguished-state probability."""
        return 1.0 if self.leak_strength is None else 1.0 - self.leak_strength

    def input_ids(self) -> tuple[str, ...]:
        return tuple(inp.skill_id for inp in self.inputs)


@dataclass(frozen=True)
class AssessmentModel:
    """A validated-by-convention bipartite model plus free-form metadata.

    Structure is implicit in the gate input lists, so arcs can only run
    from skills to gates; no other topology is representable.
    """

    skills: tuple[SkillVariable, ...]
    gates: tuple[NoisyGate, ...]
    name: str = ""
    version: str = ""

    def skill_by_id(self) -> dict[str, SkillVariable]:
        return {s.id: s for s in self.skills}

    def gate_by_id(self) -> dict[str, NoisyGate]:
        return {g.id: g for g in self.gates}


@dataclass(frozen=True)
class Violation:
    """One validation finding: a machine-readable code plus a message."""

    code: str
    message: str


def validate_model(model: AssessmentModel) -> list[Violation]:
    """Collect every invariant violation; an empty list means valid.

    Violations are data, not exceptions: callers building models from
    untrusted documents report them all at once.
    """
    found: list[Violation] = []
    seen_skills: set[str] = set()
    for skill in model.skills:
        if skill.id in seen_skills:
            found.append(Violation("DUPLICATE_SKILL_ID", f"skill id {skill.id!r} repeats"))
        seen_skills.add(skill.id)
        if not 0.0 <= skill.prior_true <= 1.0:
            found.append(Violation(
                "PRIOR_OUT_OF_RANGE",
                f"skill {skill.id!r} prior_true {skill.prior_true!r} outside [0, 1]"))

    seen_gates: set[str] = set()
    for gate in model.gates:
        if gate.id in seen_gates:
            found.append(Violation("DUPLICATE_GATE_ID", f"gate id {gate.id!r} repeats"))
        seen_gates.add(gate.id)
        seen_inputs: set[str] = set()
        for inp in gate.inputs:
            if inp.skill_id not in seen_skills:
                found.append(Violation(
                    "UNKNOWN_SKILL_REF",
                    f"gate {gate.id!r} references unknown skill {inp.skill_id!r}"))
            if inp.skill_id in seen_inputs:
                found.append(Violation(
                    "DUPLICATE_INPUT_SKILL",
                    f"gate {gate.id!r} lists skill {inp.skill_id!r} twice"))
            seen_inputs.add(inp.skill_id)
            if not 0.0 <= inp.strength <= 1.0:
                found.append(Violation(
                    "STRENGTH_OUT_OF_RANGE",
                    f"gate {gate.id!r} input {inp.skill_id!r} strength "
                    f"{inp.strength!r} outside [0, 1]"))
        if gate.leak_strength is not None and not 0.0 <= gate.leak_strength <= 1.0:
            found.append(Violation(
                "LEAK_OUT_OF_RANGE",
                f"gate {gate.id!r} leak_strength {gate.leak_strength!r} outside [0, 1]"))
    return found


def effective_pi(skill: SkillVariable, kind: GateKind) -> float:
    """Prior probability of the skill's non-distinguished state for ``kind``.

    AND gates distinguish state 1, so the non-distinguished state is
    "skill absent" and pi = 1 - prior_true; OR gates distinguish 0, so
    pi = prior_true.  For every skill,
    ``effective_pi(s, AND) + effective_pi(s, OR) == 1``.
    """
    if kind is GateKind.AND:
        return 1.0 - skill.prior_true
    return skill.prior_true
