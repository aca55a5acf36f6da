"""Noisy-gate conditional probabilities, two equivalent ways.

The production path evaluates the closed parametric form

    P(Y = distinguished | x) = prod_i [ 1 if x_i distinguished else lambda_i ]
                               * lambda0        (lambda0 = 1 when non-leaky)

in time linear in the number of inputs.  The derivational oracle builds
the gate's explicit auxiliary-variable network — one inhibitor/activator
per arc, plus a leak variable whose virtual parent is clamped to the
non-distinguished state — and marginalizes it by brute enumeration.  The
two must agree to within 1e-12 for every assignment; tests enforce it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .errors import ContractViolation, OracleSizeError
from .model import GateKind, NoisyGate

__all__ = [
    "ExplicitGateNetwork",
    "CptTable",
    "gate_success_prob",
    "construct_explicit_network",
    "marginalize_explicit",
    "materialize_cpt",
    "EXPLICIT_AUX_CAP",
    "CPT_INPUT_CAP",
]

# Enumeration over 2^n auxiliary configurations: desk-scale ceiling.
EXPLICIT_AUX_CAP = 20
CPT_INPUT_CAP = 20


def _check_assignment(gate: NoisyGate, assignment: Mapping[str, bool]) -> None:
    expected = set(gate.input_ids())
    got = set(assignment)
    if got != expected:
        missing = expected - got
        extra = got - expected
        raise ContractViolation(
            f"assignment for gate {gate.id!r} must cover exactly its inputs; "
            f"missing={sorted(missing)} extra={sorted(extra)}")


def gate_success_prob(gate: NoisyGate, assignment: Mapping[str, bool]) -> float:
    """P(Y = distinguished state | parent assignment), closed form.

    ``assignment`` maps each input skill id to its Boolean state (True =
    skill possessed = state 1).  Inputs sitting in the distinguished state
    contribute factor 1; the others contribute their lambda.  A leak
    multiplies by lambda0 regardless of the assignment.
    """
    _check_assignment(gate, assignment)
    distinguished_true = gate.kind.distinguished_state == 1
    p = gate.leak_lam0
    for inp in gate.inputs:
        if assignment[inp.skill_id] != distinguished_true:
            p *= inp.lam
    return p


@dataclass(frozen=True)
class ExplicitGateNetwork:
    """The auxiliary-variable expansion of one noisy gate.

    Each input skill gets an auxiliary X'_i with
    ``P(X'_i = distinguished | X_i = distinguished) = 1`` and
    ``P(X'_i = distinguished | X_i = non-distinguished) = lambda_i``.
    A leaky gate adds one more auxiliary that is distinguished with
    probability lambda0 (its virtual parent is clamped non-distinguished).
    The output is distinguished iff every auxiliary is.
    """

    kind: GateKind
    aux_lams: tuple[tuple[str, float], ...]  # (skill_id, lambda_i)
    leak_lam0: float | None  # None when non-leaky

    @property
    def aux_count(self) -> int:
        return len(self.aux_lams) + (0 if self.leak_lam0 is None else 1)


def construct_explicit_network(gate: NoisyGate) -> ExplicitGateNetwork:
    """Expand a gate into its auxiliary-variable network."""
    aux = tuple((inp.skill_id, inp.lam) for inp in gate.inputs)
    leak = None if gate.leak_strength is None else gate.leak_lam0
    return ExplicitGateNetwork(kind=gate.kind, aux_lams=aux, leak_lam0=leak)


def marginalize_explicit(
    network: ExplicitGateNetwork,
    assignment: Mapping[str, bool],
    cap: int = EXPLICIT_AUX_CAP,
) -> float:
    """P(Y = distinguished | assignment) by enumerating the auxiliaries.

    Deliberately brute force: sums the full 2^n auxiliary joint instead of
    exploiting the product structure, so it certifies the closed form
    rather than restating it.
    """
    expected = {skill_id for skill_id, _ in network.aux_lams}
    if set(assignment) != expected:
        raise ContractViolation(
            f"assignment keys {sorted(assignment)} != network inputs {sorted(expected)}")
    n = network.aux_count
    if n > cap:
        raise OracleSizeError(
            f"explicit network has {n} auxiliaries, above the cap of {cap}",
            size=n, cap=cap)

    distinguished_true = network.kind.distinguished_state == 1

    # P(aux state | parent state) per auxiliary, aux state expressed as
    # "is distinguished".  The leak's parent is clamped non-distinguished.
    tables: list[tuple[float, float]] = []  # (P(dist), P(non-dist))
    for skill_id, lam in network.aux_lams:
        parent_distinguished = assignment[skill_id] == distinguished_true
        p_dist = 1.0 if parent_distinguished else lam
        tables.append((p_dist, 1.0 - p_dist))
    if network.leak_lam0 is not None:
        tables.append((network.leak_lam0, 1.0 - network.leak_lam0))

    total = 0.0
    for states in itertools.product((True, False), repeat=len(tables)):
        weight = 1.0
        for (p_dist, p_not), is_dist in zip(tables, states):
            weight *= p_dist if is_dist else p_not
        # AND output: conjunction of auxiliaries in state 1; OR output:
        # disjunction of auxiliaries in state 1.  Both reduce to "output
        # distinguished iff every auxiliary is distinguished".
        if all(states):
            total += weight
    return total


@dataclass(frozen=True)
class CptTable:
    """A fully materialized P(Y | parents) table.

    ``rows`` maps each parent assignment (ordered as ``parent_ids``) to
    (P(Y=0), P(Y=1)).  This is the exponential object the closed form
    avoids; it exists for oracle checks only.
    """

    gate_id: str
    parent_ids: tuple[str, ...]
    rows: dict[tuple[bool, ...], tuple[float, float]]


def materialize_cpt(gate: NoisyGate, cap: int = CPT_INPUT_CAP) -> CptTable:
    """Tabulate P(Y | parents) over all 2^n parent assignments."""
    n = len(gate.inputs)
    if n > cap:
        raise OracleSizeError(
            f"gate {gate.id!r} has {n} inputs, above the CPT cap of {cap}",
            size=n, cap=cap)
    parent_ids = gate.input_ids()
    rows: dict[tuple[bool, ...], tuple[float, float]] = {}
    for states in itertools.product((False, True), repeat=n):
        assignment = dict(zip(parent_ids, states))
        p_dist = gate_success_prob(gate, assignment)
        if gate.kind.distinguished_state == 1:
            rows[states] = (1.0 - p_dist, p_dist)
        else:
            rows[states] = (p_dist, 1.0 - p_dist)
    return CptTable(gate_id=gate.id, parent_ids=parent_ids, rows=rows)
