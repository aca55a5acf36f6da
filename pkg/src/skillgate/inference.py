"""Exact posterior computation from answer evidence.

Evidence splits by the observed output state:

* Gates observed in their distinguished state are absorbed one at a time:
  observing the distinguished output forces every auxiliary into the
  distinguished state, which factorizes over the inputs, so each input's
  marginal gets the closed-form update of
  :func:`posterior_given_distinguished` and the skills stay independent.
  Absorption commutes — the updates multiply in odds space — so the order
  of distinguished evidence is irrelevant.

* Gates observed in their non-distinguished state do not factorize (the
  complement of a product couples the inputs), so the engine conditions
  on them jointly: it enumerates the states of the skills that appear in
  at least one such gate, weighting each configuration by the absorbed
  marginals times the product of per-gate complements, and normalizes.
  Skills outside every such gate keep their absorbed marginals.

The result is exact: it matches :func:`brute_force_posteriors`, the
full-joint oracle, to within numerical noise on every model small enough
for the oracle to handle.

Posteriors are reported as P(skill possessed) regardless of gate kinds;
the kind-dependent marginal pi of the non-distinguished state is handled
internally.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    ContractViolation,
    ImpossibleEventError,
    InconsistentEvidenceError,
    OracleSizeError,
)
from .gates import gate_success_prob
from .model import AssessmentModel, GateKind, NoisyGate

__all__ = [
    "Observation",
    "SkillPosterior",
    "observations_from_answers",
    "posterior_given_distinguished",
    "answer_marginal",
    "posterior_given_non_distinguished",
    "infer_posteriors",
    "brute_force_posteriors",
    "evidence_probability",
    "suggest_next_question",
    "BRUTE_FORCE_SKILL_CAP",
    "JOINT_WIDTH_CAP",
]

# Full-joint oracle enumerates 2^n skill states.
BRUTE_FORCE_SKILL_CAP = 20
# Joint conditioning enumerates 2^m states of the skills involved in
# non-distinguished evidence; refuse rather than hang past this width.
JOINT_WIDTH_CAP = 25


class Observation(enum.Enum):
    """The observed output state of a gate, relative to its kind."""

    DISTINGUISHED = "distinguished"
    NON_DISTINGUISHED = "non_distinguished"


@dataclass(frozen=True)
class SkillPosterior:
    """Posterior for one skill plus how much evidence shaped it.

    ``absorbed_count`` counts distinguished evidences folded into the
    skill's marginal; ``joint_count`` counts non-distinguished evidences
    the skill was jointly conditioned on.  Zero-strength arcs constrain
    nothing and are not counted.
    """

    skill_id: str
    posterior_true: float
    absorbed_count: int = 0
    joint_count: int = 0


def observations_from_answers(
    model: AssessmentModel, answers: Mapping[str, object]
) -> dict[str, Observation]:
    """Translate correct/wrong answers into per-gate output observations.

    Accepts True/False or the strings "yes"/"no" (case-insensitive).  The
    mapping depends on the gate kind: a correct answer is the
    distinguished state for AND gates (task solved) but the
    non-distinguished state for OR gates (where the distinguished state 0
    means "effect absent").
    """
    gates = model.gate_by_id()
    out: dict[str, Observation] = {}
    for gate_id, raw in answers.items():
        if gate_id not in gates:
            raise ContractViolation(f"unknown gate id {gate_id!r} in answers")
        if isinstance(raw, str):
            text = raw.strip().lower()
            if text not in ("yes", "no"):
                raise ContractViolation(f"answer for {gate_id!r} must be yes/no, got {raw!r}")
            correct = text == "yes"
        else:
            correct = bool(raw)
        if gates[gate_id].kind is GateKind.AND:
            out[gate_id] = Observation.DISTINGUISHED if correct else Observation.NON_DISTINGUISHED
        else:
            out[gate_id] = Observation.NON_DISTINGUISHED if correct else Observation.DISTINGUISHED
    return out


def posterior_given_distinguished(pi_k: float, lambda_k: float) -> float:
    """P(X_k = non-distinguished | Y = distinguished) for a single gate.

    Bayes on the factorized likelihood gives

        pi'_k = pi_k * lambda_k / (pi_k * lambda_k + (1 - pi_k)).

    Non-decreasing in lambda_k and never above pi_k: a distinguished
    answer can only shrink belief in the non-distinguished state.
    """
    if not 0.0 <= pi_k <= 1.0 or not 0.0 <= lambda_k <= 1.0:
        raise ContractViolation("pi_k and lambda_k must lie in [0, 1]")
    denom = pi_k * lambda_k + (1.0 - pi_k)
    if denom == 0.0:
        raise ImpossibleEventError(
            "distinguished output has probability zero (pi=1, lambda=0)")
    return min(1.0, max(0.0, pi_k * lambda_k / denom))


def _pi_of(p_true: float, kind: GateKind) -> float:
    return (1.0 - p_true) if kind is GateKind.AND else p_true


def _p_true_of(pi: float, kind: GateKind) -> float:
    return (1.0 - pi) if kind is GateKind.AND else pi


def _check_priors(gate: NoisyGate, priors: Mapping[str, float]) -> None:
    missing = [i for i in gate.input_ids() if i not in priors]
    if missing:
        raise ContractViolation(
            f"priors for gate {gate.id!r} missing inputs {missing}")


def answer_marginal(gate: NoisyGate, priors: Mapping[str, float]) -> float:
    """P(Y = distinguished) under independent input marginals.

    ``priors`` maps each input skill id to pi, its probability of the
    non-distinguished state.  Marginalizing the closed form gives the
    linear-time product

        P(Y = distinguished) = lambda0 * prod_i (1 - pi_i * strength_i).
    """
    _check_priors(gate, priors)
    p = gate.leak_lam0
    for inp in gate.inputs:
        p *= 1.0 - priors[inp.skill_id] * inp.strength
    return p


def posterior_given_non_distinguished(
    gate: NoisyGate, priors: Mapping[str, float], skill_id: str
) -> float:
    """P(X_k = non-distinguished | Y = non-distinguished), single gate.

    Complementing the distinguished marginal and applying Bayes yields

        [ pi_k - pi_k * lambda_k * lambda0 * prod_{i != k} (1 - pi_i s_i) ]
        / [ 1 - lambda0 * prod_j (1 - pi_j s_j) ]

    with s = strength.  Non-increasing in lambda_k and never below pi_k:
    a wrong answer can only grow belief in the non-distinguished state.
    """
    _check_priors(gate, priors)
    inp_k = next((i for i in gate.inputs if i.skill_id == skill_id), None)
    if inp_k is None:
        raise ContractViolation(f"skill {skill_id!r} is not an input of gate {gate.id!r}")
    pi_k = priors[skill_id]
    # Evaluate as pi_k (d + rest*s_k) / (d + rest*pi_k*s_k) where rest is
    # the product over the other inputs and d = 1 - rest.  Algebraically
    # identical, but d is accumulated as a complement so nothing cancels
    # when the evidence is nearly vacuous (rest close to 1).
    rest = gate.leak_lam0
    d = 1.0 - gate.leak_lam0
    for inp in gate.inputs:
        if inp.skill_id != skill_id:
            x = priors[inp.skill_id] * inp.strength
            rest *= 1.0 - x
            d += x - d * x
    denom = d + rest * pi_k * inp_k.strength
    if denom == 0.0:
        raise ImpossibleEventError(
            f"non-distinguished output of gate {gate.id!r} has probability zero")
    numer = pi_k * (d + rest * inp_k.strength)
    return min(1.0, max(0.0, numer / denom))


def _split_evidence(
    model: AssessmentModel, evidence: Mapping[str, Observation]
) -> tuple[list[NoisyGate], list[NoisyGate]]:
    gates = model.gate_by_id()
    absorbed: list[NoisyGate] = []
    joint: list[NoisyGate] = []
    for gate_id, obs in evidence.items():
        if gate_id not in gates:
            raise ContractViolation(f"evidence references unknown gate {gate_id!r}")
        if not isinstance(obs, Observation):
            raise ContractViolation(f"evidence for {gate_id!r} is not an Observation")
        if obs is Observation.DISTINGUISHED:
            absorbed.append(gates[gate_id])
        else:
            joint.append(gates[gate_id])
    return absorbed, joint


def _absorb(
    p_true: dict[str, float], gate: NoisyGate, counts: dict[str, int] | None = None
) -> None:
    """Fold one distinguished observation into the running marginals."""
    if gate.leak_lam0 == 0.0:
        # The leak auxiliary is never distinguished, so neither is the
        # output; the inputs carry no blame and must not be updated.
        raise ImpossibleEventError(
            f"distinguished output of gate {gate.id!r} has probability zero")
    for inp in gate.inputs:
        if inp.strength == 0.0:
            continue  # absent arc, exact no-op
        pi = _pi_of(p_true[inp.skill_id], gate.kind)
        pi_new = posterior_given_distinguished(pi, inp.lam)
        p_true[inp.skill_id] = _p_true_of(pi_new, gate.kind)
        if counts is not None:
            counts[inp.skill_id] += 1


def _absorb_all(
    p_true: dict[str, float],
    absorbed_gates: list[NoisyGate],
    counts: dict[str, int] | None = None,
) -> None:
    """Fold all distinguished observations at once, order-independently.

    Composing the single-gate update across gates multiplies per-skill
    odds by the inhibition factors, which commutes; folding each skill's
    factors in sorted order makes the result bit-identical under any
    permutation of the evidence, not merely equal up to rounding.
    """
    shrink_missing: dict[str, list[float]] = {}  # lams from AND gates
    shrink_present: dict[str, list[float]] = {}  # lams from OR gates
    force_present: set[str] = set()
    force_absent: set[str] = set()
    for gate in absorbed_gates:
        if gate.leak_lam0 == 0.0:
            raise ImpossibleEventError(
                f"distinguished output of gate {gate.id!r} has probability zero")
        for inp in gate.inputs:
            if inp.strength == 0.0:
                continue  # absent arc, exact no-op
            if counts is not None:
                counts[inp.skill_id] += 1
            if gate.kind is GateKind.AND:
                if inp.lam == 0.0:
                    force_present.add(inp.skill_id)
                else:
                    shrink_missing.setdefault(inp.skill_id, []).append(inp.lam)
            else:
                if inp.lam == 0.0:
                    force_absent.add(inp.skill_id)
                else:
                    shrink_present.setdefault(inp.skill_id, []).append(inp.lam)

    touched = set(shrink_missing) | set(shrink_present) | force_present | force_absent
    for sid in touched:
        p = p_true[sid]
        if sid in force_present and sid in force_absent:
            raise ImpossibleEventError(
                f"evidence forces skill {sid!r} both present and absent")
        if sid in force_present:
            if p == 0.0:
                raise ImpossibleEventError(
                    f"evidence forces impossible state for skill {sid!r}")
            p_true[sid] = 1.0
            continue
        if sid in force_absent:
            if p == 1.0:
                raise ImpossibleEventError(
                    f"evidence forces impossible state for skill {sid!r}")
            p_true[sid] = 0.0
            continue
        missing_factor = 1.0
        for lam in sorted(shrink_missing.get(sid, ())):
            missing_factor *= lam
        present_factor = 1.0
        for lam in sorted(shrink_present.get(sid, ())):
            present_factor *= lam
        numer = p * present_factor
        denom = numer + (1.0 - p) * missing_factor
        if denom == 0.0:
            # both masses underflowed; redo the fold in log space
            gap = (
                math.log1p(-p) - math.log(p)
                + sum(math.log(x) for x in sorted(shrink_missing.get(sid, ())))
                - sum(math.log(x) for x in sorted(shrink_present.get(sid, ())))
            )
            p_true[sid] = 1.0 / (1.0 + math.exp(gap))
        else:
            p_true[sid] = numer / denom


def _joint_condition(
    model: AssessmentModel,
    p_true: dict[str, float],
    joint_gates: list[NoisyGate],
) -> tuple[dict[str, float], float]:
    """Condition on all non-distinguished gates at once.

    Returns updated marginals for the involved skills and the
    normalization constant Z = P(all those outputs non-distinguished).
    """
    skill_order = [s.id for s in model.skills]
    involved = [
        sid for sid in skill_order
        if any(inp.skill_id == sid and inp.strength > 0.0
               for g in joint_gates for inp in g.inputs)
    ]
    if len(involved) > JOINT_WIDTH_CAP:
        raise OracleSizeError(
            f"joint conditioning over {len(involved)} skills exceeds the cap",
            size=len(involved), cap=JOINT_WIDTH_CAP)

    z = 0.0
    num = {sid: 0.0 for sid in involved}
    for states in itertools.product((False, True), repeat=len(involved)):
        config = dict(zip(involved, states))
        weight = 1.0
        for sid, state in zip(involved, states):
            weight *= p_true[sid] if state else 1.0 - p_true[sid]
        if weight == 0.0:
            continue
        for gate in joint_gates:
            # Zero-strength inputs contribute factor 1 whatever their
            # state; fill them arbitrarily to satisfy the contract.
            assignment = {
                inp.skill_id: config.get(inp.skill_id, True) for inp in gate.inputs
            }
            weight *= 1.0 - gate_success_prob(gate, assignment)
            if weight == 0.0:
                break
        z += weight
        for sid, state in zip(involved, states):
            if state:
                num[sid] += weight

    updated = dict(p_true)
    if z > 0.0:
        for sid in involved:
            updated[sid] = num[sid] / z
    return updated, z


def evidence_probability(
    model: AssessmentModel, evidence: Mapping[str, Observation]
) -> float:
    """Exact probability of an evidence set under the model.

    Chain rule over the distinguished gates (marginal, then absorb), times
    the joint probability of the non-distinguished outputs under the
    absorbed marginals.  Returns 0.0 for impossible evidence instead of
    raising, so callers can probe subsets.
    """
    absorbed_gates, joint_gates = _split_evidence(model, evidence)
    p_true = {s.id: s.prior_true for s in model.skills}
    prob = 1.0
    for gate in absorbed_gates:
        priors = {i: _pi_of(p_true[i], gate.kind) for i in gate.input_ids()}
        marginal = answer_marginal(gate, priors)
        prob *= marginal
        if prob == 0.0:
            return 0.0
        _absorb(p_true, gate)
    if joint_gates:
        _, z = _joint_condition(model, p_true, joint_gates)
        prob *= z
    return prob


def _minimal_zero_subset(
    model: AssessmentModel, evidence: Mapping[str, Observation]
) -> tuple[str, ...]:
    """Greedily shrink impossible evidence to a minimal impossible subset."""
    current = dict(evidence)
    for gate_id in list(current):
        if len(current) == 1:
            break
        trial = {g: o for g, o in current.items() if g != gate_id}
        if evidence_probability(model, trial) == 0.0:
            current = trial
    return tuple(current)


def infer_posteriors(
    model: AssessmentModel, evidence: Mapping[str, Observation]
) -> list[SkillPosterior]:
    """Exact skill posteriors given the evidence, in skill declaration order.

    Phase 1 absorbs every distinguished observation into per-skill
    marginals (closed form, linear, order-independent).  Phase 2 jointly
    conditions on the non-distinguished observations by enumerating the
    involved skills only.  Evidence of probability zero raises
    :class:`InconsistentEvidenceError` naming a minimal impossible subset.
    """
    absorbed_gates, joint_gates = _split_evidence(model, evidence)
    p_true = {s.id: s.prior_true for s in model.skills}
    absorbed_counts = {s.id: 0 for s in model.skills}
    joint_counts = {s.id: 0 for s in model.skills}

    try:
        _absorb_all(p_true, absorbed_gates, absorbed_counts)
    except ImpossibleEventError:
        raise InconsistentEvidenceError(
            "evidence has probability zero",
            _minimal_zero_subset(model, evidence)) from None

    if joint_gates:
        for gate in joint_gates:
            for inp in gate.inputs:
                if inp.strength > 0.0:
                    joint_counts[inp.skill_id] += 1
        p_true, z = _joint_condition(model, p_true, joint_gates)
        if z <= 0.0:
            raise InconsistentEvidenceError(
                "evidence has probability zero",
                _minimal_zero_subset(model, evidence))

    return [
        SkillPosterior(
            skill_id=s.id,
            posterior_true=p_true[s.id],
            absorbed_count=absorbed_counts[s.id],
            joint_count=joint_counts[s.id],
        )
        for s in model.skills
    ]


def brute_force_posteriors(
    model: AssessmentModel,
    evidence: Mapping[str, Observation],
    cap: int = BRUTE_FORCE_SKILL_CAP,
) -> list[SkillPosterior]:
    """Full-joint oracle: enumerate every skill configuration.

    Weight of a configuration = product of skill priors times each
    observed gate's likelihood from the materialized closed form.  Serves
    as the certification oracle for :func:`infer_posteriors`; cost is
    exponential in the total number of skills.
    """
    n = len(model.skills)
    if n > cap:
        raise OracleSizeError(
            f"model has {n} skills, above the oracle cap of {cap}",
            size=n, cap=cap)
    absorbed_gates, joint_gates = _split_evidence(model, evidence)
    observed = [(g, True) for g in absorbed_gates] + [(g, False) for g in joint_gates]

    skill_ids = [s.id for s in model.skills]
    priors = [s.prior_true for s in model.skills]
    z = 0.0
    num = {sid: 0.0 for sid in skill_ids}
    for states in itertools.product((False, True), repeat=n):
        weight = 1.0
        for p, state in zip(priors, states):
            weight *= p if state else 1.0 - p
        if weight == 0.0:
            continue
        config = dict(zip(skill_ids, states))
        for gate, want_distinguished in observed:
            assignment = {i: config[i] for i in gate.input_ids()}
            p_dist = gate_success_prob(gate, assignment)
            weight *= p_dist if want_distinguished else 1.0 - p_dist
            if weight == 0.0:
                break
        z += weight
        for sid, state in zip(skill_ids, states):
            if state:
                num[sid] += weight

    if z <= 0.0:
        raise InconsistentEvidenceError(
            "evidence has probability zero",
            _minimal_zero_subset(model, evidence))

    absorbed_counts = {sid: 0 for sid in skill_ids}
    joint_counts = {sid: 0 for sid in skill_ids}
    for gate, want in observed:
        for inp in gate.inputs:
            if inp.strength > 0.0:
                (absorbed_counts if want else joint_counts)[inp.skill_id] += 1

    return [
        SkillPosterior(
            skill_id=sid,
            posterior_true=num[sid] / z,
            absorbed_count=absorbed_counts[sid],
            joint_count=joint_counts[sid],
        )
        for sid in skill_ids
    ]


def _binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log(p) + (1.0 - p) * math.log(1.0 - p))


def suggest_next_question(
    model: AssessmentModel,
    evidence: Mapping[str, Observation],
    answered: Iterable[str] = (),
) -> str:
    """Pick the unanswered gate that minimizes expected posterior entropy.

    For each candidate the outcome probability comes from
    :func:`answer_marginal` on the current posteriors, and each outcome's
    skill marginals from the single-gate closed forms.  The score is the
    expected sum of per-skill binary entropies — a marginal-entropy
    heuristic, not joint entropy — which is cheap and directionally right
    for an interactive loop.  Ties keep the earliest gate in declaration
    order.
    """
    skip = set(answered) | set(evidence)
    candidates = [g for g in model.gates if g.id not in skip]
    if not candidates:
        raise ContractViolation("no unanswered gates to suggest")

    current = {sp.skill_id: sp.posterior_true for sp in infer_posteriors(model, evidence)}
    base_entropy = {sid: _binary_entropy(p) for sid, p in current.items()}
    total_base = sum(base_entropy.values())

    best_gate = None
    best_score = math.inf
    for gate in candidates:
        priors = {i: _pi_of(current[i], gate.kind) for i in gate.input_ids()}
        p_dist = answer_marginal(gate, priors)
        score = 0.0
        for is_dist, p_branch in ((True, p_dist), (False, 1.0 - p_dist)):
            if p_branch <= 0.0:
                continue
            entropy = total_base
            for inp in gate.inputs:
                if inp.strength == 0.0:
                    continue
                if is_dist:
                    pi_new = posterior_given_distinguished(priors[inp.skill_id], inp.lam)
                else:
                    pi_new = posterior_given_non_distinguished(gate, priors, inp.skill_id)
                p_new = _p_true_of(pi_new, gate.kind)
                entropy += _binary_entropy(p_new) - base_entropy[inp.skill_id]
            score += p_branch * entropy
        if score < best_score:
            best_score = score
            best_gate = gate
    assert best_gate is not None
    return best_gate.id
