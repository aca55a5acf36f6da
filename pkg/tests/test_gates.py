"""Gate semantics: closed form, explicit auxiliary network, CPT."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillgate.errors import ContractViolation, OracleSizeError
from skillgate.gates import (
    construct_explicit_network,
    gate_success_prob,
    marginalize_explicit,
    materialize_cpt,
)
from skillgate.model import GateInput, GateKind, NoisyGate


def _gate(kind, strengths, leak=None, prefix="s"):
    inputs = tuple(GateInput(f"{prefix}{i}", s) for i, s in enumerate(strengths))
    return NoisyGate("g", kind, inputs, leak)


# -- closed form --------------------------------------------------------------


def test_and_gate_all_skills_present_no_leak_succeeds():
    gate = _gate(GateKind.AND, (0.8, 0.6))
    assert gate_success_prob(gate, {"s0": True, "s1": True}) == 1.0


def test_and_gate_missing_skill_attenuates_by_lambda():
    gate = _gate(GateKind.AND, (0.8, 0.6))
    # s0 missing: success only through its inhibition, lambda = 0.2
    assert gate_success_prob(gate, {"s0": False, "s1": True}) == pytest.approx(0.2)
    assert gate_success_prob(gate, {"s0": False, "s1": False}) == pytest.approx(0.2 * 0.4)


def test_leaky_and_gate_can_fail_despite_all_skills():
    gate = _gate(GateKind.AND, (0.8,), leak=0.2)
    assert gate_success_prob(gate, {"s0": True}) == pytest.approx(0.8)


def test_or_gate_distinguished_state_is_zero():
    gate = _gate(GateKind.OR, (0.9, 0.5))
    # For OR the distinguished output is 0: all causes absent keeps it 0.
    assert gate_success_prob(gate, {"s0": False, "s1": False}) == 1.0
    assert gate_success_prob(gate, {"s0": True, "s1": False}) == pytest.approx(0.1)


def test_zero_strength_input_equals_absent_arc():
    with_arc = _gate(GateKind.AND, (0.7, 0.0))
    without = NoisyGate("g", GateKind.AND, (GateInput("s0", 0.7),))
    for s0 in (False, True):
        for s1 in (False, True):
            assert gate_success_prob(with_arc, {"s0": s0, "s1": s1}) == pytest.approx(
                gate_success_prob(without, {"s0": s0}))


def test_assignment_must_cover_exactly_the_inputs():
    gate = _gate(GateKind.AND, (0.7, 0.5))
    with pytest.raises(ContractViolation):
        gate_success_prob(gate, {"s0": True})
    with pytest.raises(ContractViolation):
        gate_success_prob(gate, {"s0": True, "s1": True, "zz": False})


# -- explicit auxiliary network ----------------------------------------------


def test_explicit_network_structure():
    gate = _gate(GateKind.AND, (0.8, 0.6), leak=0.3)
    net = construct_explicit_network(gate)
    assert net.kind is GateKind.AND
    assert net.aux_lams == (("s0", pytest.approx(0.2)), ("s1", pytest.approx(0.4)))
    assert net.leak_lam0 == pytest.approx(0.7)
    assert net.aux_count == 3  # two inputs plus the leak auxiliary


def test_explicit_network_without_leak_has_no_leak_auxiliary():
    net = construct_explicit_network(_gate(GateKind.OR, (0.5,)))
    assert net.leak_lam0 is None
    assert net.aux_count == 1


@pytest.mark.parametrize("kind", [GateKind.AND, GateKind.OR])
@pytest.mark.parametrize("leak", [None, 0.0, 0.25])
def test_marginalize_explicit_matches_closed_form_exhaustively(kind, leak):
    rng = random.Random(11)
    for _ in range(20):
        width = rng.randint(1, 5)
        strengths = [rng.choice((0.0, 1.0, rng.random())) for _ in range(width)]
        gate = _gate(kind, strengths, leak)
        for states in itertools.product((False, True), repeat=width):
            assignment = {f"s{i}": s for i, s in enumerate(states)}
            assert marginalize_explicit(
                construct_explicit_network(gate), assignment
            ) == pytest.approx(gate_success_prob(gate, assignment), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    kind=st.sampled_from([GateKind.AND, GateKind.OR]),
    strengths=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6),
    leak=st.one_of(st.none(), st.floats(0.0, 1.0)),
    data=st.data(),
)
def test_marginalize_explicit_equals_closed_form(kind, strengths, leak, data):
    gate = _gate(kind, strengths, leak)
    states = data.draw(st.lists(
        st.booleans(), min_size=len(strengths), max_size=len(strengths)))
    assignment = {f"s{i}": s for i, s in enumerate(states)}
    assert abs(
        marginalize_explicit(construct_explicit_network(gate), assignment)
        - gate_success_prob(gate, assignment)
    ) <= 1e-12


def test_marginalize_explicit_refuses_oversized_networks():
    gate = _gate(GateKind.AND, (0.5,) * 21)
    with pytest.raises(OracleSizeError):
        marginalize_explicit(construct_explicit_network(gate), {f"s{i}": True for i in range(21)})


# -- CPT materialization -------------------------------------------------------


def test_cpt_rows_are_distributions_and_match_closed_form():
    gate = _gate(GateKind.AND, (0.9, 0.4), leak=0.2)
    cpt = materialize_cpt(gate)
    assert cpt.parent_ids == ("s0", "s1")
    assert len(cpt.rows) == 4
    for states, (p0, p1) in cpt.rows.items():
        assert p0 + p1 == pytest.approx(1.0)
        assignment = dict(zip(cpt.parent_ids, states))
        # AND distinguishes output 1, so p1 is the success probability.
        assert p1 == pytest.approx(gate_success_prob(gate, assignment))


def test_cpt_or_gate_orders_columns_by_output_value():
    gate = _gate(GateKind.OR, (0.8,))
    cpt = materialize_cpt(gate)
    # OR distinguishes output 0: (p_y0, p_y1) with cause present is (0.2, 0.8).
    assert cpt.rows[(True,)][0] == pytest.approx(0.2)
    assert cpt.rows[(True,)][1] == pytest.approx(0.8)


def test_cpt_refuses_above_input_cap():
    gate = _gate(GateKind.AND, (0.5,) * 21)
    with pytest.raises(OracleSizeError) as exc:
        materialize_cpt(gate)
    assert exc.value.cap == 20
    # At the cap it must still work in principle: 20 inputs is allowed.
    assert materialize_cpt(_gate(GateKind.AND, (0.5,) * 8)).rows
