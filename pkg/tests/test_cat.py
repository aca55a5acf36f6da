"""Bundled study: fixtures, model construction, batch scoring."""

import hashlib
from importlib import resources

import pytest

from skillgate.cat import (
    CAT_SKILL_IDS,
    FIXTURE_CHECKSUMS,
    CatElicitationRow,
    CatElicitationTable,
    REFERENCE_POSTERIOR_ROWS,
    answers_to_evidence,
    build_cat_model,
    compare_to_reference,
    load_answer_matrix,
    load_cat_model,
    load_elicitation_table,
    parse_elicitation_table,
    score_all_students,
)
from skillgate.errors import ContractViolation, ParseError, UnknownStudentError
from skillgate.formats import AnswerLog, AnswerRow
from skillgate.inference import Observation, brute_force_posteriors
from skillgate.model import GateKind, validate_model

D = Observation.DISTINGUISHED
ND = Observation.NON_DISTINGUISHED


# -- fixtures -----------------------------------------------------------------


def test_fixture_checksums_match_pins():
    for name, pinned in FIXTURE_CHECKSUMS.items():
        data = resources.files("skillgate.data").joinpath(name).read_bytes()
        assert "sha256:" + hashlib.sha256(data).hexdigest() == pinned, name


def test_elicitation_table_respects_instrument_invariants():
    table = load_elicitation_table()
    assert len(table.rows) == 66
    assert table.validate() == []
    # question 9 defines only odd sub-questions, question 12 only even
    assert (9, 1) in table.rows and (9, 2) not in table.rows
    assert (12, 2) in table.rows and (12, 1) not in table.rows
    # early questions are modeled without leak
    assert all(table.rows[(q, s)].leak == 0.0 for q in (1, 2) for s in range(1, 7))


def test_table_validation_reports_problems():
    good = load_elicitation_table()
    rows = dict(good.rows)
    rows[(1, 1)] = CatElicitationRow(strengths=(0.33,) * 6, leak=0.0)
    assert any("not an elicited level" in p for p in CatElicitationTable(rows).validate())
    rows = dict(good.rows)
    rows[(12, 1)] = rows[(12, 2)]
    assert any("not a defined sub-question" in p
               for p in CatElicitationTable(rows).validate())
    rows = dict(good.rows)
    del rows[(3, 3)]
    assert any("missing row" in p for p in CatElicitationTable(rows).validate())
    rows = dict(good.rows)
    rows[(1, 1)] = CatElicitationRow(strengths=rows[(1, 1)].strengths, leak=0.2)
    assert any("without leak" in p for p in CatElicitationTable(rows).validate())


def test_parse_elicitation_rejects_damage():
    with pytest.raises(ParseError):
        parse_elicitation_table("")
    with pytest.raises(ParseError):
        parse_elicitation_table("bad,header\n")
    header = "question_id,sub_question_id," + ",".join(CAT_SKILL_IDS) + ",leak"
    with pytest.raises(ParseError) as exc:
        parse_elicitation_table(header + "\n1,1,a,b,c,d,e,f,g\n")
    assert exc.value.code == "INVALID_CELL"


# -- model construction --------------------------------------------------------


def test_built_model_structure():
    model = build_cat_model(load_elicitation_table())
    assert len(model.skills) == 6
    assert [s.id for s in model.skills] == list(CAT_SKILL_IDS)
    assert all(s.prior_true == 0.5 for s in model.skills)
    assert len(model.gates) == 66
    assert all(g.kind is GateKind.AND for g in model.gates)
    assert validate_model(model) == []


def test_built_gate_examples():
    model = build_cat_model(load_elicitation_table())
    gates = model.gate_by_id()
    g11 = gates["1.1"]
    assert [(i.skill_id, i.strength) for i in g11.inputs] == [
        ("simple_patterns", 0.2), ("complex_patterns", 0.2), ("repetitions", 0.2),
        ("symmetries", 0.2), ("voice", 0.4), ("prediction", 0.4)]
    assert g11.leak_strength is None
    g71 = gates["7.1"]
    # elicited zeros are dropped, not kept as inert arcs
    assert [(i.skill_id, i.strength) for i in g71.inputs] == [
        ("complex_patterns", 0.7), ("repetitions", 0.9),
        ("voice", 0.9), ("prediction", 0.9)]
    assert g71.leak_strength == pytest.approx(0.4)
    assert "12.1" not in gates and "9.2" not in gates


def test_bundled_model_equals_rebuilt_model():
    assert load_cat_model() == build_cat_model(load_elicitation_table())


def test_build_rejects_invalid_table():
    with pytest.raises(ContractViolation):
        build_cat_model(CatElicitationTable(rows={}))


# -- evidence protocol ----------------------------------------------------------


def test_evidence_for_student_1_question_1():
    evidence = answers_to_evidence(load_answer_matrix(), "1", load_cat_model())
    assert evidence["1.1"] is ND  # answered "no"
    assert evidence["1.2"] is D  # answered "yes"
    assert all(f"1.{s}" not in evidence for s in (3, 4, 5, 6))


def test_evidence_for_student_12_question_1_all_failed():
    evidence = answers_to_evidence(load_answer_matrix(), "12", load_cat_model())
    assert all(evidence[f"1.{s}"] is ND for s in range(1, 7))


def test_blank_cells_contribute_no_evidence():
    model = load_cat_model()
    evidence = answers_to_evidence(load_answer_matrix(), "3", model)
    assert all(gate_id in model.gate_by_id() for gate_id in evidence)
    # student 3 attempted question 9 at the first level only
    assert "9.1" in evidence and "9.3" not in evidence and "9.5" not in evidence


def test_fully_blank_question_contributes_no_evidence():
    log = AnswerLog(
        student_ids=("1",),
        records=(
            AnswerRow("1", "1", ("yes",)),
            AnswerRow("2", "1", ("",)),
            AnswerRow("2", "2", ("",)),
        ))
    evidence = answers_to_evidence(log, "1")
    assert evidence == {"1.1": D}


def test_unknown_student_rejected():
    with pytest.raises(UnknownStudentError):
        answers_to_evidence(load_answer_matrix(), "99")


def test_answer_at_undefined_sub_question_rejected():
    log = AnswerLog(
        student_ids=("1",),
        records=(AnswerRow("12", "1", ("yes",)),))  # 12.1 does not exist
    with pytest.raises(ParseError) as exc:
        answers_to_evidence(log, "1")
    assert exc.value.code == "UNDEFINED_SUBQUESTION"
    with pytest.raises(ParseError):
        answers_to_evidence(log, "1", load_cat_model())


# -- batch scoring ---------------------------------------------------------------


@pytest.fixture(scope="module")
def study_result():
    return score_all_students(load_cat_model(), load_answer_matrix())


def test_all_fifteen_students_scored(study_result):
    assert len(study_result.scores) == 15
    assert all(s.error is None for s in study_result.scores)
    assert all(len(s.vector) == 6 for s in study_result.scores)


def test_damaged_row_is_excluded_and_documented(study_result):
    assert len(study_result.excluded_rows) == 1
    assert "11,6" in study_result.excluded_rows[0]
    assert "cannot be placed" in study_result.excluded_rows[0]


def test_batch_scoring_agrees_with_exhaustive_oracle(study_result):
    model = load_cat_model()
    answers = load_answer_matrix()
    worst = 0.0
    for score in study_result.scores:
        evidence = answers_to_evidence(answers, score.student_id, model)
        oracle = brute_force_posteriors(model, evidence)
        for a, b in zip(score.posteriors, oracle):
            worst = max(worst, abs(a.posterior_true - b.posterior_true))
    assert worst <= 1e-10


def test_batch_captures_per_student_errors_without_aborting():
    model = load_cat_model()
    log = AnswerLog(
        student_ids=("1", "2"),
        records=(
            AnswerRow("1", "1", ("yes", "yes")),
            AnswerRow("12", "1", ("", "no")),  # undefined for student 2 only
        ))
    result = score_all_students(model, log)
    assert result.scores[0].error is None
    assert result.scores[1].error is not None
    assert "UNDEFINED_SUBQUESTION" in result.scores[1].error or "undefined" in result.scores[1].error


def test_published_row_2_student_has_high_symmetries(study_result):
    # The published account singles out its second pupil as the only one
    # with strong symmetry evidence; the closest scored student must show
    # symmetries at 0.9 or above.
    match = compare_to_reference(study_result)[1]
    student = next(s for s in study_result.scores if s.student_id == match.student_id)
    symmetries = student.vector[CAT_SKILL_IDS.index("symmetries")]
    assert symmetries >= 0.9


def test_published_row_3_student_has_max_complex_patterns(study_result):
    # The published account's third pupil is the strongest on complex
    # patterns across the whole cohort.
    match = compare_to_reference(study_result)[2]
    target = next(s for s in study_result.scores if s.student_id == match.student_id)
    complex_idx = CAT_SKILL_IDS.index("complex_patterns")
    best = max(s.vector[complex_idx] for s in study_result.scores)
    assert target.vector[complex_idx] == pytest.approx(best, abs=1e-12)


def test_reference_rows_have_expected_shape():
    assert len(REFERENCE_POSTERIOR_ROWS) == 4
    assert all(len(row) == 6 for row in REFERENCE_POSTERIOR_ROWS)
    matches = compare_to_reference(
        score_all_students(load_cat_model(), load_answer_matrix()))
    assert [m.row_index for m in matches] == [0, 1, 2, 3]
    assert all(m.student_id is not None for m in matches)
