"""Command-line interface: subcommands, exit codes, output stability."""

import json

import pytest

from skillgate.cat import load_cat_model
from skillgate.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, main
from skillgate.formats import serialize_model


@pytest.fixture
def model_path(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(serialize_model(load_cat_model()))
    return str(path)


@pytest.fixture
def answers_path(tmp_path):
    from importlib import resources

    text = resources.files("skillgate.data").joinpath("cat_answers.csv").read_text()
    path = tmp_path / "answers.csv"
    path.write_text(text)
    return str(path)


def test_validate_ok(model_path, capsys):
    assert main(["validate", model_path]) == EXIT_OK
    out = capsys.readouterr().out
    assert "6 skills, 66 gates" in out


def test_validate_reports_violations(tmp_path, capsys):
    doc = {
        "format_version": 1,
        "skills": [{"id": "a", "prior_true": 2.0}],
        "gates": [],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == EXIT_FAIL
    assert "PRIOR_OUT_OF_RANGE" in capsys.readouterr().out


def test_validate_missing_file_is_io_error(capsys):
    assert main(["validate", "/no/such/file.json"]) == EXIT_IO


def test_validate_malformed_json_fails(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    assert main(["validate", str(path)]) == EXIT_FAIL
    assert "MALFORMED" in capsys.readouterr().err


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_infer_single_student_with_oracle(model_path, answers_path, capsys):
    assert main(["infer", model_path, answers_path,
                 "--student", "3", "--oracle"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("skill_id,posterior_true,absorbed_count,joint_count\n")
    assert "oracle agreement: max |delta|" in out
    assert "# excluded line 67" in out


def test_infer_all_students(model_path, answers_path, capsys):
    assert main(["infer", model_path, answers_path]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("# student ") == 15


def test_infer_unknown_student_fails(model_path, answers_path, capsys):
    assert main(["infer", model_path, answers_path, "--student", "99"]) == EXIT_FAIL


def test_infer_output_is_byte_stable(model_path, answers_path, capsys):
    main(["infer", model_path, answers_path])
    first = capsys.readouterr().out
    main(["infer", model_path, answers_path])
    assert capsys.readouterr().out == first


def test_cat_report_table_and_exclusions(capsys):
    code = main(["cat-report"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "student,simple_patterns,complex_patterns,repetitions," \
                       "symmetries,voice,prediction"
    assert len([ln for ln in lines if not ln.startswith("#")]) == 16
    assert any("excluded" in ln for ln in lines)


def test_cat_report_compare_reference_summary_line(capsys):
    code = main(["cat-report", "--compare-reference"])
    out = capsys.readouterr().out
    assert "/4 reference rows matched" in out
    matched_all = "4/4 reference rows matched" in out
    assert code == (EXIT_OK if matched_all else EXIT_FAIL)


def test_cat_report_is_byte_stable(capsys):
    main(["cat-report", "--compare-reference"])
    first = capsys.readouterr().out
    main(["cat-report", "--compare-reference"])
    assert capsys.readouterr().out == first


def test_bench_reports_linear_and_oracle_columns(capsys):
    assert main(["bench", "--skills", "6", "--gates", "4", "--seed", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "linear_ms" in out and "oracle_ms" in out


def test_bench_reports_refusal_beyond_oracle_budget(capsys):
    assert main(["bench", "--skills", "8", "--gates", "3",
                 "--seed", "1", "--oracle-budget", "4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "refused (budget 4)" in out


def test_bench_resamples_impossible_evidence_draws(capsys):
    # seed 7 at 20 skills hits a genuinely inconsistent random draw;
    # the bench must resample it, not abort
    assert main(["bench", "--skills", "20", "--gates", "8", "--seed", "7"]) == EXIT_OK
    out = capsys.readouterr().out
    assert len([l for l in out.splitlines() if l.strip()]) == 1 + 6  # header + rungs
