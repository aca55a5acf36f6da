"""Command-line entry point.

Subcommands: validate, infer, cat-report, bench, serve.  Exit codes:
0 success, 1 validation or inference failure, 2 usage error (argparse),
3 I/O error.  Output tables use fixed decimal formatting and
deterministic ordering so identical inputs produce identical bytes
(bench timings excepted: the table layout is stable, the numbers are
measurements).
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path

from .cat import (
    REFERENCE_MATCH_TOLERANCE,
    REFERENCE_POSTERIOR_ROWS,
    compare_to_reference,
    load_answer_matrix,
    load_cat_model,
    score_all_students,
)
from .errors import (
    InconsistentEvidenceError,
    OracleSizeError,
    ParseError,
    SkillgateError,
)
from .formats import parse_answers, parse_model, serialize_results
from .inference import (
    BRUTE_FORCE_SKILL_CAP,
    Observation,
    brute_force_posteriors,
    infer_posteriors,
)
from .model import AssessmentModel, GateInput, GateKind, NoisyGate, SkillVariable, validate_model

__all__ = ["main"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3

ORACLE_TOLERANCE = 1e-10


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _IoFailure(f"cannot read {path}: {exc}") from None


class _IoFailure(Exception):
    pass


def _cmd_validate(args: argparse.Namespace) -> int:
    model = parse_model(_read_text(args.model))
    violations = validate_model(model)
    if not violations:
        print(f"ok: {len(model.skills)} skills, {len(model.gates)} gates, no violations")
        return EXIT_OK
    for v in violations:
        print(f"{v.code}: {v.message}")
    print(f"{len(violations)} violation(s)")
    return EXIT_FAIL


def _matrix_evidence(model: AssessmentModel, log, student_id: str) -> dict[str, Observation]:
    """Evidence for one answer-log column; gate ids are question.sub."""
    gates = model.gate_by_id()
    col = log.student_ids.index(student_id)
    evidence: dict[str, Observation] = {}
    for row in log.rows:
        cell = row.cells[col]
        if cell == "":
            continue
        gate_id = f"{row.question_id}.{row.sub_question_id}"
        if gate_id not in gates:
            raise SkillgateError(
                f"student {student_id}: answer for unknown gate {gate_id}")
        correct = cell == "yes"
        if gates[gate_id].kind is GateKind.AND:
            obs = Observation.DISTINGUISHED if correct else Observation.NON_DISTINGUISHED
        else:
            obs = Observation.NON_DISTINGUISHED if correct else Observation.DISTINGUISHED
        evidence[gate_id] = obs
    return evidence


def _oracle_check(model: AssessmentModel, evidence: dict[str, Observation]) -> float:
    fast = infer_posteriors(model, evidence)
    slow = brute_force_posteriors(model, evidence)
    return max(
        abs(a.posterior_true - b.posterior_true) for a, b in zip(fast, slow)
    )


def _cmd_infer(args: argparse.Namespace) -> int:
    model = parse_model(_read_text(args.model))
    violations = validate_model(model)
    if violations:
        for v in violations:
            print(f"{v.code}: {v.message}")
        return EXIT_FAIL
    log = parse_answers(_read_text(args.answers))
    students = [args.student] if args.student else list(log.student_ids)
    if args.student and args.student not in log.student_ids:
        print(f"unknown student id {args.student!r}")
        return EXIT_FAIL

    worst = 0.0
    failed = False
    for sid in students:
        evidence = _matrix_evidence(model, log, sid)
        try:
            posteriors = infer_posteriors(model, evidence)
        except SkillgateError as exc:
            print(f"student {sid}: {exc}")
            failed = True
            continue
        if len(students) > 1:
            print(f"# student {sid} ({len(evidence)} observations)")
        sys.stdout.write(serialize_results(posteriors, decimals=args.decimals))
        if args.oracle:
            worst = max(worst, _oracle_check(model, evidence))
    for fr in log.flagged:
        print(f"# excluded line {fr.line_number}: {fr.reason}")
    if args.oracle:
        if worst > ORACLE_TOLERANCE:
            print(f"oracle agreement FAILED: max |delta| = {worst:.3e} > {ORACLE_TOLERANCE:.0e}")
            return EXIT_FAIL
        print(f"oracle agreement: max |delta| = {worst:.3e} (within {ORACLE_TOLERANCE:.0e})")
    return EXIT_FAIL if failed else EXIT_OK


def _cmd_cat_report(args: argparse.Namespace) -> int:
    model = load_cat_model()
    answers = load_answer_matrix()
    result = score_all_students(model, answers)

    skill_ids = [s.id for s in model.skills]
    print("student," + ",".join(skill_ids))
    failed = False
    for score in result.scores:
        if score.vector is None:
            print(f"{score.student_id},error: {score.error}")
            failed = True
        else:
            cells = ",".join(f"{v:.{args.decimals}f}" for v in score.vector)
            print(f"{score.student_id},{cells}")
    for line in result.excluded_rows:
        print(f"# excluded {line}")

    if args.compare_reference:
        matches = compare_to_reference(result)
        for m in matches:
            ref = ",".join(f"{v:.2f}" for v in m.reference)
            print(
                f"# reference row {m.row_index + 1} ({ref}): closest student "
                f"{m.student_id}, max |delta| = {m.max_abs_error:.3f}, "
                f"{'matched' if m.matched else 'NOT matched'}")
        n = sum(1 for m in matches if m.matched)
        print(f"{n}/{len(REFERENCE_POSTERIOR_ROWS)} reference rows matched "
              f"(±{REFERENCE_MATCH_TOLERANCE})")
        if n < len(REFERENCE_POSTERIOR_ROWS):
            failed = True
    return EXIT_FAIL if failed else EXIT_OK


def _random_model(rng: random.Random, n_skills: int, n_gates: int) -> AssessmentModel:
    skills = tuple(
        SkillVariable(id=f"s{i}", prior_true=rng.uniform(0.05, 0.95))
        for i in range(n_skills)
    )
    gates = []
    for j in range(n_gates):
        kind = rng.choice((GateKind.OR, GateKind.AND))
        width = rng.randint(1, min(8, n_skills))
        picked = rng.sample(range(n_skills), width)
        inputs = tuple(
            GateInput(skill_id=f"s{i}", strength=rng.uniform(0.05, 1.0)) for i in picked
        )
        leak = rng.choice((None, rng.uniform(0.0, 0.9)))
        gates.append(NoisyGate(id=f"g{j}", kind=kind, inputs=inputs, leak_strength=leak))
    return AssessmentModel(skills=skills, gates=tuple(gates))


def _random_evidence(rng: random.Random, model: AssessmentModel) -> dict[str, Observation]:
    evidence = {}
    for g in model.gates:
        r = rng.random()
        if r < 0.4:
            evidence[g.id] = Observation.DISTINGUISHED
        elif r < 0.8:
            evidence[g.id] = Observation.NON_DISTINGUISHED
    return evidence


def _consistent_instance(
    rng: random.Random, n_skills: int, n_gates: int
) -> tuple[AssessmentModel, dict[str, Observation]]:
    """Draw a random model plus evidence that has non-zero probability.

    Random mixed-kind evidence can be genuinely impossible (a no-leak
    gate observed in a state its answered neighbors rule out), which is
    a correct inference outcome but useless for timing; resample.
    """
    for _ in range(64):
        model = _random_model(rng, n_skills, n_gates)
        evidence = _random_evidence(rng, model)
        try:
            infer_posteriors(model, evidence)
        except InconsistentEvidenceError:
            continue
        return model, evidence
    raise SkillgateError("could not draw consistent benchmark evidence")


def _cmd_bench(args: argparse.Namespace) -> int:
    rng = random.Random(args.seed)
    rungs = [n for n in (2, 4, 8, 12, 16, 20, 24) if n <= args.skills]
    if args.skills not in rungs:
        rungs.append(args.skills)
    print(f"{'skills':>6} {'gates':>6} {'linear_ms':>10} {'oracle_ms':>12}")
    for n in rungs:
        model, evidence = _consistent_instance(rng, n, args.gates)
        t0 = time.perf_counter()
        infer_posteriors(model, evidence)
        linear_ms = (time.perf_counter() - t0) * 1e3
        if n > args.oracle_budget:
            oracle = f"refused (budget {args.oracle_budget})"
        else:
            try:
                t0 = time.perf_counter()
                brute_force_posteriors(model, evidence)
                oracle = f"{(time.perf_counter() - t0) * 1e3:.2f}"
            except OracleSizeError as exc:
                oracle = f"refused (cap {exc.cap})"
        print(f"{n:>6} {args.gates:>6} {linear_ms:>10.2f} {oracle:>12}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, _, port_text = args.addr.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"invalid --addr {args.addr!r}, expected HOST:PORT")
        return EXIT_USAGE
    app = create_app(
        models_dir=args.models_dir, data_dir=args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=host, port=int(port_text), log_level=args.log_level)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillgate",
        description="Skill assessment with noisy logical gates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model document")
    p.add_argument("model", help="model JSON file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("infer", help="score an answer log against a model")
    p.add_argument("model", help="model JSON file")
    p.add_argument("answers", help="answer-log CSV file")
    p.add_argument("--student", help="score a single student column")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check against the exhaustive oracle")
    p.add_argument("--decimals", type=int, default=4, help="output precision")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("cat-report", help="score the bundled study and report")
    p.add_argument("--compare-reference", action="store_true",
                   help="compare against the published reference rows")
    p.add_argument("--decimals", type=int, default=2, help="output precision")
    p.set_defaults(func=_cmd_cat_report)

    p = sub.add_parser("bench", help="time the linear path against the oracle")
    p.add_argument("--skills", type=int, default=16)
    p.add_argument("--gates", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle-budget", type=int, default=16,
                   help="largest skill count the bench runs the oracle at "
                        f"(hard cap {BRUTE_FORCE_SKILL_CAP})")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--addr", default="127.0.0.1:8000", help="HOST:PORT")
    p.add_argument("--models-dir", default=None, help="directory of model documents")
    p.add_argument("--data-dir", default="./skillgate-data",
                   help="directory for the session database")
    p.add_argument("--ui-dir", default=None,
                   help="built static UI to serve under /ui")
    p.add_argument("--log-level", default="info")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _IoFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO
    except ParseError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SkillgateError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
