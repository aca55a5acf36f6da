"""Serialization for models, answer logs, and scoring results.

Model documents are JSON with a fixed key order so that serialization is
byte-stable: parse(serialize(parse(text))) == parse(text), and
serialize(parse(serialize(m))) == serialize(m).

Answer logs are CSV matrices: one column per student, one row per
sub-question.  Real-world logs contain damaged rows; ingestion flags any
row whose cells it cannot place instead of guessing, keeps the raw line
so serialization can reproduce it verbatim, and excludes it from scoring.
Placeholder rows (no sub-question id, every cell blank) are preserved the
same way but are not treated as damage.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import ParseError
from .inference import SkillPosterior
from .model import AssessmentModel, GateInput, GateKind, NoisyGate, SkillVariable

__all__ = [
    "MODEL_FORMAT_VERSION",
    "parse_model",
    "serialize_model",
    "AnswerRow",
    "FlaggedRow",
    "PlaceholderRow",
    "AnswerLog",
    "parse_answers",
    "serialize_answers",
    "serialize_results",
]

MODEL_FORMAT_VERSION = 1

_VALID_CELLS = ("yes", "no", "")


# -- model documents ---------------------------------------------------------


def _require(obj: dict, key: str, types, where: str):
    if key not in obj:
        raise ParseError(f"{where}: missing required field {key!r}", code="MISSING_FIELD")
    value = obj[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise ParseError(f"{where}: field {key!r} has the wrong type", code="BAD_TYPE")
    return value


def parse_model(text: str) -> AssessmentModel:
    """Parse a JSON model document.

    Checks structure only (field presence, types, enum values); semantic
    checks such as id uniqueness and parameter ranges belong to
    :func:`skillgate.model.validate_model`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"model document is not valid JSON: {exc}", code="MALFORMED") from None
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object", code="MALFORMED")
    version = _require(doc, "format_version", int, "document")
    if version != MODEL_FORMAT_VERSION:
        raise ParseError(
            f"unsupported format_version {version}", code="UNSUPPORTED_VERSION")

    skills = []
    raw_skills = _require(doc, "skills", list, "document")
    for idx, item in enumerate(raw_skills):
        where = f"skills[{idx}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: must be an object", code="BAD_TYPE")
        skills.append(SkillVariable(
            id=_require(item, "id", str, where),
            name=str(item.get("name", "")),
            prior_true=float(_require(item, "prior_true", (int, float), where)),
        ))

    gates = []
    raw_gates = _require(doc, "gates", list, "document")
    for idx, item in enumerate(raw_gates):
        where = f"gates[{idx}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: must be an object", code="BAD_TYPE")
        kind_text = _require(item, "kind", str, where)
        try:
            kind = GateKind(kind_text)
        except ValueError:
            raise ParseError(f"{where}: unknown gate kind {kind_text!r}", code="BAD_KIND") from None
        inputs = []
        for jdx, raw_inp in enumerate(_require(item, "inputs", list, where)):
            iwhere = f"{where}.inputs[{jdx}]"
            if not isinstance(raw_inp, dict):
                raise ParseError(f"{iwhere}: must be an object", code="BAD_TYPE")
            inputs.append(GateInput(
                skill_id=_require(raw_inp, "skill", str, iwhere),
                strength=float(_require(raw_inp, "strength", (int, float), iwhere)),
            ))
        leak = item.get("leak_strength")
        if leak is not None and (isinstance(leak, bool) or not isinstance(leak, (int, float))):
            raise ParseError(f"{where}: leak_strength has the wrong type", code="BAD_TYPE")
        gates.append(NoisyGate(
            id=_require(item, "id", str, where),
            kind=kind,
            inputs=tuple(inputs),
            leak_strength=None if leak is None else float(leak),
        ))

    return AssessmentModel(
        skills=tuple(skills),
        gates=tuple(gates),
        name=str(doc.get("name", "")),
        version=str(doc.get("version", "")),
    )


def serialize_model(model: AssessmentModel) -> str:
    """Canonical JSON for a model: fixed key order, two-space indent."""
    doc: dict = {"format_version": MODEL_FORMAT_VERSION}
    if model.name:
        doc["name"] = model.name
    if model.version:
        doc["version"] = model.version
    doc["skills"] = [
        {"id": s.id, **({"name": s.name} if s.name else {}), "prior_true": s.prior_true}
        for s in model.skills
    ]
    doc["gates"] = []
    for g in model.gates:
        entry: dict = {"id": g.id, "kind": g.kind.value}
        if g.leak_strength is not None:
            entry["leak_strength"] = g.leak_strength
        entry["inputs"] = [
            {"skill": i.skill_id, "strength": i.strength} for i in g.inputs
        ]
        doc["gates"].append(entry)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# -- answer logs -------------------------------------------------------------


@dataclass(frozen=True)
class AnswerRow:
    """One placeable row: a sub-question and its per-student cells."""

    question_id: str
    sub_question_id: str
    cells: tuple[str, ...]  # "yes" / "no" / "" per student, in column order


@dataclass(frozen=True)
class FlaggedRow:
    """A row whose cells could not be placed; kept verbatim, never scored."""

    line_number: int
    raw: str
    reason: str


@dataclass(frozen=True)
class PlaceholderRow:
    """A structural filler row with no sub-question id and no data."""

    line_number: int
    raw: str


Record = Union[AnswerRow, FlaggedRow, PlaceholderRow]


@dataclass(frozen=True)
class AnswerLog:
    """A parsed answer matrix plus everything needed to re-emit it."""

    student_ids: tuple[str, ...]
    records: tuple[Record, ...]

    @property
    def rows(self) -> tuple[AnswerRow, ...]:
        return tuple(r for r in self.records if isinstance(r, AnswerRow))

    @property
    def flagged(self) -> tuple[FlaggedRow, ...]:
        return tuple(r for r in self.records if isinstance(r, FlaggedRow))

    def cell(self, question_id: str, sub_question_id: str, student_id: str) -> str:
        """Cell value for one student, or "" when the row is absent."""
        col = self.student_ids.index(student_id)
        for row in self.rows:
            if row.question_id == question_id and row.sub_question_id == sub_question_id:
                return row.cells[col]
        return ""


def _split_line(line: str) -> list[str]:
    return next(csv.reader([line]))


def parse_answers(text: str) -> AnswerLog:
    """Parse an answer-log CSV.

    Header: ``question_id,sub_question_id,<student ids...>``.  Cells are
    yes, no, or blank (case-insensitive, surrounding space ignored); any
    other token is a hard parse error.  A row with the wrong number of
    cells is flagged and excluded rather than repaired: there is no safe
    way to know which students the surviving cells belong to.
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError("answer log is empty", code="MALFORMED")
    header = _split_line(lines[0])
    if len(header) < 3 or header[0] != "question_id" or header[1] != "sub_question_id":
        raise ParseError(
            "header must be question_id,sub_question_id,<student ids...>",
            code="MALFORMED")
    student_ids = tuple(h.strip() for h in header[2:])
    if any(not s for s in student_ids) or len(set(student_ids)) != len(student_ids):
        raise ParseError("student ids must be unique and non-empty", code="MALFORMED")

    expected = 2 + len(student_ids)
    records: list[Record] = []
    seen: set[tuple[str, str]] = set()
    for line_number, line in enumerate(lines[1:], start=2):
        if line.strip() == "":
            continue
        fields = _split_line(line)
        qid = fields[0].strip() if fields else ""
        sub = fields[1].strip() if len(fields) > 1 else ""
        cells = [f.strip().lower() for f in fields[2:]]
        if sub == "" and all(c == "" for c in cells):
            records.append(PlaceholderRow(line_number=line_number, raw=line))
            continue
        if len(fields) != expected:
            records.append(FlaggedRow(
                line_number=line_number, raw=line,
                reason=f"expected {expected} fields, found {len(fields)}; "
                       "cells cannot be placed"))
            continue
        for col, cell in enumerate(cells):
            if cell not in _VALID_CELLS:
                raise ParseError(
                    f"line {line_number}, student {student_ids[col]!r}: "
                    f"invalid cell {fields[2 + col]!r}", code="INVALID_CELL")
        key = (qid, sub)
        if key in seen:
            raise ParseError(
                f"line {line_number}: duplicate row for question "
                f"{qid!r} sub-question {sub!r}", code="DUPLICATE_ROW")
        seen.add(key)
        records.append(AnswerRow(question_id=qid, sub_question_id=sub, cells=tuple(cells)))

    return AnswerLog(student_ids=student_ids, records=tuple(records))


def serialize_answers(log: AnswerLog) -> str:
    """Re-emit an answer log; flagged and placeholder rows go out verbatim."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["question_id", "sub_question_id", *log.student_ids])
    for record in log.records:
        if isinstance(record, AnswerRow):
            writer.writerow([record.question_id, record.sub_question_id, *record.cells])
        else:
            buf.write(record.raw + "\n")
    return buf.getvalue()


def serialize_results(
    posteriors: Iterable[SkillPosterior], decimals: int = 2
) -> str:
    """Posteriors as CSV, probabilities rounded to ``decimals`` places."""
    if decimals < 0:
        raise ParseError("decimals must be non-negative", code="BAD_TYPE")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["skill_id", "posterior_true", "absorbed_count", "joint_count"])
    for sp in posteriors:
        writer.writerow([
            sp.skill_id,
            f"{sp.posterior_true:.{decimals}f}",
            sp.absorbed_count,
            sp.joint_count,
        ])
    return buf.getvalue()
