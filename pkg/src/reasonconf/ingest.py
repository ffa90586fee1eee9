"""JSONL ingestion of sampled reasoning paths and result export.

One record per line:

    {"problem_id": "p1", "text": "...", "token_logprobs": [-0.4, -1.2],
     "answer": "42", "class_id": 3, "ext_score": 0.8}

``class_id`` and ``ext_score`` are optional.  Records are grouped into
batches by problem id in file order; probabilities are derived in the
configured mode.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .errors import ParseError, ReasonConfError
from .paths import (
    ProbMode,
    ReasoningPath,
    SampleBatch,
    canonicalize_answer,
    make_path,
)

_REQUIRED_KEYS = ("problem_id", "text", "token_logprobs", "answer")
_OPTIONAL_KEYS = ("class_id", "ext_score")


@dataclass(frozen=True)
class PathRecord:
    """Wire form of one sampled path, before probability derivation."""

    problem_id: str
    text: str
    token_logprobs: tuple
    answer: str
    class_id: Optional[int] = None
    ext_score: Optional[float] = None

    def to_json_obj(self) -> dict:
        obj = {
            "problem_id": self.problem_id,
            "text": self.text,
            "token_logprobs": list(self.token_logprobs),
            "answer": self.answer,
        }
        if self.class_id is not None:
            obj["class_id"] = self.class_id
        if self.ext_score is not None:
            obj["ext_score"] = self.ext_score
        return obj


def parse_record(obj: dict, line_no: int) -> PathRecord:
    """Validate one decoded JSONL object into a PathRecord."""
    if not isinstance(obj, dict):
        raise ParseError(line_no, "record is not a JSON object")
    for key in _REQUIRED_KEYS:
        if key not in obj:
            raise ParseError(line_no, f"missing required field {key!r}")
    unknown = set(obj) - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS)
    if unknown:
        raise ParseError(line_no, f"unknown fields {sorted(unknown)}")

    logprobs = obj["token_logprobs"]
    if not isinstance(logprobs, list) or len(logprobs) == 0:
        raise ParseError(line_no, "token_logprobs must be a non-empty array")
    values = []
    for lp in logprobs:
        if not isinstance(lp, (int, float)):
            raise ParseError(line_no, f"token log-prob {lp!r} is not a number")
        if lp > 0:
            raise ParseError(line_no, f"token log-prob {lp} is positive")
        values.append(float(lp))

    answer = obj["answer"]
    if not isinstance(answer, str) or not answer.strip():
        raise ParseError(line_no, "answer must be a non-empty string")

    class_id = obj.get("class_id")
    if class_id is not None and not isinstance(class_id, int):
        raise ParseError(line_no, f"class_id {class_id!r} is not an integer")
    ext_score = obj.get("ext_score")
    if ext_score is not None:
        if not isinstance(ext_score, (int, float)) or not (0.0 <= ext_score <= 1.0):
            raise ParseError(line_no, f"ext_score {ext_score!r} outside [0, 1]")
        ext_score = float(ext_score)

    return PathRecord(
        problem_id=str(obj["problem_id"]),
        text=str(obj["text"]),
        token_logprobs=tuple(values),
        answer=answer,
        class_id=class_id,
        ext_score=ext_score,
    )


def record_to_path(record: PathRecord, mode: ProbMode) -> ReasoningPath:
    return make_path(
        text=record.text,
        token_logprobs=record.token_logprobs,
        answer=canonicalize_answer(record.answer, record.class_id),
        mode=mode,
        ext_score=record.ext_score,
    )


def load_records(path: str, strict: bool = True) -> List[PathRecord]:
    """Parse a JSONL file into records, collecting per-line errors.

    In strict mode any malformed line aborts the run with a combined
    message; in lenient mode malformed lines are skipped.
    """
    records: List[PathRecord] = []
    problems: List[ParseError] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append(ParseError(line_no, f"invalid JSON: {exc.msg}"))
                continue
            try:
                records.append(parse_record(obj, line_no))
            except ParseError as exc:
                problems.append(exc)
    if problems and strict:
        details = "; ".join(str(p) for p in problems)
        raise ReasonConfError(f"{len(problems)} malformed line(s): {details}")
    return records


def load_jsonl(
    path: str, mode: ProbMode, strict: bool = True
) -> Dict[str, SampleBatch]:
    """Load and group records into one batch per problem, in file order."""
    records = load_records(path, strict=strict)
    grouped: Dict[str, List[ReasoningPath]] = {}
    has_class: Dict[str, bool] = {}
    for record in records:
        carries = record.class_id is not None
        if record.problem_id in has_class:
            if has_class[record.problem_id] != carries:
                raise ReasonConfError(
                    f"problem {record.problem_id!r} mixes records with and "
                    "without class_id; answer comparison would be ambiguous"
                )
        else:
            has_class[record.problem_id] = carries
        grouped.setdefault(record.problem_id, []).append(
            record_to_path(record, mode)
        )
    return {
        pid: SampleBatch(paths=tuple(paths), problem_id=pid)
        for pid, paths in grouped.items()
    }


@dataclass(frozen=True)
class ResultRow:
    """One scored selection, the unit of CSV/JSON export."""

    problem_id: str
    method: str
    n: int
    selected_answer: str
    confidence: float
    correct: bool


RESULT_FIELDS = ("problem_id", "method", "n", "selected_answer", "confidence", "correct")


def render_results(rows: Sequence[ResultRow], format: str) -> str:
    """Deterministic text rendering; identical inputs give identical bytes."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RESULT_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row.problem_id,
                    row.method,
                    row.n,
                    row.selected_answer,
                    repr(row.confidence),
                    "true" if row.correct else "false",
                ]
            )
        return buf.getvalue()
    if format == "json":
        objs = [
            {
                "problem_id": row.problem_id,
                "method": row.method,
                "n": row.n,
                "selected_answer": row.selected_answer,
                "confidence": row.confidence,
                "correct": row.correct,
            }
            for row in rows
        ]
        return json.dumps(objs, indent=2) + "\n"
    raise ReasonConfError(f"unknown export format {format!r}")


def export_results(rows: Sequence[ResultRow], dest: str, format: str = "csv"):
    """Write rows to ``dest``; the file only appears if rendering succeeds."""
    text = render_results(rows, format)
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
