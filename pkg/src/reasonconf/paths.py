"""Core types for sampled reasoning paths and answer-level confidence.

A sampled path carries its text, per-token natural-log probabilities, the
extracted answer label, and a derived scalar probability.  Batches preserve
sampling order, which is the tie-breaking order everywhere downstream.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

from .errors import EmptyBatchError, InvalidPathError, NoCandidatesError

ProbMode = Literal["joint", "length_normalized"]

PROB_FLOOR = 1e-300

_BOXED_RE = re.compile(r"^\\boxed\{(.*)\}$", re.DOTALL)


@dataclass(frozen=True)
class AnswerLabel:
    """A canonical answer, optionally tagged with an equivalence-class id.

    Two labels compare equal on ``class_id`` when both carry one, otherwise
    on the canonical string.  Labels that are hashed together (dict keys,
    set members) must either all carry a class id or all not; ingestion
    enforces this per problem.
    """

    canonical: str
    class_id: Optional[int] = None

    def __post_init__(self):
        if not self.canonical and self.class_id is None:
            raise InvalidPathError("answer label is empty")

    def __eq__(self, other):
        if not isinstance(other, AnswerLabel):
            return NotImplemented
        if self.class_id is not None and other.class_id is not None:
            return self.class_id == other.class_id
        return self.canonical == other.canonical

    def __hash__(self):
        if self.class_id is not None:
            return hash(("class", self.class_id))
        return hash(("canon", self.canonical))

    def __repr__(self):
        if self.class_id is not None:
            return f"AnswerLabel({self.canonical!r}, class_id={self.class_id})"
        return f"AnswerLabel({self.canonical!r})"


def canonicalize_answer(text: str, class_id: Optional[int] = None) -> AnswerLabel:
    """Build a label from raw answer text.

    Trims whitespace, strips any surrounding ``\\boxed{...}`` wrappers, and
    case-folds.  ``class_id`` is attached unchanged and, when present, takes
    precedence in comparisons.
    """
    out = text.strip()
    while True:
        m = _BOXED_RE.match(out)
        if m is None:
            break
        out = m.group(1).strip()
    return AnswerLabel(canonical=out.casefold(), class_id=class_id)


@dataclass(frozen=True)
class ReasoningPath:
    """One sampled reasoning path.

    ``path_prob`` is the scalar probability attached to the path; ingested
    paths derive it from the token log-probs via :func:`derive_path_prob`,
    synthetic paths carry their exact sampling probability.  ``ext_score``
    is a reserved slot for an externally supplied score in [0, 1]; no
    estimator reads it.
    """

    text: str
    token_logprobs: Tuple[float, ...]
    answer: AnswerLabel
    path_prob: float
    ext_score: Optional[float] = None

    def __post_init__(self):
        if len(self.token_logprobs) == 0:
            raise InvalidPathError("token_logprobs is empty")
        if not (0.0 < self.path_prob <= 1.0):
            raise InvalidPathError(f"path_prob {self.path_prob} outside (0, 1]")
        if self.ext_score is not None and not (0.0 <= self.ext_score <= 1.0):
            raise InvalidPathError(f"ext_score {self.ext_score} outside [0, 1]")


def derive_path_prob(token_logprobs: Sequence[float], mode: ProbMode) -> float:
    """Collapse token log-probabilities into one path probability.

    ``joint`` exponentiates the sum (the sequence generation probability);
    ``length_normalized`` exponentiates the mean (geometric mean per token),
    which keeps long paths away from underflow.  The result is clamped to
    [1e-300, 1].
    """
    if len(token_logprobs) == 0:
        raise InvalidPathError("cannot derive a probability from zero tokens")
    if mode == "joint":
        log_p = math.fsum(token_logprobs)
    elif mode == "length_normalized":
        log_p = math.fsum(token_logprobs) / len(token_logprobs)
    else:
        raise InvalidPathError(f"unknown probability mode {mode!r}")
    return min(1.0, max(PROB_FLOOR, math.exp(log_p)))


def make_path(
    text: str,
    token_logprobs: Sequence[float],
    answer: AnswerLabel,
    mode: ProbMode,
    ext_score: Optional[float] = None,
) -> ReasoningPath:
    """Construct a path with its probability derived in the given mode."""
    return ReasoningPath(
        text=text,
        token_logprobs=tuple(token_logprobs),
        answer=answer,
        path_prob=derive_path_prob(token_logprobs, mode),
        ext_score=ext_score,
    )


@dataclass(frozen=True)
class SampleBatch:
    """The n sampled paths for one problem, in sampling order."""

    paths: Tuple[ReasoningPath, ...]
    problem_id: str = ""

    @property
    def n(self) -> int:
        return len(self.paths)

    def require_nonempty(self):
        if not self.paths:
            raise EmptyBatchError(f"batch {self.problem_id!r} has no paths")


@dataclass
class ConfidenceMap:
    """Non-negative confidence per answer label (or per unique path for the
    path-keyed estimator).

    Entries are inserted in first-occurrence sampling order; that order is
    the deterministic tie-break used by :func:`select_answer`.
    """

    entries: Dict[AnswerLabel, float]
    kind: str

    def __post_init__(self):
        for label, value in self.entries.items():
            if value < 0:
                raise ValueError(f"negative confidence {value} for {label!r}")

    def total(self) -> float:
        return math.fsum(self.entries.values())


def unique_paths(batch: SampleBatch) -> List[ReasoningPath]:
    """Deduplicate by exact text, keeping first occurrences in sampling order."""
    seen = set()
    out: List[ReasoningPath] = []
    for path in batch.paths:
        if path.text not in seen:
            seen.add(path.text)
            out.append(path)
    return out


def group_by_answer(
    paths: Iterable[ReasoningPath],
) -> Dict[AnswerLabel, List[ReasoningPath]]:
    """Partition paths by answer label, groups ordered by first occurrence."""
    groups: Dict[AnswerLabel, List[ReasoningPath]] = {}
    for path in paths:
        groups.setdefault(path.answer, []).append(path)
    return groups


def select_answer(conf: ConfidenceMap) -> Tuple[AnswerLabel, float]:
    """Return the highest-confidence entry; ties go to the earliest-inserted.

    Insertion order equals first-occurrence sampling order for every map
    the estimators build, so selection is deterministic given a seed.
    """
    if not conf.entries:
        raise NoCandidatesError("cannot select from an empty confidence map")
    best_label = None
    best_value = -math.inf
    for label, value in conf.entries.items():
        if value > best_value:
            best_label, best_value = label, value
    return best_label, best_value
