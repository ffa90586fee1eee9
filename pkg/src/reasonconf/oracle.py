"""Synthetic sampler with a fully known distribution.

The oracle is a categorical distribution over finitely many abstract paths,
each mapped to an answer.  Because every probability is known exactly, any
estimator's moments can be computed by exhaustive enumeration of ordered
sample outcomes and compared against closed-form claims or Monte Carlo runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import (
    EnumerationTooLargeError,
    InvalidSampleSizeError,
    ReasonConfError,
)
from .paths import AnswerLabel, ConfidenceMap, ReasoningPath, SampleBatch

ENUMERATION_CAP = 10_000_000

EstimatorFn = Callable[[SampleBatch], ConfidenceMap]


@dataclass(frozen=True)
class OracleSpec:
    """A finite path set with exact probabilities and a designated truth.

    ``path_probs`` must sum to 1 within 1e-12.  The truth label may or may
    not appear among the path answers (a model can be wrong everywhere).
    """

    path_probs: Tuple[float, ...]
    path_answers: Tuple[AnswerLabel, ...]
    truth: AnswerLabel

    def __post_init__(self):
        if len(self.path_probs) == 0:
            raise ReasonConfError("oracle needs at least one path")
        if len(self.path_probs) != len(self.path_answers):
            raise ReasonConfError("path_probs and path_answers lengths differ")
        for q in self.path_probs:
            if not (0.0 < q <= 1.0):
                raise ReasonConfError(f"path probability {q} outside (0, 1]")
        total = math.fsum(self.path_probs)
        if abs(total - 1.0) > 1e-12:
            raise ReasonConfError(f"path probabilities sum to {total}, not 1")

    @property
    def num_paths(self) -> int:
        return len(self.path_probs)

    def make_paths(self) -> Tuple[ReasoningPath, ...]:
        """Materialize one ReasoningPath per abstract path.

        Texts are unique per index, so text-dedup coincides with abstract
        path identity.  The carried path_prob is the exact sampling
        probability, not a value re-derived from log-probs.
        """
        return tuple(
            ReasoningPath(
                text=f"t{i}",
                token_logprobs=(math.log(q),),
                answer=a,
                path_prob=q,
            )
            for i, (q, a) in enumerate(zip(self.path_probs, self.path_answers))
        )


def oracle_from_json(doc: dict) -> OracleSpec:
    """Build an oracle from its JSON document form.

    Schema: ``{"path_probs": [...], "path_answers": ["A", ...], "truth": "A"}``.
    Answer strings are used verbatim as labels.
    """
    try:
        probs = tuple(float(q) for q in doc["path_probs"])
        answers = tuple(AnswerLabel(str(a)) for a in doc["path_answers"])
        truth = AnswerLabel(str(doc["truth"]))
    except KeyError as exc:
        raise ReasonConfError(f"oracle document missing key {exc}") from exc
    return OracleSpec(path_probs=probs, path_answers=answers, truth=truth)


def load_oracle(path: str) -> OracleSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return oracle_from_json(json.load(fh))


def true_answer_prob(oracle: OracleSpec, ans: AnswerLabel) -> float:
    """Exact probability mass of an answer: sum over its paths, 0 if absent."""
    return math.fsum(
        q for q, a in zip(oracle.path_probs, oracle.path_answers) if a == ans
    )


def sample_batch(oracle: OracleSpec, n: int, seed: int) -> SampleBatch:
    """Draw n i.i.d. paths from the oracle's categorical distribution.

    Uses numpy's PCG64 stream seeded through SeedSequence, so batches are
    bit-reproducible across platforms for a fixed seed.  Each drawn path
    carries its exact probability and answer.
    """
    if n < 1:
        raise InvalidSampleSizeError(f"sample size must be >= 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    paths = oracle.make_paths()
    idx = rng.choice(oracle.num_paths, size=n, p=np.asarray(oracle.path_probs))
    return SampleBatch(paths=tuple(paths[i] for i in idx), problem_id="oracle")


def sample_count_matrix(
    oracle: OracleSpec, n: int, trials: int, seed: int
) -> np.ndarray:
    """Per-trial sample counts, shape (trials, num_paths).

    Row t holds how many of the n draws in trial t landed on each path;
    equivalent in distribution to counting ``sample_batch`` draws, but
    vectorized for large Monte Carlo runs.
    """
    if n < 1:
        raise InvalidSampleSizeError(f"sample size must be >= 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return rng.multinomial(n, np.asarray(oracle.path_probs), size=trials)


@dataclass(frozen=True)
class OutcomeEnumeration:
    """Exact moments of an estimator over every ordered sample outcome.

    ``estimation_error`` is the mean squared deviation from the true
    confidence, E[(est - p)^2].  ``reasoning_error`` is the mean squared
    deviation from the correctness indicator, E[(est - I)^2].  For a biased
    estimator the two are linked through the signed residual
    ``decomposition_estimation_error`` = reasoning_error - model_error,
    which is what the closed forms for the probability-sum estimators call
    their estimation term.
    """

    outcome_probs: Tuple[float, ...]
    outcome_values: Tuple[float, ...]
    expectation: float
    second_moment: float
    true_prob: float
    is_correct: bool
    estimation_error: float
    reasoning_error: float

    def __post_init__(self):
        total = math.fsum(self.outcome_probs)
        if abs(total - 1.0) > 1e-9:
            raise ReasonConfError(f"outcome probabilities sum to {total}, not 1")

    @property
    def model_error(self) -> float:
        ind = 1.0 if self.is_correct else 0.0
        return (self.true_prob - ind) ** 2

    @property
    def decomposition_estimation_error(self) -> float:
        return self.reasoning_error - self.model_error


def _estimator_key(
    estimator: EstimatorFn, path: ReasoningPath
) -> Optional[AnswerLabel]:
    """The label under which an estimator files a lone path, if any."""
    conf = estimator(SampleBatch(paths=(path,), problem_id="probe"))
    if not conf.entries:
        return None
    if len(conf.entries) != 1:
        raise ReasonConfError("estimator produced multiple entries for one path")
    return next(iter(conf.entries))


def exact_estimator_moments(
    oracle: OracleSpec,
    n: int,
    estimator: EstimatorFn,
    target: AnswerLabel,
) -> OutcomeEnumeration:
    """Enumerate all M^n ordered outcomes and average the estimator exactly.

    Each ordered outcome (i_1, ..., i_n) is weighted by the product of its
    path probabilities; the estimator is evaluated on the corresponding
    batch and its value read off for ``target``.  The target's true
    probability is the mass of oracle paths the estimator would file under
    that same label, so the computation works for answer-keyed and
    path-keyed estimators alike.

    Raises EnumerationTooLargeError when M^n exceeds 10^7.
    """
    if n < 1:
        raise InvalidSampleSizeError(f"enumeration needs n >= 1, got {n}")
    m = oracle.num_paths
    if m**n > ENUMERATION_CAP:
        raise EnumerationTooLargeError(
            f"{m}^{n} ordered outcomes exceed the cap of {ENUMERATION_CAP}"
        )

    paths = oracle.make_paths()
    keys = [_estimator_key(estimator, path) for path in paths]
    true_prob = math.fsum(
        q for q, key in zip(oracle.path_probs, keys) if key == target
    )
    matching = [a for a, key in zip(oracle.path_answers, keys) if key == target]
    if matching:
        is_correct = matching[0] == oracle.truth
    else:
        is_correct = target == oracle.truth
    ind = 1.0 if is_correct else 0.0

    outcome_probs: List[float] = []
    outcome_values: List[float] = []
    for idx in product(range(m), repeat=n):
        weight = math.prod(oracle.path_probs[i] for i in idx)
        batch = SampleBatch(paths=tuple(paths[i] for i in idx), problem_id="enum")
        conf = estimator(batch)
        outcome_probs.append(weight)
        outcome_values.append(conf.entries.get(target, 0.0))

    expectation = math.fsum(p * v for p, v in zip(outcome_probs, outcome_values))
    second = math.fsum(p * v * v for p, v in zip(outcome_probs, outcome_values))
    estimation = math.fsum(
        p * (v - true_prob) ** 2 for p, v in zip(outcome_probs, outcome_values)
    )
    reasoning = math.fsum(
        p * (v - ind) ** 2 for p, v in zip(outcome_probs, outcome_values)
    )
    return OutcomeEnumeration(
        outcome_probs=tuple(outcome_probs),
        outcome_values=tuple(outcome_values),
        expectation=expectation,
        second_moment=second,
        true_prob=true_prob,
        is_correct=is_correct,
        estimation_error=estimation,
        reasoning_error=reasoning,
    )


def derive_seed(seed: int, *indices: int) -> int:
    """Deterministic sub-seed for one cell of a run seeded by ``seed``.

    Mixes (seed, *indices) through numpy's SeedSequence so per-cell streams
    are independent and reproducible across platforms.
    """
    entropy = (int(seed),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(entropy=entropy)
    return int(ss.generate_state(1, dtype=np.uint64)[0])
