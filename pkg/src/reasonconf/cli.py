"""Command-line driver for experiments.

Subcommands: simulate, convergence, decompose, estimate, fit-mixture,
metrics, config.  Every command is deterministic given its config and
inputs; output rows are emitted in canonical sorted order and files are
only written after the whole computation succeeds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    ConfigError,
    EnumerationTooLargeError,
    FitDegenerateError,
    ReasonConfError,
)
from .estimators import (
    ESTIMATOR_KINDS,
    estimate,
    rpc_confidence,
    sc_confidence,
    pc_confidence,
    ppl_confidence,
    selection_for_scoring,
)
from .error_analysis import (
    RateFit,
    monte_carlo_estimation_error,
    pc_closed_form,
    ppl_closed_form,
    sc_closed_form,
)
from .ingest import ResultRow, load_jsonl, render_results
from .metrics import ece, reliability_bins
from .oracle import (
    OracleSpec,
    derive_seed,
    exact_estimator_moments,
    load_oracle,
    sample_batch,
    true_answer_prob,
)
from .paths import AnswerLabel, canonicalize_answer, unique_paths
from .pruning import FitConfig, fit_mixture

logger = logging.getLogger("reasonconf")

_METHOD_ORDINAL = {"SC": 1, "PPL": 2, "PC": 3, "RPC": 4}

_DEFAULTS = {
    "seed": 0,
    "methods": ["SC", "PPL", "PC", "RPC"],
    "prob_mode": "length_normalized",
    "n_grid": [64, 128],
    "repeats": 10,
    "trials": 100000,
    "bins": 10,
    "normalize_confidence": False,
    "truths": None,
    "fit": {
        "weight_bounds": [0.2, 0.8],
        "max_iter": 200,
        "tol": 1e-8,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; unknown keys are rejected up front."""

    seed: int = 0
    methods: Tuple[str, ...] = ("SC", "PPL", "PC", "RPC")
    prob_mode: str = "length_normalized"
    n_grid: Tuple[int, ...] = (64, 128)
    repeats: int = 10
    trials: int = 100000
    bins: int = 10
    normalize_confidence: bool = False
    truths: Optional[Dict[str, str]] = None
    fit: FitConfig = field(default_factory=FitConfig)

    @classmethod
    def from_doc(cls, doc: dict) -> "RunConfig":
        unknown = set(doc) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = {**_DEFAULTS, **doc}
        fit_doc = merged["fit"]
        fit_unknown = set(fit_doc) - set(_DEFAULTS["fit"])
        if fit_unknown:
            raise ConfigError(f"unknown fit config keys: {sorted(fit_unknown)}")
        fit_merged = {**_DEFAULTS["fit"], **fit_doc}
        methods = tuple(merged["methods"])
        for m in methods:
            if m not in ESTIMATOR_KINDS:
                raise ConfigError(f"unknown estimator kind {m!r}")
        if merged["prob_mode"] not in ("joint", "length_normalized"):
            raise ConfigError(f"unknown prob_mode {merged['prob_mode']!r}")
        n_grid = tuple(int(n) for n in merged["n_grid"])
        if any(n < 1 for n in n_grid):
            raise ConfigError("n_grid entries must be positive")
        if int(merged["repeats"]) < 1:
            raise ConfigError("repeats must be >= 1")
        truths = merged["truths"]
        if truths is not None:
            truths = {str(k): str(v) for k, v in truths.items()}
        return cls(
            seed=int(merged["seed"]),
            methods=methods,
            prob_mode=merged["prob_mode"],
            n_grid=n_grid,
            repeats=int(merged["repeats"]),
            trials=int(merged["trials"]),
            bins=int(merged["bins"]),
            normalize_confidence=bool(merged["normalize_confidence"]),
            truths=truths,
            fit=FitConfig(
                weight_bounds=tuple(fit_merged["weight_bounds"]),
                max_iter=int(fit_merged["max_iter"]),
                tol=float(fit_merged["tol"]),
                mode=merged["prob_mode"],
            ),
        )

    @classmethod
    def load(cls, path: Optional[str], seed_override: Optional[int]) -> "RunConfig":
        doc = {}
        if path is not None:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        if seed_override is not None:
            doc = {**doc, "seed": seed_override}
        return cls.from_doc(doc)


def _scored_confidence(method: str, conf, value: float, cfg: RunConfig) -> float:
    """Clamp (and optionally normalize) a selected confidence for scoring."""
    if cfg.normalize_confidence and method in ("PC", "RPC"):
        total = conf.total()
        if total > 0:
            value = value / total
    return min(1.0, max(0.0, value))


def simulate_rows(oracle: OracleSpec, cfg: RunConfig) -> List[tuple]:
    """Sample, estimate, select, and score each (method, n, repeat) cell.

    All methods see the same batch for a given (n, repeat), so method
    comparisons are paired.  Rows: (method, n, seed, accuracy, ece).
    """
    rows = []
    for n in cfg.n_grid:
        for r in range(cfg.repeats):
            batch = sample_batch(oracle, n, derive_seed(cfg.seed, n, r))
            for method in cfg.methods:
                conf = estimate(method, batch, cfg.fit)
                answer, value = selection_for_scoring(method, conf, batch)
                correct = answer == oracle.truth
                scored = _scored_confidence(method, conf, value, cfg)
                rows.append(
                    (
                        method,
                        n,
                        r,
                        1.0 if correct else 0.0,
                        abs(scored - (1.0 if correct else 0.0)),
                    )
                )
    rows.sort(key=lambda row: (row[0], row[1], row[2]))
    return rows


def _convergence_target(oracle: OracleSpec, method: str) -> AnswerLabel:
    if method != "PPL":
        return oracle.truth
    for i, answer in enumerate(oracle.path_answers):
        if answer == oracle.truth:
            return AnswerLabel(canonical=f"t{i}")
    return AnswerLabel(canonical="t0")


def _closed_form_estimation(oracle: OracleSpec, method: str, n: int) -> float:
    p = true_answer_prob(oracle, oracle.truth)
    if method == "SC":
        return sc_closed_form(p, n, True).estimation_error
    if method == "PPL":
        target = _convergence_target(oracle, "PPL")
        idx = int(target.canonical[1:])
        q = oracle.path_probs[idx]
        correct = oracle.path_answers[idx] == oracle.truth
        return ppl_closed_form(q, n, correct).estimation_error
    if method == "PC":
        k = sum(1 for a in oracle.path_answers if a == oracle.truth)
        k = max(k, 1)
        return pc_closed_form(p, k, n, True).estimation_error
    raise ConfigError(f"no closed form for method {method!r}")


def convergence_rows(
    oracle: OracleSpec, cfg: RunConfig
) -> Tuple[List[tuple], List[str]]:
    """Monte Carlo estimation error against the closed form, per (method, n).

    Returns data rows (method, n, mc_est_err, closed_form_est_err) and the
    rate-fit summary lines.  RPC has no closed form and is skipped here.
    """
    rows = []
    summaries = []
    for method in cfg.methods:
        if method == "RPC":
            continue
        target = _convergence_target(oracle, method)
        mc_errors = []
        for n in cfg.n_grid:
            mc = monte_carlo_estimation_error(
                oracle,
                method,
                target,
                n,
                cfg.trials,
                derive_seed(cfg.seed, _METHOD_ORDINAL[method], n),
            )
            mc_errors.append(mc.mean_sq_error)
            rows.append(
                (method, n, mc.mean_sq_error, _closed_form_estimation(oracle, method, n))
            )
        transform = "loglog" if method == "SC" else "semilog"
        try:
            rate = RateFit.fit(list(cfg.n_grid), mc_errors, transform)
            summaries.append(
                f"# ratefit method={method} transform={transform} "
                f"slope={rate.slope!r} residual={rate.residual!r}"
            )
        except ValueError as exc:
            summaries.append(f"# ratefit method={method} unavailable: {exc}")
    rows.sort(key=lambda row: (row[0], row[1]))
    return rows, summaries


_ENUM_FNS = {
    "SC": sc_confidence,
    "PPL": ppl_confidence,
    "PC": pc_confidence,
}


def decompose_rows(oracle: OracleSpec, cfg: RunConfig) -> List[tuple]:
    """Exact (or Monte Carlo, flagged) error decomposition per (method, n).

    Rows: (method, n, estimation_error, model_error, total, exact).  The
    additivity of the exact decomposition for the voting estimator is
    asserted to 1e-12.
    """
    rows = []
    for method in cfg.methods:
        if method == "RPC":
            estimator = lambda b: rpc_confidence(b, cfg.fit)[0]
        else:
            estimator = _ENUM_FNS[method]
        target = _convergence_target(oracle, method)
        for n in cfg.n_grid:
            try:
                enum = exact_estimator_moments(oracle, n, estimator, target)
                est = enum.estimation_error
                model = enum.model_error
                total = enum.reasoning_error
                exact = True
                if method == "SC":
                    drift = abs(total - est - model)
                    if drift > 1e-12:
                        raise ReasonConfError(
                            f"voting decomposition drift {drift} at n={n}"
                        )
            except EnumerationTooLargeError:
                if method == "RPC":
                    continue
                mc = monte_carlo_estimation_error(
                    oracle,
                    method,
                    target,
                    n,
                    cfg.trials,
                    derive_seed(cfg.seed, _METHOD_ORDINAL[method], n, 1),
                )
                if method == "PPL":
                    idx = int(target.canonical[1:])
                    p = oracle.path_probs[idx]
                    correct = oracle.path_answers[idx] == oracle.truth
                else:
                    p = true_answer_prob(oracle, oracle.truth)
                    correct = True  # target is the truth answer itself
                model = (p - (1.0 if correct else 0.0)) ** 2
                est = mc.mean_sq_error
                total = est + model
                exact = False
            rows.append((method, n, est, model, total, exact))
    rows.sort(key=lambda row: (row[0], row[1]))
    return rows


def estimate_rows(
    batches: Dict[str, "SampleBatch"], cfg: RunConfig
) -> Tuple[List[ResultRow], Dict[str, dict]]:
    """Run the configured estimators over ingested batches.

    Problems with no entry in ``cfg.truths`` score as incorrect.  Returns
    result rows plus one pruning-report document per problem (only
    populated when RPC runs).
    """
    rows: List[ResultRow] = []
    reports: Dict[str, dict] = {}
    for pid in sorted(batches):
        batch = batches[pid]
        truth = None
        if cfg.truths and pid in cfg.truths:
            truth = canonicalize_answer(cfg.truths[pid])
        for method in cfg.methods:
            if method == "RPC":
                conf, report = rpc_confidence(batch, cfg.fit)
                reports[pid] = _report_doc(report)
            else:
                conf = estimate(method, batch, cfg.fit)
            answer, value = selection_for_scoring(method, conf, batch)
            scored = _scored_confidence(method, conf, value, cfg)
            rows.append(
                ResultRow(
                    problem_id=pid,
                    method=method,
                    n=batch.n,
                    selected_answer=answer.canonical,
                    confidence=scored,
                    correct=(truth is not None and answer == truth),
                )
            )
    rows.sort(key=lambda row: (row.problem_id, row.method))
    return rows, reports


def _report_doc(report) -> dict:
    doc = {
        "retained_indices": list(report.retained_indices),
        "removed_indices": list(report.removed_indices),
        "fallback_used": report.fallback_used,
        "mean_threshold": report.mean_threshold,
    }
    if report.fit is not None:
        doc["fit"] = _fit_doc(report.fit)
    return doc


def _fit_doc(fit) -> dict:
    return {
        "comp1": {"shape": fit.comp1.shape, "scale": fit.comp1.scale},
        "comp2": {"shape": fit.comp2.shape, "scale": fit.comp2.scale},
        "w1": fit.w1,
        "w2": fit.w2,
        "high_index": fit.high_index,
        "loglik": fit.loglik,
        "converged": fit.converged,
        "n_iter": fit.n_iter,
    }


def _render_csv(header: Sequence[str], rows: Sequence[tuple], trailer=()) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    text = buf.getvalue()
    for line in trailer:
        text += line + "\n"
    return text


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_simulate(args) -> str:
    cfg = RunConfig.load(args.config, args.seed)
    oracle = load_oracle(args.oracle)
    rows = simulate_rows(oracle, cfg)
    return _render_csv(("method", "n", "seed", "accuracy", "ece"), rows)


def _cmd_convergence(args) -> str:
    cfg = RunConfig.load(args.config, args.seed)
    oracle = load_oracle(args.oracle)
    rows, summaries = convergence_rows(oracle, cfg)
    return _render_csv(
        ("method", "n", "mc_est_err", "closed_form_est_err"), rows, summaries
    )


def _cmd_decompose(args) -> str:
    cfg = RunConfig.load(args.config, args.seed)
    oracle = load_oracle(args.oracle)
    rows = decompose_rows(oracle, cfg)
    return _render_csv(
        ("method", "n", "estimation_error", "model_error", "total", "exact"), rows
    )


def _cmd_estimate(args) -> str:
    cfg = RunConfig.load(args.config, args.seed)
    batches = load_jsonl(args.input, cfg.prob_mode, strict=not args.lenient)
    rows, reports = estimate_rows(batches, cfg)
    if args.report is not None:
        report_text = json.dumps(reports, indent=2, sort_keys=True) + "\n"
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report_text)
    return render_results(rows, args.format)


def _cmd_fit_mixture(args) -> str:
    cfg = RunConfig.load(args.config, args.seed)
    if args.input.endswith(".jsonl"):
        batches = load_jsonl(args.input, cfg.prob_mode)
        fits = {}
        for pid in sorted(batches):
            probs = [p.path_prob for p in unique_paths(batches[pid])]
            try:
                fits[pid] = _fit_doc(fit_mixture(probs, cfg.fit))
            except FitDegenerateError as exc:
                fits[pid] = {"degenerate": True, "reason": str(exc)}
        doc = {"problems": fits}
    else:
        with open(args.input, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        probs = payload["probs"] if isinstance(payload, dict) else payload
        doc = {"fit": _fit_doc(fit_mixture([float(p) for p in probs], cfg.fit))}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _cmd_metrics(args) -> str:
    cfg = RunConfig.load(args.config, args.seed)
    with open(args.input, "r", encoding="utf-8") as fh:
        rows = json.load(fh)
    scored = [(float(r["confidence"]), bool(r["correct"])) for r in rows]
    pairs = [(r["selected_answer"], r["correct"]) for r in rows]
    acc = sum(1 for _, c in pairs if c) / len(pairs) if pairs else 0.0
    bins = reliability_bins(scored, cfg.bins)
    doc = {
        "accuracy": acc,
        "ece": ece(scored, cfg.bins),
        "bins": {
            "edges": list(bins.edges),
            "counts": list(bins.counts),
            "mean_confidence": list(bins.mean_confidence),
            "empirical_accuracy": list(bins.empirical_accuracy),
        },
    }
    if args.format == "csv":
        return _render_csv(
            ("bin_low", "bin_high", "count", "mean_confidence", "empirical_accuracy"),
            [
                (bins.edges[i], bins.edges[i + 1], bins.counts[i],
                 bins.mean_confidence[i], bins.empirical_accuracy[i])
                for i in range(len(bins.counts))
            ],
            (f"# accuracy={acc!r}", f"# ece={doc['ece']!r}"),
        )
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _cmd_config(args) -> str:
    if args.print_defaults:
        return json.dumps(_DEFAULTS, indent=2, sort_keys=True) + "\n"
    cfg = RunConfig.load(args.config, args.seed)
    doc = {
        "seed": cfg.seed,
        "methods": list(cfg.methods),
        "prob_mode": cfg.prob_mode,
        "n_grid": list(cfg.n_grid),
        "repeats": cfg.repeats,
        "trials": cfg.trials,
        "bins": cfg.bins,
        "normalize_confidence": cfg.normalize_confidence,
        "truths": cfg.truths,
        "fit": {
            "weight_bounds": list(cfg.fit.weight_bounds),
            "max_iter": cfg.fit.max_iter,
            "tol": cfg.fit.tol,
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reasonconf",
        description="Confidence estimation experiments over sampled reasoning paths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, oracle=False, inputs=False, fmt=False):
        p.add_argument("--config", default=None, help="JSON run config")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        if oracle:
            p.add_argument("--oracle", required=True, help="oracle spec JSON")
        if inputs:
            p.add_argument("--input", required=True, help="input file")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("simulate", help="sample/estimate/select accuracy rows")
    common(p, oracle=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("convergence", help="Monte Carlo vs closed-form error")
    common(p, oracle=True)
    p.set_defaults(fn=_cmd_convergence)

    p = sub.add_parser("decompose", help="estimation/model error split")
    common(p, oracle=True)
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("estimate", help="run estimators over a JSONL dump")
    common(p, inputs=True, fmt=True)
    p.add_argument("--report", default=None, help="write pruning reports JSON here")
    p.add_argument("--lenient", action="store_true", help="skip malformed lines")
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("fit-mixture", help="fit the two-Weibull mixture")
    common(p, inputs=True)
    p.set_defaults(fn=_cmd_fit_mixture)

    p = sub.add_parser("metrics", help="accuracy/ECE/reliability from results")
    common(p, inputs=True, fmt=True)
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("config", help="inspect the effective configuration")
    common(p)
    p.add_argument("--print-defaults", action="store_true")
    p.set_defaults(fn=_cmd_config)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=os.environ.get("REASONCONF_LOG_LEVEL", "WARNING").upper()
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.fn(args)
    except (ReasonConfError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
