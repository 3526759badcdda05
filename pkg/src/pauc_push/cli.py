"""Command-line entry point.

Subcommands: fit, cv, evaluate, roc, simulate.  Every run resolves its
effective parameters (defaults, then --config file, then explicit flags),
echoes them to config_echo.json in the output directory, and writes
machine-readable outputs with stable filenames and deterministic float
formatting.  Exit codes: 0 success, 1 user error, 2 internal error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .data import load_csv
from .errors import NonFiniteLoss, PaucPushError
from .metrics import PaucSpec, pauc_estimate, roc_curve
from .select import (
    SearchSpec,
    baseline_lasso,
    evaluate_external,
    external_scores,
    select_weight_and_lambda,
)
from .simulate import (
    SimDesign,
    design_from_dict,
    run_benchmark,
)
from .solver import (
    FitConfig,
    fit,
    model_from_dict,
    model_to_dict,
    predict,
)

PROG = "pauc-push"
THREADS_ENV = "PAUC_PUSH_THREADS"


class CliError(Exception):
    """User-facing command-line problem (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _floats_csv(text: str) -> list[float]:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


_COMMON_DEFAULTS = {
    "out": ".",
    "label": None,
    "positive": None,
    "t": 0.2,
    "tie_policy": "half-credit",
}

DEFAULTS = {
    "fit": {
        **_COMMON_DEFAULTS,
        "input": None,
        "w": 1.0,
        "lam1": 0.0,
        "lam2": 0.0,
        "tol": 1e-7,
        "max_iters": 100_000,
        "standardize": True,
    },
    "cv": {
        **_COMMON_DEFAULTS,
        "input": None,
        "weights": [1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0],
        "lambdas": None,
        "n_lambdas": 100,
        "lambda_min_ratio": 1e-3,
        "outer_k": 5,
        "inner_k": 5,
        "seed": 0,
        "objective": "pauc",
        "threads": None,
        "tol": 1e-7,
        "max_iters": 100_000,
    },
    "evaluate": {
        **_COMMON_DEFAULTS,
        "input": None,
        "model": None,
    },
    "roc": {
        **_COMMON_DEFAULTS,
        "input": None,
        "model": None,
        "score_column": None,
    },
    "simulate": {
        "out": ".",
        "design": None,
        "design_resolved": None,
        "n_diseased": 50,
        "n_non_diseased": 50,
        "n_score_a": 3,
        "n_score_b": 3,
        "n_noise": 500,
        "replicates": 100,
        "seed": 0,
        "t": 0.2,
        "tie_policy": "half-credit",
        "weights": [1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0],
        "n_lambdas": 100,
        "lambda_min_ratio": 1e-3,
        "outer_k": 5,
        "inner_k": 5,
        "threads": None,
    },
}


def build_parser() -> _Parser:
    S = argparse.SUPPRESS
    parser = _Parser(prog=PROG, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand")

    def add_common(p, with_data=True):
        p.add_argument("--config", default=None, help="JSON file of saved parameters (a config echo)")
        p.add_argument("--out", default=S, help="output directory (default: current)")
        if with_data:
            p.add_argument("--input", default=S, help="CSV file with a header row")
            p.add_argument("--label", default=S, help="name of the outcome column")
            p.add_argument("--positive", default=S, help="token marking diseased rows")
        p.add_argument("--t", type=float, default=S, help="FPR upper bound for partial AUC")
        p.add_argument("--tie-policy", dest="tie_policy", choices=["strict", "half-credit"], default=S)

    p_fit = sub.add_parser("fit", help="fit one weighted penalized model")
    add_common(p_fit)
    p_fit.add_argument("--w", type=float, default=S, help="non-diseased weight (>= 1)")
    p_fit.add_argument("--lambda", dest="lam1", type=float, default=S, help="l1 strength")
    p_fit.add_argument("--lambda2", dest="lam2", type=float, default=S, help="ridge strength")
    p_fit.add_argument("--tol", type=float, default=S)
    p_fit.add_argument("--max-iters", dest="max_iters", type=int, default=S)
    p_fit.add_argument("--no-standardize", dest="standardize", action="store_false", default=S)

    p_cv = sub.add_parser("cv", help="cross-validated weight and penalty search")
    add_common(p_cv)
    p_cv.add_argument("--weights", type=_floats_csv, default=S, help="comma-separated weight grid")
    p_cv.add_argument("--lambdas", type=_floats_csv, default=S, help="explicit descending lambda grid")
    p_cv.add_argument("--n-lambdas", dest="n_lambdas", type=int, default=S)
    p_cv.add_argument("--lambda-min-ratio", dest="lambda_min_ratio", type=float, default=S)
    p_cv.add_argument("--outer-k", dest="outer_k", type=int, default=S)
    p_cv.add_argument("--inner-k", dest="inner_k", type=int, default=S)
    p_cv.add_argument("--seed", type=int, default=S)
    p_cv.add_argument("--objective", choices=["pauc", "deviance"], default=S)
    p_cv.add_argument("--threads", type=int, default=S)
    p_cv.add_argument("--tol", type=float, default=S)
    p_cv.add_argument("--max-iters", dest="max_iters", type=int, default=S)

    p_eval = sub.add_parser("evaluate", help="score a saved model on a dataset")
    add_common(p_eval)
    p_eval.add_argument("--model", default=S, help="model.json produced by fit or cv")

    p_roc = sub.add_parser("roc", help="emit an ROC curve and pAUC summary")
    add_common(p_roc)
    p_roc.add_argument("--model", default=S, help="score rows with this model.json")
    p_roc.add_argument("--score-column", dest="score_column", default=S,
                       help="use this marker column as the score")

    p_sim = sub.add_parser("simulate", help="replicated benchmark on synthetic data")
    p_sim.add_argument("--config", default=None, help="JSON file of saved parameters")
    p_sim.add_argument("--out", default=S)
    p_sim.add_argument("--design", default=S, help="JSON file describing the design")
    p_sim.add_argument("--n-diseased", dest="n_diseased", type=int, default=S)
    p_sim.add_argument("--n-non-diseased", dest="n_non_diseased", type=int, default=S)
    p_sim.add_argument("--n-score-a", dest="n_score_a", type=int, default=S)
    p_sim.add_argument("--n-score-b", dest="n_score_b", type=int, default=S)
    p_sim.add_argument("--n-noise", dest="n_noise", type=int, default=S)
    p_sim.add_argument("--replicates", type=int, default=S)
    p_sim.add_argument("--seed", type=int, default=S)
    p_sim.add_argument("--t", type=float, default=S)
    p_sim.add_argument("--tie-policy", dest="tie_policy", choices=["strict", "half-credit"], default=S)
    p_sim.add_argument("--weights", type=_floats_csv, default=S)
    p_sim.add_argument("--n-lambdas", dest="n_lambdas", type=int, default=S)
    p_sim.add_argument("--lambda-min-ratio", dest="lambda_min_ratio", type=float, default=S)
    p_sim.add_argument("--outer-k", dest="outer_k", type=int, default=S)
    p_sim.add_argument("--inner-k", dest="inner_k", type=int, default=S)
    p_sim.add_argument("--threads", type=int, default=S)

    return parser


def _effective_options(args: argparse.Namespace) -> dict:
    sub = args.subcommand
    opts = dict(DEFAULTS[sub])
    config_path = getattr(args, "config", None)
    if config_path:
        doc = jsonio.load(config_path)
        saved_sub = doc.pop("subcommand", sub)
        if saved_sub != sub:
            raise CliError(
                f"config file was written by subcommand {saved_sub!r}, not {sub!r}"
            )
        unknown = [k for k in doc if k not in opts]
        if unknown:
            raise CliError(f"config file has unknown keys: {unknown}")
        opts.update(doc)
    explicit = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config")}
    opts.update(explicit)
    return opts


def _require(opts: dict, *keys):
    for key in keys:
        if opts.get(key) in (None, ""):
            raise CliError(f"--{key.replace('_', '-')} is required")


def _outdir(opts: dict) -> Path:
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_echo(out: Path, sub: str, opts: dict) -> None:
    jsonio.dump(out / "config_echo.json", {"subcommand": sub, **opts})


def _threads(opts: dict) -> int:
    value = opts.get("threads")
    if value is None:
        value = os.environ.get(THREADS_ENV, "1")
    try:
        threads = int(value)
    except ValueError:
        raise CliError(f"invalid thread count {value!r}")
    return max(threads, 1)


def _load_dataset(opts: dict):
    _require(opts, "input", "label", "positive")
    return load_csv(opts["input"], opts["label"], opts["positive"])


def _pauc_spec(opts: dict) -> PaucSpec:
    try:
        return PaucSpec(float(opts["t"]), opts["tie_policy"])
    except ValueError as exc:
        raise CliError(str(exc))


def _pauc_summary(result, curve) -> dict:
    threshold = result.threshold
    return {
        "auc": curve.auc,
        "pauc": result.value,
        "t": result.t,
        "threshold": None if not np.isfinite(threshold) else threshold,
        "tie_policy": None,  # caller fills
        "contributing_negatives": result.contributing_negatives,
        "tie_excluded": result.tie_excluded,
    }


def cmd_fit(opts: dict) -> int:
    data = _load_dataset(opts)
    out = _outdir(opts)
    spec = _pauc_spec(opts)
    lam1 = float(opts["lam1"])
    lam2 = float(opts["lam2"])
    if lam1 > 0 and lam2 > 0:
        penalty = "elastic_net"
    elif lam1 > 0:
        penalty = "lasso"
    elif lam2 > 0:
        penalty = "ridge"
    else:
        penalty = "none"
    config = FitConfig(
        w=float(opts["w"]),
        penalty=penalty,
        lam1=lam1,
        lam2=lam2,
        max_iters=int(opts["max_iters"]),
        tol=float(opts["tol"]),
        standardize=bool(opts["standardize"]),
    )
    report = fit(data, config)
    scores = predict(report.model, data.markers)
    result = pauc_estimate(scores, data.labels, spec)
    curve = roc_curve(scores, data.labels)
    summary = _pauc_summary(result, curve)
    summary["tie_policy"] = spec.tie_policy
    summary.update(
        {
            "iterations": report.iterations,
            "converged": report.converged,
            "final_loss": report.final_loss,
            "selected_markers": [data.marker_names[j] for j in report.active_set],
        }
    )
    jsonio.dump(out / "model.json", model_to_dict(report.model, report.standardization, config))
    jsonio.dump(out / "fit_summary.json", summary)
    _write_echo(out, "fit", opts)
    return 0


def cmd_cv(opts: dict) -> int:
    data = _load_dataset(opts)
    out = _outdir(opts)
    spec = _pauc_spec(opts)
    objective = opts["objective"]
    weights = [float(w) for w in opts["weights"]]
    if objective == "deviance":
        weights = [1.0]
    search = SearchSpec(
        weight_grid=tuple(weights),
        lambda_grid=None if opts["lambdas"] is None else tuple(opts["lambdas"]),
        n_lambdas=int(opts["n_lambdas"]),
        lambda_min_ratio=float(opts["lambda_min_ratio"]),
        outer_k=int(opts["outer_k"]),
        inner_k=int(opts["inner_k"]),
        pauc=spec,
        seed=int(opts["seed"]),
        objective=objective,
    )
    base = FitConfig(
        penalty="lasso", tol=float(opts["tol"]), max_iters=int(opts["max_iters"])
    )
    threads = _threads(opts)
    if objective == "pauc":
        report = select_weight_and_lambda(data, search, config=base, threads=threads)
    else:
        report = baseline_lasso(data, search, config=base, threads=threads)
    final_config = FitConfig(
        w=report.chosen_w,
        penalty="lasso",
        lam1=report.chosen_lambda,
        tol=base.tol,
        max_iters=base.max_iters,
    )
    jsonio.dump(out / "cv_report.json", report.to_dict())
    jsonio.write_csv(
        out / "cv_scores.csv",
        ["w", "fold", "score"],
        [
            (w, fold, report.outer_scores[wi, fold])
            for wi, w in enumerate(report.weight_grid)
            for fold in range(report.outer_scores.shape[1])
        ],
    )
    jsonio.dump(
        out / "model.json",
        model_to_dict(report.final_model, report.final_fit.standardization, final_config),
    )
    opts["weights"] = weights
    _write_echo(out, "cv", opts)
    return 0


def cmd_evaluate(opts: dict) -> int:
    _require(opts, "model")
    data = _load_dataset(opts)
    out = _outdir(opts)
    spec = _pauc_spec(opts)
    model = model_from_dict(jsonio.load(opts["model"]))
    result = evaluate_external(model, data, spec)
    curve = roc_curve(external_scores(model, data), data.labels)
    summary = _pauc_summary(result, curve)
    summary["tie_policy"] = spec.tie_policy
    jsonio.dump(out / "evaluation.json", summary)
    _write_echo(out, "evaluate", opts)
    return 0


def cmd_roc(opts: dict) -> int:
    data = _load_dataset(opts)
    out = _outdir(opts)
    spec = _pauc_spec(opts)
    has_model = opts.get("model") not in (None, "")
    has_column = opts.get("score_column") not in (None, "")
    if has_model == has_column:
        raise CliError("provide exactly one of --model or --score-column")
    if has_model:
        model = model_from_dict(jsonio.load(opts["model"]))
        scores = external_scores(model, data)
    else:
        scores = data.markers[:, data.column_index(opts["score_column"])]
    curve = roc_curve(scores, data.labels)
    result = pauc_estimate(scores, data.labels, spec)
    jsonio.write_csv(out / "roc.csv", ["fpr", "tpr"], [tuple(pt) for pt in curve.points])
    summary = _pauc_summary(result, curve)
    summary["tie_policy"] = spec.tie_policy
    jsonio.dump(out / "roc_summary.json", summary)
    _write_echo(out, "roc", opts)
    return 0


def cmd_simulate(opts: dict) -> int:
    out = _outdir(opts)
    spec = _pauc_spec(opts)
    if opts.get("design"):
        design = design_from_dict(jsonio.load(opts["design"]))
    elif opts.get("design_resolved"):
        # a config echo carries the resolved design, so reruns do not need
        # the original --design file
        design = design_from_dict(opts["design_resolved"])
    else:
        design = SimDesign(
            n_diseased=int(opts["n_diseased"]),
            n_non_diseased=int(opts["n_non_diseased"]),
            n_score_a=int(opts["n_score_a"]),
            n_score_b=int(opts["n_score_b"]),
            n_noise=int(opts["n_noise"]),
            replicates=int(opts["replicates"]),
            seed=int(opts["seed"]),
        )
    search = SearchSpec(
        weight_grid=tuple(float(w) for w in opts["weights"]),
        n_lambdas=int(opts["n_lambdas"]),
        lambda_min_ratio=float(opts["lambda_min_ratio"]),
        outer_k=int(opts["outer_k"]),
        inner_k=int(opts["inner_k"]),
        pauc=spec,
        seed=int(opts["seed"]),
    )
    report = run_benchmark(design, search, threads=_threads(opts))
    jsonio.dump(out / "bench_report.json", report.to_dict())
    jsonio.write_csv(
        out / "replicates.csv",
        ["replicate", "method", "chosen_w", "chosen_lambda", "external_pauc", "n_selected", "n_noise_selected"],
        [
            (
                r.replicate,
                r.method,
                r.chosen_w,
                r.chosen_lambda,
                r.external_pauc,
                len(r.selected),
                len(set(r.selected) & set(design.noise_columns)),
            )
            for r in report.results
        ],
    )
    names = design.marker_names
    rate_rows = []
    for method in ("push", "lasso"):
        rates = report.selection_rates(method)
        rate_rows.extend((names[j], method, rates[j]) for j in range(design.p))
    jsonio.write_csv(out / "selection_rates.csv", ["marker", "method", "rate"], rate_rows)
    opts = dict(opts)
    if opts.get("design") or opts.get("design_resolved"):
        opts["design_resolved"] = design.to_dict()
    opts["design"] = None  # the echo is self-contained
    _write_echo(out, "simulate", opts)
    return 0


_HANDLERS = {
    "fit": cmd_fit,
    "cv": cmd_cv,
    "evaluate": cmd_evaluate,
    "roc": cmd_roc,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "subcommand", None):
            raise CliError("a subcommand is required (fit, cv, evaluate, roc, simulate)")
        opts = _effective_options(args)
        return _HANDLERS[args.subcommand](opts)
    except CliError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except NonFiniteLoss as exc:
        print(f"{PROG}: internal error: {exc}", file=sys.stderr)
        return 2
    except PaucPushError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is a bug, not a user mistake
        print(f"{PROG}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
