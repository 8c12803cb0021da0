"""Command-line front end: generate, learn, eval, sweep.

Configs are JSON objects with a fixed schema; unknown keys are rejected
so typos fail loudly instead of silently using defaults.  Exit codes:
0 success, 2 validation or input-format error, 3 runtime failure inside
the numerics (screening, LP, pipeline).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields as dataclass_fields

import numpy as np

from .errors import (
    ConfigError,
    DataFormatError,
    DimensionMismatch,
    GbnLearnError,
)
from .io import (
    model_file_from_gbn,
    read_data_csv,
    read_model_file,
    write_data_csv,
    write_model_file,
)
from .order import (
    CausalOrder,
    LearnedGbn,
    LearnerConfig,
    learn_gbn,
    structure_metrics,
)
from .sweep import (
    ExperimentSpec,
    run_sweep,
    write_gamma_csv,
    write_gamma_summary_csv,
    write_summary_csv,
    write_trials_csv,
)
from .synth import GeneratorConfig, generate_dataset

JOBS_ENV = "GBNLEARN_JOBS"

_GENERATE_KEYS = frozenset(
    f.name for f in dataclass_fields(GeneratorConfig)
) | {"n", "gamma"}
_LEARN_KEYS = frozenset(f.name for f in dataclass_fields(LearnerConfig))


def _load_json(path: str):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from e


def _require_object(d, path: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return d


def cmd_generate(args) -> int:
    d = _require_object(_load_json(args.config), args.config)
    unknown = sorted(set(d) - _GENERATE_KEYS)
    if unknown:
        raise ConfigError(f"{args.config}: unknown config keys: {', '.join(unknown)}")
    for key in ("p", "q", "n"):
        if key not in d:
            raise ConfigError(f"{args.config}: {key}: required")
    n = d.pop("n")
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"n: must be a positive integer, got {n!r}")
    gamma = d.pop("gamma", None)
    if args.seed is not None:
        d["seed"] = args.seed
    try:
        cfg = GeneratorConfig(**d)
        ds = generate_dataset(cfg, n, gamma=gamma)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    g = ds.gbn
    meta = {"seed": cfg.seed}
    if gamma is not None:
        meta["gamma"] = repr(float(gamma))
    model_path = args.out + ".model.txt"
    data_path = args.out + ".data.csv"
    write_model_file(model_path, g.p, g.sigma2, model_file_from_gbn(g), meta)
    write_data_csv(data_path, ds.x)
    print(f"model: {model_path} ({g.p} nodes, {len(g.dag.edges)} edges)")
    print(f"data:  {data_path} ({n} rows)")
    return 0


def cmd_learn(args) -> int:
    x = read_data_csv(args.data)
    opts: dict = {}
    if args.config is not None:
        d = _require_object(_load_json(args.config), args.config)
        unknown = sorted(set(d) - _LEARN_KEYS)
        if unknown:
            raise ConfigError(
                f"{args.config}: unknown config keys: {', '.join(unknown)}"
            )
        opts.update(d)
    if args.lam is not None:
        opts["lam"] = args.lam
    if args.threshold is not None:
        opts["support_threshold"] = args.threshold
    if args.center:
        opts["center"] = True
    if args.strict_recompute:
        opts["strict_recompute"] = True
    try:
        cfg = LearnerConfig(**opts)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    learned = learn_gbn(x, cfg)
    meta = {
        "order": " ".join(str(i) for i in learned.order.z),
        "lambda": repr(learned.lambda_used),
        "threshold": repr(learned.threshold_used),
        "ratio_trace": " ".join(
            f"{s.node}:{s.ratio!r}" for s in learned.ratio_trace
        ),
    }
    if learned.k_hint_defaulted:
        meta["k_hint_defaulted"] = "1"
    edges = {e: float(learned.b_hat[e]) for e in learned.edges}
    write_model_file(args.out, x.shape[1], learned.sigma2_hat, edges, meta)
    print(
        f"learned: {args.out} ({x.shape[1]} nodes, {len(edges)} edges, "
        f"sigma2_hat = {learned.sigma2_hat:.6g}, lambda = {learned.lambda_used:.6g})"
    )
    return 0


def _learned_from_model(mf) -> LearnedGbn:
    b_hat = np.zeros((mf.p, mf.p))
    for (child, parent), w in mf.edges.items():
        b_hat[child, parent] = w
    order_text = mf.meta.get("order", "")
    if order_text:
        try:
            z = tuple(int(tok) for tok in order_text.split())
            order = CausalOrder(z=z)
        except ValueError as e:
            raise DataFormatError(f"bad order header: {e}") from e
    else:
        order = CausalOrder(z=tuple(range(mf.p)))
    return LearnedGbn(
        edges=frozenset(mf.edges),
        b_hat=b_hat,
        sigma2_hat=float(mf.sigma2.mean()),
        order=order,
        ratio_trace=(),
    )


def cmd_eval(args) -> int:
    truth_mf = read_model_file(args.truth)
    learned_mf = read_model_file(args.learned)
    if truth_mf.p != learned_mf.p:
        raise DimensionMismatch(
            f"truth has p = {truth_mf.p}, learned has p = {learned_mf.p}"
        )
    try:
        truth = truth_mf.to_gbn()
    except (GbnLearnError, ValueError) as e:
        raise DataFormatError(f"{args.truth}: not a valid model: {e}") from e
    m = structure_metrics(truth, _learned_from_model(learned_mf))
    payload = {
        "p": truth_mf.p,
        "precision": m.precision,
        "recall": m.recall,
        "exact": m.exact,
        "max_weight_error": m.max_weight_error,
    }
    text = json.dumps(payload, indent=2)
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _resolve_jobs(value) -> int:
    if value is None:
        raw = os.environ.get(JOBS_ENV)
        if raw is None:
            return 1
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(
                f"{JOBS_ENV} must be an integer, got {raw!r}"
            ) from None
    if value < 1:
        raise ConfigError(f"jobs must be >= 1, got {value}")
    return value


def cmd_sweep(args) -> int:
    spec = ExperimentSpec.from_dict(
        _require_object(_load_json(args.config), args.config)
    )
    jobs = _resolve_jobs(args.jobs)
    trials, gammas = run_sweep(spec, jobs=jobs)
    os.makedirs(args.out, exist_ok=True)
    trials_path = os.path.join(args.out, "trials.csv")
    summary_path = os.path.join(args.out, "summary.csv")
    write_trials_csv(trials_path, trials)
    write_summary_csv(summary_path, trials)
    n_err = sum(1 for r in trials if r.error)
    print(f"trials:  {trials_path} ({len(trials)} rows, {n_err} errors)")
    print(f"summary: {summary_path}")
    if gammas:
        gt_path = os.path.join(args.out, "gamma_trials.csv")
        gs_path = os.path.join(args.out, "gamma_summary.csv")
        write_gamma_csv(gt_path, gammas)
        write_gamma_summary_csv(gs_path, gammas)
        print(f"gamma:   {gt_path} ({len(gammas)} rows), {gs_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gbnlearn",
        description=(
            "Learn the exact structure and weights of equal-noise-variance "
            "Gaussian Bayesian networks, and run the synthetic experiments "
            "around that pipeline."
        ),
        epilog=(
            f"Environment: {JOBS_ENV} sets the default --jobs for sweep; "
            "GBNLEARN_BACKEND=numba|numpy selects the compute kernels."
        ),
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser(
        "generate", help="sample a screened model and a data set from a JSON config"
    )
    g.add_argument("--config", required=True, metavar="PATH", help="generator JSON")
    g.add_argument("--seed", type=int, default=None, help="override the config seed")
    g.add_argument(
        "--out",
        required=True,
        metavar="PREFIX",
        help="writes PREFIX.model.txt and PREFIX.data.csv",
    )
    g.set_defaults(func=cmd_generate)

    l = sub.add_parser("learn", help="learn a model from a data CSV")
    l.add_argument("data", metavar="DATA", help="headerless CSV, one sample per row")
    l.add_argument("--config", metavar="PATH", help="learner options JSON")
    l.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=None,
        help="CLIME regularization (default: 0.5 k sqrt(ln p / n))",
    )
    l.add_argument(
        "--threshold",
        type=float,
        default=None,
        help="support threshold (default: max(1e-8, 3 lambda))",
    )
    l.add_argument("--center", action="store_true", help="mean-center the data")
    l.add_argument(
        "--strict-recompute",
        action="store_true",
        help="re-score every surviving node after each removal",
    )
    l.add_argument("--out", required=True, metavar="PATH", help="output model file")
    l.set_defaults(func=cmd_learn)

    e = sub.add_parser("eval", help="score a learned model against the truth")
    e.add_argument("truth", metavar="TRUTH", help="true model file")
    e.add_argument("learned", metavar="LEARNED", help="learned model file")
    e.add_argument("--out", metavar="PATH", default=None, help="also write JSON here")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="run a Monte Carlo recovery experiment grid")
    s.add_argument("--config", required=True, metavar="PATH", help="ExperimentSpec JSON")
    s.add_argument("--out", required=True, metavar="DIR", help="output directory")
    s.add_argument(
        "--jobs",
        type=int,
        default=None,
        help=f"parallel trial workers (default: ${JOBS_ENV} or 1)",
    )
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataFormatError, DimensionMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except GbnLearnError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
