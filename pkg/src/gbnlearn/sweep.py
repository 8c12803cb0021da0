"""Seeded Monte Carlo experiments over the generate -> learn pipeline.

A sweep runs one trial per (p, q, C, trial) cell.  Every cell draws its
own 64-bit seed from a hash of (master_seed, p, q, C, trial), so adding
C values or reordering execution never perturbs existing cells, and
trials can run in parallel.  Rows are sorted before writing; re-running
the same spec yields identical CSVs except for wall-time columns.

Sample sizes follow n = ceil(C k^2 ln p) with k the true maximum Markov
blanket size of the drawn model; the same natural-log convention is used
by default_lambda, and the harness hands the learner the true k.
"""

from __future__ import annotations

import csv
import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields as dataclass_fields
from statistics import fmean
from typing import Optional, Union

from .clime import clime, default_lambda
from .errors import ConfigError, GbnLearnError
from .order import (
    LearnerConfig,
    learn_order,
    learn_structure_from_order,
    marginal_variance_order,
    structure_metrics,
    weight_error_inf,
)
from .regression import empirical_covariance
from .synth import (
    STREAM_DATA,
    STREAM_VARIANCES,
    GeneratorConfig,
    max_markov_blanket_size,
    perturb_variances,
    sample_data,
    sample_gbn_screened,
    sample_size,
    substream,
)

_SPEC_KEYS = frozenset(
    {
        "p",
        "q",
        "C",
        "trials",
        "sigma2",
        "weight_magnitude",
        "gamma",
        "master_seed",
        "lambda_rule",
        "overrides",
    }
)

# lam comes from lambda_rule and k_hint from the generator truth, so
# neither may be overridden per spec.
_OVERRIDE_KEYS = frozenset(
    f.name for f in dataclass_fields(LearnerConfig)
) - {"lam", "k_hint"}


def _as_tuple(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


@dataclass(frozen=True)
class ExperimentSpec:
    """Grid description for a sweep.

    p and q are paired lists (one graph family per position); C values
    are shared across all pairs.  A non-empty gamma list additionally
    runs the variance-perturbation sweep at the largest C, base variance
    1 and per-node values drawn from {1, 1 - gamma, 1 + gamma}.
    """

    p: tuple
    q: tuple
    c: tuple
    trials: int = 30
    sigma2: float = 0.8
    weight_magnitude: float = 0.5
    gamma: tuple = ()
    master_seed: int = 0
    lambda_rule: Union[str, float] = "default"
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(int(v) for v in _as_tuple(self.p)))
        object.__setattr__(self, "q", tuple(float(v) for v in _as_tuple(self.q)))
        object.__setattr__(self, "c", tuple(float(v) for v in _as_tuple(self.c)))
        object.__setattr__(self, "gamma", tuple(float(v) for v in _as_tuple(self.gamma)))
        if len(self.p) != len(self.q):
            raise ConfigError(
                f"p and q must pair up, got {len(self.p)} p values "
                f"and {len(self.q)} q values"
            )
        if not self.p:
            raise ConfigError("p: at least one value is required")
        if any(v < 2 for v in self.p):
            raise ConfigError(f"p: all values must be >= 2, got {self.p}")
        if any(not 0.0 < v <= 1.0 for v in self.q):
            raise ConfigError(f"q: all values must be in (0, 1], got {self.q}")
        if not self.c or any(v <= 0.0 for v in self.c):
            raise ConfigError(
                f"C: a non-empty list of positive values is required, got {self.c}"
            )
        if self.trials < 1:
            raise ConfigError(f"trials: must be >= 1, got {self.trials}")
        if self.sigma2 <= 0.0:
            raise ConfigError(f"sigma2: must be positive, got {self.sigma2}")
        if self.weight_magnitude <= 0.0:
            raise ConfigError(
                f"weight_magnitude: must be positive, got {self.weight_magnitude}"
            )
        if any(not 0.0 <= g < 1.0 for g in self.gamma):
            raise ConfigError(f"gamma: all values must be in [0, 1), got {self.gamma}")
        if isinstance(self.lambda_rule, str):
            if self.lambda_rule != "default":
                raise ConfigError(
                    f'lambda_rule: expected "default" or a number, '
                    f"got {self.lambda_rule!r}"
                )
        elif float(self.lambda_rule) < 0.0:
            raise ConfigError(
                f"lambda_rule: a fixed lambda must be >= 0, got {self.lambda_rule}"
            )
        unknown = sorted(set(self.overrides) - _OVERRIDE_KEYS)
        if unknown:
            raise ConfigError(
                "overrides: unknown learner options "
                + ", ".join(unknown)
                + " (lam and k_hint are set by the harness)"
            )
        try:
            LearnerConfig(**dict(self.overrides))
        except ValueError as e:
            raise ConfigError(f"overrides: {e}") from e

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        """Build from a parsed JSON object.  Unknown keys are errors."""
        if not isinstance(d, dict):
            raise ConfigError(f"spec must be a JSON object, got {type(d).__name__}")
        unknown = sorted(set(d) - _SPEC_KEYS)
        if unknown:
            raise ConfigError("unknown spec keys: " + ", ".join(unknown))
        for key in ("p", "q", "C"):
            if key not in d:
                raise ConfigError(f"{key}: required")
        kwargs = {("c" if k == "C" else k): v for k, v in d.items()}
        return cls(**kwargs)


@dataclass(frozen=True)
class TrialRecord:
    """One learning run.  Numeric fields are None when the trial failed
    before producing them; error names the failing stage."""

    p: int
    q: float
    c: float
    trial: int
    seed: int
    k: Optional[int] = None
    n: Optional[int] = None
    lam: Optional[float] = None
    exact: Optional[bool] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    max_weight_error: Optional[float] = None
    baseline_exact: Optional[bool] = None
    wall_time: float = 0.0
    error: str = ""


@dataclass(frozen=True)
class GammaRecord:
    p: int
    q: float
    c: float
    gamma: float
    trial: int
    seed: int
    k: Optional[int] = None
    n: Optional[int] = None
    lam: Optional[float] = None
    exact: Optional[bool] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    max_weight_error: Optional[float] = None
    wall_time: float = 0.0
    error: str = ""


def trial_seed(master_seed: int, p: int, q: float, c: float, trial: int) -> int:
    """Stable 64-bit per-cell seed.

    Gamma levels reuse the (p, q, C, trial) seed on purpose: the
    perturbation sweep compares gamma values on paired draws.
    """
    key = f"{int(master_seed)}|{int(p)}|{float(q)!r}|{float(c)!r}|{int(trial)}"
    digest = hashlib.blake2b(key.encode("ascii"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _resolve_lambda(rule, n: int, p: int, k: int) -> float:
    if isinstance(rule, str):
        return default_lambda(n, p, k)
    return float(rule)


def _learn_and_score(g, seed, c, lambda_rule, overrides, with_baseline):
    """Shared trial body: sample data for the given model, run the full
    pipeline, score against the truth.  Pipeline failures land in the
    returned error field instead of raising; the sweep must continue."""
    out: dict = {"error": ""}
    # An edgeless draw has blanket size 0; the sizing and lambda rules need k >= 1.
    k = max(1, max_markov_blanket_size(g))
    n = sample_size(c, k, g.p)
    out["k"] = k
    out["n"] = n
    stage = "data"
    try:
        data = sample_data(g, n, substream(seed, STREAM_DATA), seed=seed)
        stage = "covariance"
        opts = dict(overrides or {})
        cov = empirical_covariance(data.x, center=bool(opts.get("center", False)))
        stage = "clime"
        lam = _resolve_lambda(lambda_rule, n, g.p, k)
        out["lam"] = lam
        cfg = LearnerConfig(lam=lam, k_hint=k, **opts)
        est = clime(cov.sigma_n, lam, tol=cfg.lp_tol)
        stage = "order"
        order, trace = learn_order(cov, est.omega_hat, cfg)
        stage = "structure"
        learned = learn_structure_from_order(cov, est.omega_hat, order, cfg, trace)
        m = structure_metrics(g, learned)
        out["exact"] = m.exact
        out["precision"] = m.precision
        out["recall"] = m.recall
        out["max_weight_error"] = weight_error_inf(g, learned)
        if with_baseline:
            # Same covariance and precision estimate; only the order is
            # replaced by the descending-marginal-variance heuristic.
            try:
                base_order = marginal_variance_order(cov)
                base_learned = learn_structure_from_order(
                    cov, est.omega_hat, base_order, cfg
                )
                out["baseline_exact"] = structure_metrics(g, base_learned).exact
            except GbnLearnError:
                out["baseline_exact"] = False
    except GbnLearnError as e:
        out["error"] = f"{stage}: {type(e).__name__}: {e}"
    return out


def run_trial(
    master_seed: int,
    p: int,
    q: float,
    c: float,
    trial: int,
    sigma2: float = 0.8,
    weight_magnitude: float = 0.5,
    lambda_rule="default",
    overrides: Optional[dict] = None,
) -> TrialRecord:
    seed = trial_seed(master_seed, p, q, c, trial)
    t0 = time.perf_counter()
    try:
        g = sample_gbn_screened(
            GeneratorConfig(
                p=p,
                q=q,
                seed=seed,
                sigma2=sigma2,
                weight_magnitude=weight_magnitude,
            )
        )
        parts = _learn_and_score(g, seed, c, lambda_rule, overrides, with_baseline=True)
    except GbnLearnError as e:
        parts = {"error": f"generate: {type(e).__name__}: {e}"}
    return TrialRecord(
        p=p,
        q=q,
        c=c,
        trial=trial,
        seed=seed,
        wall_time=time.perf_counter() - t0,
        **parts,
    )


def run_gamma_trial(
    master_seed: int,
    p: int,
    q: float,
    c: float,
    trial: int,
    gamma: float,
    weight_magnitude: float = 0.5,
    lambda_rule="default",
    overrides: Optional[dict] = None,
) -> GammaRecord:
    """Equal-variance model (base 1), screened before perturbation, then
    each node's variance moved to one of {1, 1 - gamma, 1 + gamma}.  The
    learner is not told; the sweep measures how recovery degrades."""
    seed = trial_seed(master_seed, p, q, c, trial)
    t0 = time.perf_counter()
    try:
        g = sample_gbn_screened(
            GeneratorConfig(
                p=p,
                q=q,
                seed=seed,
                sigma2=1.0,
                weight_magnitude=weight_magnitude,
            )
        )
        g = perturb_variances(g, gamma, substream(seed, STREAM_VARIANCES))
        parts = _learn_and_score(g, seed, c, lambda_rule, overrides, with_baseline=False)
    except GbnLearnError as e:
        parts = {"error": f"generate: {type(e).__name__}: {e}"}
    return GammaRecord(
        p=p,
        q=q,
        c=c,
        gamma=gamma,
        trial=trial,
        seed=seed,
        wall_time=time.perf_counter() - t0,
        **parts,
    )


def _run_trial_kwargs(kw: dict) -> TrialRecord:
    return run_trial(**kw)


def _run_gamma_kwargs(kw: dict) -> GammaRecord:
    return run_gamma_trial(**kw)


def run_sweep(spec: ExperimentSpec, jobs: int = 1):
    """Execute the full grid.  Returns (trial records, gamma records),
    each sorted so output is independent of scheduling."""
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    common = dict(
        master_seed=spec.master_seed,
        lambda_rule=spec.lambda_rule,
        overrides=dict(spec.overrides),
    )
    tasks = [
        dict(
            p=p,
            q=q,
            c=c,
            trial=t,
            sigma2=spec.sigma2,
            weight_magnitude=spec.weight_magnitude,
            **common,
        )
        for p, q in zip(spec.p, spec.q)
        for c in spec.c
        for t in range(spec.trials)
    ]
    gamma_tasks = []
    if spec.gamma:
        c_top = max(spec.c)
        gamma_tasks = [
            dict(
                p=p,
                q=q,
                c=c_top,
                gamma=gamma,
                trial=t,
                weight_magnitude=spec.weight_magnitude,
                **common,
            )
            for p, q in zip(spec.p, spec.q)
            for gamma in spec.gamma
            for t in range(spec.trials)
        ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(_run_trial_kwargs, tasks))
            gammas = list(pool.map(_run_gamma_kwargs, gamma_tasks))
    else:
        trials = [run_trial(**kw) for kw in tasks]
        gammas = [run_gamma_trial(**kw) for kw in gamma_tasks]
    trials.sort(key=lambda r: (r.p, r.q, r.c, r.trial))
    gammas.sort(key=lambda r: (r.p, r.q, r.c, r.gamma, r.trial))
    return trials, gammas


# ---------------------------------------------------------------- CSV --

_TRIAL_HEADER = (
    "p",
    "q",
    "C",
    "trial",
    "seed",
    "k",
    "n",
    "lambda",
    "exact",
    "precision",
    "recall",
    "max_weight_error",
    "baseline_exact",
    "wall_time",
    "error",
)
_GAMMA_HEADER = (
    "p",
    "q",
    "C",
    "gamma",
    "trial",
    "seed",
    "k",
    "n",
    "lambda",
    "exact",
    "precision",
    "recall",
    "max_weight_error",
    "wall_time",
    "error",
)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_trials_csv(path: str, records) -> None:
    _write_rows(
        path,
        _TRIAL_HEADER,
        (
            (
                r.p,
                r.q,
                r.c,
                r.trial,
                r.seed,
                r.k,
                r.n,
                r.lam,
                r.exact,
                r.precision,
                r.recall,
                r.max_weight_error,
                r.baseline_exact,
                r.wall_time,
                r.error,
            )
            for r in records
        ),
    )


def write_gamma_csv(path: str, records) -> None:
    _write_rows(
        path,
        _GAMMA_HEADER,
        (
            (
                r.p,
                r.q,
                r.c,
                r.gamma,
                r.trial,
                r.seed,
                r.k,
                r.n,
                r.lam,
                r.exact,
                r.precision,
                r.recall,
                r.max_weight_error,
                r.wall_time,
                r.error,
            )
            for r in records
        ),
    )


def _grouped(records, key):
    groups: dict = {}
    for r in records:
        groups.setdefault(key(r), []).append(r)
    return sorted(groups.items())


def summarize_trials(records):
    """Per-(p, q, C) aggregates.  Recovery counts errored trials as
    failures; means are over the trials that completed."""
    rows = []
    for (p, q, c), group in _grouped(records, lambda r: (r.p, r.q, r.c)):
        done = [r for r in group if not r.error]
        rows.append(
            {
                "p": p,
                "q": q,
                "C": c,
                "trials": len(group),
                "recovery": sum(1 for r in group if r.exact) / len(group),
                "baseline_recovery": sum(1 for r in group if r.baseline_exact)
                / len(group),
                "mean_precision": fmean(r.precision for r in done) if done else None,
                "mean_recall": fmean(r.recall for r in done) if done else None,
                "mean_max_weight_error": fmean(r.max_weight_error for r in done)
                if done
                else None,
                "errors": len(group) - len(done),
            }
        )
    return rows


def summarize_gamma(records):
    rows = []
    for (p, q, c, gamma), group in _grouped(
        records, lambda r: (r.p, r.q, r.c, r.gamma)
    ):
        done = [r for r in group if not r.error]
        rows.append(
            {
                "p": p,
                "q": q,
                "C": c,
                "gamma": gamma,
                "trials": len(group),
                "recovery": sum(1 for r in group if r.exact) / len(group),
                "mean_precision": fmean(r.precision for r in done) if done else None,
                "mean_recall": fmean(r.recall for r in done) if done else None,
                "errors": len(group) - len(done),
            }
        )
    return rows


def write_summary_csv(path: str, records) -> None:
    rows = summarize_trials(records)
    header = (
        "p",
        "q",
        "C",
        "trials",
        "recovery",
        "baseline_recovery",
        "mean_precision",
        "mean_recall",
        "mean_max_weight_error",
        "errors",
    )
    _write_rows(path, header, ([row[h] for h in header] for row in rows))


def write_gamma_summary_csv(path: str, records) -> None:
    rows = summarize_gamma(records)
    header = (
        "p",
        "q",
        "C",
        "gamma",
        "trials",
        "recovery",
        "mean_precision",
        "mean_recall",
        "errors",
    )
    _write_rows(path, header, ([row[h] for h in header] for row in rows))
