"""Causal-order and structure learning by terminal-vertex peeling.

The pipeline: estimate the precision matrix, read Markov blankets off
its support, score every node by the ratio

    r_i = max_j |Omega_hat[i, j]| / max(|theta_hat[i, j]|, eps)

over its blanket (theta_hat from least squares on the blanket), peel the
argmin (for equal-variance models terminal vertices have the smallest
ratio), apply the rank-one marginalization update to the precision
estimate, and repeat.  The peel order z lists terminals first, so
reversing it gives a causal (parents-first) order.  A final regression
pass per node on its causally-earlier blanket members yields the edge
set and weights.

Thresholds: "auto" resolves to max(1e-8, 3 * lambda) and is applied both
to |Omega_hat| entries (blanket membership) and to |theta_hat| in the
final parent step.  Ties in the argmin go to the lowest node index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from gbnlearn.clime import clime, default_lambda
from gbnlearn.errors import (
    DimensionMismatch,
    GbnLearnError,
    NonpositivePivot,
    PipelineError,
    SingularSupport,
)
from gbnlearn.model import Dag, Gbn
from gbnlearn.regression import (
    EmpiricalCovariance,
    empirical_covariance,
    ols_on_support,
    residual_variance,
)

_AUTO = "auto"


@dataclass(frozen=True)
class LearnerConfig:
    """Settings for the end-to-end learner.

    ``lam`` and ``support_threshold`` accept numbers or "auto": lambda
    defaults to the 0.5 * k_hint * sqrt(ln p / n) rule (k_hint itself
    defaulting to ceil(sqrt(p)), which `learn_gbn` flags in the result),
    the threshold to max(1e-8, 3 * lambda).
    """

    lam: Union[float, str] = _AUTO
    support_threshold: Union[float, str] = _AUTO
    ratio_epsilon: float = 1e-12
    strict_recompute: bool = False
    center: bool = False
    k_hint: Optional[int] = None
    tie_break: str = "lowest-index"
    sigma2_rule: str = "mean_residual"
    lp_tol: float = 1e-9

    def __post_init__(self):
        if isinstance(self.lam, str):
            if self.lam != _AUTO:
                raise ValueError(f"lam must be a number or 'auto', got {self.lam!r}")
        elif self.lam < 0.0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if isinstance(self.support_threshold, str):
            if self.support_threshold != _AUTO:
                raise ValueError(
                    f"support_threshold must be a number or 'auto', "
                    f"got {self.support_threshold!r}"
                )
        elif self.support_threshold < 0.0:
            raise ValueError("support_threshold must be nonnegative")
        if self.ratio_epsilon <= 0.0:
            raise ValueError("ratio_epsilon must be positive")
        if self.k_hint is not None and self.k_hint < 1:
            raise ValueError("k_hint must be >= 1")
        if self.tie_break != "lowest-index":
            raise ValueError(f"unsupported tie_break rule {self.tie_break!r}")
        if self.sigma2_rule != "mean_residual":
            raise ValueError(f"unsupported sigma2_rule {self.sigma2_rule!r}")
        if self.lp_tol <= 0.0:
            raise ValueError("lp_tol must be positive")


@dataclass(frozen=True)
class CausalOrder:
    """Peel order: z[0] was removed first, so reversed(z) is parents-first."""

    z: tuple

    def __post_init__(self):
        z = tuple(int(v) for v in self.z)
        if sorted(z) != list(range(len(z))):
            raise ValueError(f"z must be a permutation of 0..p-1, got {z}")
        object.__setattr__(self, "z", z)

    @property
    def p(self) -> int:
        return len(self.z)

    def causal_sequence(self) -> tuple:
        return tuple(reversed(self.z))


@dataclass(frozen=True)
class RatioStep:
    """One peel decision: which node, its ratio, whether eps floored a theta."""

    node: int
    ratio: float
    eps_guard: bool


@dataclass(frozen=True, eq=False)
class LearnedGbn:
    """Learner output: edge set, weights, noise estimate, and diagnostics."""

    edges: frozenset
    b_hat: np.ndarray
    sigma2_hat: float
    order: CausalOrder
    ratio_trace: tuple
    lambda_used: Optional[float] = None
    threshold_used: Optional[float] = None
    k_hint_defaulted: bool = False


def _resolve_threshold(cfg: LearnerConfig) -> float:
    if not isinstance(cfg.support_threshold, str):
        return float(cfg.support_threshold)
    if not isinstance(cfg.lam, str):
        return max(1e-8, 3.0 * float(cfg.lam))
    return 1e-8


def estimate_markov_blankets(omega_hat: np.ndarray, threshold: float) -> list:
    """Per-node support reads: blanket(i) = {j != i : |Omega_hat[i, j]| > threshold}."""
    omega_hat = np.asarray(omega_hat, dtype=np.float64)
    p = omega_hat.shape[0]
    mask = np.abs(omega_hat) > threshold
    return [
        frozenset(j for j in range(p) if j != i and mask[i, j]) for i in range(p)
    ]


def node_ratio(
    omega_hat: np.ndarray,
    theta_hat: np.ndarray,
    i: int,
    support: list,
    eps: float = 1e-12,
) -> float:
    """max over the support of |Omega_hat[i, j]| / max(|theta_hat[j']|, eps).

    Zero for an empty support (isolated nodes peel first).
    """
    r, _ = _ratio_with_guard(np.asarray(omega_hat), np.asarray(theta_hat), i, support, eps)
    return r


def _ratio_with_guard(omega_hat, theta_hat, i, support, eps):
    if len(support) == 0:
        return 0.0, False
    num = np.abs(omega_hat[i, list(support)])
    den = np.abs(np.asarray(theta_hat, dtype=np.float64))
    if den.shape != num.shape:
        raise DimensionMismatch(
            f"theta_hat has shape {den.shape}, expected ({len(support)},)"
        )
    guarded = den < eps
    den = np.maximum(den, eps)
    ratios = num / den
    best = int(np.argmax(ratios))
    return float(ratios[best]), bool(guarded[best])


def learn_order(
    cov: EmpiricalCovariance, omega_hat: np.ndarray, cfg: LearnerConfig
):
    """Peel argmin-ratio nodes to a full order; returns (CausalOrder, trace).

    After each removal the precision estimate gets the rank-one
    marginalization update and only the removed node's estimated blanket
    is re-scored (all survivors when ``cfg.strict_recompute``).  The
    trace has one entry per peeled node; the final survivor gets none.
    """
    omega0 = np.asarray(omega_hat, dtype=np.float64)
    p = omega0.shape[0]
    if omega0.shape != (p, p):
        raise DimensionMismatch(f"omega_hat must be square, got {omega0.shape}")
    if cov.sigma_n.shape != (p, p):
        raise DimensionMismatch(
            f"cov is {cov.sigma_n.shape} but omega_hat is {omega0.shape}"
        )
    thr = _resolve_threshold(cfg)
    omega = omega0.copy()
    alive = np.ones(p, dtype=bool)
    ratios = np.zeros(p)
    guard = np.zeros(p, dtype=bool)
    blankets = [()] * p

    def rescore(i):
        support = [j for j in range(p) if alive[j] and j != i and abs(omega[i, j]) > thr]
        try:
            theta = ols_on_support(cov, i, support)
        except SingularSupport as e:
            raise SingularSupport(
                f"scoring node {i}: {e}", pivot_index=e.pivot_index
            ) from e
        blankets[i] = support
        ratios[i], guard[i] = _ratio_with_guard(
            omega, theta, i, support, cfg.ratio_epsilon
        )

    for i in range(p):
        rescore(i)

    z = []
    trace = []
    for _ in range(p - 1):
        i = int(np.argmin(np.where(alive, ratios, np.inf)))
        trace.append(RatioStep(node=i, ratio=float(ratios[i]), eps_guard=bool(guard[i])))
        z.append(i)
        pivot = float(omega[i, i])
        if pivot <= cfg.ratio_epsilon:
            raise NonpositivePivot(
                f"Omega_hat[{i}, {i}] = {pivot:.3e} at removal "
                f"(step {len(z)}); estimate is not usable as a precision matrix"
            )
        col = omega[:, i].copy()
        omega -= np.outer(col, col) / pivot
        omega[i, :] = 0.0
        omega[:, i] = 0.0
        alive[i] = False
        targets = range(p) if cfg.strict_recompute else blankets[i]
        for j in targets:
            if alive[j]:
                rescore(j)
    z.append(int(np.flatnonzero(alive)[0]))
    return CausalOrder(z=tuple(z)), tuple(trace)


def learn_structure_from_order(
    cov: EmpiricalCovariance,
    omega_hat: np.ndarray,
    order: CausalOrder,
    cfg: LearnerConfig,
    ratio_trace: tuple = (),
) -> LearnedGbn:
    """Parent regressions along the order.

    Candidates for node z[t] are the nodes peeled after it (the causally
    earlier ones) whose *initial* precision entry against z[t] clears
    the threshold; edges keep the regression coefficients whose
    magnitude clears the same threshold.
    """
    omega0 = np.asarray(omega_hat, dtype=np.float64)
    p = omega0.shape[0]
    if order.p != p:
        raise DimensionMismatch(f"order has p = {order.p}, omega_hat has p = {p}")
    thr = _resolve_threshold(cfg)
    b_hat = np.zeros((p, p))
    edges = set()
    resid = np.zeros(p)
    for t, node in enumerate(order.z):
        cands = sorted(
            j for j in order.z[t + 1 :] if abs(omega0[node, j]) > thr
        )
        try:
            theta = ols_on_support(cov, node, cands)
        except SingularSupport as e:
            raise SingularSupport(
                f"parent regression for node {node}: {e}", pivot_index=e.pivot_index
            ) from e
        for j, coef in zip(cands, theta):
            if abs(coef) > thr:
                b_hat[node, j] = coef
                edges.add((node, j))
        resid[node] = residual_variance(cov, node, cands, theta)
    sigma2_hat = float(resid.mean())  # cfg.sigma2_rule == "mean_residual"
    lam_used = None if isinstance(cfg.lam, str) else float(cfg.lam)
    return LearnedGbn(
        edges=frozenset(edges),
        b_hat=b_hat,
        sigma2_hat=sigma2_hat,
        order=order,
        ratio_trace=tuple(ratio_trace),
        lambda_used=lam_used,
        threshold_used=thr,
    )


def learn_gbn(x, cfg: LearnerConfig = LearnerConfig()) -> LearnedGbn:
    """End-to-end learner: covariance -> precision -> order -> structure.

    Any stage failure is re-raised as PipelineError naming the stage.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DimensionMismatch(
            f"data must be 2-D with at least 2 rows, got shape {x.shape}"
        )
    n, p = x.shape
    stage = "covariance"
    try:
        cov = empirical_covariance(x, center=cfg.center)
        stage = "clime"
        defaulted = False
        if isinstance(cfg.lam, str):
            k_hint = cfg.k_hint
            if k_hint is None:
                k_hint = math.ceil(math.sqrt(p))
                defaulted = True
            lam = default_lambda(n, max(p, 2), k_hint)
        else:
            lam = float(cfg.lam)
        est = clime(cov.sigma_n, lam, tol=cfg.lp_tol)
        resolved = replace(cfg, lam=lam)
        stage = "order"
        order, trace = learn_order(cov, est.omega_hat, resolved)
        stage = "structure"
        learned = learn_structure_from_order(
            cov, est.omega_hat, order, resolved, ratio_trace=trace
        )
    except GbnLearnError as e:
        raise PipelineError(stage, e) from e
    return replace(learned, k_hint_defaulted=defaulted)


def marginal_variance_order(cov: EmpiricalCovariance) -> CausalOrder:
    """Baseline: peel by descending marginal variance (ties to lowest index).

    Valid only under additional assumptions on how variance accumulates
    along the graph; kept as a comparison baseline.
    """
    var = np.diag(cov.sigma_n)
    p = var.shape[0]
    peel = np.lexsort((np.arange(p), -var))
    return CausalOrder(z=tuple(int(i) for i in peel))


@dataclass(frozen=True)
class StructureMetrics:
    precision: float
    recall: float
    exact: bool
    max_weight_error: Optional[float]


def structure_metrics(truth, learned: LearnedGbn) -> StructureMetrics:
    """Edge precision/recall/exactness against the true graph.

    ``truth`` may be a Gbn (enables max weight error over true edges
    when the edge set is exact) or a bare Dag.  Conventions: precision
    is 1 with no predicted edges, recall is 1 with no true edges.
    """
    if isinstance(truth, Gbn):
        true_edges = set(truth.dag.edges)
        true_b = truth.b
    elif isinstance(truth, Dag):
        true_edges = set(truth.edges)
        true_b = None
    else:
        raise TypeError(f"truth must be Gbn or Dag, got {type(truth).__name__}")
    pred = set(learned.edges)
    tp = len(pred & true_edges)
    precision = tp / len(pred) if pred else 1.0
    recall = tp / len(true_edges) if true_edges else 1.0
    exact = pred == true_edges
    max_weight_error = None
    if exact and true_b is not None:
        max_weight_error = max(
            (abs(float(learned.b_hat[c, par] - true_b[c, par])) for c, par in true_edges),
            default=0.0,
        )
    return StructureMetrics(
        precision=precision, recall=recall, exact=exact, max_weight_error=max_weight_error
    )


def weight_error_inf(truth: Gbn, learned: LearnedGbn) -> float:
    """max |B_hat - B*| over all p^2 entries (defined for every trial)."""
    if truth.b.shape != learned.b_hat.shape:
        raise DimensionMismatch(
            f"B shapes differ: {truth.b.shape} vs {learned.b_hat.shape}"
        )
    return float(np.max(np.abs(learned.b_hat - truth.b)))
