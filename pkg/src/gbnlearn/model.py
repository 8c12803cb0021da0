"""Gaussian Bayesian network model layer.

Conventions, fixed package-wide:

* Nodes are labelled 0..p-1.  A directed edge is stored as the pair
  ``(child, parent)``: ``(i, j)`` means j -> i, i.e. j is a parent of i.
* The weight matrix B has ``B[i, j]`` equal to the edge weight of
  ``(i, j)`` and zero elsewhere, so the linear model is X = B X + N with
  independent zero-mean Gaussian noise, Var(N_i) = sigma2[i].
* Population moments: the precision matrix is computed directly as
  Omega = (I - B).T D^-1 (I - B) with D = diag(sigma2); the covariance
  is its SPD inverse.
* The effective influence between distinct nodes i and j is
  ``w~(i, j) = B[i, j] + B[j, i] - B[:, i] . B[:, j]``; under equal
  noise variance, off-diagonal precision entries are
  ``Omega[i, j] = -w~(i, j) / sigma2`` and the Markov blanket of i is
  exactly the set of j with nonzero effective influence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from gbnlearn import linalg
from gbnlearn.errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    NotTerminal,
    SingularModel,
)

# Effective influences at or below this magnitude count as structural zeros.
ZERO_INFLUENCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dag:
    """Directed acyclic graph over nodes 0..p-1, edges as (child, parent)."""

    p: int
    edges: frozenset

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"edge {e!r} is not a (child, parent) pair")
        object.__setattr__(
            self, "edges", frozenset((int(c), int(par)) for c, par in self.edges)
        )
        for child, parent in self.edges:
            if not (0 <= child < self.p and 0 <= parent < self.p):
                raise ValueError(f"edge {e} out of range for p = {self.p}")
            if child == parent:
                raise ValueError(f"self-loop at node {child}")
        self.topological_order()  # raises on cycles

    def parents_of(self, i: int) -> set:
        return {parent for child, parent in self.edges if child == i}

    def children_of(self, i: int) -> set:
        return {child for child, parent in self.edges if parent == i}

    def is_terminal(self, i: int) -> bool:
        return not self.children_of(i)

    def topological_order(self) -> tuple:
        """Parents-first order, lowest label chosen first among available."""
        import heapq

        indeg = [0] * self.p
        children = [[] for _ in range(self.p)]
        for child, parent in self.edges:
            indeg[child] += 1
            children[parent].append(child)
        heap = [i for i in range(self.p) if indeg[i] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, c)
        if len(order) != self.p:
            raise ValueError("edge set contains a directed cycle")
        return tuple(order)


def _locked(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Gbn:
    """A DAG plus edge weights and per-node noise variances.

    Arrays are copied and frozen at construction; instances are safe to
    share across threads/processes.
    """

    dag: Dag
    b: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        p = self.dag.p
        b = np.asarray(self.b, dtype=np.float64)
        if b.shape != (p, p):
            raise DimensionMismatch(f"B has shape {b.shape}, expected ({p}, {p})")
        if not np.all(np.isfinite(b)):
            raise ValueError("B contains non-finite entries")
        support = {(i, j) for i, j in zip(*np.nonzero(b))}
        if support != set(self.dag.edges):
            missing = set(self.dag.edges) - support
            extra = support - set(self.dag.edges)
            raise ValueError(
                f"B support does not match the edge set "
                f"(zero-weight edges: {sorted(missing)}, off-edge entries: {sorted(extra)})"
            )
        s2 = np.asarray(self.sigma2, dtype=np.float64)
        if s2.shape != (p,):
            raise DimensionMismatch(f"sigma2 has shape {s2.shape}, expected ({p},)")
        if not np.all(np.isfinite(s2)) or np.any(s2 <= 0.0):
            raise ValueError("sigma2 entries must be finite and positive")
        object.__setattr__(self, "b", _locked(b))
        object.__setattr__(self, "sigma2", _locked(s2))

    @property
    def p(self) -> int:
        return self.dag.p

    @property
    def equal_variance(self) -> bool:
        return bool(np.all(self.sigma2 == self.sigma2[0]))


@dataclass(frozen=True, eq=False)
class PopulationMoments:
    """Exact covariance and precision of a Gbn."""

    sigma: np.ndarray
    omega: np.ndarray


def covariance_of(g: Gbn) -> PopulationMoments:
    """Population moments of the model.

    Omega is formed directly from (B, sigma2); Sigma is its SPD inverse.
    """
    m = np.eye(g.p) - g.b
    d_inv = 1.0 / g.sigma2
    omega = m.T @ (d_inv[:, None] * m)
    omega = (omega + omega.T) * 0.5
    try:
        sigma = linalg.invert_spd(omega)
    except NotPositiveDefinite as e:
        raise SingularModel(f"model precision is numerically singular: {e}") from e
    return PopulationMoments(sigma=_locked(sigma), omega=_locked(omega))


def effective_influence(b: np.ndarray, i: int, j: int) -> float:
    """w~(i, j) for distinct nodes i, j given the weight matrix."""
    if i == j:
        raise ValueError("effective influence is defined for distinct nodes")
    return float(b[i, j] + b[j, i] - b[:, i] @ b[:, j])


def effective_influence_matrix(b: np.ndarray) -> np.ndarray:
    """All pairwise effective influences; the diagonal is zeroed."""
    w = b + b.T - b.T @ b
    np.fill_diagonal(w, 0.0)
    return w


def markov_blanket(g: Gbn, i: int) -> set:
    """Nodes with nonzero effective influence on i (parents, children, co-parents)."""
    w = effective_influence_matrix(g.b)
    return {j for j in range(g.p) if j != i and abs(w[i, j]) > ZERO_INFLUENCE_TOL}


def population_theta(moments: PopulationMoments, i: int) -> np.ndarray:
    """Best linear predictor coefficients of node i on all others.

    Returned in ascending node order with i skipped:
    theta[j'] = -Omega[i, j] / Omega[i, i].
    """
    omega = moments.omega
    p = omega.shape[0]
    others = [j for j in range(p) if j != i]
    return -omega[i, others] / omega[i, i]


def is_terminal_population(
    moments: PopulationMoments, sigma2: float, i: int, tol: float = 1e-9
) -> bool:
    """Terminal-vertex test for equal-variance models.

    Node i is terminal iff its regression coefficients equal
    -sigma2 * Omega[i, j] for every j != i.
    """
    omega = moments.omega
    p = omega.shape[0]
    others = [j for j in range(p) if j != i]
    theta = -omega[i, others] / omega[i, i]
    return bool(np.max(np.abs(theta + sigma2 * omega[i, others]), initial=0.0) <= tol)


def marginalize_precision(omega: np.ndarray, i: int) -> np.ndarray:
    """Precision of the model with node i marginalized out.

    Rank-one update Omega - Omega[:, i] Omega[i, :] / Omega[i, i], then
    drop row and column i.  Equals the precision of the reduced model
    when i is terminal.
    """
    omega = np.asarray(omega, dtype=np.float64)
    p = omega.shape[0]
    if not (0 <= i < p):
        raise ValueError(f"node {i} out of range")
    piv = omega[i, i]
    if piv <= 0.0:
        raise NotPositiveDefinite(
            f"Omega[{i}, {i}] = {piv:.3e} is not positive", pivot_index=i
        )
    out = omega - np.outer(omega[:, i], omega[i, :]) / piv
    keep = [j for j in range(p) if j != i]
    return out[np.ix_(keep, keep)]


def remove_terminal(g: Gbn, i: int):
    """Remove a terminal vertex; returns (reduced Gbn, old->new index map).

    The map is an int array of length p with -1 at the removed node.
    """
    if not g.dag.is_terminal(i):
        raise NotTerminal(f"node {i} has children {sorted(g.dag.children_of(i))}")
    keep = [j for j in range(g.p) if j != i]
    old_to_new = np.full(g.p, -1, dtype=np.int64)
    old_to_new[keep] = np.arange(g.p - 1)
    edges = frozenset(
        (int(old_to_new[c]), int(old_to_new[par]))
        for c, par in g.dag.edges
        if c != i and par != i
    )
    reduced = Gbn(
        dag=Dag(p=g.p - 1, edges=edges),
        b=g.b[np.ix_(keep, keep)],
        sigma2=g.sigma2[keep],
    )
    return reduced, old_to_new


def residual_covariance(sigma: np.ndarray, i: int) -> np.ndarray:
    """Covariance between node i's regression residual and the other nodes.

    Identically zero for Gaussian models; exposed as a diagnostic for
    the failure mode of residual-independence-based learners.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    p = sigma.shape[0]
    others = [j for j in range(p) if j != i]
    a = sigma[np.ix_(others, others)]
    b = sigma[others, i]
    theta = linalg.solve_spd(linalg.cholesky(a), b)
    return b - a @ theta


def check_nonsingular(moments: PopulationMoments, floor: float = 0.0) -> bool:
    """True iff the smallest eigenvalue of Sigma is >= floor."""
    return linalg.min_eigenvalue(moments.sigma) >= floor


# ---------------------------------------------------------------------------
# Structural faithfulness check


@dataclass(frozen=True)
class RsafWitness:
    """A concrete violation: which pair failed, where, and by how much."""

    ordering: tuple
    prefix_size: int
    pair: tuple
    observed: float
    required: float
    kind: str  # "edge_weight" or "effective_influence"


@dataclass(frozen=True)
class RsafReport:
    alpha: float
    satisfied: bool
    witness: Optional[RsafWitness]
    orderings_checked: int
    exhaustive: bool
    vacuous_kappa_seen: bool


def _blankets_in(nodes: tuple, edges: frozenset):
    """Graph Markov blankets (parents, children, co-parents) inside a node set."""
    nodeset = set(nodes)
    parents = {i: set() for i in nodes}
    children = {i: set() for i in nodes}
    for child, parent in edges:
        if child in nodeset and parent in nodeset:
            parents[child].add(parent)
            children[parent].add(child)
    blankets = {}
    for i in nodes:
        bl = set(parents[i]) | set(children[i])
        for c in children[i]:
            bl |= parents[c]
        bl.discard(i)
        blankets[i] = bl
    return parents, children, blankets


def _prefix_violation(nodes: tuple, g: Gbn, alpha: float):
    """Check condition (ii) inside one induced subgraph.

    Returns (witness-tuple-or-None, vacuous_seen).  A zero effective
    influence between blanket members violates regardless of kappa; the
    finite 3*alpha/kappa bound applies only while kappa > 0.
    """
    _, children, blankets = _blankets_in(nodes, g.dag.edges)
    idx = list(nodes)
    b_sub = g.b[np.ix_(idx, idx)]
    pos = {node: t for t, node in enumerate(idx)}
    w_sub = effective_influence_matrix(b_sub)
    vacuous = False
    for i in nodes:
        n_children = len(children[i])
        if n_children == 0:
            kappa = 1.0
        else:
            kappa = 1.0 - 2.0 / (1.0 + 9.0 * n_children * alpha * alpha)
        for j in sorted(blankets[i]):
            observed = abs(w_sub[pos[i], pos[j]])
            if observed <= ZERO_INFLUENCE_TOL:
                required = 3.0 * alpha / kappa if kappa > 0.0 else float("inf")
                return (i, j, float(observed), required), vacuous
            if kappa <= 0.0:
                vacuous = True
                continue
            required = 3.0 * alpha / kappa
            if observed <= required:
                return (i, j, float(observed), required), vacuous
    return None, vacuous


def _iter_linear_extensions(dag: Dag):
    indeg = [0] * dag.p
    children = [[] for _ in range(dag.p)]
    for child, parent in dag.edges:
        indeg[child] += 1
        children[parent].append(child)
    avail = sorted(i for i in range(dag.p) if indeg[i] == 0)
    prefix = []

    def rec(avail):
        if len(prefix) == dag.p:
            yield tuple(prefix)
            return
        for v in list(avail):
            nxt = [a for a in avail if a != v]
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    nxt.append(c)
            prefix.append(v)
            yield from rec(sorted(nxt))
            prefix.pop()
            for c in children[v]:
                indeg[c] += 1

    yield from rec(avail)


def _count_linear_extensions(dag: Dag, cap: int) -> int:
    count = 0
    for _ in _iter_linear_extensions(dag):
        count += 1
        if count > cap:
            return count
    return count


def _random_linear_extension(dag: Dag, rng: np.random.Generator) -> tuple:
    indeg = [0] * dag.p
    children = [[] for _ in range(dag.p)]
    for child, parent in dag.edges:
        indeg[child] += 1
        children[parent].append(child)
    avail = sorted(i for i in range(dag.p) if indeg[i] == 0)
    order = []
    while avail:
        v = avail.pop(int(rng.integers(len(avail))))
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                avail.append(c)
        avail.sort()
    return tuple(order)


def check_rsaf(
    g: Gbn, alpha: float, order_budget: int = 10_000, seed: int = 0
) -> RsafReport:
    """Check restricted structural adjacency faithfulness at margin alpha.

    Condition (i): every edge weight exceeds 3*alpha in magnitude.
    Condition (ii): inside every prefix of every topological ordering,
    effective influences between Markov-blanket members exceed
    3*alpha/kappa (kappa depending on the child count there); a
    non-positive kappa makes the finite bound vacuous, which the report
    flags, but an exactly-zero influence between blanket members still
    violates.

    All topological orderings are enumerated when p <= 8 or when there
    are at most ``order_budget`` of them; otherwise ``order_budget``
    random orderings are drawn from the given seed and the report's
    ``exhaustive`` flag is False.  Deterministic for fixed inputs.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not g.equal_variance:
        raise ValueError("check_rsaf requires an equal-variance model")

    canonical = g.dag.topological_order()
    for child, parent in sorted(g.dag.edges):
        w = abs(float(g.b[child, parent]))
        if w <= 3.0 * alpha:
            witness = RsafWitness(
                ordering=canonical,
                prefix_size=g.p,
                pair=(child, parent),
                observed=w,
                required=3.0 * alpha,
                kind="edge_weight",
            )
            return RsafReport(
                alpha=alpha,
                satisfied=False,
                witness=witness,
                orderings_checked=0,
                exhaustive=True,
                vacuous_kappa_seen=False,
            )

    if g.p <= 8 or _count_linear_extensions(g.dag, order_budget) <= order_budget:
        orderings = _iter_linear_extensions(g.dag)
        exhaustive = True
    else:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        orderings = (_random_linear_extension(g.dag, rng) for _ in range(order_budget))
        exhaustive = False

    cache = {}
    vacuous_seen = False
    checked = 0
    for tau in orderings:
        checked += 1
        for m in range(2, g.p + 1):
            key = frozenset(tau[:m])
            if key in cache:
                violation, vac = cache[key]
            else:
                violation, vac = _prefix_violation(tuple(sorted(key)), g, alpha)
                cache[key] = (violation, vac)
            vacuous_seen = vacuous_seen or vac
            if violation is not None:
                i, j, observed, required = violation
                witness = RsafWitness(
                    ordering=tau,
                    prefix_size=m,
                    pair=(i, j),
                    observed=observed,
                    required=required,
                    kind="effective_influence",
                )
                return RsafReport(
                    alpha=alpha,
                    satisfied=False,
                    witness=witness,
                    orderings_checked=checked,
                    exhaustive=exhaustive,
                    vacuous_kappa_seen=vacuous_seen,
                )
    return RsafReport(
        alpha=alpha,
        satisfied=True,
        witness=None,
        orderings_checked=checked,
        exhaustive=exhaustive,
        vacuous_kappa_seen=vacuous_seen,
    )
