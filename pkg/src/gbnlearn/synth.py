"""Synthetic model and data generation.

Randomness is fully pinned down: every stream is a Philox4x64 counter
generator seeded through ``numpy.random.SeedSequence(seed, spawn_key)``,
with one spawn key per purpose (DAG draw, weights, data, variances) and
per rejection attempt.  Gaussian variates come from numpy's ziggurat
``standard_normal``.  Because the purposes are independent substreams,
drawing more samples never perturbs the graph draw for the same seed.

DAG sampling: an undirected Erdos-Renyi graph over unordered pairs with
edge probability q, oriented by a uniformly random permutation (the node
appearing earlier in the permutation becomes the parent).  Stream
consumption order is frozen: the permutation first, then one uniform per
(i < j) pair slot from a p x p block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from gbnlearn import linalg
from gbnlearn.errors import ScreeningExhausted
from gbnlearn.model import Dag, Gbn, covariance_of, effective_influence_matrix

STREAM_DAG = 0
STREAM_WEIGHTS = 1
STREAM_DATA = 2
STREAM_VARIANCES = 3

_SEED_MASK = (1 << 64) - 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for one (seed, purpose[, attempt]) combination."""
    ss = np.random.SeedSequence(
        entropy=int(seed) & _SEED_MASK, spawn_key=tuple(int(k) for k in key)
    )
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for the random-GBN generator.

    Edge weights are +/- ``weight_magnitude`` with equal probability.
    Accepted models must have min eigenvalue of the precision matrix at
    least ``min_precision_eig``; up to ``max_rejections`` draws are made
    before giving up.
    """

    p: int
    q: float
    seed: int = 0
    weight_magnitude: float = 0.5
    sigma2: float = 0.8
    min_precision_eig: float = 0.05
    max_rejections: int = 1000

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        # q = 1 is allowed so every pair can be forced to an edge.
        if not (0.0 < self.q <= 1.0):
            raise ValueError(f"q must be in (0, 1], got {self.q}")
        if self.weight_magnitude <= 0.0:
            raise ValueError("weight_magnitude must be positive")
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive")
        if self.min_precision_eig < 0.0:
            raise ValueError("min_precision_eig must be nonnegative")
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be >= 1")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Sampled observations (rows) with the generating model attached."""

    x: np.ndarray
    gbn: Gbn
    seed: Optional[int] = None

    @property
    def n(self) -> int:
        return self.x.shape[0]


def sample_dag(cfg: GeneratorConfig, rng: np.random.Generator) -> Dag:
    p = cfg.p
    perm = rng.permutation(p)
    u = rng.random((p, p))
    pos = np.empty(p, dtype=np.int64)
    pos[perm] = np.arange(p)
    edges = set()
    for i in range(p):
        for j in range(i + 1, p):
            if u[i, j] < cfg.q:
                if pos[i] < pos[j]:
                    edges.add((j, i))
                else:
                    edges.add((i, j))
    return Dag(p=p, edges=frozenset(edges))


def sample_weights(dag: Dag, cfg: GeneratorConfig, rng: np.random.Generator) -> Gbn:
    """Attach +/- magnitude weights (fair coin per edge, sorted edge order)."""
    edges = sorted(dag.edges)
    coins = rng.random(len(edges))
    b = np.zeros((dag.p, dag.p))
    for (child, parent), coin in zip(edges, coins):
        b[child, parent] = cfg.weight_magnitude if coin < 0.5 else -cfg.weight_magnitude
    return Gbn(dag=dag, b=b, sigma2=np.full(dag.p, cfg.sigma2))


def sample_gbn_screened(cfg: GeneratorConfig) -> Gbn:
    """Draw (DAG, weights) pairs until the precision spectrum screen passes.

    Attempt t uses substreams (seed, STREAM_DAG, t) and
    (seed, STREAM_WEIGHTS, t), so accepted models are reproducible
    regardless of how many rejections preceded them.
    """
    for attempt in range(cfg.max_rejections):
        dag = sample_dag(cfg, substream(cfg.seed, STREAM_DAG, attempt))
        g = sample_weights(dag, cfg, substream(cfg.seed, STREAM_WEIGHTS, attempt))
        moments = covariance_of(g)
        if linalg.min_eigenvalue(moments.omega) >= cfg.min_precision_eig:
            return g
    raise ScreeningExhausted(
        f"no model passed min_eigenvalue(Omega) >= {cfg.min_precision_eig} "
        f"within {cfg.max_rejections} draws (seed {cfg.seed})"
    )


def sample_data(
    g: Gbn, n: int, rng: np.random.Generator, seed: Optional[int] = None
) -> Dataset:
    """Ancestral sampling of n rows from the linear model X = B X + N."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    noise = rng.standard_normal((n, g.p)) * np.sqrt(g.sigma2)[None, :]
    x = np.empty((n, g.p))
    for i in g.dag.topological_order():
        parents = sorted(g.dag.parents_of(i))
        if parents:
            x[:, i] = x[:, parents] @ g.b[i, parents] + noise[:, i]
        else:
            x[:, i] = noise[:, i]
    return Dataset(x=x, gbn=g, seed=seed)


def perturb_variances(g: Gbn, gamma: float, rng: np.random.Generator) -> Gbn:
    """Each node's variance set to one of {1, 1 - gamma, 1 + gamma} uniformly."""
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    values = np.array([1.0, 1.0 - gamma, 1.0 + gamma])
    sigma2 = values[rng.integers(0, 3, size=g.p)]
    return Gbn(dag=g.dag, b=g.b, sigma2=sigma2)


def generate_dataset(
    cfg: GeneratorConfig, n: int, gamma: Optional[float] = None
) -> Dataset:
    """Screened model plus data, all substreams derived from cfg.seed."""
    g = sample_gbn_screened(cfg)
    if gamma is not None:
        g = perturb_variances(g, gamma, substream(cfg.seed, STREAM_VARIANCES))
    return sample_data(g, n, substream(cfg.seed, STREAM_DATA), seed=cfg.seed)


def max_markov_blanket_size(g: Gbn) -> int:
    """Largest Markov blanket in the model (k in the sample-size rule)."""
    w = effective_influence_matrix(g.b)
    counts = (np.abs(w) > 1e-12).sum(axis=1)
    return int(counts.max())


def sample_size(c: float, k: int, p: int) -> int:
    """n = ceil(C k^2 ln p), floored at 2 so covariances are always defined."""
    if p < 2:
        raise ValueError("sample_size needs p >= 2")
    return max(2, math.ceil(c * k * k * math.log(p)))
