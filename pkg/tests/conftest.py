import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gbnlearn.model import Dag, Gbn, effective_influence
from gbnlearn.synth import GeneratorConfig, sample_gbn_screened

settings.register_profile(
    "ci",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def build_gbn(p, weighted_edges, sigma2=1.0):
    """weighted_edges maps (child, parent) to weight."""
    b = np.zeros((p, p))
    for (child, parent), w in weighted_edges.items():
        b[child, parent] = w
    return Gbn(
        dag=Dag(p=p, edges=frozenset(weighted_edges)),
        b=b,
        sigma2=np.full(p, float(sigma2)),
    )


@pytest.fixture
def chain_gbn():
    """Two nodes: child 1, parent 0, weight 0.5, sigma2 = 1.

    Hand-computed moments used throughout:
    Sigma = [[1, 0.5], [0.5, 1.25]], Omega = [[1.25, -0.5], [-0.5, 1]].
    """
    return build_gbn(2, {(1, 0): 0.5}, sigma2=1.0)


@pytest.fixture
def cancel_gbn():
    """Four nodes where the pair (0, 1) has an edge plus two common
    children.  Child 3 alone cancels the edge weight exactly
    (0.5 * 0.5 = 0.25), so the induced subgraph over {0, 1, 3} hides the
    0-1 adjacency; child 2's opposite signs restore it at full size."""
    return build_gbn(
        4,
        {
            (0, 1): 0.25,
            (2, 0): 0.5,
            (2, 1): -0.5,
            (3, 0): 0.5,
            (3, 1): 0.5,
        },
        sigma2=1.0,
    )


@pytest.fixture
def collider_gbn():
    """3 <- 1, 3 <- 2 in 1-based terms; here nodes 0, 1 with child 2."""
    return build_gbn(3, {(2, 0): 0.5, (2, 1): 0.5}, sigma2=1.0)


def draw_faithful_gbn(p, q, seed, sigma2=0.8, zero_tol=1e-9, attempts=200):
    """Screened model whose true edges all carry nonzero full-graph
    effective influence.  Exact-cancellation draws (possible since
    weights are +-w) are redrawn; the blanket machinery cannot see an
    edge whose effective influence is exactly zero."""
    for k in range(attempts):
        g = sample_gbn_screened(
            GeneratorConfig(p=p, q=q, seed=seed + 1_000_003 * k, sigma2=sigma2)
        )
        if all(
            abs(effective_influence(g.b, c, par)) > zero_tol
            for c, par in g.dag.edges
        ):
            return g
    raise AssertionError(f"no faithful draw in {attempts} attempts (seed {seed})")
