import numpy as np
import pytest
from hypothesis import given, strategies as st

from gbnlearn import linalg
from gbnlearn.errors import DimensionMismatch, NotTerminal
from gbnlearn.model import (
    Dag,
    Gbn,
    check_nonsingular,
    check_rsaf,
    covariance_of,
    effective_influence,
    effective_influence_matrix,
    is_terminal_population,
    marginalize_precision,
    markov_blanket,
    population_theta,
    remove_terminal,
    residual_covariance,
)
from gbnlearn.synth import GeneratorConfig, sample_gbn_screened

from conftest import build_gbn

CHAIN_SIGMA = np.array([[1.0, 0.5], [0.5, 1.25]])
CHAIN_OMEGA = np.array([[1.25, -0.5], [-0.5, 1.0]])


class TestDag:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            Dag(p=2, edges=frozenset({(1, 1)}))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            Dag(p=2, edges=frozenset({(0, 2)}))

    def test_rejects_cycle(self):
        with pytest.raises(ValueError, match="cycle"):
            Dag(p=2, edges=frozenset({(0, 1), (1, 0)}))

    def test_rejects_three_cycle(self):
        with pytest.raises(ValueError, match="cycle"):
            Dag(p=3, edges=frozenset({(0, 1), (1, 2), (2, 0)}))

    def test_parents_children_terminal(self):
        d = Dag(p=3, edges=frozenset({(2, 0), (2, 1)}))
        assert d.parents_of(2) == {0, 1}
        assert d.children_of(0) == {2}
        assert d.is_terminal(2) and not d.is_terminal(0)

    def test_topological_order_lowest_label_first(self):
        d = Dag(p=4, edges=frozenset({(0, 3), (1, 3)}))
        order = d.topological_order()
        assert order == (2, 3, 0, 1) or order.index(3) < order.index(0)
        # canonical: among available nodes the smallest label goes first
        assert order == (2, 3, 0, 1)


class TestGbn:
    def test_support_mismatch_zero_weight(self):
        b = np.zeros((2, 2))
        with pytest.raises(ValueError, match="support"):
            Gbn(dag=Dag(p=2, edges=frozenset({(1, 0)})), b=b, sigma2=np.ones(2))

    def test_support_mismatch_extra_entry(self):
        b = np.zeros((2, 2))
        b[1, 0] = 0.5
        with pytest.raises(ValueError, match="support"):
            Gbn(dag=Dag(p=2, edges=frozenset()), b=b, sigma2=np.ones(2))

    def test_sigma2_must_be_positive(self):
        b = np.zeros((2, 2))
        with pytest.raises(ValueError):
            Gbn(dag=Dag(p=2, edges=frozenset()), b=b, sigma2=np.array([1.0, 0.0]))

    def test_equal_variance_flag(self, chain_gbn):
        assert chain_gbn.equal_variance
        g = build_gbn(2, {}, sigma2=1.0)
        uneq = Gbn(dag=g.dag, b=g.b, sigma2=np.array([1.0, 2.0]))
        assert not uneq.equal_variance

    def test_arrays_frozen(self, chain_gbn):
        with pytest.raises(ValueError):
            chain_gbn.b[0, 0] = 9.0


class TestMoments:
    def test_chain_sigma(self, chain_gbn):
        m = covariance_of(chain_gbn)
        np.testing.assert_allclose(m.sigma, CHAIN_SIGMA, atol=1e-12)

    def test_chain_omega(self, chain_gbn):
        m = covariance_of(chain_gbn)
        np.testing.assert_allclose(m.omega, CHAIN_OMEGA, atol=1e-12)

    def test_product_is_identity(self, chain_gbn):
        m = covariance_of(chain_gbn)
        np.testing.assert_allclose(m.sigma @ m.omega, np.eye(2), atol=1e-8)

    def test_empty_graph_scales_identity(self):
        g = build_gbn(3, {}, sigma2=0.8)
        m = covariance_of(g)
        np.testing.assert_allclose(m.sigma, 0.8 * np.eye(3), atol=1e-12)
        np.testing.assert_allclose(m.omega, 1.25 * np.eye(3), atol=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_random_model_product_identity(self, seed):
        g = sample_gbn_screened(GeneratorConfig(p=12, q=0.25, seed=seed))
        m = covariance_of(g)
        np.testing.assert_allclose(m.sigma @ m.omega, np.eye(12), atol=1e-8)
        assert np.array_equal(m.sigma, m.sigma.T)
        assert np.array_equal(m.omega, m.omega.T)


class TestEffectiveInfluence:
    def test_chain(self, chain_gbn):
        assert effective_influence(chain_gbn.b, 0, 1) == pytest.approx(0.5)

    def test_symmetric_in_arguments(self, cancel_gbn):
        w = effective_influence_matrix(cancel_gbn.b)
        assert np.array_equal(w, w.T)

    def test_common_child_cancellation(self):
        # edge weight 0.25 between 0 and 1, common child 2 with
        # 0.5 * 0.5 = 0.25: influence vanishes despite the edge
        g = build_gbn(3, {(0, 1): 0.25, (2, 0): 0.5, (2, 1): 0.5})
        assert effective_influence(g.b, 0, 1) == pytest.approx(0.0, abs=1e-15)

    def test_cancel_gbn_full_graph_nonzero(self, cancel_gbn):
        # second common child with opposite signs undoes the cancellation
        assert effective_influence(cancel_gbn.b, 0, 1) == pytest.approx(0.25)

    def test_same_node_rejected(self, chain_gbn):
        with pytest.raises(ValueError):
            effective_influence(chain_gbn.b, 1, 1)


class TestMarkovBlanket:
    def test_empty_graph(self):
        g = build_gbn(4, {})
        assert all(markov_blanket(g, i) == set() for i in range(4))

    def test_chain_mutual(self, chain_gbn):
        assert markov_blanket(chain_gbn, 0) == {1}
        assert markov_blanket(chain_gbn, 1) == {0}

    def test_edge_invisible_under_cancellation(self):
        g = build_gbn(3, {(0, 1): 0.25, (2, 0): 0.5, (2, 1): 0.5})
        assert 1 not in markov_blanket(g, 0)
        assert markov_blanket(g, 0) == {2}

    def test_collider_coparents(self, collider_gbn):
        # parents gain each other through the common child
        assert markov_blanket(collider_gbn, 0) == {1, 2}
        assert markov_blanket(collider_gbn, 1) == {0, 2}
        assert markov_blanket(collider_gbn, 2) == {0, 1}


class TestPopulationTheta:
    def test_diagonal_precision_gives_zero(self):
        g = build_gbn(3, {}, sigma2=2.0)
        m = covariance_of(g)
        np.testing.assert_allclose(population_theta(m, 1), np.zeros(2))

    def test_chain_child(self, chain_gbn):
        m = covariance_of(chain_gbn)
        np.testing.assert_allclose(population_theta(m, 1), [0.5], atol=1e-12)

    def test_chain_parent(self, chain_gbn):
        m = covariance_of(chain_gbn)
        np.testing.assert_allclose(population_theta(m, 0), [0.4], atol=1e-12)


class TestTerminalClassifier:
    def test_chain_child_terminal(self, chain_gbn):
        m = covariance_of(chain_gbn)
        assert is_terminal_population(m, chain_gbn.sigma2[0], 1)

    def test_chain_parent_not_terminal(self, chain_gbn):
        m = covariance_of(chain_gbn)
        assert not is_terminal_population(m, chain_gbn.sigma2[0], 0)

    @pytest.mark.parametrize("seed", range(10))
    def test_agrees_with_graph_on_random_models(self, seed):
        g = sample_gbn_screened(GeneratorConfig(p=10, q=0.25, seed=seed))
        m = covariance_of(g)
        s2 = float(g.sigma2[0])
        for i in range(g.p):
            assert is_terminal_population(m, s2, i) == g.dag.is_terminal(i)


class TestMarginalization:
    def test_chain_remove_child(self, chain_gbn):
        reduced = marginalize_precision(CHAIN_OMEGA, 1)
        np.testing.assert_allclose(reduced, [[1.0]], atol=1e-12)

    def test_matches_submatrix_inverse(self):
        g = sample_gbn_screened(GeneratorConfig(p=5, q=0.4, seed=3))
        m = covariance_of(g)
        i = g.dag.topological_order()[-1]
        keep = [j for j in range(5) if j != i]
        direct = linalg.invert_spd(m.sigma[np.ix_(keep, keep)])
        np.testing.assert_allclose(
            marginalize_precision(m.omega, i), direct, atol=1e-8
        )

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_reduced_model_precision(self, seed):
        g = sample_gbn_screened(GeneratorConfig(p=5, q=0.4, seed=seed))
        terminals = [i for i in range(5) if g.dag.is_terminal(i)]
        m = covariance_of(g)
        for i in terminals:
            reduced, _ = remove_terminal(g, i)
            np.testing.assert_allclose(
                marginalize_precision(m.omega, i),
                covariance_of(reduced).omega,
                atol=1e-8,
            )

    def test_covariance_restriction_identity(self, chain_gbn):
        # dropping a terminal never disturbs the survivors' covariance
        reduced, _ = remove_terminal(chain_gbn, 1)
        np.testing.assert_allclose(
            covariance_of(reduced).sigma, CHAIN_SIGMA[:1, :1], atol=1e-12
        )


class TestRemoveTerminal:
    def test_chain_leaves_isolated_node(self, chain_gbn):
        reduced, relabel = remove_terminal(chain_gbn, 1)
        assert reduced.p == 1 and reduced.dag.edges == frozenset()
        assert relabel[0] == 0 and relabel[1] == -1

    def test_collider_removal_empties_graph(self, collider_gbn):
        reduced, _ = remove_terminal(collider_gbn, 2)
        assert reduced.p == 2 and reduced.dag.edges == frozenset()

    def test_non_terminal_rejected(self, chain_gbn):
        with pytest.raises(NotTerminal):
            remove_terminal(chain_gbn, 0)

    def test_relabeling_preserves_weights(self, cancel_gbn):
        reduced, relabel = remove_terminal(cancel_gbn, 3)
        assert reduced.p == 3
        assert reduced.b[relabel[0], relabel[1]] == pytest.approx(0.25)


class TestNonsingularity:
    def test_identity_passes(self):
        g = build_gbn(2, {}, sigma2=1.0)
        assert check_nonsingular(covariance_of(g), floor=1.0)

    def test_tiny_eigenvalue_fails(self):
        m = covariance_of(build_gbn(2, {}, sigma2=1.0))
        shrunk = type(m)(sigma=np.diag([1.0, 1e-12]), omega=np.diag([1.0, 1e12]))
        assert not check_nonsingular(shrunk, floor=1e-6)

    def test_chain_passes(self, chain_gbn):
        m = covariance_of(chain_gbn)
        lam = linalg.min_eigenvalue(m.sigma)
        assert check_nonsingular(m, floor=lam - 1e-12)
        assert not check_nonsingular(m, floor=lam + 1e-6)


class TestResidualCovariance:
    def test_diagonal_sigma(self):
        assert np.allclose(residual_covariance(np.diag([1.0, 2.0, 3.0]), 1), 0.0)

    def test_chain_parent(self):
        np.testing.assert_allclose(
            residual_covariance(CHAIN_SIGMA, 0), [0.0], atol=1e-12
        )

    @pytest.mark.parametrize("seed", range(5))
    def test_vanishes_on_random_models(self, seed):
        g = sample_gbn_screened(GeneratorConfig(p=6, q=0.3, seed=seed))
        sigma = covariance_of(g).sigma
        for i in range(6):
            assert np.max(np.abs(residual_covariance(sigma, i))) <= 1e-10


class TestRsaf:
    def test_cancellation_instance_violates(self, cancel_gbn):
        report = check_rsaf(cancel_gbn, alpha=0.05)
        assert not report.satisfied
        w = report.witness
        assert w is not None and w.kind == "effective_influence"
        assert w.pair == (0, 1)
        assert w.prefix_size == 3
        assert set(w.ordering[: w.prefix_size]) == {0, 1, 3}
        assert w.observed == pytest.approx(0.0, abs=1e-12)

    def test_chain_satisfied_with_vacuous_kappa(self, chain_gbn):
        # kappa(0.1) = 1 - 2/(1 + 9 * 0.01) < 0: condition (ii) has no
        # finite bound to violate; condition (i) holds (0.5 > 0.3)
        report = check_rsaf(chain_gbn, alpha=0.1)
        assert report.satisfied
        assert report.vacuous_kappa_seen
        assert report.exhaustive

    def test_weak_edge_fails_condition_one(self):
        g = build_gbn(2, {(1, 0): 0.25})
        report = check_rsaf(g, alpha=0.1)
        assert not report.satisfied
        assert report.witness.kind == "edge_weight"
        assert report.witness.observed == pytest.approx(0.25)
        assert report.witness.required == pytest.approx(0.3)

    def test_boundary_weight_counts_as_violation(self):
        # condition (i) is strict: |w| must exceed 3 alpha
        g = build_gbn(2, {(1, 0): 0.5})
        report = check_rsaf(g, alpha=0.5 / 3.0)
        assert not report.satisfied
        assert report.witness.kind == "edge_weight"

    def test_alpha_validation(self, chain_gbn):
        with pytest.raises(ValueError):
            check_rsaf(chain_gbn, alpha=0.0)

    def test_unequal_variance_rejected(self):
        g = build_gbn(2, {}, sigma2=1.0)
        uneq = Gbn(dag=g.dag, b=g.b, sigma2=np.array([1.0, 2.0]))
        with pytest.raises(ValueError, match="equal-variance"):
            check_rsaf(uneq, alpha=0.1)

    def test_sampling_path_is_deterministic(self):
        g = build_gbn(9, {}, sigma2=1.0)  # 9! orderings, beyond any budget
        r1 = check_rsaf(g, alpha=0.01, order_budget=50, seed=4)
        r2 = check_rsaf(g, alpha=0.01, order_budget=50, seed=4)
        assert not r1.exhaustive
        assert r1.orderings_checked == 50
        assert r1 == r2
        assert r1.satisfied  # empty graph: no blanket members anywhere

    def test_exhaustive_below_budget(self, cancel_gbn):
        report = check_rsaf(cancel_gbn, alpha=0.05)
        assert report.exhaustive
        # 0 and 1 are free sources; 2 and 3 both need {0, 1} first
        assert report.orderings_checked <= 8


@given(
    st.integers(min_value=2, max_value=9),
    st.floats(min_value=0.05, max_value=1.0),
    st.integers(min_value=0, max_value=10_000),
)
def test_lemma1_formulas_on_random_models(p, q, seed):
    g = sample_gbn_screened(GeneratorConfig(p=p, q=q, seed=seed))
    m = covariance_of(g)
    s2 = float(g.sigma2[0])
    wtl = effective_influence_matrix(g.b)
    for i in range(p):
        expect_diag = (1.0 + float(g.b[:, i] @ g.b[:, i])) / s2
        assert m.omega[i, i] == pytest.approx(expect_diag, abs=1e-9)
        for j in range(i + 1, p):
            assert m.omega[i, j] == pytest.approx(-wtl[i, j] / s2, abs=1e-9)
