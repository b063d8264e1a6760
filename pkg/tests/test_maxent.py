import math

import numpy as np
import pytest
import scipy.optimize
from hypothesis import given
from hypothesis import strategies as st

from beliefkit import maxent as mx
from beliefkit.errors import IntractableError, NonConvergence, PreconditionError
from beliefkit.frames import Frame, MassFunction
from beliefkit.suites import concavity_violation, rejection_best, signed_indicator_problem, unsigned_problem


def brute_entropy(masses, kind):
    """Entropy by explicit subset loops."""
    n = len(masses).bit_length() - 1
    subsets = range(1, 1 << n)

    def f(A, rel):
        return sum(masses[B] for B in range(1, 1 << n) if rel(A, B))

    def xlogx(v):
        return v * math.log(v) if v > 0 else 0.0

    if kind == "Hn":
        return -sum(xlogx(masses[A]) for A in subsets)
    if kind == "Hd":
        return sum(masses[A] * math.log(bin(A).count("1")) for A in subsets)
    if kind == "HBel":
        return -sum(xlogx(f(A, lambda a, b: a & b == b)) for A in subsets)
    if kind == "HPl":
        return -sum(xlogx(f(A, lambda a, b: a & b != 0)) for A in subsets)
    if kind == "Ht":
        return -sum(math.log(f(A, lambda a, b: a & b == a)) for A in subsets)
    raise ValueError(kind)


def random_dense(rng, n, alpha=1.0):
    return np.concatenate([[0.0], rng.dirichlet(np.full((1 << n) - 1, alpha))])


class TestSetMatrices:
    def test_against_definitions(self):
        n = 3
        Z, S, P = mx.subset_matrix(n), mx.superset_matrix(n), mx.intersect_matrix(n)
        for a in range(8):
            for b in range(8):
                assert Z[a, b] == (a & b == b)
                assert S[a, b] == (a & b == a)
                assert P[a, b] == (a & b != 0)


class TestEntropy:
    @pytest.mark.parametrize("kind", mx.ENTROPY_KINDS)
    def test_matches_brute_force(self, kind, rng):
        for n in (2, 3):
            for _ in range(20):
                m = random_dense(rng, n)
                assert mx.entropy_dense(m, kind) == pytest.approx(brute_entropy(m, kind), rel=1e-12, abs=1e-12)

    def test_bayesian_reduces_to_shannon(self, rng):
        p = rng.dirichlet(np.ones(4))
        m = MassFunction.bayesian(Frame("abcd"), p)
        shannon = -float(np.sum(p * np.log(p)))
        assert mx.entropy(m, "Hn") == pytest.approx(shannon, rel=1e-12)
        assert mx.entropy(m, "Hd") == 0.0

    def test_vacuous(self):
        m = MassFunction.vacuous(Frame("abc"))
        assert mx.entropy(m, "Hn") == 0.0
        assert mx.entropy(m, "Hd") == pytest.approx(math.log(3))
        assert mx.entropy(m, "Ht") == 0.0

    def test_ht_infinite_without_full_commonality(self):
        m = MassFunction.bayesian(Frame("ab"), [0.5, 0.5])
        assert mx.entropy(m, "Ht") == math.inf

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            mx.entropy_dense(np.array([0, 0.5, 0.5, 0]), "Hx")


class TestConcavity:
    @pytest.mark.parametrize("kind", ["Hn", "Hd", "HBel", "HPl"])
    def test_concave(self, kind, rng):
        assert concavity_violation(kind, rng, 500) <= 1e-10

    def test_ht_is_not_concave(self, rng):
        # the commonality entropy is a sum of -log of linear maps: convex
        assert concavity_violation("Ht", rng, 200) > 1.0


class TestProblem:
    def test_from_samples(self):
        feats = {"f": {"a": {"s": 1.0, "h": 0.0}, "b": {"s": 0.0, "h": 1.0}}}
        prob = mx.MaxentProblem.from_samples([("a", "s"), ("a", "h"), ("b", "h"), ("b", "h")], feats)
        assert prob.x_labels == ("a", "b") and prob.classes == ("h", "s")
        np.testing.assert_allclose(prob.p_hat, [[0.25, 0.25], [0.5, 0.0]])
        assert mx.empirical_expectation(prob, 0) == pytest.approx(0.75)

    def test_histogram_bpa_is_feasible(self, rng):
        for _ in range(10):
            prob = unsigned_problem(rng, "HBel", features=3)
            g = mx.constraint_values(prob, mx.histogram_bpa(prob))
            np.testing.assert_allclose(g, 0.0, atol=1e-12)

    def test_constraint_values_by_hand(self):
        # one feature on a 1x2 frame; vacuous mass gives g1 = 0 - E, g2 = E - (φ1 + φ2)
        prob = mx.MaxentProblem(("x",), ("a", "b"), [[0.25, 0.75]], [[[1.0, 2.0]]])
        E = 0.25 + 1.5
        g = mx.constraint_values(prob, MassFunction.vacuous(prob.frame))
        np.testing.assert_allclose(g, [[-E, E - 3.0]])

    def test_bad_histogram(self):
        with pytest.raises(PreconditionError):
            mx.MaxentProblem(("x",), ("a", "b"), [[0.2, 0.2]], [[[1.0, 0.0]]])

    def test_sample_outside_tables(self):
        fs = mx.FeatureSet(("x",), ("a", "b"), ("f",), np.ones((1, 1, 2)))
        with pytest.raises(PreconditionError):
            mx.MaxentProblem.from_feature_set([("y", "a")], fs)


class TestPignistic:
    def test_by_hand(self):
        m = MassFunction(Frame("abc"), {0b001: 0.2, 0b011: 0.4, 0b111: 0.3, 0b110: 0.1})
        np.testing.assert_allclose(mx.pignistic(m), [0.2 + 0.2 + 0.1, 0.2 + 0.1 + 0.05, 0.1 + 0.05])

    @given(st.lists(st.floats(0.01, 1.0), min_size=7, max_size=7))
    def test_is_probability(self, w):
        w = np.array(w) / sum(w)
        m = MassFunction(Frame("abc"), {k + 1: v for k, v in enumerate(w)})
        p = mx.pignistic(m)
        assert p.min() >= 0 and p.sum() == pytest.approx(1.0)


def slsqp_oracle(prob):
    """Independent constrained optimum by sequential quadratic programming."""
    G, h = mx._constraint_matrix(prob)
    k = G.shape[1]
    kind = prob.entropy
    cons = [
        {"type": "eq", "fun": lambda x: x.sum() - 1.0},
        {"type": "ineq", "fun": lambda x: h - G @ x},
    ]
    best = -np.inf
    for x0 in (np.full(k, 1.0 / k), np.eye(k)[-1] * 0.9 + 0.1 / k):
        res = scipy.optimize.minimize(
            lambda x: -mx.entropy_dense(np.concatenate([[0.0], np.clip(x, 0, None)]), kind),
            x0,
            method="SLSQP",
            bounds=[(0, 1)] * k,
            constraints=cons,
            options={"ftol": 1e-12, "maxiter": 1000},
        )
        if np.all(G @ res.x - h <= 1e-7):
            best = max(best, -res.fun)
    return best


class TestFit:
    @pytest.mark.parametrize("kind", ["Hn", "Hd", "HBel", "HPl"])
    def test_kkt_and_feasibility(self, kind, rng):
        for _ in range(3):
            prob = unsigned_problem(rng, kind)
            res = mx.fit_maxent(prob)
            assert res.converged
            assert res.kkt.residual <= 1e-6
            assert np.all(mx.constraint_values(prob, res.mass) <= 1e-9)
            assert sum(v for _, v in res.mass.items()) == pytest.approx(1.0)

    @pytest.mark.parametrize("kind", ["Hn", "Hd", "HBel", "HPl"])
    def test_not_beaten_by_slsqp(self, kind, rng):
        for _ in range(3):
            prob = unsigned_problem(rng, kind)
            assert mx.fit_maxent(prob).entropy >= slsqp_oracle(prob) - 1e-6

    def test_not_beaten_by_rejection(self, rng):
        prob = unsigned_problem(rng, "HBel")
        best, accepted = rejection_best(prob, rng, 20000)
        assert accepted > 0
        assert mx.fit_maxent(prob).entropy >= best - 1e-10

    def test_no_features_gives_vacuous_for_hd(self):
        prob = mx.MaxentProblem(("x", "y"), ("a", "b"), np.full((2, 2), 0.25), np.zeros((0, 2, 2)), "Hd")
        res = mx.fit_maxent(prob)
        assert res.mass[prob.frame.full] == pytest.approx(1.0, abs=1e-6)

    def test_signed_indicators_agree_with_classical(self, rng):
        for _ in range(3):
            prob = signed_indicator_problem(rng)
            res = mx.fit_maxent(prob)
            joint = mx.classical_maxent(prob).joint(prob.p_hat.sum(axis=1))
            tv = 0.5 * np.abs(mx.pignistic(res.mass) - joint.ravel()).sum()
            assert tv <= 1e-3

    def test_ht_not_solvable(self, rng):
        with pytest.raises(NonConvergence):
            mx.fit_maxent(signed_indicator_problem(rng, entropy="Ht"))

    def test_size_limit(self):
        prob = mx.MaxentProblem(tuple("abcdef"), ("p", "q"), np.full((6, 2), 1 / 12), np.zeros((1, 6, 2)))
        with pytest.raises(IntractableError):
            mx.fit_maxent(prob)


class TestClassical:
    def test_matches_moments(self, rng):
        prob = unsigned_problem(rng, "Hn", nx=3, nc=2, features=2)
        cl = mx.classical_maxent(prob)
        joint = cl.joint(prob.p_hat.sum(axis=1))
        for j in range(prob.n_features):
            assert float(np.sum(joint * prob.features[j])) == pytest.approx(mx.empirical_expectation(prob, j), abs=1e-9)
        np.testing.assert_allclose(cl.table.sum(axis=1), 1.0)

    def test_matches_dual_minimizer(self, rng):
        prob = unsigned_problem(rng, "Hn", nx=3, nc=2, features=2)
        cl = mx.classical_maxent(prob)
        p_x = prob.p_hat.sum(axis=1)
        target = np.array([mx.empirical_expectation(prob, j) for j in range(2)])

        def dual(l):
            s = np.tensordot(l, prob.features, axes=1)
            return float(p_x @ np.log(np.exp(s).sum(axis=1)) - l @ target)

        ref = scipy.optimize.minimize(dual, np.zeros(2), method="BFGS", options={"gtol": 1e-10})
        np.testing.assert_allclose(cl.lambdas, ref.x, atol=1e-4)

    def test_boundary_moments_need_large_weight(self):
        # the indicator of (x, a) with all mass on (x, a) is matched only in the limit
        prob = mx.MaxentProblem(("x",), ("a", "b"), [[1.0, 0.0]], [[[1.0, 0.0]]])
        cl = mx.classical_maxent(prob)
        assert cl.residual <= 1e-8
        assert cl.lambdas[0] > 15
