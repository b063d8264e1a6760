import itertools
import math

import numpy as np
import pytest
from scipy.stats import multinomial

from beliefkit import pac
from beliefkit.errors import NotRealizable, PreconditionError
from beliefkit.suites import adversarial_vertices


def exact_violation_probability(H, p, n, eps):
    """Sum of multinomial probabilities of samples whose ERM has risk above ``eps``."""
    flat = p.ravel()
    support = np.nonzero(flat)[0]
    W = pac.loss_matrix(H, p.shape[1])
    L = W @ flat
    total = 0.0
    for combo in itertools.combinations_with_replacement(range(support.size), n):
        counts = np.zeros(flat.size)
        for c in combo:
            counts[support[c]] += 1
        emp = W @ counts
        h = int(np.argmin(emp))
        if L[h] > eps:
            total += multinomial.pmf(counts[support], n, flat[support])
    return total


class TestBounds:
    def test_risk_bound(self):
        assert pac.risk_bound(16, 100, 0.05) == pytest.approx((math.log(16) + math.log(20)) / 100)

    @pytest.mark.parametrize("h,eps,delta", [(16, 0.1, 0.05), (1, 0.5, 0.5), (1000, 0.01, 0.001)])
    def test_sample_complexity_is_minimal(self, h, eps, delta):
        n = pac.sample_complexity(h, eps, delta)
        assert pac.risk_bound(h, n, delta) <= eps + 1e-15
        if n > 1:
            assert pac.risk_bound(h, n - 1, delta) > eps

    def test_bad_inputs(self):
        with pytest.raises(PreconditionError):
            pac.risk_bound(0, 10, 0.1)
        with pytest.raises(PreconditionError):
            pac.sample_complexity(4, 0.1, 1.0)


class TestRisk:
    def test_threshold_class(self):
        H = pac.threshold_class(4)
        assert H.shape == (8, 4)
        np.testing.assert_array_equal(H[1], [0, 1, 1, 1])
        np.testing.assert_array_equal(H[5], [1, 0, 0, 0])

    def test_risks_by_loop(self, rng):
        H = pac.threshold_class(5)
        p = rng.dirichlet(np.ones(10)).reshape(5, 2)
        ref = [sum(p[x, y] for x in range(5) for y in range(2) if h[x] != y) for h in H]
        np.testing.assert_allclose(pac.risks(H, p), ref, atol=1e-15)

    def test_labelled_distribution_realized(self):
        H = pac.threshold_class(8)
        p = pac.labelled_distribution(H[3], np.full(8, 1 / 8))
        assert 3 in pac.realizing_hypotheses(H, p)
        assert pac.risks(H, p)[3] == 0.0


class TestRealizable:
    def test_matches_exact_probability(self, rng):
        H = pac.threshold_class(4)
        p = pac.labelled_distribution(H[2], np.array([0.1, 0.2, 0.3, 0.4]))
        n, eps = 5, 0.15
        exact = exact_violation_probability(H, p, n, eps)
        rep = pac.simulate_realizable(H, p, n, eps, 0.5, 40_000, rng)
        assert rep.frequency == pytest.approx(exact, abs=4 * math.sqrt(exact * (1 - exact) / 40_000) + 1e-4)

    def test_bound_holds(self, rng):
        H = pac.threshold_class(8)
        n = pac.sample_complexity(len(H), 0.1, 0.05)
        rep = pac.simulate_realizable(H, pac.labelled_distribution(H[3], np.full(8, 1 / 8)), n, 0.1, 0.05, 5000, rng)
        assert rep.passed
        assert rep.max_erm_empirical_risk == 0.0

    def test_not_realizable(self, rng):
        H = pac.threshold_class(4)
        p = np.full((4, 2), 1 / 8)
        with pytest.raises(NotRealizable):
            pac.simulate_realizable(H, p, 10, 0.1, 0.1, 10, rng)


class TestCredal:
    def test_adversarial_tail_persists(self, rng):
        H = pac.threshold_class(8)
        V = adversarial_vertices(H, np.full(8, 1 / 8))
        rep = pac.simulate_credal(H, V, (50, 800), 0.1, 300, rng)
        assert not rep.uniformly_realizable and rep.gap
        assert rep.min_worst_case_risk == pytest.approx(0.25)
        assert rep.tails[-1] >= 0.5

    def test_uniform_tail_vanishes(self, rng):
        H = pac.threshold_class(8)
        V = [pac.labelled_distribution(H[4], np.full(8, 1 / 8)),
             pac.labelled_distribution(H[4], np.array([0.05, 0.05, 0.1, 0.1, 0.1, 0.2, 0.2, 0.2]))]
        rep = pac.simulate_credal(H, V, (50, 800), 0.1, 300, rng)
        assert rep.uniformly_realizable and not rep.gap
        assert rep.tails[-1] <= 0.01

    def test_uniform_realizability_is_common_hypothesis(self):
        H = pac.threshold_class(4)
        a = pac.labelled_distribution(H[1], np.full(4, 0.25))
        b = pac.labelled_distribution(H[2], np.full(4, 0.25))
        assert pac.credal_realizable(H, [a, b])
        assert not pac.uniformly_credal_realizable(H, [a, b])
        # the midpoint of the two vertices has no zero-risk hypothesis
        assert pac.realizing_hypotheses(H, 0.5 * (a + b)).size == 0

    def test_no_realizable_vertex(self, rng):
        H = pac.threshold_class(4)
        with pytest.raises(NotRealizable):
            pac.simulate_credal(H, [np.full((4, 2), 1 / 8)], (10,), 0.1, 10, rng)
