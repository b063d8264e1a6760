import itertools
import math

import numpy as np
import pytest

from beliefkit.errors import IntractableError
from beliefkit.frames import Frame, MassFunction, belief_from_mass, plausibility_from_mass
from beliefkit.likelihood import (
    BINARY,
    belief_likelihood,
    bernoulli_likelihood_surface,
    bernoulli_likelihoods,
    check_conjunctive_factorization,
    check_disjunctive_factorization,
    check_plausibility_conjecture,
    joint_mass,
    lower_upper_likelihood,
)
from beliefkit.multivariate import ProductFocalElement


def brute_joint(ms, rule):
    """Joint BPA over tuples of component focal sets, built with plain sets."""
    out = {}
    comps = [[(frozenset(m.frame.labels_of(k)), v) for k, v in m.items()] for m in ms]
    frames = [m.frame.labels for m in ms]
    for combo in itertools.product(*comps):
        w = math.prod(v for _, v in combo)
        if rule == "conjunctive":
            S = frozenset(itertools.product(*[A for A, _ in combo]))
        else:
            S = frozenset(
                t for t in itertools.product(*frames) if any(t[i] in A for i, (A, _) in enumerate(combo))
            )
        out[S] = out.get(S, 0.0) + w
    return out


class TestJoint:
    @pytest.mark.parametrize("rule", ["conjunctive", "disjunctive"])
    def test_joint_matches_set_construction(self, rule, rng):
        ms = [MassFunction.random(BINARY, rng) for _ in range(3)]
        joint = joint_mass(ms, rule)
        want = brute_joint(ms, rule)
        got = {frozenset(joint.frame.labels_of(k)): v for k, v in joint.items()}
        assert set(got) == set(want)
        np.testing.assert_allclose([got[k] for k in want], list(want.values()), atol=1e-14)

    def test_joint_size_cap(self):
        with pytest.raises(IntractableError):
            joint_mass([MassFunction.vacuous(BINARY)] * 5, "conjunctive")

    def test_factorized_belief_needs_no_joint(self, rng):
        ms = [MassFunction.random(BINARY, rng) for _ in range(40)]
        ev = ProductFocalElement(tuple([1] * 40))
        assert belief_likelihood(ms, "conjunctive", ev) == pytest.approx(math.prod(m[1] for m in ms))

    def test_disjunctive_belief_uses_joint(self, rng):
        ms = [MassFunction.random(BINARY, rng) for _ in range(3)]
        ev = ProductFocalElement((1, 2, 1))
        bel = belief_from_mass(joint_mass(ms, "disjunctive"))
        pf = joint_mass(ms, "disjunctive").frame
        assert belief_likelihood(ms, "disjunctive", ev) == pytest.approx(bel[pf.product_mask(ev.factors)])


class TestBounds:
    def test_lower_upper(self, rng):
        ms = [MassFunction.random(BINARY, rng) for _ in range(3)]
        b = lower_upper_likelihood(ms, ["T", "F", "T"])
        joint = joint_mass(ms, "conjunctive")
        k = 1 << joint.frame.index(("T", "F", "T"))
        assert b.lower == pytest.approx(belief_from_mass(joint)[k], abs=1e-15)
        assert b.upper == pytest.approx(plausibility_from_mass(joint)[k], abs=1e-15)
        assert not b.conjectural

    def test_bayesian_bounds_coincide(self):
        m = MassFunction.bayesian(BINARY, [0.3, 0.7])
        b = lower_upper_likelihood([m] * 4, ["T", "F", "F", "T"])
        assert b.lower == pytest.approx(b.upper)
        assert b.lower == pytest.approx(0.3**2 * 0.7**2)

    def test_non_binary_flag(self):
        f = Frame("abc")
        assert lower_upper_likelihood([MassFunction.vacuous(f)], ["a"]).conjectural


class TestBernoulli:
    def test_surface_example(self):
        s = bernoulli_likelihood_surface(6, 10, 1e-3)
        assert s.lower_argmax == pytest.approx((0.6, 0.4), abs=1e-3)
        assert s.upper_argmax == (0.0, 0.0)
        assert s.lower_max == pytest.approx(0.6**6 * 0.4**4, abs=1e-12)
        assert np.all(s.lower <= s.upper + 1e-15)
        assert np.all(s.p + s.q <= 1 + 1e-12)

    def test_closed_forms_match_binary_bpa(self):
        p, q = 0.25, 0.35
        m = MassFunction(BINARY, {1: p, 2: q, 3: 1 - p - q})
        b = lower_upper_likelihood([m] * 5, ["T", "T", "F", "T", "F"])
        lo, up = bernoulli_likelihoods(3, 5, p, q)
        assert b.lower == pytest.approx(float(lo))
        assert b.upper == pytest.approx(float(up))


class TestCheckers:
    def test_conjunctive_small(self):
        r = check_conjunctive_factorization(3, 40, seed=1)
        assert r.passed and r.checks["focal_count"].evaluated == 40

    def test_non_binary_frames(self):
        assert check_conjunctive_factorization(2, 20, frame_sizes=[3, 2], seed=2).passed

    def test_disjunctive_small(self):
        assert check_disjunctive_factorization(3, 40, seed=3).passed

    def test_conjecture_equidistributed(self):
        r = check_plausibility_conjecture(4, 50, seed=4, equidistributed=True)
        assert r.checks["all_true_closed_form"].max_deviation < 1e-12

    def test_report_dict(self):
        d = check_plausibility_conjecture(2, 5, seed=0).as_dict()
        assert d["passed"] and d["suite"] == "plausibility"
