import numpy as np
import pytest
from hypothesis import given, strategies as st

from beliefkit.errors import FrameError, IntractableError, NormalizationError
from beliefkit.frames import (
    Frame,
    MassFunction,
    SetFunction,
    belief_from_mass,
    believability_from_mass,
    capacity_from_moebius,
    commonality_from_mass,
    is_2_monotone,
    mass_from_belief,
    moebius,
    plausibility_from_mass,
)

from conftest import as_sets, powerset

F3 = Frame(["a", "b", "c"])


class TestFrame:
    def test_masks_follow_label_order(self):
        assert F3.mask(["a"]) == 1
        assert F3.mask(["c", "a"]) == 5
        assert F3.full == 7
        assert F3.labels_of(6) == ("b", "c")
        assert F3.complement(1) == 6

    def test_rejects_bad_frames_and_masks(self):
        with pytest.raises(FrameError):
            Frame([])
        with pytest.raises(FrameError):
            Frame(["a", "a"])
        with pytest.raises(FrameError):
            F3.check_mask(8)
        with pytest.raises(FrameError):
            F3.index("z")

    def test_dense_cap(self):
        with pytest.raises(IntractableError):
            Frame(range(25)).require_dense()


class TestMassFunction:
    def test_normalization_is_enforced(self):
        with pytest.raises(NormalizationError):
            MassFunction(F3, {1: 0.5, 2: 0.499})
        with pytest.raises(NormalizationError):
            MassFunction(F3, {1: 1.2, 2: -0.2})
        with pytest.raises(NormalizationError):
            MassFunction(F3, {0: 0.1, 1: 0.9})

    def test_tiny_drift_is_rescaled(self):
        m = MassFunction(F3, {1: 0.5, 2: 0.5 + 1e-12})
        assert sum(v for _, v in m.items()) == pytest.approx(1.0, abs=1e-15)

    def test_unnormalized_regime_keeps_empty_mass(self):
        m = MassFunction(F3, {0: 0.25, 7: 0.75}, normalized=False)
        assert m.conflict == 0.25

    def test_from_sets_and_lookup(self):
        m = MassFunction.from_sets(F3, {("a",): 0.2, ("a", "b"): 0.3, ("a", "b", "c"): 0.5})
        assert m.mass(["b", "a"]) == 0.3
        assert m.focal == (1, 3, 7)
        assert m.bel(3) == pytest.approx(0.5)
        assert m.pl(2) == pytest.approx(0.8)

    def test_random_is_full_support(self, rng):
        m = MassFunction.random(F3, rng)
        assert len(m) == 7
        assert MassFunction.random(F3, rng, n_focal=3).focal.__len__() == 3


def brute_functions(m):
    """Bel, Pl, Q and b by direct summation over frozensets."""
    sets = as_sets(m)
    out = {}
    for A in powerset(m.frame.labels):
        out[A] = (
            sum(v for B, v in sets.items() if B and B <= A),
            sum(v for B, v in sets.items() if B & A),
            sum(v for B, v in sets.items() if A <= B),
            sum(v for B, v in sets.items() if B <= A),
        )
    return out


class TestTransforms:
    def test_against_direct_sums(self, rng):
        for _ in range(20):
            m = MassFunction.random(F3, rng, n_focal=int(rng.integers(1, 8)))
            bel = belief_from_mass(m)
            pl = plausibility_from_mass(m)
            q = commonality_from_mass(m)
            b = believability_from_mass(m)
            for A, (vb, vp, vq, vbb) in brute_functions(m).items():
                k = F3.mask(A)
                np.testing.assert_allclose([bel[k], pl[k], q[k], b[k]], [vb, vp, vq, vbb], atol=1e-14)

    @given(st.lists(st.floats(0.01, 1.0), min_size=15, max_size=15))
    def test_moebius_inverts_belief(self, w):
        f = Frame(list("abcd"))
        w = np.array(w) / np.sum(w)
        m = MassFunction(f, {k + 1: v for k, v in enumerate(w)})
        back = mass_from_belief(belief_from_mass(m))
        assert back.max_abs_diff(m) < 1e-12

    def test_unnormalized_belief_round_trip(self):
        m = MassFunction(F3, {0: 0.3, 1: 0.2, 7: 0.5}, normalized=False)
        back = mass_from_belief(belief_from_mass(m))
        assert not back.normalized
        assert back.max_abs_diff(m) < 1e-14

    def test_signed_inverse_of_non_belief_capacity(self):
        f = Frame(["x", "y"])
        cap = SetFunction(f, np.array([0.0, 0.6, 0.6, 1.0]), "capacity")
        m = mass_from_belief(cap)
        assert m.signed
        np.testing.assert_allclose(m.to_dense(), [0.0, 0.6, 0.6, -0.2], atol=1e-15)
        np.testing.assert_allclose(moebius(cap.values), m.to_dense(), atol=1e-15)


class TestTwoMonotone:
    def test_belief_functions_pass(self, rng):
        for _ in range(10):
            assert is_2_monotone(belief_from_mass(MassFunction.random(F3, rng)))

    def test_negative_pair_sum_is_caught(self):
        # m({a,b}) = -0.2 gives Bel({a,b}) < Bel({a}) + Bel({b})
        cap = capacity_from_moebius(F3, [0, 0.4, 0.4, -0.2, 0.2, 0, 0, 0.2])
        rep = is_2_monotone(cap)
        assert not rep
        assert rep.witness[:2] == ("a", "b")
        assert rep.slack == pytest.approx(-0.2)

    def test_brute_force_agreement(self, rng):
        f = Frame(list("abcd"))
        subsets = powerset(f.labels)
        for _ in range(30):
            m = rng.normal(0.1, 0.2, 16)
            m[0] = 0.0
            m[-1] += 1.0 - m.sum()
            cap = capacity_from_moebius(f, m)
            v = {A: cap[f.mask(A)] for A in subsets}
            ok = all(v[A | B] + v[A & B] >= v[A] + v[B] - 1e-12 for A in subsets for B in subsets)
            assert bool(is_2_monotone(cap)) == ok
