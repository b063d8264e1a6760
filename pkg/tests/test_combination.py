import numpy as np
import pytest
from hypothesis import given, strategies as st

from beliefkit.combination import combine_all, dempster_condition, get_rule
from beliefkit.errors import FrameError, TotalConflict, ZeroPlausibility
from beliefkit.frames import Frame, MassFunction

from conftest import as_sets

F = Frame(["a", "b", "c", "d"])


def brute(rule, m1, m2):
    """Rule applied to frozenset dictionaries, independently of the bitmask code."""
    out = {}
    full = frozenset(m1.frame.labels)
    for A, u in as_sets(m1).items():
        for B, v in as_sets(m2).items():
            if rule in ("dempster", "conjunctive", "yager"):
                C = A & B
            elif rule == "disjunctive":
                C = A | B
            else:
                C = (A & B) or (A | B)
            out[C] = out.get(C, 0.0) + u * v
    k = out.pop(frozenset(), 0.0)
    if rule == "dempster":
        out = {C: w / (1 - k) for C, w in out.items()}
    elif rule == "yager":
        out[full] = out.get(full, 0.0) + k
    elif rule == "conjunctive" and k:
        out[frozenset()] = k
    return out


def random_pair(seed, n_focal=5):
    r = np.random.default_rng(seed)
    return MassFunction.random(F, r, n_focal), MassFunction.random(F, r, n_focal)


class TestRules:
    @pytest.mark.parametrize("rule", ["dempster", "conjunctive", "disjunctive", "yager", "dubois"])
    def test_against_set_oracle(self, rule):
        for seed in range(25):
            m1, m2 = random_pair(seed)
            try:
                got = as_sets(get_rule(rule)(m1, m2))
            except TotalConflict:
                continue
            want = brute(rule, m1, m2)
            keys = set(got) | set(want)
            np.testing.assert_allclose([got.get(k, 0) for k in keys], [want.get(k, 0) for k in keys], atol=1e-14)

    @given(st.integers(0, 10_000), st.sampled_from(["dempster", "disjunctive", "yager", "dubois"]))
    def test_commutative(self, seed, rule):
        m1, m2 = random_pair(seed)
        op = get_rule(rule)
        try:
            assert op(m1, m2).max_abs_diff(op(m2, m1)) < 1e-14
        except TotalConflict:
            pass

    @given(st.integers(0, 10_000), st.sampled_from(["conjunctive", "disjunctive"]))
    def test_associative(self, seed, rule):
        r = np.random.default_rng(seed)
        a, b, c = (MassFunction.random(F, r, 4) for _ in range(3))
        op = get_rule(rule)
        if rule == "conjunctive":
            a, b, c = (MassFunction(F, x.as_dict(), normalized=False) for x in (a, b, c))
        assert op(op(a, b), c).max_abs_diff(op(a, op(b, c))) < 1e-14

    def test_vacuous_is_neutral_for_dempster(self, rng):
        m = MassFunction.random(F, rng)
        assert get_rule("dempster")(m, MassFunction.vacuous(F)).max_abs_diff(m) < 1e-15

    def test_total_conflict(self):
        a = MassFunction.categorical(F, F.mask("a"))
        b = MassFunction.categorical(F, F.mask("b"))
        with pytest.raises(TotalConflict):
            get_rule("dempster")(a, b)
        assert get_rule("yager")(a, b)[F.full] == 1.0

    def test_frame_mismatch_and_unknown_rule(self):
        with pytest.raises(FrameError):
            get_rule("dempster")(MassFunction.vacuous(F), MassFunction.vacuous(Frame(["a"])))
        with pytest.raises(ValueError):
            get_rule("murphy")

    def test_combine_all_folds_left(self, rng):
        ms = [MassFunction.random(F, rng, 4) for _ in range(3)]
        op = get_rule("dubois")
        assert combine_all("dubois", ms).max_abs_diff(op(op(ms[0], ms[1]), ms[2])) < 1e-15


class TestConditioning:
    def test_matches_bayes_on_probabilities(self):
        m = MassFunction.bayesian(F, [0.1, 0.2, 0.3, 0.4])
        c = dempster_condition(m, F.mask("bc"))
        np.testing.assert_allclose([c.mass("b"), c.mass("c")], [0.4, 0.6])

    def test_plausibility_formula(self, rng):
        # Pl(B | A) = Pl(A ∩ B) / Pl(A)
        m = MassFunction.random(F, rng, 6)
        A = F.mask("ab")
        c = dempster_condition(m, A)
        for B in range(1, 16):
            assert c.pl(B) == pytest.approx(m.pl(A & B) / m.pl(A), abs=1e-13)

    def test_zero_plausibility(self):
        m = MassFunction.categorical(F, F.mask("a"))
        with pytest.raises(ZeroPlausibility):
            dempster_condition(m, F.mask("cd"))
