import numpy as np
import pytest
from scipy.optimize import minimize

from beliefkit import geometry as geo
from beliefkit.combination import get_rule
from beliefkit.errors import FrameError, IntractableError, PreconditionError
from beliefkit.frames import Frame, MassFunction, belief_from_mass
from beliefkit.suites import disjunctive_focus_spread

B = Frame(["x", "y"])


def binary(mx, my):
    return MassFunction(B, {1: mx, 2: my, 3: 1 - mx - my})


class TestCoordinates:
    def test_vectors(self):
        m = binary(0.4, 0.2)
        np.testing.assert_allclose(geo.mass_vector(m), [0.4, 0.2, 0.4])
        np.testing.assert_allclose(geo.believability_vector(m), [0.0, 0.4, 0.2])
        np.testing.assert_allclose(geo.belief_coordinates(m), [0.4, 0.2])

    def test_binary_required(self):
        with pytest.raises(FrameError):
            geo.mass_vector(MassFunction.vacuous(Frame("abc")))


class TestSubspaces:
    def test_yager_example(self):
        verts = {v.focus: v.vector for v in geo.conditional_subspace(binary(0.4, 0.2), "yager")}
        np.testing.assert_allclose(verts[("x",)], [0.8, 0.0, 0.2], atol=1e-15)

    @pytest.mark.parametrize("rule", geo.SUBSPACE_RULES[1:])
    def test_formulas_match_combination(self, rule, rng):
        names = {(): "∅", ("x",): "x", ("y",): "y", ("x", "y"): "Θ"}
        for _ in range(50):
            w = rng.dirichlet(np.ones(3))
            m = binary(w[0], w[1])
            f = geo.vertex_formulas(m, rule)
            verts = geo.conditional_subspace(m, rule)
            assert len(verts) == len(f)
            for v in verts:
                np.testing.assert_allclose(v.vector, f[names[v.focus]], atol=1e-12)

    def test_dempster_drops_conflicting_vertex(self):
        verts = geo.conditional_subspace(MassFunction.categorical(B, 1), "dempster")
        assert ("y",) not in {v.focus for v in verts}

    @pytest.mark.parametrize("rule", ["yager", "disjunctive"])
    def test_affine_commutation(self, rule, rng):
        for _ in range(100):
            ms = [binary(*rng.dirichlet(np.ones(3))[:2]) for _ in range(4)]
            w = rng.dirichlet(np.ones(3))
            assert geo.affine_commutation_check(rule, ms[0], ms[1:], w) <= 1e-12

    def test_dempster_does_not_commute_with_mixtures(self):
        dev = geo.affine_commutation_check("dempster", binary(0.6, 0.1), [binary(0.0, 0.9), binary(0.9, 0.0)], [0.5, 0.5])
        assert dev > 1e-3

    def test_weights_validated(self):
        with pytest.raises(PreconditionError):
            geo.affine_commutation_check("yager", binary(0.2, 0.2), [binary(0.1, 0.1)], [0.7])


class TestFoci:
    def test_disjunctive_focus_example(self):
        assert geo.disjunctive_focus(binary(0.4, 0.2), 0.5) == pytest.approx((0.125, 0.0))

    def test_disjunctive_focus_is_common_point(self, rng):
        for _ in range(50):
            m = binary(*rng.dirichlet(np.ones(3))[:2])
            mpx = float(rng.uniform(0.05, 0.5))
            pt, spread = disjunctive_focus_spread(m, mpx, [0.0, 0.2, 0.4])
            assert spread < 1e-12
            np.testing.assert_allclose(pt, geo.disjunctive_focus(m, mpx), atol=1e-12)

    def test_focus_undefined(self):
        with pytest.raises(PreconditionError):
            geo.disjunctive_focus(MassFunction.categorical(B, 2), 0.3)

    def test_yager_loci_parallel(self):
        rep = geo.yager_parallel_loci_check(binary(0.4, 0.2))
        assert rep.parallel and rep.fit_residual < 1e-12
        assert rep.formula_slope == pytest.approx(-1.0)
        for s in rep.slopes.values():
            assert s == pytest.approx(rep.formula_slope)

    def test_yager_slope_formula_random(self, rng):
        for _ in range(20):
            w = rng.dirichlet(np.ones(3))
            rep = geo.yager_parallel_loci_check(binary(w[0], w[1]))
            assert rep.parallel
            assert list(rep.slopes.values())[0] == pytest.approx(-w[2] / w[0], rel=1e-9)

    def test_dempster_loci_focus(self):
        rep = geo.yager_parallel_loci_check(binary(0.5, 0.2))
        assert rep.dempster_focus is not None
        assert rep.dempster_focus_spread < 1e-9

    def test_line_intersection(self):
        np.testing.assert_allclose(geo.line_intersection([0, 0], [1, 1], [0, 1], [1, 0]), [0.5, 0.5])
        with pytest.raises(PreconditionError):
            geo.line_intersection([0, 0], [1, 1], [0, 1], [1, 2])


def slsqp_condition(bel, A, restarts=6, seed=0):
    """Reference L2 conditioning by SLSQP from several starting points."""
    M, cols = geo._conditioning_matrix(bel.frame.size, A)
    b = geo.belief_coordinates(bel)
    r = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        x0 = r.dirichlet(np.ones(cols.size))
        res = minimize(
            lambda x: np.sum((M @ x - b) ** 2),
            x0,
            jac=lambda x: 2 * M.T @ (M @ x - b),
            bounds=[(0, 1)] * cols.size,
            constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1}],
            method="SLSQP",
            options={"ftol": 1e-15, "maxiter": 500},
        )
        if best is None or res.fun < best.fun:
            best = res
    return best.fun


class TestConditioning:
    def test_l2_matches_reference(self, rng):
        f = Frame("abcd")
        for _ in range(8):
            bel = MassFunction.random(f, rng)
            A = int(rng.integers(1, 15))
            got = geo.geometric_condition(bel, A, "L2")
            assert all(k & ~A == 0 for k in got.focal)
            d_got = geo.belief_distance(bel, got, "L2") ** 2
            assert d_got <= slsqp_condition(bel, A) + 1e-10

    @pytest.mark.parametrize("norm", ["L1", "Linf"])
    def test_lp_norms_beat_random_candidates(self, norm, rng):
        f = Frame("abc")
        for _ in range(5):
            bel = MassFunction.random(f, rng)
            A = f.mask("ab")
            got = geo.geometric_condition(bel, A, norm)
            d = geo.belief_distance(bel, got, norm)
            for _ in range(300):
                w = rng.dirichlet(np.ones(3))
                cand = MassFunction(f, {1: w[0], 2: w[1], 3: w[2]})
                assert d <= geo.belief_distance(bel, cand, norm) + 1e-10

    def test_already_conditioned_is_fixed(self, rng):
        f = Frame("abc")
        bel = MassFunction(f, {1: 0.3, 3: 0.7})
        assert geo.geometric_condition(bel, 3) is bel

    def test_size_limits(self, rng):
        with pytest.raises(IntractableError):
            geo.geometric_condition(MassFunction.vacuous(Frame(range(11))), 1)
        with pytest.raises(PreconditionError):
            geo.geometric_condition(MassFunction.vacuous(Frame("ab")), 0)


class TestToy:
    def test_vertices_feasible(self):
        for v in geo.ternary_2monotone_vertices():
            assert geo.toy_status(v) != "infeasible"
        np.testing.assert_array_equal(geo.ternary_2monotone_vertices()[-1], [1, 1, -1])

    def test_status(self):
        assert geo.toy_status([0.3, 0.3, 0.4]) == "interior"
        assert geo.toy_status([0.0, 0.5, 0.5]) == "boundary"
        assert geo.toy_status([0.2, 0.2, -0.5]) == "infeasible"
        assert geo.toy_status([1.2, 1.0, -1.2]) == "infeasible"
