import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from beliefkit import total_belief as tb
from beliefkit.errors import FrameError, IntractableError, NoAdmissibleSubstitution, PreconditionError
from beliefkit.frames import Frame, MassFunction
from beliefkit.multivariate import Refining


@pytest.fixture(scope="module")
def example():
    return tb.example_problem()


def set_formula(problem):
    """Canonical masses from frozensets: prior mass times one conditional focal set per covered cell."""
    rho = problem.refining
    out = {}
    for C, w0 in problem.prior.items():
        cells = [i for i in range(rho.coarse.size) if C >> i & 1]
        options = [[(frozenset(problem.conditionals[i].frame.labels_of(k)), v) for k, v in problem.conditionals[i].items()] for i in cells]
        for combo in itertools.product(*options):
            S = frozenset().union(*[A for A, _ in combo])
            w = w0 * np.prod([v for _, v in combo])
            out[S] = out.get(S, 0.0) + w
    return out


class TestExample:
    def test_named_masses(self, example):
        m = tb.construct_total(example)
        f = example.fine
        assert m.mass(["a1", "b1", "c1"]) == pytest.approx(1 / 24, abs=1e-12)
        assert m.mass(["a2", "b1", "c1", "c2"]) == pytest.approx(1 / 12, abs=1e-12)
        assert len(m) == 17

    def test_no_conflict_and_formula(self, example):
        m, k = tb.construct_total(example, return_conflict=True)
        assert k == pytest.approx(0.0, abs=1e-15)
        assert m.max_abs_diff(tb.total_mass_formula(example)) < 1e-15
        got = {frozenset(example.fine.labels_of(k)): v for k, v in m.items()}
        want = set_formula(example)
        assert set(got) == set(want)
        np.testing.assert_allclose([got[s] for s in want], list(want.values()), atol=1e-15)

    def test_constraint_counts(self, example):
        s = tb.build_constraint_system(example)
        assert s.unknown_count == 17
        assert (s.g1_independent, s.g2_independent) == (2, 6)
        assert s.independent == 8
        assert not s.determined
        assert s.residual(s.vector(tb.construct_total(example))) < 1e-15

    def test_verify_and_second_solution(self, example):
        m = tb.construct_total(example)
        assert tb.verify_total(example, m).residual <= 1e-10
        alt = tb.alternative_solution(example)
        v = tb.verify_total(example, alt)
        assert v.ok and v.residual <= 1e-10
        assert min(alt.as_dict().values()) >= 0
        assert m.max_abs_diff(alt) > 1e-4

    def test_verify_detects_wrong_candidate(self, example):
        m = tb.construct_total(example)
        d = m.as_dict()
        k1, k2 = list(d)[:2]
        d[k1] += 0.01
        d[k2] -= 0.01
        assert not tb.verify_total(example, MassFunction(example.fine, d)).ok
        with pytest.raises(FrameError):
            tb.verify_total(example, MassFunction.vacuous(Frame("ab")))

    def test_vertex_solutions_all_verify_and_span_canonical(self, example):
        sols = tb.enumerate_vertex_solutions(example)
        assert len(sols) > 1
        for s in sols[:40]:
            assert tb.verify_total(example, s).ok
        system = tb.build_constraint_system(example)
        V = np.array([system.vector(s) for s in sols])
        assert tb.in_convex_hull(system.vector(tb.construct_total(example)), V)

    def test_lp_vertex_is_enumerated(self, example):
        # an LP optimum sits on a vertex, which the enumeration must contain
        system = tb.build_constraint_system(example)
        sols = tb.enumerate_vertex_solutions(example)
        V = np.array([system.vector(s) for s in sols])
        rng = np.random.default_rng(3)
        for _ in range(5):
            c = rng.normal(size=system.unknown_count)
            res = linprog(c, A_eq=system.A, b_eq=system.b, bounds=(0, None), method="highs")
            assert res.status == 0
            assert np.min(V @ c) == pytest.approx(res.fun, abs=1e-9)

    def test_full_subproblem_minimal_solutions(self, example):
        full = example.coarse.full
        sols = tb.enumerate_minimal_solutions(example, full)
        sys_ = tb.full_candidate_system(example, full)
        assert sys_.n_min == 3 and sys_.n_max == 4
        assert len(sols) == 2
        canon = np.array([1 / 6, 1 / 3, 1 / 6, 1 / 3])
        assert tb.in_convex_hull(canon, np.array([s.dense(sys_.n_max) for s in sols]))


class TestRandomProblems:
    @pytest.mark.parametrize("prior", ["full", "random", "bayesian", "disjoint"])
    def test_canonical_always_verifies(self, prior, rng):
        for _ in range(15):
            p = tb.random_problem(rng, n_coarse=int(rng.integers(1, 4)), prior=prior)
            m = tb.construct_total(p)
            assert tb.verify_total(p, m).ok
            assert m.max_abs_diff(tb.total_mass_formula(p)) < 1e-12

    def test_bayesian_prior_unique(self, rng):
        for _ in range(30):
            p = tb.random_problem(rng, n_coarse=3, prior="bayesian")
            sols = tb.enumerate_vertex_solutions(p)
            assert len(sols) == 1
            assert sols[0].max_abs_diff(tb.total_mass_formula(p)) < 1e-12
            assert tb.build_constraint_system(p).determined

    def test_special_solutions_for_disjoint_priors(self, rng):
        for _ in range(10):
            p = tb.random_problem(rng, n_coarse=3, prior="disjoint")
            sols = tb.enumerate_special_solutions(p)
            assert sols
            for s in sols:
                assert tb.verify_total(p, s).ok
            system = tb.build_constraint_system(p)
            canon = system.vector(tb.construct_total(p))
            assert tb.in_convex_hull(canon, np.array([system.vector(s) for s in sols]))

    def test_special_requires_disjoint(self, example):
        with pytest.raises(PreconditionError):
            tb.enumerate_special_solutions(example)

    def test_subset_cap(self, example):
        with pytest.raises(IntractableError):
            tb.enumerate_minimal_solutions(example, example.coarse.full, max_subsets=1)
        assert len(tb.enumerate_vertex_solutions(example, max_subsets=10)) == 1

    def test_zero_prior_plausibility_rejected(self):
        coarse, fine = Frame(["w1", "w2"]), Frame(["a", "b"])
        rho = Refining(coarse, fine, {"w1": ["a"], "w2": ["b"]})
        conds = (MassFunction.vacuous(rho.cell_frame(0)), MassFunction.vacuous(rho.cell_frame(1)))
        with pytest.raises(PreconditionError):
            tb.TotalBeliefProblem(rho, MassFunction.categorical(coarse, 1), conds)


class TestSubstitution:
    def test_two_by_two_example(self):
        system = tb.CandidateSolutionSystem((2, 2), ((0, 0), (0, 1), (1, 0)), ((0.3, 0.7), (0.4, 0.6)))
        np.testing.assert_allclose(system.solve(), [-0.3, 0.6, 0.7], atol=1e-15)
        res = tb.column_substitution(system, 0)
        assert res.new_column == (1, 1)
        np.testing.assert_allclose(res.new_x, [0.3, 0.3, 0.4], atol=1e-15)
        assert all(res.checks.values())
        assert res.most_negative_after == 0.0

    def test_requires_negative_component(self):
        system = tb.CandidateSolutionSystem((2, 2), ((0, 0), (0, 1), (1, 0)), ((0.5, 0.5), (0.5, 0.5)))
        with pytest.raises(PreconditionError):
            tb.column_substitution(system, 1)

    def test_random_substitutions_keep_solving(self, rng):
        done = 0
        for _ in range(200):
            sizes = (2, 3)
            masses = tuple(tuple(rng.dirichlet(np.ones(n))) for n in sizes)
            allc = list(itertools.product(*[range(n) for n in sizes]))
            cols = tuple(allc[i] for i in rng.choice(len(allc), 4, replace=False))
            system = tb.CandidateSolutionSystem(sizes, cols, masses)
            try:
                x = system.solve()
            except np.linalg.LinAlgError:
                continue
            neg = np.flatnonzero(x < -1e-9)
            if neg.size == 0:
                continue
            try:
                res = tb.column_substitution(system, int(neg[0]))
            except NoAdmissibleSubstitution:
                continue
            A = res.system.A
            np.testing.assert_allclose(A @ res.new_x, res.system.b, atol=1e-12)
            assert res.new_x[int(neg[0])] > 0
            done += 1
        assert done > 5

    def test_bad_columns_rejected(self):
        with pytest.raises(PreconditionError):
            tb.CandidateSolutionSystem((2, 2), ((0, 2),), ((0.5, 0.5), (0.5, 0.5)))
