"""Executable property suites, one per acceptance criterion.

Each suite returns a :class:`SuiteReport` whose ``checks`` map a check name
to ``{"value": ..., "limit": ..., "passed": bool}``. Defaults reproduce the
acceptance settings; smaller sizes are accepted for quick runs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import limits as lim
from . import maxent as mx
from . import pac
from . import regression as reg
from . import total_belief as tb
from .combination import get_rule
from .errors import NonConvergence
from .frames import Frame, MassFunction
from .likelihood import (
    bernoulli_likelihood_surface,
    check_conjunctive_factorization,
    check_disjunctive_factorization,
    check_plausibility_conjecture,
)


@dataclass
class SuiteReport:
    suite: str
    seed: int
    checks: dict = field(default_factory=dict)
    findings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def check(self, name: str, value, limit, passed: bool) -> None:
        self.checks[name] = {"value": value, "limit": limit, "passed": bool(passed)}

    def at_most(self, name: str, value: float, limit: float) -> None:
        self.check(name, float(value), limit, value <= limit)

    def at_least(self, name: str, value: float, limit: float) -> None:
        self.check(name, float(value), limit, value >= limit)

    def time_limit(self, name: str, seconds: float, limit: float) -> None:
        """Wall-clock checks are kept apart so that reports stay reproducible."""
        self.timings[name] = {"value": float(seconds), "limit": limit, "passed": seconds <= limit}

    @property
    def failed(self) -> list:
        both = {**self.checks, **self.timings}
        return [k for k, v in both.items() if not v["passed"]]

    @property
    def passed(self) -> bool:
        return not self.failed

    @property
    def violations(self) -> int:
        return len(self.failed)

    def as_dict(self, timing: bool = False) -> dict:
        out = {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "violations": self.violations,
            "failed": self.failed,
            "checks": self.checks,
            "findings": self.findings,
        }
        if timing:
            out["timings"] = {**self.timings, "elapsed": {"value": self.elapsed}}
        return out


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        rep = fn(*args, **kwargs)
        rep.elapsed = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# 1 ---------------------------------------------------------------------------------


@_timed
def factorization(seed: int = 0, trials: int = 1000, sizes=(2, 3, 4), time_limit: float = 30.0) -> SuiteReport:
    """Product identities of conjunctive and disjunctive joints against dense oracles."""
    rep = SuiteReport("factorization", seed)
    t0 = time.perf_counter()
    for n in sizes:
        for r in (
            check_conjunctive_factorization(n, trials, seed=seed + n),
            check_disjunctive_factorization(n, trials, seed=seed + 100 + n),
        ):
            for name, stat in r.checks.items():
                rep.check(
                    f"{r.suite}.n{n}.{name}",
                    stat.max_deviation,
                    r.tolerance if name != "focal_count" else 0,
                    stat.violations == 0,
                )
    rep.time_limit("runtime_seconds", time.perf_counter() - t0, time_limit)
    return rep


# 2 -----------------------------------------------------------------------------------


@_timed
def conjecture(seed: int = 0, instances: int = 10_000, sizes=(2, 3, 4)) -> SuiteReport:
    """Plausibility product for sharp samples; deviations are recorded as findings."""
    rep = SuiteReport("conjecture", seed)
    for n in sizes:
        eq = check_plausibility_conjecture(n, 200, seed=seed + n, equidistributed=True)
        stat = eq.checks["all_true_closed_form"]
        rep.at_most(f"equidistributed.n{n}.all_true", stat.max_deviation, 1e-12)
    worst = 0.0
    per = [instances // len(sizes) + (i < instances % len(sizes)) for i in range(len(sizes))]
    for n, count in zip(sizes, per):
        r = check_plausibility_conjecture(n, count, seed=seed + 10 + n, tol=1e-9)
        worst = max(worst, r.max_deviation)
        for c in r.counterexamples:
            rep.findings.append({"n": n, **c})
    rep.at_most("general.max_deviation", worst, 1e-9)
    rep.check("general.instances", instances, instances, sum(per) == instances)
    return rep


# 3 --------------------------------------------------------------------------------------


@_timed
def bernoulli(seed: int = 0, k: int = 6, n: int = 10, grid: float = 1e-3) -> SuiteReport:
    """Lower and upper likelihood surface of ``k`` successes in ``n`` trials."""
    rep = SuiteReport("bernoulli", seed)
    s = bernoulli_likelihood_surface(k, n, grid)
    p, q = s.lower_argmax
    p0, q0 = k / n, (n - k) / n
    rep.at_most("lower_argmax_distance", max(abs(p - p0), abs(q - q0)), grid)
    rep.check("upper_argmax", [*s.upper_argmax], [0.0, 0.0], s.upper_argmax == (0.0, 0.0))
    rep.at_most("lower_max_error", abs(s.lower_max - p0**k * q0 ** (n - k)), 1e-12)
    return rep


# 4 --------------------------------------------------------------------------------------


@_timed
def total_belief_example(seed: int = 0) -> SuiteReport:
    """Worked total-belief problem: construction, constraint counts and a second solution."""
    rep = SuiteReport("total-belief", seed)
    prob = tb.example_problem()
    fine = prob.refining.fine
    m = tb.construct_total(prob)
    a = fine.mask(["a1", "b1", "c1"])
    b = fine.mask(["a2", "b1", "c1", "c2"])
    rep.at_most("mass_a1_b1_c1", abs(m[a] - 1 / 24), 1e-12)
    rep.at_most("mass_a2_b1_c1_c2", abs(m[b] - 1 / 12), 1e-12)
    rep.check("admissible_elements", len(tb.all_admissible(prob)), 17, len(tb.all_admissible(prob)) == 17)
    system = tb.build_constraint_system(prob)
    rep.check("independent_constraints", system.independent, 8, system.independent == 8)
    v = tb.verify_total(prob, m)
    rep.at_most("verify_residual", v.residual, 1e-10)
    alt = tb.alternative_solution(prob)
    va = tb.verify_total(prob, alt)
    rep.at_most("second_solution_residual", va.residual, 1e-10)
    rep.at_least("second_solution_min_mass", min(alt.as_dict().values(), default=0.0), 0.0)
    rep.at_least("second_solution_difference", m.max_abs_diff(alt), 1e-4)
    return rep


# 5 --------------------------------------------------------------------------------------


@_timed
def bayesian_prior(seed: int = 0, problems: int = 200) -> SuiteReport:
    """Random problems with Bayesian priors have exactly one nonnegative solution."""
    rep = SuiteReport("bayesian-prior", seed)
    rng = np.random.default_rng(seed)
    counts, worst = [], 0.0
    for _ in range(problems):
        prob = tb.random_problem(rng, n_coarse=int(rng.integers(2, 5)), prior="bayesian")
        sols = tb.enumerate_vertex_solutions(prob)
        counts.append(len(sols))
        if len(sols) == 1:
            worst = max(worst, sols[0].max_abs_diff(tb.total_mass_formula(prob)))
    bad = sum(c != 1 for c in counts)
    rep.check("problems_with_one_solution", problems - bad, problems, bad == 0)
    rep.at_most("closed_form_max_error", worst, 1e-12)
    return rep


# 6 ---------------------------------------------------------------------------------------


def _classical_logit(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Independent Newton-Raphson fit of the ordinary logistic model."""
    X = np.column_stack([np.ones_like(x), x])
    b = np.zeros(2)
    for _ in range(100):
        p = 1.0 / (1.0 + np.exp(-(X @ b)))
        g = X.T @ (y - p)
        H = (X * (p * (1 - p))[:, None]).T @ X
        step = np.linalg.solve(H, g)
        b += step
        if np.max(np.abs(step)) < 1e-13:
            break
    return b


def random_dataset(rng: np.random.Generator, n: int = 200) -> reg.RegressionData:
    x = rng.normal(0.0, 1.5, n)
    b0, b1 = rng.normal(0.0, 1.0), rng.normal(0.0, 1.5)
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-(b0 + b1 * x)))).astype(float)
    return reg.RegressionData(x, y)


def fd_gradient(params: reg.BetaParams, data: reg.RegressionData, target: str, h: float = 1e-6) -> np.ndarray:
    """Central differences of the objective; the ``beta2`` step stays inside ``(0, 1]``."""
    theta = params.as_array()
    g = np.zeros(3)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        g[j] = (reg.objective(reg.BetaParams.from_array(theta + e), data, target)
                - reg.objective(reg.BetaParams.from_array(theta - e), data, target)) / (2 * h)
    return g


@_timed
def regression(seed: int = 0, datasets: int = 20, n: int = 200) -> SuiteReport:
    """Classical reduction, KKT residuals and gradient accuracy."""
    rep = SuiteReport("regression", seed)
    rng = np.random.default_rng(seed)
    coef, kkt, grad = 0.0, 0.0, 0.0
    for _ in range(datasets):
        data = random_dataset(rng, n)
        fixed = reg.fit(data, "lower", reg.FitConfig(fix_beta2=1.0))
        ref = _classical_logit(data.x, data.y)
        coef = max(coef, float(np.max(np.abs([fixed.params.beta0 - ref[0], fixed.params.beta1 - ref[1]]))))
        for target in reg.TARGETS:
            res = reg.fit(data, target)
            if res.converged:
                kkt = max(kkt, res.kkt_residual)
            else:
                rep.findings.append({"target": target, "converged": False})
            params = reg.BetaParams(rng.normal(), rng.normal(), float(rng.uniform(0.2, 0.9)))
            a, f = reg.gradient(params, data, target), fd_gradient(params, data, target)
            grad = max(grad, float(np.max(np.abs(a - f)) / max(1.0, float(np.max(np.abs(f))))))
    rep.at_most("classical_coefficient_error", coef, 1e-4)
    rep.at_most("kkt_residual", kkt, 1e-6)
    rep.at_most("gradient_relative_error", grad, 1e-5)
    rep.check("all_converged", not rep.findings, True, not rep.findings)
    return rep


# 7 --------------------------------------------------------------------------------------

_BINARY = Frame(["x", "y"])


def _random_binary(rng: np.random.Generator) -> MassFunction:
    w = rng.dirichlet(np.ones(3))
    return MassFunction(_BINARY, {1: float(w[0]), 2: float(w[1]), 3: float(w[2])})


def disjunctive_focus_spread(bel: MassFunction, m_prime_x: float, m_prime_y_values) -> tuple[np.ndarray, float]:
    """Intersect the lines ``Bel' -> bel ⊔ Bel'`` for several ``m'(y)`` at fixed ``m'(x)``."""
    lines = []
    for my in m_prime_y_values:
        b = MassFunction(_BINARY, {1: m_prime_x, 2: my, 3: 1.0 - m_prime_x - my})
        r = get_rule("disjunctive")(bel, b)
        lines.append((np.array([b[1], b[2]]), np.array([r[1], r[2]])))
    pts = np.array([geo.line_intersection(*lines[0], *lines[j]) for j in range(1, len(lines))])
    return pts.mean(axis=0), float(np.ptp(pts, axis=0).max())


@_timed
def geometry(seed: int = 0, triples: int = 1000) -> SuiteReport:
    """Vertex formulas, affine commutation, disjunctive focus and the ternary toy."""
    rep = SuiteReport("geometry", seed)
    rng = np.random.default_rng(seed)
    for rule in ("yager", "disjunctive"):
        worst = 0.0
        for _ in range(200):
            bel = _random_binary(rng)
            formulas = geo.vertex_formulas(bel, rule)
            for v in geo.conditional_subspace(bel, rule):
                key = {0: "∅", 1: v.focus[0] if v.focus else "", 2: "Θ"}[len(v.focus)]
                worst = max(worst, float(np.max(np.abs(geo.mass_vector(v.mass) - formulas[key]))))
        rep.at_most(f"{rule}.vertex_formulas", worst, 1e-12)
        worst = 0.0
        for _ in range(triples):
            bel, b1, b2 = (_random_binary(rng) for _ in range(3))
            a = float(rng.random())
            worst = max(worst, geo.affine_commutation_check(rule, bel, [b1, b2], [a, 1.0 - a]))
        rep.at_most(f"{rule}.affine_commutation", worst, 1e-12)
    spread, err = 0.0, 0.0
    for _ in range(200):
        bel = _random_binary(rng)
        mpx = float(rng.uniform(0.05, 0.6))
        mys = np.sort(rng.uniform(0.0, 1.0 - mpx, 4))
        pt, s = disjunctive_focus_spread(bel, mpx, mys)
        spread = max(spread, s)
        err = max(err, float(np.max(np.abs(pt - geo.disjunctive_focus(bel, mpx)))))
    rep.at_most("disjunctive_focus.spread", spread, 1e-12)
    rep.at_most("disjunctive_focus.formula", err, 1e-12)
    status = [geo.toy_status(v) for v in geo.ternary_2monotone_vertices()]
    rep.check("toy_vertices_feasible", status, "feasible", all(s != "infeasible" for s in status))
    return rep


# 8 --------------------------------------------------------------------------------------


def concavity_violation(kind: str, rng: np.random.Generator, pairs: int, n: int = 3) -> float:
    """Largest ``λH(a) + (1-λ)H(b) - H(λa + (1-λ)b)`` over random mass pairs."""
    k = (1 << n) - 1
    worst = -np.inf
    for _ in range(pairs):
        a = np.concatenate([[0.0], rng.dirichlet(np.full(k, 0.5))])
        b = np.concatenate([[0.0], rng.dirichlet(np.full(k, 0.5))])
        lam = float(rng.random())
        gap = (lam * mx.entropy_dense(a, kind) + (1 - lam) * mx.entropy_dense(b, kind)
               - mx.entropy_dense(lam * a + (1 - lam) * b, kind))
        worst = max(worst, gap)
    return float(worst)


def signed_indicator_problem(rng: np.random.Generator, nx: int = 2, nc: int = 2, entropy: str = "HBel"):
    """Random histogram with ``±1`` indicators of every outcome except the last."""
    p = rng.dirichlet(np.ones(nx * nc)).reshape(nx, nc)
    phi = []
    for i in range(nx * nc - 1):
        f = -np.ones(nx * nc)
        f[i] = 1.0
        phi.append(f.reshape(nx, nc))
    xs = tuple(f"x{i}" for i in range(nx))
    cs = tuple(f"c{k}" for k in range(nc))
    return mx.MaxentProblem(xs, cs, p, np.array(phi), entropy)


def unsigned_problem(rng: np.random.Generator, entropy: str, nx: int = 2, nc: int = 2, features: int = 2):
    """Random histogram with random nonnegative features (full-dimensional feasible set)."""
    p = rng.dirichlet(np.ones(nx * nc)).reshape(nx, nc)
    phi = rng.random((features, nx, nc))
    xs = tuple(f"x{i}" for i in range(nx))
    cs = tuple(f"c{k}" for k in range(nc))
    return mx.MaxentProblem(xs, cs, p, phi, entropy)


def rejection_best(problem: mx.MaxentProblem, rng: np.random.Generator, draws: int) -> tuple[float, int]:
    """Best entropy among uniform simplex draws that satisfy every constraint."""
    G, h = mx._constraint_matrix(problem)
    k = (1 << problem.n_outcomes) - 1
    best, accepted = -np.inf, 0
    for start in range(0, draws, 20000):
        X = rng.dirichlet(np.ones(k), size=min(20000, draws - start))
        ok = np.all(X @ G.T - h <= 0, axis=1)
        accepted += int(ok.sum())
        if ok.any():
            best = max(best, float(batch_entropy(X[ok], problem.entropy, problem.n_outcomes).max()))
    return best, accepted


def batch_entropy(X: np.ndarray, kind: str, n: int) -> np.ndarray:
    """Entropies of the rows of ``X`` (masses of the nonempty subsets in mask order)."""
    full = np.hstack([np.zeros((X.shape[0], 1)), X])
    if kind == "Hn":
        v = X
    elif kind == "HBel":
        v = full @ mx.subset_matrix(n).T
    elif kind == "HPl":
        v = full @ mx.intersect_matrix(n).T
    elif kind == "Hd":
        sizes = np.array([bin(j).count("1") for j in range(1, 1 << n)])
        return X @ np.log(sizes)
    else:
        return np.array([mx.entropy_dense(row, kind) for row in full])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)
    return -t.sum(axis=1)


@_timed
def maxent(seed: int = 0, pairs: int = 10_000, fits: int = 5, draws: int = 100_000) -> SuiteReport:
    """Concavity spot checks, classical agreement, KKT residuals and a random-search baseline."""
    rep = SuiteReport("maxent", seed)
    rng = np.random.default_rng(seed)
    for kind in mx.ENTROPY_KINDS:
        rep.at_most(f"concavity.{kind}", concavity_violation(kind, rng, pairs), 1e-10)
    tv, kkt = 0.0, 0.0
    for _ in range(fits):
        prob = signed_indicator_problem(rng)
        res = mx.fit_maxent(prob)
        kkt = max(kkt, res.kkt.residual)
        cl = mx.classical_maxent(prob)
        joint = cl.joint(prob.p_hat.sum(axis=1))
        tv = max(tv, 0.5 * float(np.abs(mx.pignistic(res.mass) - joint.ravel()).sum()))
    rep.at_most("classical_total_variation", tv, 1e-3)
    beats = []
    for kind in ("Hn", "Hd", "HBel", "HPl"):
        for _ in range(fits):
            prob = unsigned_problem(rng, kind)
            res = mx.fit_maxent(prob)
            kkt = max(kkt, res.kkt.residual)
            best, accepted = rejection_best(prob, rng, draws)
            beats.append(res.entropy >= best - 1e-10)
            if accepted == 0:
                rep.findings.append({"entropy": kind, "note": "no feasible rejection sample"})
    rep.at_most("kkt_residual", kkt, 1e-6)
    rep.check("beats_rejection_sampling", int(sum(beats)), len(beats), all(beats))
    try:
        mx.fit_maxent(signed_indicator_problem(rng, entropy="Ht"))
        rep.findings.append({"entropy": "Ht", "fit": "converged"})
    except NonConvergence as exc:
        rep.findings.append({"entropy": "Ht", "fit": f"not solvable: {exc}"})
    return rep


# 9 --------------------------------------------------------------------------------------

_TF = Frame(["T", "F"])


@_timed
def limits(seed: int = 0, n: int = 10_000, trials: int = 1000, samples: int = 10_000) -> SuiteReport:
    """Band coverage and normal limits for a non-Bayesian and a Bayesian Bernoulli BPA."""
    rep = SuiteReport("limits", seed)
    rng = np.random.default_rng(seed)
    m = MassFunction(_TF, {1: 0.2, 2: 0.3, 3: 0.5})
    p = MassFunction(_TF, {1: 0.4, 2: 0.6})
    rep.at_least("lln.coverage", lim.lln_band_check(m, n, trials, 0.02, rng).coverage, 0.99)
    c = lim.clt_check(m, n, samples, rng)
    rep.at_most("clt.upper_ks", c.upper_distance, 0.05)
    rep.at_most("clt.lower_ks", c.lower_distance, 0.05)
    rep.at_least("bayesian.lln.coverage", lim.lln_band_check(p, n, trials, 0.05, rng).coverage, 0.99)
    c = lim.clt_check(p, n, samples, rng)
    rep.at_most("bayesian.clt.upper_ks", c.upper_distance, 0.02)
    rep.at_most("bayesian.clt.lower_ks", c.lower_distance, 0.02)
    return rep


# 10 --------------------------------------------------------------------------------------


def adversarial_vertices(H: np.ndarray, p_x: np.ndarray) -> list:
    """Two vertices realized by different thresholds that disagree on half of the mass."""
    return [pac.labelled_distribution(H[2], p_x), pac.labelled_distribution(H[6], p_x)]


@_timed
def pac_suite(seed: int = 0, trials: int = 10_000, epsilon: float = 0.1, delta: float = 0.05) -> SuiteReport:
    """Realizable violation frequency and credal tails."""
    rep = SuiteReport("pac", seed)
    rng = np.random.default_rng(seed)
    H = pac.threshold_class(8)
    p_x = np.full(8, 1 / 8)
    n = pac.sample_complexity(len(H), epsilon, delta)
    r = pac.simulate_realizable(H, pac.labelled_distribution(H[3], p_x), n, epsilon, delta, trials, rng)
    rep.at_most("violation_frequency", r.frequency, delta + r.slack)
    ns = (n, 4 * n, 16 * n)
    adv = pac.simulate_credal(H, adversarial_vertices(H, p_x), ns, epsilon, max(trials // 10, 100), rng)
    rep.at_least("adversarial.final_tail", adv.tails[-1], 0.5)
    rep.check("adversarial.not_uniform", adv.uniformly_realizable, False, not adv.uniformly_realizable)
    skew = np.array([0.05, 0.05, 0.1, 0.1, 0.1, 0.2, 0.2, 0.2])
    uni = pac.simulate_credal(
        H,
        [pac.labelled_distribution(H[4], p_x), pac.labelled_distribution(H[4], skew)],
        ns,
        epsilon,
        max(trials // 10, 100),
        rng,
    )
    rep.check("uniform.realizable", uni.uniformly_realizable, True, uni.uniformly_realizable)
    rep.at_most("uniform.final_tail", uni.tails[-1], 0.01)
    rep.check("uniform.tails_decrease", list(uni.tails), "non-increasing", uni.tails[0] >= uni.tails[-1])
    return rep


SUITES = {
    "factorization": factorization,
    "conjecture": conjecture,
    "bernoulli": bernoulli,
    "total-belief": total_belief_example,
    "bayesian-prior": bayesian_prior,
    "regression": regression,
    "geometry": geometry,
    "maxent": maxent,
    "limits": limits,
    "pac": pac_suite,
}
