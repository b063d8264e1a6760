"""Maximum-entropy belief classifier.

The unknown is a mass vector over the nonempty subsets of the joint frame
``Θ = X × C``. Feature expectations are only bracketed: for every feature
``φ``, the lower expectation ``Σ Bel({θ}) φ(θ)`` must not exceed the
empirical one and the upper expectation ``Σ Pl({θ}) φ(θ)`` must not fall
below it. Both brackets are linear in the masses, so the feasible set is a
polytope inside the mass simplex.

Entropy kinds
-------------
``Hn``   ``-Σ m log m``
``Hd``   ``Σ m log |A|``
``HBel`` ``-Σ Bel log Bel``
``HPl``  ``-Σ Pl log Pl``
``Ht``   ``Σ log(1/Q(A))`` over nonempty ``A``; this one is convex in the
         masses and infinite at every BPA with ``Q(Θ) = 0``, so it can be
         evaluated but not maximized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import InfeasibleStart, IntractableError, NonConvergence, PreconditionError
from .frames import Frame, MassFunction
from .multivariate import ProductFrame

ENTROPY_KINDS = ("Ht", "Hn", "Hd", "HBel", "HPl")
FLOOR = 1e-12
MAX_FIT_OUTCOMES = 10


# set-function matrices ---------------------------------------------------------


def _masks(n: int) -> np.ndarray:
    return np.arange(1 << n)


def subset_matrix(n: int) -> np.ndarray:
    """``Z[A, B] = 1`` iff ``B ⊆ A`` over all subsets; ``Bel = Z m``."""
    a = _masks(n)
    return ((a[:, None] & a[None, :]) == a[None, :]).astype(float)


def superset_matrix(n: int) -> np.ndarray:
    """``S[A, B] = 1`` iff ``A ⊆ B``; commonality is ``S m``."""
    a = _masks(n)
    return ((a[:, None] & a[None, :]) == a[:, None]).astype(float)


def intersect_matrix(n: int) -> np.ndarray:
    """``P[A, B] = 1`` iff ``A ∩ B ≠ ∅``; plausibility is ``P m``."""
    a = _masks(n)
    return ((a[:, None] & a[None, :]) != 0).astype(float)


def _xlogx(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log(v[pos])
    return out


def entropy_dense(masses: np.ndarray, kind: str) -> float:
    """Entropy of a dense mass vector indexed by subset mask."""
    m = np.asarray(masses, dtype=float)
    n = int(m.size).bit_length() - 1
    if kind == "Hn":
        return float(-_xlogx(m[1:]).sum())
    if kind == "Hd":
        sizes = np.array([bin(k).count("1") for k in range(m.size)])
        return float(np.sum(m[1:] * np.log(sizes[1:])))
    if kind == "HBel":
        return float(-_xlogx(subset_matrix(n) @ m).sum())
    if kind == "HPl":
        return float(-_xlogx(intersect_matrix(n) @ m).sum())
    if kind == "Ht":
        q = (superset_matrix(n) @ m)[1:]
        if np.any(q <= 0):
            return float("inf")
        return float(-np.log(q).sum())
    raise ValueError(f"unknown entropy kind {kind!r}; choose from {ENTROPY_KINDS}")


def entropy(m: MassFunction, kind: str) -> float:
    """Entropy of ``m`` (conventions ``0 log 0 = 0``, ``log(1/0) = inf``)."""
    m.frame.require_dense()
    return entropy_dense(m.to_dense(), kind)


class _Objective:
    """Entropy, gradient and Hessian as functions of the nonempty-subset masses."""

    def __init__(self, n: int, kind: str):
        if kind not in ENTROPY_KINDS:
            raise ValueError(f"unknown entropy kind {kind!r}")
        self.kind = kind
        self.n = n
        if kind == "HBel":
            self.M = subset_matrix(n)[:, 1:]
        elif kind == "HPl":
            self.M = intersect_matrix(n)[:, 1:]
        elif kind == "Ht":
            self.M = superset_matrix(n)[1:, 1:]
        else:
            self.M = None
        sizes = np.array([bin(k).count("1") for k in range(1, 1 << n)])
        self.logsize = np.log(sizes)

    def value(self, x: np.ndarray) -> float:
        full = np.concatenate([[0.0], x])
        return entropy_dense(full, self.kind)

    def grad(self, x: np.ndarray) -> np.ndarray:
        k = self.kind
        if k == "Hn":
            return -(1.0 + np.log(np.maximum(x, FLOOR)))
        if k == "Hd":
            return self.logsize.copy()
        v = self.M @ x
        if k == "Ht":
            return -self.M.T @ (1.0 / np.maximum(v, FLOOR))
        return -self.M.T @ (1.0 + np.log(np.maximum(v, FLOOR)))

    def neg_hess(self, x: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """``-∇²H`` restricted to ``cols`` (positive semidefinite for concave kinds)."""
        k = self.kind
        if k == "Hn":
            return np.diag(1.0 / np.maximum(x[cols], FLOOR))
        if k == "Hd":
            return np.zeros((cols.size, cols.size))
        v = self.M @ x
        Mc = self.M[:, cols]
        if k == "Ht":
            return -(Mc.T * (1.0 / np.maximum(v, FLOOR) ** 2)) @ Mc
        w = np.where(v > 0, 1.0 / np.maximum(v, FLOOR), 0.0)
        return (Mc.T * w) @ Mc


# problem --------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureSet:
    """Feature maps ``φ_m(x, C)`` as an ``M × |X| × |C|`` table."""

    x_labels: tuple
    classes: tuple
    names: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        shape = (len(self.names), len(self.x_labels), len(self.classes))
        if v.shape != shape:
            raise PreconditionError(f"feature table has shape {v.shape}, expected {shape}")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("feature values must be finite")
        object.__setattr__(self, "values", v)

    def as_mapping(self) -> dict:
        """``{name: {x: {class: value}}}`` with every entry listed."""
        return {
            name: {x: {c: float(self.values[m, i, k]) for k, c in enumerate(self.classes)} for i, x in enumerate(self.x_labels)}
            for m, name in enumerate(self.names)
        }


@dataclass(frozen=True)
class MaxentProblem:
    """Training histogram, features and entropy kind on ``Θ = X × C``.

    ``p_hat`` and each ``features[m]`` are ``|X| × |C|`` arrays; flat index
    ``i * |C| + k`` is the outcome ``(x_i, C_k)``.
    """

    x_labels: tuple
    classes: tuple
    p_hat: np.ndarray
    features: np.ndarray
    entropy: str = "HBel"
    feature_names: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.p_hat, dtype=float)
        phi = np.asarray(self.features, dtype=float)
        nx, nc = len(self.x_labels), len(self.classes)
        if phi.ndim == 2:
            phi = phi[None]
        if phi.size == 0:
            phi = np.zeros((0, nx, nc))
        if p.shape != (nx, nc) or phi.shape[1:] != (nx, nc):
            raise PreconditionError("histogram and features must be |X| x |C| tables")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise PreconditionError("histogram must be a probability table")
        if not np.all(np.isfinite(phi)):
            raise PreconditionError("feature values must be finite")
        if self.entropy not in ENTROPY_KINDS:
            raise ValueError(f"unknown entropy kind {self.entropy!r}; choose from {ENTROPY_KINDS}")
        object.__setattr__(self, "p_hat", p / p.sum())
        object.__setattr__(self, "features", phi)
        object.__setattr__(self, "x_labels", tuple(self.x_labels))
        object.__setattr__(self, "classes", tuple(self.classes))
        names = tuple(self.feature_names) or tuple(f"f{i}" for i in range(phi.shape[0]))
        object.__setattr__(self, "feature_names", names)

    @property
    def frame(self) -> ProductFrame:
        return ProductFrame([Frame(self.x_labels), Frame(self.classes)])

    @property
    def n_outcomes(self) -> int:
        return len(self.x_labels) * len(self.classes)

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @classmethod
    def from_samples(
        cls,
        samples: Sequence[tuple],
        features: Mapping[str, Mapping],
        entropy: str = "HBel",
        x_labels: Sequence | None = None,
        classes: Sequence | None = None,
    ) -> "MaxentProblem":
        """Histogram from ``(x, class)`` pairs; features as nested ``{x: {class: value}}`` tables."""
        xs = tuple(x_labels) if x_labels is not None else tuple(sorted({s[0] for s in samples}))
        cs = tuple(classes) if classes is not None else tuple(sorted({s[1] for s in samples}))
        xi = {x: i for i, x in enumerate(xs)}
        ci = {c: i for i, c in enumerate(cs)}
        p = np.zeros((len(xs), len(cs)))
        for x, c in samples:
            p[xi[x], ci[c]] += 1
        if p.sum() == 0:
            raise PreconditionError("no training samples")
        phi = np.zeros((len(features), len(xs), len(cs)))
        for m, table in enumerate(features.values()):
            for x, row in table.items():
                for c, v in row.items():
                    phi[m, xi[x], ci[c]] = float(v)
        return cls(xs, cs, p / p.sum(), phi, entropy, tuple(features))

    @classmethod
    def from_feature_set(cls, samples: Sequence[tuple], fs: FeatureSet, entropy: str = "HBel") -> "MaxentProblem":
        """Histogram of ``(x, class)`` samples over the label sets of ``fs``."""
        xi = {x: i for i, x in enumerate(fs.x_labels)}
        ci = {c: i for i, c in enumerate(fs.classes)}
        p = np.zeros((len(xi), len(ci)))
        for x, c in samples:
            if x not in xi or c not in ci:
                raise PreconditionError(f"sample {(x, c)!r} is outside the feature tables")
            p[xi[x], ci[c]] += 1
        if p.sum() == 0:
            raise PreconditionError("no training samples")
        return cls(fs.x_labels, fs.classes, p / p.sum(), fs.values, entropy, fs.names)


def empirical_expectation(problem: MaxentProblem, m_index: int) -> float:
    return float(np.sum(problem.p_hat * problem.features[m_index]))


def _constraint_matrix(problem: MaxentProblem) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``g(x) = G x - h`` over nonempty-subset masses: all ``g¹`` then all ``g²``."""
    n = problem.n_outcomes
    cols = np.arange(1, 1 << n)
    member = ((cols[None, :] >> np.arange(n)[:, None]) & 1).astype(float)  # n x K
    single = (cols[None, :] == (1 << np.arange(n))[:, None]).astype(float)
    rows, h = [], []
    phis = problem.features.reshape(problem.n_features, n)
    E = phis @ problem.p_hat.ravel()
    for phi, e in zip(phis, E):
        rows.append(phi @ single)
        h.append(e)
    for phi, e in zip(phis, E):
        rows.append(-(phi @ member))
        h.append(-e)
    if not rows:
        return np.zeros((0, cols.size)), np.zeros(0)
    return np.array(rows), np.array(h)


def constraint_values(problem: MaxentProblem, m: MassFunction) -> np.ndarray:
    """``(g¹_m, g²_m)`` per feature, shape ``(M, 2)``; feasible iff all ``≤ 0``."""
    if m.frame.size != problem.n_outcomes:
        raise PreconditionError("mass function lives on a different frame")
    x = m.to_dense()[1:]
    G, h = _constraint_matrix(problem)
    g = G @ x - h
    M = problem.n_features
    return np.column_stack([g[:M], g[M:]]) if M else np.zeros((0, 2))


def histogram_bpa(problem: MaxentProblem) -> MassFunction:
    """The training histogram as a Bayesian BPA on ``Θ``."""
    return MassFunction.bayesian(problem.frame, problem.p_hat.ravel())


def pignistic(m: MassFunction) -> np.ndarray:
    """Pignistic probability: each focal mass shared equally among its outcomes."""
    p = np.zeros(m.frame.size)
    for k, v in m.items():
        idx = [i for i in range(m.frame.size) if k >> i & 1]
        p[idx] += v / len(idx)
    return p


# solver ------------------------------------------------------------------------------


@dataclass
class MaxentConfig:
    tol: float = 1e-11
    mu: float = 10.0
    t0: float = 1.0
    max_newton: int = 200
    max_outer: int = 60
    active_tol: float = 1e-6


@dataclass
class MaxentKKT:
    stationarity: float
    primal: float
    dual: float
    slackness: float

    @property
    def residual(self) -> float:
        return max(self.stationarity, self.primal, self.dual, self.slackness)


@dataclass
class MaxentResult:
    mass: MassFunction
    entropy: float
    kkt: MaxentKKT
    mu1: np.ndarray
    mu2: np.ndarray
    iterations: int
    converged: bool
    x: np.ndarray = field(repr=False, default=None)


def _relative_interior(G: np.ndarray, h: np.ndarray, k: int):
    """Point with maximal strict slack, and which inequalities can be strict.

    Solves ``max Σ t`` over ``y ≥ t_var``, ``λh - Gy ≥ t_con``, ``1'y = λ``,
    ``λ ≥ 1``, ``0 ≤ t ≤ 1``; an inequality admits strict slack iff its
    ``t`` reaches 1 at the optimum. Returns ``(x, strict_var, strict_con)``.
    """
    r = G.shape[0]
    nt = k + r
    # variables: y (k), lam (1), t (nt)
    nv = k + 1 + nt
    c = np.zeros(nv)
    c[k + 1 :] = -1.0
    A_ub = np.zeros((nt, nv))
    A_ub[:k, :k] = -np.eye(k)
    A_ub[:k, k + 1 : k + 1 + k] = np.eye(k)
    if r:
        A_ub[k:, :k] = G
        A_ub[k:, k] = -h
        A_ub[k:, k + 1 + k :] = np.eye(r)
    b_ub = np.zeros(nt)
    A_eq = np.zeros((1, nv))
    A_eq[0, :k] = 1.0
    A_eq[0, k] = -1.0
    bounds = [(0, None)] * k + [(1, None)] + [(0, 1)] * nt
    res = scipy.optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[0.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise InfeasibleStart(f"no feasible mass vector: {res.message}")
    y, lam, t = res.x[:k], res.x[k], res.x[k + 1 :]
    return y / lam, t[:k] > 0.5, t[k:] > 0.5


def fit_maxent(problem: MaxentProblem, config: MaxentConfig | None = None) -> MaxentResult:
    """Maximize the chosen entropy over BPAs satisfying the expectation brackets.

    Log-barrier method on the relative interior of the feasible polytope:
    variables and inequalities that can never be strict are fixed (at zero
    and as equalities respectively), the rest carry barrier terms, and
    centering uses Newton steps in the null space of the equalities.
    Optimality is certified by KKT residuals with multipliers recovered by
    nonnegative least squares on the active set.

    Raises
    ------
    NonConvergence
        For ``Ht`` (unbounded above) or when the barrier iterations stall.
    IntractableError
        For more than 10 joint outcomes.
    """
    cfg = config or MaxentConfig()
    n = problem.n_outcomes
    if n > MAX_FIT_OUTCOMES:
        raise IntractableError(f"dense fit limited to {MAX_FIT_OUTCOMES} joint outcomes, got {n}")
    if problem.entropy == "Ht" and n > 1:
        raise NonConvergence("Ht is unbounded on the feasible set: the histogram BPA has Q(Θ) = 0")
    K = (1 << n) - 1
    obj = _Objective(n, problem.entropy)
    G, h = _constraint_matrix(problem)
    x0, free_var, strict_con = _relative_interior(G, h, K)
    F = np.nonzero(free_var)[0]
    S = np.nonzero(strict_con)[0]
    Qc = np.nonzero(~strict_con)[0]
    x = np.zeros(K)
    x[F] = x0[F]
    E = np.vstack([np.ones((1, F.size)), G[np.ix_(Qc, F)]]) if Qc.size else np.ones((1, F.size))
    Z = scipy.linalg.null_space(E)
    GS = G[np.ix_(S, F)]
    hS = h[S]

    def barrier(xf: np.ndarray, t: float) -> float:
        full = x.copy()
        full[F] = xf
        s = hS - GS @ xf
        if np.any(xf <= 0) or np.any(s <= 0):
            return np.inf
        return -t * obj.value(full) - np.sum(np.log(xf)) - np.sum(np.log(s))

    xf = x[F].copy()
    t = cfg.t0
    iterations = 0
    m_ineq = F.size + S.size
    converged = False
    for _ in range(cfg.max_outer):
        if Z.shape[1] == 0:
            converged = True
            break
        for _ in range(cfg.max_newton):
            iterations += 1
            full = x.copy()
            full[F] = xf
            s = hS - GS @ xf
            g = -t * obj.grad(full)[F] - 1.0 / xf + GS.T @ (1.0 / s)
            H = t * obj.neg_hess(full, F) + np.diag(1.0 / xf**2) + (GS.T * (1.0 / s**2)) @ GS
            Hz = Z.T @ H @ Z
            gz = Z.T @ g
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                    dz = -scipy.linalg.solve(Hz, gz, assume_a="pos")
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
                dz = -np.linalg.lstsq(Hz, gz, rcond=None)[0]
            dx = Z @ dz
            dec = float(-g @ dx)
            if dec / 2 <= 1e-12:
                break
            # largest step keeping strict feasibility
            alpha = 1.0
            neg = dx < 0
            if neg.any():
                alpha = min(alpha, 0.99 * float(np.min(-xf[neg] / dx[neg])))
            ds = -GS @ dx
            negs = ds < 0
            if negs.any():
                alpha = min(alpha, 0.99 * float(np.min(-s[negs] / ds[negs])))
            f0 = barrier(xf, t)
            while alpha > 1e-16 and barrier(xf + alpha * dx, t) > f0 - 0.25 * alpha * dec:
                alpha *= 0.5
            if alpha <= 1e-16:
                break
            xf = xf + alpha * dx
        if m_ineq / t < cfg.tol:
            converged = True
            break
        t *= cfg.mu
    x[F] = xf
    if not converged:
        raise NonConvergence("barrier iterations did not reach the duality-gap tolerance")
    kkt, mu = _kkt(obj, G, h, x, cfg.active_tol)
    M = problem.n_features
    masses = {int(k + 1): float(v) for k, v in enumerate(x) if v > FLOOR}
    total = sum(masses.values())
    mass = MassFunction(problem.frame, {k: v / total for k, v in masses.items()})
    return MaxentResult(
        mass=mass,
        entropy=obj.value(x),
        kkt=kkt,
        mu1=mu[:M],
        mu2=mu[M:],
        iterations=iterations,
        converged=True,
        x=x,
    )


def _kkt(obj: _Objective, G: np.ndarray, h: np.ndarray, x: np.ndarray, act: float):
    """KKT residuals for ``max H`` s.t. ``Gx ≤ h``, ``x ≥ 0``, ``1'x = 1``.

    Stationarity: ``∇H = G'μ - λ + ν 1`` with ``μ, λ ≥ 0`` supported on the
    active constraints, fitted by nonnegative least squares.
    """
    grad = obj.grad(x)
    g = G @ x - h
    act_g = np.nonzero(g >= -act)[0]
    act_x = np.nonzero(x <= act)[0]
    K = x.size
    cols = [G[act_g].T, -np.eye(K)[:, act_x], np.ones((K, 1)), -np.ones((K, 1))]
    A = np.hstack(cols)
    z, _ = scipy.optimize.nnls(A, grad, maxiter=50 * A.shape[1])
    resid = A @ z - grad
    mu = np.zeros(G.shape[0])
    mu[act_g] = z[: act_g.size]
    lam = np.zeros(K)
    lam[act_x] = z[act_g.size : act_g.size + act_x.size]
    primal = max(float(np.max(g, initial=0.0)), float(np.max(-x, initial=0.0)), abs(float(x.sum()) - 1.0))
    slack = max(float(np.max(np.abs(mu * g), initial=0.0)), float(np.max(np.abs(lam * x), initial=0.0)))
    return MaxentKKT(float(np.max(np.abs(resid))), primal, 0.0, slack), mu


# classical baseline -------------------------------------------------------------------


@dataclass
class ClassicalMaxent:
    """Log-linear conditional model ``p(C|x) ∝ exp(λ·φ(x, C))``."""

    lambdas: np.ndarray
    table: np.ndarray
    residual: float
    iterations: int

    def joint(self, p_x: np.ndarray) -> np.ndarray:
        return p_x[:, None] * self.table


def _loglinear_table(problem: MaxentProblem, lam: np.ndarray) -> np.ndarray:
    s = np.tensordot(lam, problem.features, axes=1) if lam.size else np.zeros(problem.p_hat.shape)
    s = s - s.max(axis=1, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=1, keepdims=True)


def classical_maxent(problem: MaxentProblem, tol: float = 1e-10, max_iter: int = 200) -> ClassicalMaxent:
    """Moment-matching log-linear classifier by Newton's method on the dual.

    Raises
    ------
    NonConvergence
        When the moments cannot be matched to ``1e-8`` (e.g. when a matching
        model would need infinite weights).
    """
    phi = problem.features
    M = phi.shape[0]
    p_x = problem.p_hat.sum(axis=1)
    target = np.array([empirical_expectation(problem, j) for j in range(M)])
    lam = np.zeros(M)

    def dual(l):
        s = np.tensordot(l, phi, axes=1) if M else np.zeros(problem.p_hat.shape)
        mx = s.max(axis=1)
        lse = mx + np.log(np.exp(s - mx[:, None]).sum(axis=1))
        return float(p_x @ lse - l @ target)

    def grad_hess(l):
        tab = _loglinear_table(problem, l)
        w = p_x[:, None] * tab
        mean_x = np.einsum("mxc,xc->xm", phi, tab)
        g = np.einsum("mxc,xc->m", phi, w) - target
        H = np.einsum("mxc,nxc,xc->mn", phi, phi, w) - np.einsum("x,xm,xn->mn", p_x, mean_x, mean_x)
        return g, H

    it = 0
    if M:
        for it in range(1, max_iter + 1):
            g, H = grad_hess(lam)
            if np.max(np.abs(g)) <= tol:
                break
            step = -np.linalg.lstsq(H + 1e-14 * np.eye(M), g, rcond=None)[0]
            f0 = dual(lam)
            a = 1.0
            while a > 1e-12 and dual(lam + a * step) > f0 + 1e-4 * a * (g @ step):
                a *= 0.5
            lam = lam + a * step
    g, _ = grad_hess(lam) if M else (np.zeros(0), None)
    resid = float(np.max(np.abs(g), initial=0.0))
    if resid > 1e-8:
        raise NonConvergence(f"moment residual {resid:.3e} after {it} iterations")
    return ClassicalMaxent(lam, _loglinear_table(problem, lam), resid, it)
