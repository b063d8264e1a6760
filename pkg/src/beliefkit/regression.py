"""Generalized logistic regression with lower and upper belief likelihoods.

Each observation ``(x_i, Y_i)`` gets a binary belief function with
``p_i = m({T})`` and ``q_i = m({F})``:

    p_i = 1 / (1 + exp(-z_i)),   q_i = beta2 * exp(-z_i) / (1 + exp(-z_i)),
    z_i = beta0 + beta1 * x_i.

``beta2 = 1`` recovers the classical logit model (``q = 1 - p``). Missing
outcomes are vacuous observations and contribute nothing to either
objective.

The fit maximizes the chosen log-likelihood over
``beta2_floor <= beta2 <= 1`` with a projected, damped Newton method on an
active set; every accepted step increases the objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import NonConvergence, PreconditionError

Z_CLAMP = 500.0
TARGETS = ("lower", "upper")


@dataclass(frozen=True)
class BetaParams:
    beta0: float
    beta1: float
    beta2: float

    def __post_init__(self):
        if not 0.0 < self.beta2 <= 1.0 + 1e-12:
            raise PreconditionError(f"beta2 must lie in (0, 1], got {self.beta2!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.beta0, self.beta1, self.beta2])

    @classmethod
    def from_array(cls, a) -> "BetaParams":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class RegressionData:
    """Scalar covariates with outcomes in {0, 1}; NaN marks a missing outcome."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise PreconditionError("x and y must have the same length")
        if x.size == 0:
            raise PreconditionError("data must be nonempty")
        if not np.all(np.isfinite(x)):
            raise PreconditionError("covariates must be finite")
        obs = ~np.isnan(y)
        if not np.all(np.isin(y[obs], (0.0, 1.0))):
            raise PreconditionError("outcomes must be 0, 1 or missing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def observed(self) -> np.ndarray:
        return ~np.isnan(self.y)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple]) -> "RegressionData":
        """Build from ``(x, y)`` pairs where ``y`` is 0, 1 or ``None``."""
        x = [float(a) for a, _ in pairs]
        y = [np.nan if b is None else float(b) for _, b in pairs]
        return cls(np.array(x), np.array(y))


def _z(beta0: float, beta1: float, x: np.ndarray) -> np.ndarray:
    return np.clip(beta0 + beta1 * x, -Z_CLAMP, Z_CLAMP)


def logit_links(params: BetaParams, x) -> tuple[np.ndarray, np.ndarray]:
    """Masses ``(p, q)`` of the generalized logit model at ``x``."""
    z = _z(params.beta0, params.beta1, np.asarray(x, dtype=float))
    p = expit(z)
    q = params.beta2 * expit(-z)
    return p, q


def _split(data: RegressionData):
    obs = data.observed
    return data.x[obs], data.y[obs]


def lower_log_likelihood(params: BetaParams, data: RegressionData) -> float:
    """``sum_i [-log(1 + e^{-z_i}) + (1 - Y_i)(log beta2 - z_i)]`` over observed points."""
    x, y = _split(data)
    z = _z(params.beta0, params.beta1, x)
    return float(np.sum(-np.logaddexp(0.0, -z) + (1.0 - y) * (np.log(params.beta2) - z)))


def upper_log_likelihood(params: BetaParams, data: RegressionData) -> float:
    """``sum_i [Y_i log(1 - q_i) + (1 - Y_i) log(1 - p_i)]`` over observed points."""
    x, y = _split(data)
    z = _z(params.beta0, params.beta1, x)
    p = expit(z)
    s = expit(-z)
    # 1 - beta2*s written as p + (1 - beta2)*s keeps precision when beta2 = 1
    u = p + (1.0 - params.beta2) * s
    with np.errstate(divide="ignore"):
        t1 = np.where(y == 1.0, np.log(u), 0.0)
    t0 = np.where(y == 0.0, -np.logaddexp(0.0, z), 0.0)
    return float(np.sum(t1 + t0))


def objective(params: BetaParams, data: RegressionData, target: str) -> float:
    if target == "lower":
        return lower_log_likelihood(params, data)
    if target == "upper":
        return upper_log_likelihood(params, data)
    raise ValueError(f"target must be one of {TARGETS}")


def gradient_hessian(params: BetaParams, data: RegressionData, target: str) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient and Hessian of an objective in ``(beta0, beta1, beta2)``."""
    x, y = _split(data)
    b2 = params.beta2
    z = _z(params.beta0, params.beta1, x)
    p = expit(z)
    s = expit(-z)
    if target == "lower":
        gz = y - p
        hz = -p * s
        g2 = np.sum(1.0 - y) / b2
        h22 = -np.sum(1.0 - y) / b2**2
        hz2 = np.zeros_like(z)
    elif target == "upper":
        u = p + (1.0 - b2) * s
        one = y == 1.0
        zero = y == 0.0
        gz = np.where(one, b2 * s * p / u, 0.0) - np.where(zero, p, 0.0)
        hz = np.where(one, b2 * s * p * ((s - p) * u - b2 * s * p) / u**2, 0.0) - np.where(zero, p * s, 0.0)
        g2 = -np.sum(np.where(one, s / u, 0.0))
        h22 = -np.sum(np.where(one, (s / u) ** 2, 0.0))
        hz2 = np.where(one, s * p / u**2, 0.0)
    else:
        raise ValueError(f"target must be one of {TARGETS}")
    g = np.array([gz.sum(), (gz * x).sum(), g2])
    h = np.empty((3, 3))
    h[0, 0] = hz.sum()
    h[0, 1] = h[1, 0] = (hz * x).sum()
    h[1, 1] = (hz * x * x).sum()
    h[0, 2] = h[2, 0] = hz2.sum()
    h[1, 2] = h[2, 1] = (hz2 * x).sum()
    h[2, 2] = h22
    return g, h


def gradient(params: BetaParams, data: RegressionData, target: str) -> np.ndarray:
    return gradient_hessian(params, data, target)[0]


# KKT --------------------------------------------------------------------------


@dataclass(frozen=True)
class Multipliers:
    """KKT multipliers.

    ``mu0`` belongs to ``beta2 - 1 <= 0``, ``mu_floor`` to
    ``beta2_floor - beta2 <= 0`` and ``mu_points[i]`` to
    ``-beta2 - exp(z_i) <= 0``.
    """

    mu0: float
    mu_floor: float
    mu_points: np.ndarray


@dataclass(frozen=True)
class KKTReport:
    stationarity: np.ndarray
    primal: float
    dual: float
    slackness: float

    @property
    def residual(self) -> float:
        return float(max(np.max(np.abs(self.stationarity)), self.primal, self.dual, self.slackness))


def kkt_residuals(
    params: BetaParams,
    multipliers: Multipliers,
    data: RegressionData,
    target: str = "lower",
    beta2_floor: float = 0.0,
) -> KKTReport:
    """Evaluate the KKT system of the maximization problem.

    Stationarity is ``grad f = sum_j mu_j grad g_j`` for constraints
    ``g_j <= 0`` with ``mu_j >= 0``. The residual is the largest absolute
    violation among stationarity, primal feasibility, dual feasibility and
    complementary slackness.
    """
    x, _ = _split(data)
    g = gradient(params, data, target)
    z = _z(params.beta0, params.beta1, x)
    ez = np.exp(z)
    mu_i = np.asarray(multipliers.mu_points, dtype=float)
    if mu_i.shape != x.shape:
        raise ValueError("one point multiplier per observed sample is required")
    # grad g0 = (0,0,1); grad g_floor = (0,0,-1); grad g_i = (-e^z, -x e^z, -1)
    cons = np.array(
        [
            -(mu_i * ez).sum(),
            -(mu_i * x * ez).sum(),
            multipliers.mu0 - multipliers.mu_floor - mu_i.sum(),
        ]
    )
    stationarity = g - cons
    g0 = params.beta2 - 1.0
    gf = beta2_floor - params.beta2 if beta2_floor > 0 else -params.beta2
    gi = -params.beta2 - ez
    primal = max(0.0, g0, gf, float(gi.max(initial=-np.inf)))
    dual = max(0.0, -multipliers.mu0, -multipliers.mu_floor, float((-mu_i).max(initial=0.0)))
    slack = max(
        abs(multipliers.mu0 * g0),
        abs(multipliers.mu_floor * gf) if beta2_floor > 0 else abs(multipliers.mu_floor),
        float(np.abs(mu_i * gi).max(initial=0.0)),
    )
    return KKTReport(stationarity, primal, dual, slack)


# fitting ---------------------------------------------------------------------


@dataclass(frozen=True)
class FitConfig:
    """Solver settings.

    ``beta2_floor`` is the smallest admissible ``beta2``; ``fix_beta2``
    pins it (the classical model is ``fix_beta2=1``).
    """

    tol: float = 1e-9
    max_iter: int = 500
    beta2_floor: float = 1e-6
    beta2_init: float = 1.0 - 1e-3
    fix_beta2: float | None = None
    strict: bool = False


@dataclass(frozen=True)
class FitResult:
    params: BetaParams
    objective: float
    multipliers: Multipliers
    kkt_residual: float
    iterations: int
    converged: bool
    target: str
    history: tuple = ()
    diagnostics: dict = field(default_factory=dict)


def _classical_start(data: RegressionData, identified_slope: bool) -> tuple[float, float]:
    """Classical logistic coefficients by a few damped Newton steps."""
    x, y = _split(data)
    ybar = float(np.clip(y.mean(), 1e-3, 1 - 1e-3))
    b = np.array([np.log(ybar / (1 - ybar)), 0.0])
    for _ in range(50):
        z = np.clip(b[0] + b[1] * x, -30, 30)
        p = expit(z)
        g = np.array([(y - p).sum(), ((y - p) * x).sum()])
        w = p * (1 - p) + 1e-9
        h = np.array([[w.sum(), (w * x).sum()], [(w * x).sum(), (w * x * x).sum()]])
        if not identified_slope:
            h = np.diag([h[0, 0], 1.0])
            g[1] = 0.0
        step = np.linalg.solve(h + 1e-9 * np.eye(2), g)
        b = b + np.clip(step, -5, 5)
        if np.max(np.abs(step)) < 1e-10:
            break
    return float(b[0]), float(b[1])


def _ascent_direction(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Newton direction for maximization, damped until ``-H`` is positive definite."""
    neg = -h
    lam = 0.0
    scale = max(1.0, float(np.max(np.abs(neg)))) if neg.size else 1.0
    for _ in range(60):
        try:
            c = np.linalg.cholesky(neg + lam * np.eye(len(g)))
            return np.linalg.solve(c.T, np.linalg.solve(c, g))
        except np.linalg.LinAlgError:
            lam = max(2.0 * lam, 1e-10 * scale)
    return g


def fit(data: RegressionData, target: str = "lower", config: FitConfig | None = None) -> FitResult:
    """Maximize the lower or upper log-likelihood.

    Constraints: ``beta2 <= 1``, ``beta2 >= beta2_floor`` and
    ``-beta2 - exp(z_i) <= 0`` for every observed point (never active for
    positive ``beta2``, so those multipliers are zero).

    Notes
    -----
    With fewer than two distinct observed covariates the slope is not
    identified; it is held at 0 and reported in ``diagnostics``. When no
    zero outcome is observed the lower objective does not depend on
    ``beta2``; the smallest admissible value is returned and flagged. The
    upper objective decreases in ``beta2`` and its supremum is approached
    as the model becomes vacuous (``beta2`` at the floor, ``p_i -> 0``);
    the solver stops once the KKT residual is below tolerance.

    Raises
    ------
    PreconditionError
        No observed outcomes.
    NonConvergence
        Only with ``config.strict``; otherwise the best iterate is returned
        with ``converged=False``.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    cfg = config or FitConfig()
    x, y = _split(data)
    if x.size == 0:
        raise PreconditionError("no observed outcomes to fit")
    slope_ok = np.unique(x).size >= 2
    floor = cfg.beta2_floor
    diagnostics: dict = {"slope_identified": bool(slope_ok)}

    b0, b1 = _classical_start(data, slope_ok)
    b2 = cfg.beta2_init if cfg.fix_beta2 is None else cfg.fix_beta2
    free = np.array([True, slope_ok, cfg.fix_beta2 is None])
    if target == "lower" and cfg.fix_beta2 is None and not np.any(y == 0.0):
        # objective flat in beta2: take the smallest admissible value
        b2 = floor
        free[2] = False
        diagnostics["beta2_identified"] = False
    else:
        diagnostics["beta2_identified"] = bool(free[2] or cfg.fix_beta2 is not None)

    theta = np.array([b0, b1 if slope_ok else 0.0, b2])
    lo = np.array([-np.inf, -np.inf, floor])
    hi = np.array([np.inf, np.inf, 1.0])

    def f_of(t):
        return objective(BetaParams.from_array(t), data, target)

    fval = f_of(theta)
    history = [fval]
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        params = BetaParams.from_array(theta)
        g, h = gradient_hessian(params, data, target)
        active = ~free.copy()
        if free[2]:
            if theta[2] >= 1.0 and g[2] > 0:
                active[2] = True
            elif theta[2] <= floor and g[2] < 0:
                active[2] = True
        work = ~active
        res = _projected_residual(theta, g, free, lo, hi)
        if res <= cfg.tol:
            converged = True
            break
        d = np.zeros(3)
        if work.any():
            d[work] = _ascent_direction(g[work], h[np.ix_(work, work)])
        alpha = 1.0
        accepted = False
        for _ in range(60):
            cand = np.clip(theta + alpha * d, lo, hi)
            fc = f_of(cand)
            if np.isfinite(fc) and fc >= fval + 1e-4 * float(g @ (cand - theta)):
                accepted = True
                break
            alpha *= 0.5
        if not accepted or np.array_equal(cand, theta):
            break
        theta, fval = cand, fc
        history.append(fval)

    params = BetaParams.from_array(theta)
    mult = _estimate_multipliers(params, data, target, floor, cfg.fix_beta2 is None, free[2])
    report = kkt_residuals(params, mult, data, target, floor)
    if not free[1] or not free[2]:
        # stationarity is only required in the coordinates being optimized
        stat = report.stationarity.copy()
        stat[~free] = 0.0
        report = KKTReport(stat, report.primal, report.dual, report.slackness)
    residual = report.residual
    converged = converged or residual <= cfg.tol
    z = _z(params.beta0, params.beta1, x)
    diagnostics["max_abs_z"] = float(np.max(np.abs(z)))
    diagnostics["beta2_at_floor"] = bool(params.beta2 <= floor)
    diagnostics["beta2_at_one"] = bool(params.beta2 >= 1.0)
    result = FitResult(
        params=params,
        objective=fval,
        multipliers=mult,
        kkt_residual=residual,
        iterations=it,
        converged=converged,
        target=target,
        history=tuple(history),
        diagnostics=diagnostics,
    )
    if not converged and cfg.strict:
        raise NonConvergence(f"{target} fit stopped with KKT residual {residual:.3g}", result)
    return result


def _projected_residual(theta, g, free, lo, hi) -> float:
    r = np.where(free, g, 0.0)
    at_hi = theta >= hi
    at_lo = theta <= lo
    r = np.where(at_hi & (r > 0), 0.0, r)
    r = np.where(at_lo & (r < 0), 0.0, r)
    return float(np.max(np.abs(r)))


def _estimate_multipliers(params, data, target, floor, beta2_free, beta2_optimized) -> Multipliers:
    x, _ = _split(data)
    g = gradient(params, data, target)
    mu0 = 0.0
    mu_floor = 0.0
    if beta2_free and beta2_optimized:
        if params.beta2 >= 1.0:
            mu0 = max(0.0, float(g[2]))
        elif params.beta2 <= floor:
            mu_floor = max(0.0, -float(g[2]))
    return Multipliers(mu0, mu_floor, np.zeros(x.size))


# prediction ------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalPrediction:
    """``[Bel(T), Pl(T)] = [p, 1 - q]`` from each fitted model."""

    x: np.ndarray
    lower_fit: tuple[np.ndarray, np.ndarray]
    upper_fit: tuple[np.ndarray, np.ndarray]

    @property
    def envelope(self) -> tuple[np.ndarray, np.ndarray]:
        """Smallest belief and largest plausibility across both fits."""
        return (
            np.minimum(self.lower_fit[0], self.upper_fit[0]),
            np.maximum(self.lower_fit[1], self.upper_fit[1]),
        )


def predict_interval(lower_fit: FitResult, upper_fit: FitResult, x) -> IntervalPrediction:
    if not (lower_fit.converged and upper_fit.converged):
        raise PreconditionError("both fits must have converged")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = []
    for res in (lower_fit, upper_fit):
        p, q = logit_links(res.params, x)
        out.append((p, 1.0 - q))
    return IntervalPrediction(x, out[0], out[1])
