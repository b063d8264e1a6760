"""PAC bounds for finite realizable classes, and a credal-training simulator.

Hypotheses are label tables ``H[h, x]`` over a finite input set; data
distributions are joint tables ``p[x, y]``. With the zero-one loss the
expected risk ``L_p(h) = Σ_{x,y} p(x,y) [h(x) ≠ y]`` is computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotRealizable, PreconditionError


def risk_bound(h_count: int, n: int, delta: float) -> float:
    """``ε = (ln|H| + ln(1/δ)) / n``."""
    if h_count < 1 or n < 1 or not 0 < delta < 1:
        raise PreconditionError("need |H| >= 1, n >= 1 and 0 < delta < 1")
    return (math.log(h_count) + math.log(1.0 / delta)) / n


def sample_complexity(h_count: int, epsilon: float, delta: float) -> int:
    """Smallest integer ``n ≥ (ln|H| + ln(1/δ)) / ε``."""
    if h_count < 1 or epsilon <= 0 or not 0 < delta < 1:
        raise PreconditionError("need |H| >= 1, epsilon > 0 and 0 < delta < 1")
    return max(1, math.ceil((math.log(h_count) + math.log(1.0 / delta)) / epsilon))


def threshold_class(n_points: int = 8) -> np.ndarray:
    """Two-sided thresholds ``[x ≥ t]`` and ``[x < t]``, ``t = 0..n-1``: ``2n`` hypotheses."""
    x = np.arange(n_points)
    t = np.arange(n_points)[:, None]
    return np.vstack([(x >= t), (x < t)]).astype(int)


def loss_matrix(H: np.ndarray, n_labels: int) -> np.ndarray:
    """``W[h, x * n_labels + y] = [h(x) ≠ y]``."""
    H = np.asarray(H)
    y = np.arange(n_labels)
    return (H[:, :, None] != y[None, None, :]).reshape(H.shape[0], -1).astype(float)


def risks(H: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Exact expected zero-one risk of every hypothesis under ``p[x, y]``."""
    p = np.asarray(p, dtype=float)
    return loss_matrix(H, p.shape[1]) @ p.ravel()


def realizing_hypotheses(H: np.ndarray, p: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    return np.nonzero(risks(H, p) <= tol)[0]


def _check_dist(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise PreconditionError("distribution must be a nonnegative |X| x |Y| table summing to 1")
    return p / p.sum()


def _erm(counts: np.ndarray, W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """ERM index per trial (ties to the lowest index) and its empirical error count."""
    emp = counts @ W.T
    idx = np.argmin(emp, axis=1)
    return idx, emp[np.arange(idx.size), idx]


@dataclass(frozen=True)
class ViolationReport:
    n: int
    epsilon: float
    delta: float
    trials: int
    violations: int
    max_erm_empirical_risk: float

    @property
    def frequency(self) -> float:
        return self.violations / self.trials

    @property
    def slack(self) -> float:
        """Three binomial standard deviations at rate ``δ``."""
        return 3.0 * math.sqrt(self.delta * (1 - self.delta) / self.trials)

    @property
    def passed(self) -> bool:
        return self.frequency <= self.delta + self.slack


def simulate_realizable(
    H: np.ndarray,
    p_star: np.ndarray,
    n: int,
    epsilon: float,
    delta: float,
    trials: int,
    rng: np.random.Generator,
) -> ViolationReport:
    """Frequency of ``L(ĥ) > ε`` for the ERM trained on ``n`` i.i.d. pairs.

    Raises
    ------
    NotRealizable
        If no hypothesis has zero risk under ``p_star``.
    """
    p = _check_dist(p_star)
    if realizing_hypotheses(H, p).size == 0:
        raise NotRealizable("no hypothesis has zero expected risk")
    W = loss_matrix(H, p.shape[1])
    L = W @ p.ravel()
    counts = rng.multinomial(n, p.ravel(), size=trials)
    idx, emp = _erm(counts, W)
    viol = int(np.sum(L[idx] > epsilon))
    return ViolationReport(n, epsilon, delta, trials, viol, float(emp.max() / n))


@dataclass(frozen=True)
class CredalReport:
    n_values: tuple
    tails: tuple
    epsilon: float
    trials: int
    realizable: bool
    uniformly_realizable: bool
    min_worst_case_risk: float

    @property
    def gap(self) -> bool:
        """True when no hypothesis is ε-good for every vertex, so the tail cannot vanish."""
        return self.min_worst_case_risk > self.epsilon


def credal_realizable(H: np.ndarray, vertices) -> bool:
    """Some hypothesis has zero risk under some vertex distribution."""
    return any(realizing_hypotheses(H, _check_dist(v)).size for v in vertices)


def uniformly_credal_realizable(H: np.ndarray, vertices) -> bool:
    """Every distribution in the polytope admits a zero-risk hypothesis.

    Risk is linear in the distribution, so an interior point with all
    vertex weights positive is realized by ``h`` only if ``h`` has zero risk
    at every vertex; the condition is therefore one common ``h``.
    """
    R = np.array([risks(H, _check_dist(v)) for v in vertices])
    return bool(np.any(np.all(R <= 1e-12, axis=0)))


def worst_case_risks(H: np.ndarray, vertices) -> np.ndarray:
    """``max_v L_v(h)`` for every hypothesis."""
    return np.max([risks(H, _check_dist(v)) for v in vertices], axis=0)


def simulate_credal(
    H: np.ndarray,
    vertices,
    n_values,
    epsilon: float,
    trials: int,
    rng: np.random.Generator,
) -> CredalReport:
    """Tail ``P[max_v L_v(ĥ) > ε]`` when training data come from a random credal member.

    Each trial mixes the vertices with Dirichlet(1, ..., 1) weights, draws
    ``n`` pairs from the mixture and trains the ERM. No bound is asserted.

    Raises
    ------
    NotRealizable
        If no vertex admits a zero-risk hypothesis.
    """
    V = [_check_dist(v) for v in vertices]
    if not credal_realizable(H, V):
        raise NotRealizable("no vertex of the credal set is realizable")
    W = loss_matrix(H, V[0].shape[1])
    worst = worst_case_risks(H, V)
    flat = np.array([v.ravel() for v in V])
    tails = []
    for n in n_values:
        w = rng.dirichlet(np.ones(len(V)), size=trials)
        mix = w @ flat
        mix /= mix.sum(axis=1, keepdims=True)
        counts = np.array([rng.multinomial(n, q) for q in mix])
        idx, _ = _erm(counts, W)
        tails.append(float(np.mean(worst[idx] > epsilon)))
    return CredalReport(
        tuple(n_values),
        tuple(tails),
        epsilon,
        trials,
        True,
        uniformly_credal_realizable(H, V),
        float(worst.min()),
    )


def labelled_distribution(h: np.ndarray, p_x) -> np.ndarray:
    """Joint table putting ``p_x(x)`` on the pair ``(x, h(x))`` for binary labels."""
    p_x = np.asarray(p_x, dtype=float)
    p = np.zeros((p_x.size, 2))
    p[np.arange(p_x.size), np.asarray(h)] = p_x
    return p
