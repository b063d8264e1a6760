"""Monte Carlo checks of limit theorems for Bernoulli belief measures.

A belief function ``m`` on ``{T, F}`` is a random set: each draw ``K_i`` is
``{T}``, ``{F}`` or ``Θ`` with probabilities ``m(T)``, ``m(F)``, ``m(Θ)``.
Along ``n`` i.i.d. draws, the smallest frequency of ``T`` over all
selections ``t_i ∈ K_i`` counts only the ``{T}`` draws, the largest counts
every draw other than ``{F}``. An event about the frequency holds for the
whole product set iff it holds for every selection, which reduces to a
worst case at one of these two extremes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import FrameError, PreconditionError
from .frames import MassFunction


def sample_focal(m: MassFunction, rng: np.random.Generator, size: int | None = None):
    """Focal element(s) drawn with probability equal to their mass."""
    masks, w = m.arrays()
    w = w / w.sum()
    idx = rng.choice(masks.size, size=size, p=w)
    return int(masks[idx]) if size is None else masks[idx]


def _binary(m: MassFunction, true_label=None) -> tuple[float, float, float]:
    if m.frame.size != 2:
        raise FrameError("limit checks need a binary frame")
    if m.conflict:
        raise PreconditionError("mass function must be normalized")
    t = m.frame.singleton(true_label) if true_label is not None else 1
    f = m.frame.full & ~t
    return m[t], m[f], m[m.frame.full]


def frequency_extremes(m: MassFunction, n: int, trials: int, rng: np.random.Generator, true_label=None):
    """Minimum and maximum selection frequency of ``T`` per trial."""
    mt, mf, mo = _binary(m, true_label)
    counts = rng.multinomial(n, [mt, mf, mo], size=trials)
    return counts[:, 0] / n, (n - counts[:, 1]) / n


@dataclass(frozen=True)
class LLNReport:
    n: int
    trials: int
    eps: float
    band: tuple
    coverage: float
    min_freq_mean: float
    max_freq_mean: float


def lln_band_check(
    m: MassFunction,
    n: int,
    trials: int,
    eps: float,
    rng: np.random.Generator,
    true_label=None,
) -> LLNReport:
    """Fraction of trials whose selection-frequency range lies in ``[Bel(T)-ε, Pl(T)+ε]``."""
    mt, mf, _ = _binary(m, true_label)
    lo, hi = frequency_extremes(m, n, trials, rng, true_label)
    bel_t, pl_t = mt, 1.0 - mf
    ok = (lo >= bel_t - eps) & (hi <= pl_t + eps)
    return LLNReport(n, trials, eps, (bel_t, pl_t), float(ok.mean()), float(lo.mean()), float(hi.mean()))


@dataclass(frozen=True)
class CLTReport:
    n: int
    samples: int
    alpha: np.ndarray
    upper_estimate: np.ndarray
    lower_estimate: np.ndarray
    upper_distance: float
    lower_distance: float

    @property
    def distance(self) -> float:
        return max(self.upper_distance, self.lower_distance)


def clt_check(
    m: MassFunction,
    n: int,
    samples: int,
    rng: np.random.Generator,
    alpha_grid=None,
    true_label=None,
) -> CLTReport:
    """Sup-distance between the belief of normalized-frequency events and their limits.

    Upper statistic: ``Bel^∞(√n (Φ_n - Pl(T)) / σ_F ≤ α)`` with
    ``σ_F² = Bel(F)(1 - Bel(F))``; it holds for every selection iff it holds
    for the largest frequency, and tends to ``N(α)``.

    Lower statistic: ``Bel^∞(√n (Φ_n - Bel(T)) / σ_T ≥ α)`` with
    ``σ_T² = Bel(T)(1 - Bel(T))``; decided by the smallest frequency, it
    tends to ``1 - N(α)``.
    """
    mt, mf, _ = _binary(m, true_label)
    if not (0 < mf < 1 and 0 < mt < 1):
        raise PreconditionError("degenerate variance: Bel(T) and Bel(F) must lie in (0, 1)")
    if n < 100:
        raise PreconditionError("n must be at least 100")
    alpha = np.linspace(-3, 3, 61) if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    lo, hi = frequency_extremes(m, n, samples, rng, true_label)
    pl_t = 1.0 - mf
    s_up = np.sqrt(n) * (hi - pl_t) / np.sqrt(mf * (1 - mf))
    s_lo = np.sqrt(n) * (lo - mt) / np.sqrt(mt * (1 - mt))
    s_up.sort()
    s_lo.sort()
    up = np.searchsorted(s_up, alpha, side="right") / samples
    low = 1.0 - np.searchsorted(s_lo, alpha, side="left") / samples
    d_up = float(np.max(np.abs(up - norm.cdf(alpha))))
    d_lo = float(np.max(np.abs(low - norm.sf(alpha))))
    return CLTReport(n, samples, alpha, up, low, d_up, d_lo)
