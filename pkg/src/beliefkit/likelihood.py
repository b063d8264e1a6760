"""Belief likelihoods of repeated trials.

A series of trials with per-trial conditional BPAs ``m_1, ..., m_n`` on frames
``X_1, ..., X_n`` induces a joint BPA on ``X_1 x ... x X_n``: the combination
of the vacuous extensions of the ``m_i`` under a chosen rule. The functions
here evaluate that joint belief either through product formulas (any ``n``)
or by building the joint BPA explicitly (small ``n`` only), and the
``check_*`` functions compare the two routes on random instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .combination import combine_all
from .errors import FrameError, IntractableError
from .frames import (
    Frame,
    MassFunction,
    belief_from_mass,
    plausibility_from_mass,
)
from .multivariate import ProductFocalElement, ProductFrame, vacuous_extension

PRODUCT_RULES = ("dempster", "conjunctive")
SUPPORTED_RULES = ("dempster", "conjunctive", "disjunctive")
MAX_DENSE_OUTCOMES = 24
BINARY = Frame(["T", "F"])


def product_frame(conditionals: Sequence[MassFunction]) -> ProductFrame:
    return ProductFrame([m.frame for m in conditionals])


def joint_mass(conditionals: Sequence[MassFunction], rule: str = "conjunctive") -> MassFunction:
    """Combination of the vacuous extensions of the conditionals.

    Raises
    ------
    IntractableError
        If the product frame has more than 24 outcomes.
    """
    if rule not in SUPPORTED_RULES:
        raise ValueError(f"rule must be one of {SUPPORTED_RULES}")
    frame = product_frame(conditionals)
    if frame.size > MAX_DENSE_OUTCOMES:
        raise IntractableError(f"explicit joint BPA limited to {MAX_DENSE_OUTCOMES} product outcomes")
    ext = [vacuous_extension(m, frame, i) for i, m in enumerate(conditionals)]
    return combine_all(rule, ext)


def belief_likelihood(
    conditionals: Sequence[MassFunction],
    rule: str,
    event: ProductFocalElement | int,
) -> float:
    """Belief of ``event`` under the joint BPA of the trials.

    For the conjunctive and Dempster rules a Cartesian event
    ``A_1 x ... x A_n`` factorizes as ``prod Bel_i(A_i)``, so no joint
    object is built and ``n`` is unrestricted. Other cases build the joint
    BPA explicitly.

    Parameters
    ----------
    conditionals : sequence of MassFunction
        One BPA per trial.
    rule : {'dempster', 'conjunctive', 'disjunctive'}
    event : ProductFocalElement or int
        Cartesian event, or an arbitrary subset mask of the product frame.
    """
    if rule not in SUPPORTED_RULES:
        raise ValueError(f"rule must be one of {SUPPORTED_RULES}")
    if isinstance(event, ProductFocalElement):
        if len(event.factors) != len(conditionals):
            raise FrameError("event needs one factor per trial")
        if rule in PRODUCT_RULES:
            return math.prod(m.bel(a) for m, a in zip(conditionals, event.factors))
        event = product_frame(conditionals).product_mask(event)
    joint = joint_mass(conditionals, rule)
    return joint.bel(event)


@dataclass(frozen=True)
class LikelihoodBounds:
    """Lower and upper likelihood of a sharp sample.

    ``conjectural`` marks an upper value computed by the plausibility
    product on non-binary frames, where only empirical evidence backs it.
    """

    lower: float
    upper: float
    conjectural: bool


def lower_upper_likelihood(conditionals: Sequence[MassFunction], sample: Sequence[Hashable]) -> LikelihoodBounds:
    """Products of singleton beliefs and singleton plausibilities."""
    if len(sample) != len(conditionals):
        raise FrameError("sample length must equal the number of trials")
    lower = 1.0
    upper = 1.0
    for m, x in zip(conditionals, sample):
        s = m.frame.singleton(x)
        lower *= m[s]
        upper *= m.pl(s)
    conjectural = any(m.frame.size > 2 for m in conditionals)
    return LikelihoodBounds(lower, upper, conjectural)


def sample_bounds(model: MassFunction, samples: Sequence[Sequence[Hashable]]) -> list[LikelihoodBounds]:
    """Bounds for several samples with the same BPA at every trial."""
    return [lower_upper_likelihood([model] * len(s), s) for s in samples]


# Bernoulli trials -----------------------------------------------------------


@dataclass(frozen=True)
class BernoulliSurface:
    """Lower and upper likelihood over the triangle ``p, q >= 0, p + q <= 1``."""

    k: int
    n: int
    p: np.ndarray
    q: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def lower_argmax(self) -> tuple[float, float]:
        i = int(np.argmax(self.lower))
        return float(self.p[i]), float(self.q[i])

    @property
    def upper_argmax(self) -> tuple[float, float]:
        i = int(np.argmax(self.upper))
        return float(self.p[i]), float(self.q[i])

    @property
    def lower_max(self) -> float:
        return float(self.lower.max())

    @property
    def upper_max(self) -> float:
        return float(self.upper.max())

    def rows(self):
        """Tuples ``(p, q, lower, upper)`` for CSV output."""
        return zip(self.p.tolist(), self.q.tolist(), self.lower.tolist(), self.upper.tolist())


def bernoulli_likelihoods(k: int, n: int, p, q) -> tuple[np.ndarray, np.ndarray]:
    """``p^k q^(n-k)`` and ``(1-q)^k (1-p)^(n-k)``, elementwise."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    lower = p**k * q ** (n - k)
    upper = (1.0 - q) ** k * (1.0 - p) ** (n - k)
    return lower, upper


def bernoulli_likelihood_surface(k: int, n: int, grid: float = 1e-3) -> BernoulliSurface:
    """Evaluate both likelihoods of ``k`` successes in ``n`` trials on a grid.

    Grid points are ``(i/N, j/N)`` with ``N = round(1/grid)`` and
    ``i + j <= N``; ties in the argmax go to the first point in
    lexicographic ``(p, q)`` order.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    steps = int(round(1.0 / grid))
    if steps < 1:
        raise ValueError("grid step must be at most 1")
    i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    keep = (i + j) <= steps
    p = i[keep] / steps
    q = j[keep] / steps
    lower, upper = bernoulli_likelihoods(k, n, p, q)
    return BernoulliSurface(k, n, p, q, lower, upper)


# factorization checkers -----------------------------------------------------


@dataclass
class CheckStat:
    """Count, violations and worst absolute deviation of one identity."""

    evaluated: int = 0
    violations: int = 0
    max_deviation: float = 0.0

    def record(self, deviation: float, tol: float) -> None:
        self.evaluated += 1
        if deviation > self.max_deviation:
            self.max_deviation = float(deviation)
        if not deviation <= tol:
            self.violations += 1


@dataclass
class FactorizationReport:
    """Results of a randomized comparison against explicit joint BPAs."""

    suite: str
    n: int
    trials: int
    tolerance: float
    checks: dict[str, CheckStat] = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)

    def stat(self, name: str) -> CheckStat:
        return self.checks.setdefault(name, CheckStat())

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks.values())

    @property
    def max_deviation(self) -> float:
        return max((c.max_deviation for c in self.checks.values()), default=0.0)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "n": self.n,
            "trials": self.trials,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "violations": self.violations,
            "max_deviation": self.max_deviation,
            "checks": {
                k: {"evaluated": c.evaluated, "violations": c.violations, "max_deviation": c.max_deviation}
                for k, c in sorted(self.checks.items())
            },
            "counterexamples": self.counterexamples[:20],
        }


def _nonempty_masks(frame: Frame) -> range:
    return range(1, 1 << frame.size)


def _component_frames(n: int, frame_sizes: Sequence[int] | None) -> list[Frame]:
    if frame_sizes is None:
        frame_sizes = [2] * n
    if len(frame_sizes) != n:
        raise ValueError("frame_sizes must have one entry per trial")
    return [Frame([f"x{i}_{j}" for j in range(s)]) for i, s in enumerate(frame_sizes)]


def check_conjunctive_factorization(
    n: int,
    trials_count: int,
    frame_sizes: Sequence[int] | None = None,
    seed: int | np.random.Generator = 0,
    tol: float = 1e-12,
) -> FactorizationReport:
    """Compare product formulas with explicit conjunctive/Dempster joints.

    Checked identities, per random tuple of full-support BPAs:

    * ``focal_count``: the joint has ``prod (2^|X_i| - 1)`` focal elements
      (``3^n`` for binary frames);
    * ``product_mass``: ``m(A_1 x ... x A_n) = prod m_i(A_i)``;
    * ``tuple_belief``: ``Bel({(x_1..x_n)}) = prod Bel_i({x_i})``;
    * ``cartesian_belief``: ``Bel(A_1 x ... x A_n) = prod Bel_i(A_i)``;
    * ``dempster_equal``: the Dempster joint equals the conjunctive one.
    """
    rng = np.random.default_rng(seed)
    frames = _component_frames(n, frame_sizes)
    pf = ProductFrame(frames)
    if pf.size > MAX_DENSE_OUTCOMES:
        raise IntractableError("dense oracle limited to 24 product outcomes")
    report = FactorizationReport("conjunctive", n, trials_count, tol)
    combos = list(itertools.product(*[_nonempty_masks(f) for f in frames]))
    combo_masks = [pf.product_mask(c) for c in combos]
    singles = [c for c in combos if all(bin(a).count("1") == 1 for a in c)]
    single_masks = [pf.product_mask(c) for c in singles]
    expected_count = math.prod((1 << f.size) - 1 for f in frames)
    for _ in range(trials_count):
        ms = [MassFunction.random(f, rng) for f in frames]
        joint = joint_mass(ms, "conjunctive")
        bel = belief_from_mass(joint).values
        report.stat("focal_count").record(abs(len(joint) - expected_count), 0.0)
        bels_i = [belief_from_mass(m).values for m in ms]
        for c, mask in zip(combos, combo_masks):
            report.stat("product_mass").record(abs(joint[mask] - math.prod(m[a] for m, a in zip(ms, c))), tol)
            report.stat("cartesian_belief").record(
                abs(bel[mask] - math.prod(b[a] for b, a in zip(bels_i, c))), tol
            )
        for c, mask in zip(singles, single_masks):
            report.stat("tuple_belief").record(abs(bel[mask] - math.prod(m[a] for m, a in zip(ms, c))), tol)
        dem = joint_mass(ms, "dempster")
        report.stat("dempster_equal").record(dem.max_abs_diff(MassFunction(pf, joint.as_dict())), tol)
    return report


def _tuple_complements(frames: Sequence[Frame], pf: ProductFrame):
    """Pairs ``(outcome index tuple, mask of the complement of that tuple)``."""
    out = []
    for idx in itertools.product(*[range(f.size) for f in frames]):
        out.append((idx, pf.full ^ (1 << pf.encode(idx))))
    return out


def check_disjunctive_factorization(
    n: int,
    trials_count: int,
    seed: int | np.random.Generator = 0,
    tol: float = 1e-12,
) -> FactorizationReport:
    """Compare disjunctive-rule formulas with explicit joints on binary frames.

    Checked identities:

    * ``focal_count``: ``2^n + 1`` focal elements;
    * ``complement_mass``: ``m({x}^c) = prod m_i({x_i}^c)``, remainder on the
      whole product;
    * ``complement_belief``: ``Bel({x}^c) = prod Bel_i({x_i}^c)``;
    * ``complement_plausibility``: ``Pl({x}^c) = 1``.
    """
    rng = np.random.default_rng(seed)
    frames = _component_frames(n, None)
    pf = ProductFrame(frames)
    if pf.size > MAX_DENSE_OUTCOMES:
        raise IntractableError("dense oracle limited to 24 product outcomes")
    report = FactorizationReport("disjunctive", n, trials_count, tol)
    comps = _tuple_complements(frames, pf)
    for _ in range(trials_count):
        ms = [MassFunction.random(f, rng) for f in frames]
        joint = joint_mass(ms, "disjunctive")
        bel = belief_from_mass(joint).values
        pl = plausibility_from_mass(joint).values
        report.stat("focal_count").record(abs(len(joint) - ((1 << n) + 1)), 0.0)
        total = 0.0
        for idx, mask in comps:
            # complement of a singleton in a binary frame is the other singleton
            prod_m = math.prod(m[f.full ^ (1 << j)] for m, f, j in zip(ms, frames, idx))
            prod_bel = math.prod(m.bel(f.full ^ (1 << j)) for m, f, j in zip(ms, frames, idx))
            total += prod_m
            report.stat("complement_mass").record(abs(joint[mask] - prod_m), tol)
            report.stat("complement_belief").record(abs(bel[mask] - prod_bel), tol)
            report.stat("complement_plausibility").record(abs(pl[mask] - 1.0), tol)
        report.stat("complement_mass").record(abs(joint[pf.full] - (1.0 - total)), tol)
    return report


def check_plausibility_conjecture(
    n: int,
    trials_count: int,
    seed: int | np.random.Generator = 0,
    equidistributed: bool = False,
    tol: float = 1e-9,
    frame_sizes: Sequence[int] | None = None,
) -> FactorizationReport:
    """Gather evidence on the plausibility product for sharp samples.

    Compares ``Pl({(x_1..x_n)})`` of the explicit conjunctive joint with
    ``prod Pl_i({x_i})`` for every tuple. Deviations above ``tol`` are
    recorded as counterexample candidates. With ``equidistributed`` all
    trials share one binary BPA and the all-``T`` tuple is also checked
    against ``(1 - q)^n``.
    """
    rng = np.random.default_rng(seed)
    frames = _component_frames(n, frame_sizes)
    if equidistributed and any(f.size != 2 for f in frames):
        raise ValueError("the equidistributed case is binary")
    pf = ProductFrame(frames)
    if pf.size > MAX_DENSE_OUTCOMES:
        raise IntractableError("dense oracle limited to 24 product outcomes")
    report = FactorizationReport("plausibility", n, trials_count, tol)
    tuples = list(itertools.product(*[range(f.size) for f in frames]))
    for trial in range(trials_count):
        if equidistributed:
            base = MassFunction.random(frames[0], rng)
            ms = [MassFunction(f, base.as_dict()) for f in frames]
        else:
            ms = [MassFunction.random(f, rng) for f in frames]
        pl = plausibility_from_mass(joint_mass(ms, "conjunctive")).values
        for idx in tuples:
            mask = 1 << pf.encode(idx)
            expected = math.prod(m.pl(1 << j) for m, j in zip(ms, idx))
            dev = abs(pl[mask] - expected)
            report.stat("tuple_plausibility").record(dev, tol)
            if dev > tol:
                report.counterexamples.append({"trial": trial, "tuple": list(idx), "deviation": dev})
        if equidistributed:
            q = ms[0][2]  # mass of the second outcome, labelled F
            all_t = 1 << pf.encode((0,) * n)
            report.stat("all_true_closed_form").record(abs(pl[all_t] - (1.0 - q) ** n), 1e-12)
    return report
