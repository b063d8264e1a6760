"""Combination and conditioning rules.

All binary rules share one mechanism: every pair of focal elements
``(B, C)`` contributes ``m1(B) * m2(C)`` to a set determined by the rule
(intersection, union, or intersection with a fallback). The rules differ
only in that target set and in what happens to mass landing on ``∅``.

Yager and Dubois-Prade rules are not associative; :func:`combine_all`
applies any rule as a left fold in the order given.
"""

from __future__ import annotations

from functools import reduce
from typing import Callable, Sequence

from . import _kernels
from .errors import FrameError, TotalConflict, ZeroPlausibility
from .frames import MassFunction

CONFLICT_LIMIT = 1.0 - 1e-12
ZERO_PL = 1e-12


def _check_pair(m1: MassFunction, m2: MassFunction) -> None:
    if m1.frame != m2.frame:
        raise FrameError("cannot combine mass functions on different frames")


def _pairwise(m1: MassFunction, m2: MassFunction, mode: int) -> dict[int, float]:
    """Accumulate focal-pair products onto the rule's target sets."""
    _check_pair(m1, m2)
    if m1.frame.size <= 62:
        a, wa = m1.arrays()
        b, wb = m2.arrays()
        masks, w = _kernels.pair_products(a, wa, b, wb, mode)
        keys, sums = _kernels.aggregate(masks, w)
        return {int(k): float(v) for k, v in zip(keys, sums)}
    # wide frames: masks no longer fit in int64
    out: dict[int, float] = {}
    for k1, v1 in m1.items():
        for k2, v2 in m2.items():
            inter = k1 & k2
            if mode == _kernels.MODE_AND:
                k = inter
            elif mode == _kernels.MODE_OR:
                k = k1 | k2
            else:
                k = inter if inter else k1 | k2
            out[k] = out.get(k, 0.0) + v1 * v2
    return out


def conjunctive_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Unnormalized conjunctive rule; conflict stays on the empty set."""
    return MassFunction(m1.frame, _pairwise(m1, m2, _kernels.MODE_AND), normalized=False)


def dempster_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Dempster's rule (normalized conjunctive combination).

    Raises
    ------
    TotalConflict
        If the conflict ``m∩(∅)`` reaches ``1 - 1e-12``.
    """
    masses = _pairwise(m1, m2, _kernels.MODE_AND)
    conflict = masses.pop(0, 0.0)
    if conflict >= CONFLICT_LIMIT:
        raise TotalConflict(f"conflict {conflict!r} leaves nothing to normalize")
    scale = 1.0 - conflict
    return MassFunction(m1.frame, {k: v / scale for k, v in masses.items()})


def disjunctive_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Disjunctive rule: products assigned to unions of focal elements."""
    masses = _pairwise(m1, m2, _kernels.MODE_OR)
    return MassFunction(m1.frame, masses, normalized=m1.normalized and m2.normalized)


def yager_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Yager's rule: the conflicting mass is moved to the whole frame."""
    masses = _pairwise(m1, m2, _kernels.MODE_AND)
    conflict = masses.pop(0, 0.0)
    full = m1.frame.full
    masses[full] = masses.get(full, 0.0) + conflict
    return MassFunction(m1.frame, masses)


def dubois_prade_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Dubois-Prade rule: each conflicting product goes to the union of its pair."""
    return MassFunction(m1.frame, _pairwise(m1, m2, _kernels.MODE_DUBOIS))


RULES: dict[str, Callable[[MassFunction, MassFunction], MassFunction]] = {
    "dempster": dempster_combine,
    "conjunctive": conjunctive_combine,
    "disjunctive": disjunctive_combine,
    "yager": yager_combine,
    "dubois": dubois_prade_combine,
}


def get_rule(name: str) -> Callable[[MassFunction, MassFunction], MassFunction]:
    try:
        return RULES[name]
    except KeyError:
        raise ValueError(f"unknown rule {name!r}; choose from {sorted(RULES)}") from None


def combine_all(rule: str, masses: Sequence[MassFunction]) -> MassFunction:
    """Left fold ``((m1 ∘ m2) ∘ m3) ∘ ...`` of a named rule."""
    if not masses:
        raise ValueError("nothing to combine")
    return reduce(get_rule(rule), masses)


def dempster_condition(m: MassFunction, event: int) -> MassFunction:
    """Dempster conditioning on ``event``: combine with the categorical BPA on it.

    Raises
    ------
    ZeroPlausibility
        If ``Pl(event) <= 1e-12``.
    """
    event = m.frame.check_mask(event)
    if m.pl(event) <= ZERO_PL:
        raise ZeroPlausibility(f"Pl({m.frame.labels_of(event)}) is zero")
    return dempster_combine(m, MassFunction.categorical(m.frame, event))
