"""Frames, subset masks, mass functions and power-set transforms.

A subset ``A`` of a frame with outcomes ``labels[0..n-1]`` is encoded as the
integer whose bit ``i`` is set iff ``labels[i]`` belongs to ``A``. Dense set
functions are float arrays of length ``2**n`` indexed by that integer.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Mapping

import numpy as np

from . import _kernels
from .errors import FrameError, IntractableError, NormalizationError

MAX_DENSE_BITS = 24
SUM_TOL = 1e-12
RENORM_TOL = 1e-9
NEG_TOL = 1e-12

SET_FUNCTION_KINDS = ("belief", "plausibility", "commonality", "believability", "capacity")


class Frame:
    """Finite frame of discernment.

    Parameters
    ----------
    labels : iterable of hashable
        Outcome names, in the order that defines bit positions.
    """

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[Hashable]):
        labels = tuple(labels)
        if not labels:
            raise FrameError("a frame needs at least one outcome")
        index = {lab: i for i, lab in enumerate(labels)}
        if len(index) != len(labels):
            raise FrameError("frame labels must be unique")
        self.labels = labels
        self._index = index

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> int:
        """Mask of the whole frame."""
        return (1 << self.size) - 1

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Frame) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(("Frame", self.labels))

    def __repr__(self) -> str:
        return f"Frame({list(self.labels)!r})"

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise FrameError(f"unknown outcome {label!r}") from None

    def __contains__(self, label) -> bool:
        return label in self._index

    def mask(self, labels: Iterable[Hashable]) -> int:
        """Subset mask of a collection of outcome labels."""
        out = 0
        for lab in labels:
            out |= 1 << self.index(lab)
        return out

    def singleton(self, label: Hashable) -> int:
        return 1 << self.index(label)

    def labels_of(self, mask: int) -> tuple:
        self.check_mask(mask)
        return tuple(lab for i, lab in enumerate(self.labels) if mask >> i & 1)

    def complement(self, mask: int) -> int:
        return self.full ^ mask

    def check_mask(self, mask: int) -> int:
        if not isinstance(mask, (int, np.integer)) or mask < 0 or mask > self.full:
            raise FrameError(f"mask {mask!r} is not a subset of a {self.size}-outcome frame")
        return int(mask)

    def require_dense(self) -> None:
        if self.size > MAX_DENSE_BITS:
            raise IntractableError(
                f"dense power-set operations need at most {MAX_DENSE_BITS} outcomes, frame has {self.size}"
            )

    def subsets(self) -> range:
        """All masks in ascending order (requires a dense-sized frame)."""
        self.require_dense()
        return range(1 << self.size)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def bits_of(mask: int) -> Iterator[int]:
    """Positions of the set bits of ``mask``, ascending."""
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def popcounts(n: int) -> np.ndarray:
    """Cardinality of every subset of an ``n``-outcome frame."""
    counts = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        counts = np.concatenate([counts, counts + 1])
    return counts


class MassFunction:
    """Basic probability assignment stored sparsely by focal element.

    Parameters
    ----------
    frame : Frame
    masses : mapping of int to float
        Subset mask to mass. Zero entries are dropped.
    normalized : bool, default True
        In the normalized regime the empty set may not carry mass.
    signed : bool, default False
        Allow negative entries (Möbius inverses of general capacities).
        The total must still be one.

    Raises
    ------
    NormalizationError
        Negative masses, empty-set mass in the normalized regime, or a total
        further than ``1e-9`` from one. Totals within that distance are
        rescaled exactly onto one.
    """

    __slots__ = ("frame", "_masses", "normalized", "signed")

    def __init__(
        self,
        frame: Frame,
        masses: Mapping[int, float],
        normalized: bool = True,
        *,
        signed: bool = False,
    ):
        if not isinstance(frame, Frame):
            raise FrameError("frame must be a Frame")
        clean: dict[int, float] = {}
        for mask, value in masses.items():
            mask = frame.check_mask(mask)
            value = float(value)
            if not math.isfinite(value):
                raise NormalizationError(f"mass of {frame.labels_of(mask)} is not finite")
            if not signed and value < 0.0:
                if value < -NEG_TOL:
                    raise NormalizationError(f"negative mass {value!r} on {frame.labels_of(mask)}")
                value = 0.0
            if value != 0.0:
                clean[mask] = clean.get(mask, 0.0) + value
        total = math.fsum(clean.values())
        if abs(total - 1.0) > RENORM_TOL:
            raise NormalizationError(f"masses sum to {total!r}, not 1")
        # rescale only beyond rounding noise so that rebuilding is idempotent
        if abs(total - 1.0) > 4 * sys.float_info.epsilon * max(len(clean), 1):
            clean = {k: v / total for k, v in clean.items()}
        if normalized and clean.get(0, 0.0) != 0.0:
            raise NormalizationError("the empty set carries mass in the normalized regime")
        self.frame = frame
        self._masses = dict(sorted(clean.items()))
        self.normalized = bool(normalized)
        self.signed = bool(signed)

    # construction helpers ---------------------------------------------------

    @classmethod
    def from_sets(
        cls, frame: Frame, assignment: Mapping[Iterable[Hashable], float] | Iterable, normalized: bool = True
    ) -> "MassFunction":
        """Build from label collections.

        ``assignment`` is either a mapping from label iterables (e.g. tuples,
        frozensets or strings of single-character labels) to masses, or an
        iterable of ``(labels, mass)`` pairs. Repeated subsets are rejected.
        """
        pairs = assignment.items() if isinstance(assignment, Mapping) else assignment
        masses: dict[int, float] = {}
        for labels, value in pairs:
            mask = frame.mask(labels)
            if mask in masses:
                raise NormalizationError(f"subset {frame.labels_of(mask)} listed twice")
            masses[mask] = value
        return cls(frame, masses, normalized)

    @classmethod
    def vacuous(cls, frame: Frame) -> "MassFunction":
        return cls(frame, {frame.full: 1.0})

    @classmethod
    def categorical(cls, frame: Frame, mask: int, normalized: bool = True) -> "MassFunction":
        return cls(frame, {mask: 1.0}, normalized=normalized)

    @classmethod
    def bayesian(cls, frame: Frame, probs) -> "MassFunction":
        """Probability vector over the outcomes, as a Bayesian assignment."""
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (frame.size,):
            raise FrameError("probability vector length does not match the frame")
        return cls(frame, {1 << i: p for i, p in enumerate(probs)})

    @classmethod
    def from_dense(cls, frame: Frame, values, normalized: bool = True, *, signed: bool = False) -> "MassFunction":
        values = np.asarray(values, dtype=float)
        if values.shape != (1 << frame.size,):
            raise FrameError("dense vector length must be 2**n")
        nz = np.flatnonzero(values)
        return cls(frame, {int(k): float(values[k]) for k in nz}, normalized, signed=signed)

    @classmethod
    def random(cls, frame: Frame, rng: np.random.Generator, n_focal: int | None = None) -> "MassFunction":
        """Random assignment with Dirichlet(1) weights.

        Without ``n_focal`` every nonempty subset is focal (dense frames only).
        """
        if n_focal is None:
            frame.require_dense()
            masks = np.arange(1, 1 << frame.size)
        else:
            total = (1 << frame.size) - 1
            n_focal = min(n_focal, total)
            if frame.size <= 20:
                masks = rng.choice(np.arange(1, total + 1), size=n_focal, replace=False)
            else:
                chosen: set[int] = set()
                while len(chosen) < n_focal:
                    chosen.add(int(rng.integers(1, total + 1)))
                masks = np.array(sorted(chosen), dtype=object)
        w = rng.dirichlet(np.ones(len(masks)))
        return cls(frame, {int(k): float(v) for k, v in zip(masks, w)})

    # access -----------------------------------------------------------------

    @property
    def focal(self) -> tuple:
        """Focal masks in ascending order."""
        return tuple(self._masses)

    def items(self):
        return self._masses.items()

    def as_dict(self) -> dict:
        return dict(self._masses)

    def __getitem__(self, mask: int) -> float:
        return self._masses.get(int(mask), 0.0)

    def __len__(self) -> int:
        return len(self._masses)

    def __iter__(self):
        return iter(self._masses)

    def mass(self, labels: Iterable[Hashable]) -> float:
        return self[self.frame.mask(labels)]

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Focal masks (int64) and masses as parallel arrays."""
        if self.frame.size > 62:
            raise IntractableError("int64 mask arrays need at most 62 outcomes")
        masks = np.fromiter(self._masses.keys(), dtype=np.int64, count=len(self._masses))
        w = np.fromiter(self._masses.values(), dtype=np.float64, count=len(self._masses))
        return masks, w

    @property
    def conflict(self) -> float:
        """Mass on the empty set."""
        return self._masses.get(0, 0.0)

    def is_bayesian(self) -> bool:
        return all(popcount(k) == 1 for k in self._masses)

    def is_vacuous(self) -> bool:
        return self._masses == {self.frame.full: 1.0}

    def to_dense(self) -> np.ndarray:
        self.frame.require_dense()
        out = np.zeros(1 << self.frame.size)
        for k, v in self._masses.items():
            out[k] = v
        return out

    # pointwise measures, sparse evaluation ------------------------------------

    def bel(self, mask: int) -> float:
        """Belief of one subset (empty-set mass excluded)."""
        mask = self.frame.check_mask(mask)
        return math.fsum(v for k, v in self._masses.items() if k and k & ~mask == 0)

    def pl(self, mask: int) -> float:
        mask = self.frame.check_mask(mask)
        return math.fsum(v for k, v in self._masses.items() if k & mask)

    def q(self, mask: int) -> float:
        """Commonality of one subset."""
        mask = self.frame.check_mask(mask)
        return math.fsum(v for k, v in self._masses.items() if mask & ~k == 0)

    def b(self, mask: int) -> float:
        """Believability: belief including the empty-set mass."""
        return self.bel(mask) + self.conflict

    # comparisons ------------------------------------------------------------

    def max_abs_diff(self, other: "MassFunction") -> float:
        if other.frame != self.frame:
            raise FrameError("mass functions live on different frames")
        keys = set(self._masses) | set(other._masses)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    def allclose(self, other: "MassFunction", atol: float = 1e-12) -> bool:
        return self.max_abs_diff(other) <= atol

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MassFunction)
            and self.frame == other.frame
            and self.normalized == other.normalized
            and self._masses == other._masses
        )

    def __hash__(self):
        return hash((self.frame, tuple(self._masses.items())))

    def __repr__(self) -> str:
        parts = []
        for k, v in self._masses.items():
            labs = self.frame.labels_of(k)
            name = "{}" if not labs else "{" + ",".join(map(str, labs)) + "}"
            parts.append(f"{name}: {v:.6g}")
        return f"MassFunction({', '.join(parts)})"


@dataclass(frozen=True)
class SetFunction:
    """Dense function over the power set of a frame."""

    frame: Frame
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in SET_FUNCTION_KINDS:
            raise ValueError(f"unknown set-function kind {self.kind!r}")
        values = np.asarray(self.values, dtype=float)
        if values.shape != (1 << self.frame.size,):
            raise FrameError("set-function length must be 2**n")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __getitem__(self, mask: int) -> float:
        return float(self.values[mask])

    def at(self, labels: Iterable[Hashable]) -> float:
        return float(self.values[self.frame.mask(labels)])


# transforms -----------------------------------------------------------------


def believability_from_mass(m: MassFunction) -> SetFunction:
    """b(A) = sum of m(B) over all B contained in A, the empty set included."""
    m.frame.require_dense()
    return SetFunction(m.frame, _kernels.zeta_subset(m.to_dense()), "believability")


def belief_from_mass(m: MassFunction) -> SetFunction:
    """Belief function via the fast subset-sum transform.

    ``Bel(A)`` sums the masses of the nonempty subsets of ``A``; any mass on
    the empty set is excluded, so in the unnormalized regime ``Bel(Θ)`` is
    ``1 - m(∅)``.
    """
    m.frame.require_dense()
    dense = m.to_dense()
    dense[0] = 0.0
    return SetFunction(m.frame, _kernels.zeta_subset(dense), "belief")


def plausibility_from_mass(m: MassFunction) -> SetFunction:
    """Pl(A) = sum of m(B) over B meeting A, i.e. ``1 - b(A^c)``."""
    b = believability_from_mass(m).values
    # complement of mask k is full ^ k, which reverses the index order
    pl = 1.0 - b[::-1]
    pl[0] = 0.0
    return SetFunction(m.frame, pl, "plausibility")


def commonality_from_mass(m: MassFunction) -> SetFunction:
    """Q(A) = sum of m(B) over supersets B of A (superset-sum transform)."""
    m.frame.require_dense()
    return SetFunction(m.frame, _kernels.zeta_superset(m.to_dense()), "commonality")


def moebius(values) -> np.ndarray:
    """Möbius inverse of a dense set function; entries may be negative."""
    return _kernels.mobius_subset(np.asarray(values, dtype=float))


def mass_from_belief(bel: SetFunction) -> MassFunction:
    """Recover masses from a belief, believability or capacity function.

    The result is flagged ``signed`` when the inversion produces negative
    entries (a non-belief capacity); callers decide what to do with it.
    """
    bel.frame.require_dense()
    m = moebius(bel.values)
    values = bel.values
    if bel.kind == "belief" and values[-1] < 1.0 - SUM_TOL:
        # unnormalized belief: the missing mass sits on the empty set
        m[0] = 1.0 - values[-1]
        normalized = False
    else:
        normalized = abs(m[0]) <= SUM_TOL
        if normalized:
            m[0] = 0.0
    m[np.abs(m) < 1e-15] = 0.0
    signed = bool(np.any(m < -NEG_TOL))
    return MassFunction.from_dense(bel.frame, m, normalized=normalized, signed=signed)


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of a 2-monotonicity test.

    ``witness`` is ``(x, y, A)`` with labels for the first violated
    constraint, or ``None``; ``slack`` is the most negative constraint value.
    """

    ok: bool
    witness: tuple | None
    slack: float

    def __bool__(self) -> bool:
        return self.ok


def is_2_monotone(capacity: SetFunction, tol: float = 1e-12) -> MonotonicityReport:
    """Test 2-monotonicity through pairwise Möbius sums.

    For every pair ``x != y`` and every ``A`` containing both, the sum of
    the Möbius masses of the sets ``E`` with ``{x, y} ⊆ E ⊆ A`` must be
    nonnegative (up to ``tol``).
    """
    frame = capacity.frame
    frame.require_dense()
    n = frame.size
    if abs(capacity.values[0]) > tol or abs(capacity.values[-1] - 1.0) > tol:
        raise ValueError("a capacity must vanish on the empty set and equal one on the frame")
    m = moebius(capacity.values)
    idx = np.arange(1 << n)
    worst = math.inf
    witness = None
    for i, j in itertools.combinations(range(n), 2):
        pair = (1 << i) | (1 << j)
        restricted = np.where((idx & pair) == pair, m, 0.0)
        sums = _kernels.zeta_subset(restricted)
        # only A containing the pair carry a constraint
        sums = np.where((idx & pair) == pair, sums, np.inf)
        k = int(np.argmin(sums))
        if sums[k] < worst:
            worst = float(sums[k])
            if sums[k] < -tol and witness is None:
                witness = (frame.labels[i], frame.labels[j], frame.labels_of(k))
    if n < 2:
        worst = 0.0
    return MonotonicityReport(ok=witness is None, witness=witness, slack=worst)


def capacity_from_moebius(frame: Frame, m) -> SetFunction:
    """Capacity whose Möbius inverse is the dense vector ``m``."""
    return SetFunction(frame, _kernels.zeta_subset(np.asarray(m, dtype=float)), "capacity")
