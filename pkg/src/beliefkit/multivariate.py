"""Product frames, vacuous extension, marginalization, refinings and
conditional embedding.

Product outcomes are tuples of component labels, enumerated in row-major
order (the last component varies fastest).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import FrameError, IntractableError
from .frames import Frame, MassFunction

MAX_PRODUCT_OUTCOMES = 1 << 24


def mask_from_bool(flags: np.ndarray) -> int:
    """Integer mask whose bit ``i`` is ``flags[i]``."""
    packed = np.packbits(np.asarray(flags, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def bool_from_mask(mask: int, size: int) -> np.ndarray:
    nbytes = max(1, (size + 7) // 8)
    raw = np.frombuffer(int(mask).to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


class ProductFrame(Frame):
    """Cartesian product of component frames.

    The product behaves as an ordinary :class:`Frame` whose labels are
    tuples. Labels and per-outcome coordinates are materialized lazily, and
    only for products with at most ``2**24`` outcomes; larger products can
    still be described through :class:`ProductFocalElement` objects.
    """

    __slots__ = ("components", "shape", "_size", "_labels_cache", "_coords")

    def __init__(self, components: Sequence[Frame]):
        components = tuple(components)
        if not components or not all(isinstance(c, Frame) for c in components):
            raise FrameError("a product frame needs one or more component frames")
        self.components = components
        self.shape = tuple(c.size for c in components)
        self._size = math.prod(self.shape)
        self._labels_cache = None
        self._coords = None
        self._index = None

    @property
    def size(self) -> int:
        return self._size

    @property
    def labels(self) -> tuple:
        if self._labels_cache is None:
            self._require_materializable()
            coords = self.coords
            comps = [c.labels for c in self.components]
            self._labels_cache = tuple(
                tuple(comps[i][j] for i, j in enumerate(row)) for row in coords.tolist()
            )
        return self._labels_cache

    @property
    def coords(self) -> np.ndarray:
        """Array ``(size, k)`` of component indices of every product outcome."""
        if self._coords is None:
            self._require_materializable()
            grid = np.indices(self.shape).reshape(len(self.shape), -1).T
            self._coords = np.ascontiguousarray(grid, dtype=np.int64)
        return self._coords

    def _require_materializable(self) -> None:
        if self._size > MAX_PRODUCT_OUTCOMES:
            raise IntractableError(
                f"product frame has {self._size} outcomes; only product-form focal elements are supported"
            )

    def __eq__(self, other) -> bool:
        return isinstance(other, ProductFrame) and self.components == other.components

    def __hash__(self) -> int:
        return hash(("ProductFrame", self.components))

    def __repr__(self) -> str:
        return "ProductFrame(" + " x ".join(repr(c) for c in self.components) + ")"

    def encode(self, indices: Sequence[int]) -> int:
        """Flat outcome index of a tuple of component indices."""
        return int(np.ravel_multi_index(tuple(int(i) for i in indices), self.shape))

    def decode(self, flat: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(int(flat), self.shape))

    def index(self, label: Hashable) -> int:
        if not isinstance(label, tuple) or len(label) != len(self.components):
            raise FrameError(f"{label!r} is not an outcome of {self!r}")
        return self.encode([c.index(lab) for c, lab in zip(self.components, label)])

    def __contains__(self, label) -> bool:
        try:
            self.index(label)
        except FrameError:
            return False
        return True

    def labels_of(self, mask: int) -> tuple:
        self.check_mask(mask)
        flags = bool_from_mask(mask, self._size)
        comps = [c.labels for c in self.components]
        return tuple(
            tuple(comps[i][j] for i, j in enumerate(self.decode(k))) for k in np.flatnonzero(flags)
        )

    def component_index(self, which: int | Frame) -> int:
        if isinstance(which, (int, np.integer)):
            if not 0 <= which < len(self.components):
                raise FrameError(f"component index {which} out of range")
            return int(which)
        hits = [i for i, c in enumerate(self.components) if c == which]
        if len(hits) != 1:
            raise FrameError(f"{which!r} is not a unique component of {self!r}")
        return hits[0]

    def cylinder(self, component: int | Frame, submask: int) -> int:
        """Mask of ``submask`` on one component times all other components."""
        i = self.component_index(component)
        self.components[i].check_mask(submask)
        member = (np.int64(submask) >> self.coords[:, i]) & 1
        return mask_from_bool(member.astype(bool))

    def product_mask(self, factors: Sequence[int] | "ProductFocalElement") -> int:
        """Mask of the Cartesian product ``A_1 x ... x A_k``."""
        if isinstance(factors, ProductFocalElement):
            factors = factors.factors
        if len(factors) != len(self.components):
            raise FrameError("one factor per component is required")
        self._require_materializable()
        member = np.ones(self._size, dtype=bool)
        for i, (comp, f) in enumerate(zip(self.components, factors)):
            comp.check_mask(f)
            member &= ((np.int64(f) >> self.coords[:, i]) & 1).astype(bool)
        return mask_from_bool(member)

    def tuple_mask(self, outcome: Sequence[Hashable]) -> int:
        """Mask of a single product outcome given component labels."""
        return 1 << self.index(tuple(outcome))

    def project(self, mask: int, components: int | Frame | Sequence) -> int:
        """Projection of a product subset onto one or several components."""
        flags = bool_from_mask(mask, self._size)
        rows = self.coords[flags]
        if isinstance(components, (int, np.integer, Frame)):
            i = self.component_index(components)
            out = 0
            for j in np.unique(rows[:, i]):
                out |= 1 << int(j)
            return out
        idx = [self.component_index(c) for c in components]
        sub = ProductFrame([self.components[i] for i in idx])
        out = 0
        for row in np.unique(rows[:, idx], axis=0):
            out |= 1 << sub.encode(row)
        return out


@dataclass(frozen=True)
class ProductFocalElement:
    """Cartesian product ``A_1 x ... x A_k`` given by one mask per component."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(int(f) for f in self.factors)
        if any(f <= 0 for f in factors):
            raise FrameError("every factor of a product focal element must be nonempty")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_labels(cls, frames: Sequence[Frame], labels: Sequence[Iterable[Hashable]]):
        return cls(tuple(f.mask(lab) for f, lab in zip(frames, labels)))

    @classmethod
    def tuple_of(cls, frames: Sequence[Frame], outcome: Sequence[Hashable]):
        """Singleton product ``{(x_1, ..., x_k)}``."""
        return cls(tuple(f.singleton(x) for f, x in zip(frames, outcome)))


def vacuous_extension(m: MassFunction, target: ProductFrame, component: int | Frame | None = None) -> MassFunction:
    """Extend ``m`` to ``target`` by cylindrical extension of each focal element."""
    i = target.component_index(m.frame if component is None else component)
    if target.components[i] != m.frame:
        raise FrameError("mass function frame does not match the chosen component")
    return MassFunction(target, {target.cylinder(i, k): v for k, v in m.items()}, normalized=m.normalized)


def marginalize(m: MassFunction, onto: int | Frame | Sequence) -> MassFunction:
    """Project every focal element of a joint BPA and accumulate the masses."""
    frame = m.frame
    if not isinstance(frame, ProductFrame):
        raise FrameError("marginalization needs a mass function on a product frame")
    if isinstance(onto, (int, np.integer, Frame)):
        target = frame.components[frame.component_index(onto)]
    else:
        target = ProductFrame([frame.components[frame.component_index(c)] for c in onto])
    out: dict[int, float] = {}
    for k, v in m.items():
        p = frame.project(k, onto) if k else 0
        out[p] = out.get(p, 0.0) + v
    return MassFunction(target, out, normalized=m.normalized)


class Refining:
    """Refining of a coarse frame into a partition of a fine frame.

    Parameters
    ----------
    coarse, fine : Frame
    cells : mapping
        Coarse label to an iterable of fine labels (its cell).

    Raises
    ------
    FrameError
        If a cell is missing or empty, two cells overlap, or the cells do
        not cover the fine frame.
    """

    def __init__(self, coarse: Frame, fine: Frame, cells: Mapping[Hashable, Iterable[Hashable]]):
        unknown = set(cells) - set(coarse.labels)
        if unknown:
            raise FrameError(f"cells given for unknown coarse outcomes {sorted(map(str, unknown))}")
        masks = []
        seen = 0
        for w in coarse.labels:
            if w not in cells:
                raise FrameError(f"coarse outcome {w!r} has no cell")
            cell = fine.mask(cells[w])
            if cell == 0:
                raise FrameError(f"cell of {w!r} is empty")
            if cell & seen:
                raise FrameError(f"cell of {w!r} overlaps another cell")
            seen |= cell
            masks.append(cell)
        if seen != fine.full:
            raise FrameError(f"cells do not cover the fine frame; missing {fine.labels_of(fine.full ^ seen)}")
        self.coarse = coarse
        self.fine = fine
        self.cells = tuple(masks)

    def __repr__(self) -> str:
        return f"Refining({self.coarse!r} -> {self.fine!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Refining)
            and self.coarse == other.coarse
            and self.fine == other.fine
            and self.cells == other.cells
        )

    def cell(self, omega: Hashable) -> int:
        """Fine mask of the cell of a coarse outcome label."""
        return self.cells[self.coarse.index(omega)]

    def cell_frame(self, i: int) -> Frame:
        """The cell of the ``i``-th coarse outcome as a frame of its own."""
        return Frame(self.fine.labels_of(self.cells[i]))

    def refine(self, coarse_mask: int) -> int:
        """rho(E): union of the cells of the outcomes in ``E``."""
        self.coarse.check_mask(coarse_mask)
        out = 0
        for i, cell in enumerate(self.cells):
            if coarse_mask >> i & 1:
                out |= cell
        return out

    def outer_reduction(self, fine_mask: int) -> int:
        """Coarse outcomes whose cells meet ``fine_mask``."""
        self.fine.check_mask(fine_mask)
        out = 0
        for i, cell in enumerate(self.cells):
            if cell & fine_mask:
                out |= 1 << i
        return out

    def inner_reduction(self, fine_mask: int) -> int:
        """Coarse outcomes whose cells lie inside ``fine_mask``."""
        self.fine.check_mask(fine_mask)
        out = 0
        for i, cell in enumerate(self.cells):
            if cell & ~fine_mask == 0:
                out |= 1 << i
        return out

    @classmethod
    def identity(cls, frame: Frame) -> "Refining":
        return cls(frame, frame, {lab: [lab] for lab in frame.labels})


def refine_mass(m: MassFunction, rho: Refining) -> MassFunction:
    """Image of a coarse BPA on the fine frame."""
    if m.frame != rho.coarse:
        raise FrameError("mass function is not on the coarse frame of the refining")
    return MassFunction(rho.fine, {rho.refine(k): v for k, v in m.items()}, normalized=m.normalized)


def outer_reduction(mask: int, rho: Refining) -> int:
    return rho.outer_reduction(mask)


def marginalize_coarse(m: MassFunction, rho: Refining) -> MassFunction:
    """Marginal of a fine BPA on the coarse frame, via outer reduction."""
    if m.frame != rho.fine:
        raise FrameError("mass function is not on the fine frame of the refining")
    out: dict[int, float] = {}
    for k, v in m.items():
        r = rho.outer_reduction(k)
        out[r] = out.get(r, 0.0) + v
    return MassFunction(rho.coarse, out, normalized=m.normalized)


def lift_mask(sub: Frame, frame: Frame, mask: int) -> int:
    """Re-express a subset of ``sub`` as a subset of a larger ``frame``."""
    return frame.mask(sub.labels_of(mask))


def conditional_embedding(m_i: MassFunction, frame: Frame) -> MassFunction:
    """Embed a BPA on a cell ``Π_i ⊆ Θ`` into ``Θ``.

    Each focal element ``e`` becomes ``e ∪ (Θ \\ Π_i)``; conditioning the
    result on ``Π_i`` by Dempster's rule returns ``m_i``.
    """
    cell = frame.mask(m_i.frame.labels)
    rest = frame.full ^ cell
    return MassFunction(frame, {lift_mask(m_i.frame, frame, k) | rest: v for k, v in m_i.items()})


def restrict_support(m: MassFunction, sub: Frame) -> MassFunction:
    """View a BPA whose focal elements lie inside ``sub`` as a BPA on ``sub``."""
    region = m.frame.mask(sub.labels)
    out = {}
    for k, v in m.items():
        if k & ~region:
            raise FrameError(f"focal element {m.frame.labels_of(k)} leaves the sub-frame")
        out[sub.mask(m.frame.labels_of(k))] = v
    return MassFunction(sub, out, normalized=m.normalized)
