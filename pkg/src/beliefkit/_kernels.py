"""Hot loops over power sets and focal-element pairs.

Each kernel has a numba implementation and a vectorized numpy
implementation with identical semantics. The active backend is chosen once
at import time from the ``BELIEFKIT_BACKEND`` environment variable
(``numba`` or ``numpy``; default ``numba``). If numba cannot be imported the
numpy backend is used silently.

Both implementations are always importable under explicit names
(``*_numba`` / ``*_numpy``) so that tests and benchmarks can compare them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    nb = None
    HAVE_NUMBA = False

MODE_AND = 0
MODE_OR = 1
MODE_DUBOIS = 2


def _select_backend() -> str:
    requested = os.environ.get("BELIEFKIT_BACKEND", "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"BELIEFKIT_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        return "numpy"
    return requested


BACKEND = _select_backend()


# numpy implementations ------------------------------------------------------


def _n_bits(size: int) -> int:
    n = size.bit_length() - 1
    if size != 1 << n:
        raise ValueError(f"array length {size} is not a power of two")
    return n


def _transform_numpy(values: np.ndarray, superset: bool, sign: float) -> np.ndarray:
    out = np.array(values, dtype=np.float64, copy=True)
    n = _n_bits(out.size)
    for i in range(n):
        view = out.reshape(-1, 2, 1 << i)
        if superset:
            view[:, 0, :] += sign * view[:, 1, :]
        else:
            view[:, 1, :] += sign * view[:, 0, :]
    return out


def pair_products_numpy(a_masks, a_w, b_masks, b_w, mode):
    a = np.asarray(a_masks, dtype=np.int64)[:, None]
    b = np.asarray(b_masks, dtype=np.int64)[None, :]
    if mode == MODE_AND:
        masks = a & b
    elif mode == MODE_OR:
        masks = a | b
    else:
        inter = a & b
        masks = np.where(inter != 0, inter, a | b)
    w = np.asarray(a_w, dtype=np.float64)[:, None] * np.asarray(b_w, dtype=np.float64)[None, :]
    return masks.ravel(), w.ravel()


def zeta_subset_numpy(values):
    return _transform_numpy(values, superset=False, sign=1.0)


def zeta_superset_numpy(values):
    return _transform_numpy(values, superset=True, sign=1.0)


def mobius_subset_numpy(values):
    return _transform_numpy(values, superset=False, sign=-1.0)


def mobius_superset_numpy(values):
    return _transform_numpy(values, superset=True, sign=-1.0)


# numba implementations ------------------------------------------------------

if HAVE_NUMBA:
    _jit = nb.njit(cache=True, nogil=True)

    @_jit
    def _transform_inplace_nb(out, superset, sign):
        size = out.shape[0]
        bit = 1
        while bit < size:
            for mask in range(size):
                if mask & bit:
                    if superset:
                        out[mask ^ bit] += sign * out[mask]
                    else:
                        out[mask] += sign * out[mask ^ bit]
            bit <<= 1

    @_jit
    def _pair_products_nb(a_masks, a_w, b_masks, b_w, mode):
        k1 = a_masks.shape[0]
        k2 = b_masks.shape[0]
        masks = np.empty(k1 * k2, dtype=np.int64)
        w = np.empty(k1 * k2, dtype=np.float64)
        t = 0
        for i in range(k1):
            for j in range(k2):
                inter = a_masks[i] & b_masks[j]
                if mode == 0:
                    r = inter
                elif mode == 1:
                    r = a_masks[i] | b_masks[j]
                elif inter != 0:
                    r = inter
                else:
                    r = a_masks[i] | b_masks[j]
                masks[t] = r
                w[t] = a_w[i] * b_w[j]
                t += 1
        return masks, w

    def _transform_numba(values, superset, sign):
        out = np.array(values, dtype=np.float64, copy=True)
        _n_bits(out.size)
        _transform_inplace_nb(out, superset, sign)
        return out

    def zeta_subset_numba(values):
        return _transform_numba(values, False, 1.0)

    def zeta_superset_numba(values):
        return _transform_numba(values, True, 1.0)

    def mobius_subset_numba(values):
        return _transform_numba(values, False, -1.0)

    def mobius_superset_numba(values):
        return _transform_numba(values, True, -1.0)

    def pair_products_numba(a_masks, a_w, b_masks, b_w, mode):
        return _pair_products_nb(
            np.ascontiguousarray(a_masks, dtype=np.int64),
            np.ascontiguousarray(a_w, dtype=np.float64),
            np.ascontiguousarray(b_masks, dtype=np.int64),
            np.ascontiguousarray(b_w, dtype=np.float64),
            int(mode),
        )

else:  # pragma: no cover
    zeta_subset_numba = zeta_subset_numpy
    zeta_superset_numba = zeta_superset_numpy
    mobius_subset_numba = mobius_subset_numpy
    mobius_superset_numba = mobius_superset_numpy
    pair_products_numba = pair_products_numpy


if BACKEND == "numba":
    zeta_subset = zeta_subset_numba
    zeta_superset = zeta_superset_numba
    mobius_subset = mobius_subset_numba
    mobius_superset = mobius_superset_numba
    pair_products = pair_products_numba
else:
    zeta_subset = zeta_subset_numpy
    zeta_superset = zeta_superset_numpy
    mobius_subset = mobius_subset_numpy
    mobius_superset = mobius_superset_numpy
    pair_products = pair_products_numpy


def aggregate(masks: np.ndarray, weights: np.ndarray):
    """Sum ``weights`` over equal ``masks``; output sorted by mask."""
    uniq, inverse = np.unique(masks, return_inverse=True)
    sums = np.bincount(inverse.ravel(), weights=weights, minlength=uniq.size)
    return uniq, sums
