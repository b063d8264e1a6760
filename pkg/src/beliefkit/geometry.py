"""Belief-space geometry of combination and conditioning.

Binary frames ``{x, y}`` are handled with mass vectors ``[m(x), m(y), m(Θ)]``
for normalized points and believability vectors ``[b(∅), b(x), b(y)]`` for
unnormalized ones (``b(Θ) = 1`` is dropped). General belief points use
``Bel(A)`` over nonempty proper subsets in ascending mask order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .combination import (
    conjunctive_combine,
    dempster_combine,
    disjunctive_combine,
    get_rule,
    yager_combine,
)
from .errors import FrameError, IntractableError, PreconditionError, TotalConflict
from .frames import MassFunction, belief_from_mass

SUBSPACE_RULES = ("dempster", "yager", "disjunctive", "conjunctive_unnorm", "disjunctive_unnorm")
MAX_CONDITION_BITS = 10


def _require_binary(m: MassFunction) -> None:
    if m.frame.size != 2:
        raise FrameError(f"binary frame required, got {m.frame.size} outcomes")


def mass_vector(m: MassFunction) -> np.ndarray:
    """``[m(x), m(y), m(Θ)]`` on a binary frame."""
    _require_binary(m)
    return np.array([m[1], m[2], m[3]])


def believability_vector(m: MassFunction) -> np.ndarray:
    """``[b(∅), b(x), b(y)]`` on a binary frame."""
    _require_binary(m)
    e = m[0]
    return np.array([e, e + m[1], e + m[2]])


def belief_coordinates(m: MassFunction) -> np.ndarray:
    """``Bel(A)`` for nonempty ``A ⊊ Θ`` in ascending mask order."""
    bel = belief_from_mass(m).values
    return bel[1:-1].copy()


@dataclass(frozen=True)
class Vertex:
    """Combination of a BF with a categorical BF, and its coordinates."""

    focus: tuple
    mass: MassFunction
    vector: np.ndarray


def _categoricals(m: MassFunction, with_empty: bool) -> list[tuple[tuple, MassFunction]]:
    f = m.frame
    out = []
    if with_empty:
        out.append(((), MassFunction(f, {0: 1.0}, normalized=False)))
    for k in (1, 2, 3):
        out.append((f.labels_of(k), MassFunction.categorical(f, k)))
    return out


def conditional_subspace(bel: MassFunction, rule: str) -> list[Vertex]:
    """Vertices ``bel ∘ Bel_A`` spanning the conditional subspace of a binary BF.

    Normalized rules use the categoricals on ``x``, ``y`` and ``Θ``;
    unnormalized rules add the categorical on ``∅``. Dempster vertices whose
    combination is totally conflicting are omitted.
    """
    _require_binary(bel)
    if rule not in SUBSPACE_RULES:
        raise ValueError(f"unknown rule {rule!r}; choose from {SUBSPACE_RULES}")
    unnorm = rule.endswith("_unnorm")
    op = {
        "dempster": dempster_combine,
        "yager": yager_combine,
        "disjunctive": disjunctive_combine,
        "conjunctive_unnorm": conjunctive_combine,
        "disjunctive_unnorm": disjunctive_combine,
    }[rule]
    coords = believability_vector if unnorm else mass_vector
    out = []
    for focus, cat in _categoricals(bel, unnorm):
        try:
            v = op(bel, cat)
        except TotalConflict:
            continue
        out.append(Vertex(focus, v, coords(v)))
    return out


def vertex_formulas(bel: MassFunction, rule: str) -> dict[str, np.ndarray]:
    """Closed-form vertex coordinates keyed by the categorical's focus.

    Independent of the combination code, for cross-checking
    :func:`conditional_subspace`.
    """
    _require_binary(bel)
    mx, my, mt = bel[1], bel[2], bel[3]
    if rule == "yager":
        return {
            "x": np.array([mx + mt, 0.0, my]),
            "y": np.array([0.0, my + mt, mx]),
            "Θ": np.array([mx, my, mt]),
        }
    if rule == "disjunctive":
        return {
            "x": np.array([mx, 0.0, 1.0 - mx]),
            "y": np.array([0.0, my, 1.0 - my]),
            "Θ": np.array([0.0, 0.0, 1.0]),
        }
    b = believability_vector(bel)
    b_empty, b_x, b_y, b_full = np.ones(3), np.array([0.0, 1, 0]), np.array([0.0, 0, 1]), np.zeros(3)
    if rule == "conjunctive_unnorm":
        return {
            "∅": b_empty,
            "x": b[2] * b_empty + (1 - b[2]) * b_x,
            "y": b[1] * b_empty + (1 - b[1]) * b_y,
            "Θ": b,
        }
    if rule == "disjunctive_unnorm":
        return {
            "∅": b,
            "x": b[1] * b_x + (1 - b[1]) * b_full,
            "y": b[2] * b_y + (1 - b[2]) * b_full,
            "Θ": b_full,
        }
    raise ValueError(f"no closed form for rule {rule!r}")


def _dense_mass(m: MassFunction) -> np.ndarray:
    v = np.zeros(1 << m.frame.size)
    for k, w in m.items():
        v[k] = w
    return v


def affine_commutation_check(rule: str, bel: MassFunction, bels, weights) -> float:
    """``max |bel ∘ (Σ α_i bel_i) - Σ α_i (bel ∘ bel_i)|`` over mass vectors."""
    w = np.asarray(weights, dtype=float)
    if len(bels) != w.size or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise PreconditionError("weights must be a convex combination matching bels")
    op = get_rule(rule)
    f = bel.frame
    normalized = all(b.normalized for b in bels)
    mix = sum(wi * _dense_mass(b) for wi, b in zip(w, bels))
    mixed = MassFunction(f, {k: float(v) for k, v in enumerate(mix) if v}, normalized=normalized)
    lhs = _dense_mass(op(bel, mixed))
    rhs = sum(wi * _dense_mass(op(bel, b)) for wi, b in zip(w, bels))
    return float(np.max(np.abs(lhs - rhs)))


def disjunctive_focus(bel: MassFunction, m_prime_x: float) -> tuple[float, float]:
    """Common point of the lines joining ``Bel'`` and ``bel ⊔ Bel'``.

    All ``Bel'`` with the given ``m'(x)`` share it, whatever ``m'(y)``.
    """
    _require_binary(bel)
    mx, my = bel[1], bel[2]
    if my >= 1.0:
        raise PreconditionError("focus undefined when m(y) = 1")
    return (m_prime_x * (mx - my) / (1.0 - my), 0.0)


def line_intersection(p1, p2, q1, q2) -> np.ndarray:
    """Intersection of line ``p1p2`` with line ``q1q2`` in the plane."""
    p1, p2, q1, q2 = (np.asarray(v, dtype=float) for v in (p1, p2, q1, q2))
    d1, d2 = p2 - p1, q2 - q1
    M = np.column_stack([d1, -d2])
    if abs(np.linalg.det(M)) < 1e-15:
        raise PreconditionError("lines are parallel")
    t, _ = np.linalg.solve(M, q1 - p1)
    return p1 + t * d1


@dataclass(frozen=True)
class LociReport:
    """Images of the loci ``m2(x) = c`` under a rule, in ``(m(x), m(y))`` coordinates."""

    slopes: dict
    fit_residual: float
    formula_slope: float | None
    parallel: bool
    dempster_focus: np.ndarray | None = None
    dempster_focus_spread: float | None = None


def _locus_images(op, bel: MassFunction, c: float, n: int = 9) -> np.ndarray:
    f = bel.frame
    pts = []
    for s in np.linspace(0.0, 1.0 - c, n):
        m2 = MassFunction(f, {1: c, 2: float(s), 3: float(max(1.0 - c - s, 0.0))})
        r = op(bel, m2)
        pts.append([r[1], r[2]])
    return np.array(pts)


def _fit_line(pts: np.ndarray) -> tuple[float, float]:
    """Slope (or inf for vertical) and orthogonal residual of a 2-D point set."""
    centred = pts - pts.mean(axis=0)
    _, s, vt = np.linalg.svd(centred)
    d = vt[0]
    resid = float(s[1]) if s.size > 1 else 0.0
    slope = d[1] / d[0] if abs(d[0]) > 1e-15 else float("inf")
    return float(slope), resid


def yager_parallel_loci_check(bel: MassFunction, c_values=(0.1, 0.3), tol: float = 1e-10) -> LociReport:
    """Slopes of Yager images of constant-mass loci.

    The images are straight lines with common slope ``-m1(Θ)/m1(x)``
    (undefined, reported as ``None``, when ``m1(x) = 0``). For comparison
    the Dempster images of the same loci are intersected; their common
    point and its spread over the ``c`` values are reported.
    """
    _require_binary(bel)
    slopes = {}
    resid = 0.0
    images = {}
    for c in c_values:
        pts = _locus_images(yager_combine, bel, c)
        images[c] = pts
        slopes[c], r = _fit_line(pts)
        resid = max(resid, r)
    mx, mt = bel[1], bel[3]
    formula = None if mx == 0 else -mt / mx
    vals = list(slopes.values())
    if any(np.isinf(v) for v in vals):
        parallel = all(np.isinf(v) for v in vals)
    else:
        parallel = max(vals) - min(vals) <= tol
    focus, spread = _dempster_focus(bel, c_values)
    return LociReport(slopes, resid, formula, parallel, focus, spread)


def _dempster_focus(bel: MassFunction, c_values) -> tuple[np.ndarray | None, float | None]:
    lines = []
    for c in c_values:
        try:
            pts = _locus_images(dempster_combine, bel, c)
        except TotalConflict:
            return None, None
        if np.ptp(pts, axis=0).max() < 1e-12:
            continue
        lines.append((pts[0], pts[-1]))
    if len(lines) < 2:
        return None, None
    pts = []
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            try:
                pts.append(line_intersection(*lines[i], *lines[j]))
            except PreconditionError:
                return None, None
    pts = np.array(pts)
    return pts.mean(axis=0), float(np.ptp(pts, axis=0).max()) if len(pts) > 1 else 0.0


# geometric conditioning -----------------------------------------------------


def _conditioning_matrix(n: int, A: int) -> tuple[np.ndarray, np.ndarray]:
    """Belief map restricted to masses on nonempty subsets of ``A``.

    Rows: nonempty proper subsets of Θ. Columns: nonempty subsets of ``A``.
    """
    full = (1 << n) - 1
    rows = np.arange(1, full)
    cols = np.array([c for c in range(1, full + 1) if c & ~A == 0])
    M = ((rows[:, None] & cols[None, :]) == cols[None, :]).astype(float)
    return M, cols


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _l2_simplex_lsq(M: np.ndarray, b: np.ndarray, tol: float = 1e-14, max_iter: int = 50000) -> np.ndarray:
    """``argmin ||Mx - b||`` over the probability simplex.

    Accelerated projected gradient, then an exact solve on the detected
    support (accepted when it stays feasible and does not increase the
    objective).
    """
    k = M.shape[1]
    L = np.linalg.norm(M, 2) ** 2
    x = np.full(k, 1.0 / k)
    y = x.copy()
    t = 1.0
    f = lambda z: float(np.sum((M @ z - b) ** 2))
    for _ in range(max_iter):
        g = M.T @ (M @ y - b)
        x_new = _project_simplex(y - g / L)
        if np.max(np.abs(x_new - x)) < tol:
            x = x_new
            break
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        y = x_new + (t - 1) / t_new * (x_new - x)
        if f(x_new) > f(x):
            # adaptive restart
            y, t_new = x_new.copy(), 1.0
        x, t = x_new, t_new
    # polish on the support: equality-constrained least squares
    S = np.nonzero(x > 1e-12)[0]
    if S.size:
        Ms = M[:, S]
        K = np.block([[Ms.T @ Ms, np.ones((S.size, 1))], [np.ones((1, S.size)), np.zeros((1, 1))]])
        rhs = np.concatenate([Ms.T @ b, [1.0]])
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0][: S.size]
        if np.all(sol >= -1e-15):
            cand = np.zeros(k)
            cand[S] = np.clip(sol, 0.0, None)
            cand /= cand.sum()
            if f(cand) <= f(x) + 1e-15:
                x = cand
    return x


def _lp_norm_fit(M: np.ndarray, b: np.ndarray, norm: str) -> np.ndarray:
    """L1 or L∞ fit over the simplex as a linear program."""
    r, k = M.shape
    if norm == "L1":
        # variables: x (k), t (r); minimize sum t
        c = np.concatenate([np.zeros(k), np.ones(r)])
        A_ub = np.block([[M, -np.eye(r)], [-M, -np.eye(r)]])
        A_eq = np.concatenate([np.ones(k), np.zeros(r)])[None, :]
    else:
        c = np.concatenate([np.zeros(k), [1.0]])
        A_ub = np.block([[M, -np.ones((r, 1))], [-M, -np.ones((r, 1))]])
        A_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
    b_ub = np.concatenate([b, -b])
    res = scipy.optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"linear program failed: {res.message}")
    return np.clip(res.x[:k], 0.0, None)


def geometric_condition(bel: MassFunction, A: int, norm: str = "L2") -> MassFunction:
    """Closest BF (in belief coordinates) whose focal elements lie inside ``A``.

    Parameters
    ----------
    bel : MassFunction
        Normalized BF on a frame of at most 10 outcomes.
    A : int
        Nonempty conditioning event.
    norm : {"L1", "L2", "Linf"}
        Distance between belief-coordinate vectors.
    """
    f = bel.frame
    A = f.check_mask(A)
    if A == 0:
        raise PreconditionError("conditioning event must be nonempty")
    if f.size > MAX_CONDITION_BITS:
        raise IntractableError(f"geometric conditioning limited to {MAX_CONDITION_BITS} outcomes")
    if norm not in ("L1", "L2", "Linf"):
        raise ValueError(f"unknown norm {norm!r}")
    if all(k & ~A == 0 for k in bel.focal):
        return bel
    M, cols = _conditioning_matrix(f.size, A)
    b = belief_coordinates(bel)
    if M.shape[0] == 0:
        x = np.zeros(cols.size)
        x[-1] = 1.0
    elif norm == "L2":
        x = _l2_simplex_lsq(M, b)
    else:
        x = _lp_norm_fit(M, b, norm)
    x /= x.sum()
    return MassFunction(f, {int(c): float(v) for c, v in zip(cols, x) if v > 0})


def belief_distance(m1: MassFunction, m2: MassFunction, norm: str = "L2") -> float:
    d = belief_coordinates(m1) - belief_coordinates(m2)
    if d.size == 0:
        return 0.0
    return float({"L1": np.sum(np.abs(d)), "L2": np.linalg.norm(d), "Linf": np.max(np.abs(d))}[norm])


# 2-monotone toy body -----------------------------------------------------------------


TOY_VERTICES = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, -1.0]])


def toy_constraints(point, tol: float = 1e-12) -> dict[str, float]:
    """Slacks of ``z ≥ -min(x, y)``, ``x ≥ 0``, ``y ≥ 0`` and the residual of ``x + y + z = 1``."""
    x, y, z = (float(v) for v in point)
    return {"z_min": z + min(x, y), "x": x, "y": y, "sum": x + y + z - 1.0}


def toy_status(point, tol: float = 1e-12) -> str:
    """``'interior'``, ``'boundary'`` or ``'infeasible'`` relative to the toy body."""
    s = toy_constraints(point)
    if abs(s["sum"]) > tol or min(s["z_min"], s["x"], s["y"]) < -tol:
        return "infeasible"
    if min(s["z_min"], s["x"], s["y"]) > tol:
        return "interior"
    return "boundary"


def ternary_2monotone_vertices() -> np.ndarray:
    """Vertices of ``{z ≥ -min(x, y), x, y ≥ 0, x + y + z = 1}``, each checked feasible."""
    for v in TOY_VERTICES:
        if toy_status(v) == "infeasible":
            raise AssertionError(f"vertex {v} violates the toy constraints")
    return TOY_VERTICES.copy()

