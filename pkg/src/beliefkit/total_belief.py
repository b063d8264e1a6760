"""Total belief: build, verify and enumerate solutions.

Problem data: a refining ``rho`` of a coarse frame ``Ω`` into cells
``Π_1..Π_K`` of a fine frame ``Θ``, a prior BPA on ``Ω`` and one conditional
BPA per cell. A solution is a BPA on ``Θ`` whose coarse marginal (through
outer reduction) is the prior (P1) and whose Dempster conditioning on every
cell returns that cell's conditional (P2).

Every candidate focal element is a union of exactly one focal element per
cell covered by some coarse set ``C``; it is identified by ``C`` and the
index of the chosen focal element in each covered cell.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .combination import conjunctive_combine, dempster_condition
from .errors import (
    FrameError,
    IntractableError,
    NoAdmissibleSubstitution,
    PreconditionError,
    ZeroPlausibility,
)
from .frames import Frame, MassFunction, popcount
from .multivariate import (
    Refining,
    conditional_embedding,
    lift_mask,
    marginalize_coarse,
    refine_mass,
    restrict_support,
)

NEG_TOL = 1e-10
MAX_SUBSETS = 1 << 20
COND_LIMIT = 1e12


@dataclass(frozen=True)
class TotalBeliefProblem:
    """Refining, prior on the coarse frame and one conditional per cell."""

    refining: Refining
    prior: MassFunction
    conditionals: tuple

    def __post_init__(self):
        rho = self.refining
        conds = tuple(self.conditionals)
        object.__setattr__(self, "conditionals", conds)
        if self.prior.frame != rho.coarse:
            raise FrameError("prior must live on the coarse frame")
        if not self.prior.normalized or self.prior.conflict:
            raise PreconditionError("prior must be normalized")
        if len(conds) != rho.coarse.size:
            raise PreconditionError("one conditional per coarse outcome is required")
        for i, m in enumerate(conds):
            if set(m.frame.labels) != set(rho.fine.labels_of(rho.cells[i])):
                raise FrameError(f"conditional {i} is not defined on its cell")
            if m.conflict:
                raise PreconditionError("conditionals must be normalized")
            if self.prior.pl(1 << i) <= 1e-12:
                raise PreconditionError(f"prior plausibility of {rho.coarse.labels[i]!r} is zero")

    @property
    def n_cells(self) -> int:
        return len(self.conditionals)

    @property
    def fine(self) -> Frame:
        return self.refining.fine

    @property
    def coarse(self) -> Frame:
        return self.refining.coarse

    def cell_focal(self, i: int) -> tuple[int, ...]:
        """Focal elements of conditional ``i`` as masks of the fine frame."""
        m = self.conditionals[i]
        return tuple(lift_mask(m.frame, self.fine, k) for k in m.focal)

    def cell_masses(self, i: int) -> tuple[float, ...]:
        m = self.conditionals[i]
        return tuple(m[k] for k in m.focal)

    def pl0(self, i: int) -> float:
        return self.prior.pl(1 << i)

    def has_disjoint_prior(self) -> bool:
        seen = 0
        for k in self.prior.focal:
            if k & seen:
                return False
            seen |= k
        return True


# canonical solution ---------------------------------------------------------


def construct_total(problem: TotalBeliefProblem, return_conflict: bool = False):
    """Dempster sum of the refined prior and the embedded conditionals.

    The conjunctive combination is carried out explicitly so that the
    conflict (which the construction guarantees to vanish) can be reported.
    """
    fine = problem.fine
    acc = refine_mass(problem.prior, problem.refining)
    for m in problem.conditionals:
        acc = conjunctive_combine(acc, conditional_embedding(m, fine))
    conflict = acc.conflict
    masses = {k: v for k, v in acc.items() if k}
    scale = 1.0 - conflict
    result = MassFunction(fine, {k: v / scale for k, v in masses.items()})
    return (result, conflict) if return_conflict else result


@dataclass(frozen=True)
class AdmissibleElement:
    """Candidate focal element: coarse set, covered cells and per-cell choice."""

    mask: int
    prior_set: int
    cells: tuple
    choice: tuple


def admissible_focal_elements(problem: TotalBeliefProblem, E: int) -> list[AdmissibleElement]:
    """Unions of one focal element per cell inside ``rho(E)``.

    There are ``prod n_i`` of them, listed with the choice vector in
    lexicographic order.
    """
    problem.coarse.check_mask(E)
    if E == 0:
        raise PreconditionError("E must be nonempty")
    cells = tuple(i for i in range(problem.n_cells) if E >> i & 1)
    focal = [problem.cell_focal(i) for i in cells]
    out = []
    for choice in itertools.product(*[range(len(f)) for f in focal]):
        mask = 0
        for f, j in zip(focal, choice):
            mask |= f[j]
        out.append(AdmissibleElement(mask, E, cells, choice))
    return out


def all_admissible(problem: TotalBeliefProblem) -> list[AdmissibleElement]:
    """Candidate focal elements for every focal set of the prior."""
    out = []
    for E in problem.prior.focal:
        out.extend(admissible_focal_elements(problem, E))
    return out


def total_mass_formula(problem: TotalBeliefProblem) -> MassFunction:
    """Canonical solution from ``m(e) = m0(C) * prod_i m_i(e_i)``."""
    masses = {}
    for el in all_admissible(problem):
        w = problem.prior[el.prior_set]
        for i, j in zip(el.cells, el.choice):
            w *= problem.cell_masses(i)[j]
        masses[el.mask] = masses.get(el.mask, 0.0) + w
    return MassFunction(problem.fine, masses)


# verification ----------------------------------------------------------------


@dataclass(frozen=True)
class TotalVerification:
    """P1: coarse marginal equals the prior. P2: conditioning recovers each conditional."""

    p1_ok: bool
    p2_ok: bool
    p1_residual: float
    p2_residuals: tuple

    @property
    def residual(self) -> float:
        return max((self.p1_residual,) + tuple(self.p2_residuals))

    @property
    def ok(self) -> bool:
        return self.p1_ok and self.p2_ok


def verify_total(problem: TotalBeliefProblem, candidate: MassFunction, tol: float = 1e-10) -> TotalVerification:
    if candidate.frame != problem.fine:
        raise FrameError("candidate must live on the fine frame")
    p1 = marginalize_coarse(candidate, problem.refining).max_abs_diff(problem.prior)
    p2 = []
    for i, cond in enumerate(problem.conditionals):
        try:
            got = restrict_support(dempster_condition(candidate, problem.refining.cells[i]), cond.frame)
            p2.append(got.max_abs_diff(cond))
        except ZeroPlausibility:
            p2.append(1.0)
    return TotalVerification(p1 <= tol, all(r <= tol for r in p2), p1, tuple(p2))


# constraint system -------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintSystem:
    """Linear constraints on the masses of the candidate focal elements.

    ``g1`` rows: for each cell ``i`` and focal ``e_i``, the total mass of
    candidates meeting ``Π_i`` in ``e_i`` equals ``m_i(e_i) Pl0(ω_i)``.
    ``g2`` rows: for each focal ``C`` of the prior, the total mass of
    candidates with coarse set ``C`` equals ``m0(C)``.

    Independent counts exclude the normalization equation shared by both
    groups: ``g2_independent = rank(g2) - 1`` and ``g1_independent`` is the
    rank ``g1`` adds on top of ``g2``.
    """

    columns: tuple
    g1: np.ndarray
    b1: np.ndarray
    g2: np.ndarray
    b2: np.ndarray
    g1_independent: int
    g2_independent: int
    rank: int

    @property
    def unknown_count(self) -> int:
        return len(self.columns)

    @property
    def independent(self) -> int:
        return self.g1_independent + self.g2_independent

    @property
    def A(self) -> np.ndarray:
        return np.vstack([self.g1, self.g2])

    @property
    def b(self) -> np.ndarray:
        return np.concatenate([self.b1, self.b2])

    @property
    def determined(self) -> bool:
        return self.rank == self.unknown_count

    def vector(self, m: MassFunction) -> np.ndarray:
        """Masses of ``m`` on the candidate columns."""
        return np.array([m[c.mask] for c in self.columns])

    def residual(self, x) -> float:
        return float(np.max(np.abs(self.A @ np.asarray(x, dtype=float) - self.b)))

    def mass_function(self, x, frame: Frame) -> MassFunction:
        return MassFunction(frame, {c.mask: float(v) for c, v in zip(self.columns, x)})


def build_constraint_system(problem: TotalBeliefProblem) -> ConstraintSystem:
    cols = all_admissible(problem)
    g1_rows, b1 = [], []
    for i in range(problem.n_cells):
        masses = problem.cell_masses(i)
        pl = problem.pl0(i)
        for j, mj in enumerate(masses):
            row = [1.0 if (i in c.cells and c.choice[c.cells.index(i)] == j) else 0.0 for c in cols]
            g1_rows.append(row)
            b1.append(mj * pl)
    g2_rows, b2 = [], []
    for C in problem.prior.focal:
        g2_rows.append([1.0 if c.prior_set == C else 0.0 for c in cols])
        b2.append(problem.prior[C])
    g1 = np.array(g1_rows)
    g2 = np.array(g2_rows)
    rank_all = int(np.linalg.matrix_rank(np.vstack([g1, g2])))
    rank_g2 = int(np.linalg.matrix_rank(g2))
    return ConstraintSystem(
        columns=tuple(cols),
        g1=g1,
        b1=np.array(b1),
        g2=g2,
        b2=np.array(b2),
        g1_independent=rank_all - rank_g2,
        g2_independent=rank_g2 - 1,
        rank=rank_all,
    )


def alternative_solution(
    problem: TotalBeliefProblem,
    pivot: int | None = None,
    fraction: float = 0.5,
) -> MassFunction:
    """A second nonnegative solution next to the canonical one.

    Moves from the canonical mass vector along the null-space projection of
    ``-e_pivot`` (lowering the pivot column's mass), stopping at
    ``fraction`` of the largest step that keeps every mass nonnegative.
    The default pivot is the first candidate covering every cell.

    Raises
    ------
    PreconditionError
        If the system is determined or no positive step is possible.
    """
    system = build_constraint_system(problem)
    x0 = system.vector(total_mass_formula(problem))
    null = scipy.linalg.null_space(system.A)
    if null.shape[1] == 0:
        raise PreconditionError("the constraint system has a unique solution")
    if pivot is None:
        full = problem.coarse.full
        pivot = next((k for k, c in enumerate(system.columns) if c.prior_set == full), 0)
    d = -(null @ null[pivot])
    if np.max(np.abs(d)) < 1e-14:
        raise PreconditionError("the pivot column is fixed by the constraints")
    neg = d < -1e-15
    steps = x0[neg] / -d[neg]
    t = fraction * float(np.min(steps)) if steps.size else 1.0
    if t <= 0.0:
        raise PreconditionError("no feasible step from the canonical solution")
    x = np.clip(x0 + t * d, 0.0, None)
    return system.mass_function(x, problem.fine)


# square-system enumeration --------------------------------------------------------


def _solve_batch(A: np.ndarray, b: np.ndarray, combos: np.ndarray):
    """Solve ``A[:, c] y = b`` for each column subset ``c``.

    Returns per-subset solutions (NaN rows for singular systems). One step
    of residual refinement follows the LU solve.
    """
    mats = np.transpose(A[:, combos], (1, 0, 2))
    out = np.full(combos.shape, np.nan)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(mats)
    ok = np.isfinite(cond) & (cond < COND_LIMIT)
    if ok.any():
        m = mats[ok]
        rhs = np.broadcast_to(b, (m.shape[0], b.size))[..., None]
        y = np.linalg.solve(m, rhs)
        r = rhs - m @ y
        y = y + np.linalg.solve(m, r)
        out[ok] = y[..., 0]
    return out


def _iter_combos(k: int, r: int, chunk: int = 65536):
    it = itertools.combinations(range(k), r)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), r)


@dataclass(frozen=True)
class CandidateSolutionSystem:
    """Minimal-system data for one prior focal set ``E`` (special case).

    Columns are choice vectors ``(j_1, ..., j_N)`` over the ``N`` cells in
    ``E``. Rows: for each cell, indicators of its first ``n_i - 1`` focal
    elements, then one normalization row. The right-hand side holds the
    conditional masses and 1, so solutions are sub-solutions normalized to
    total mass one.
    """

    sizes: tuple
    columns: tuple
    cell_masses: tuple
    cells: tuple = ()
    E: int = 0

    def __post_init__(self):
        for c in self.columns:
            if len(c) != len(self.sizes) or any(not 0 <= j < n for j, n in zip(c, self.sizes)):
                raise PreconditionError(f"column {c} is not a valid choice vector")
        if len(set(self.columns)) != len(self.columns):
            raise PreconditionError("duplicate columns")

    @property
    def n_min(self) -> int:
        return sum(n - 1 for n in self.sizes) + 1

    @property
    def n_max(self) -> int:
        return math.prod(self.sizes)

    def column_vector(self, choice: Sequence[int]) -> np.ndarray:
        v = []
        for j, n in zip(choice, self.sizes):
            v.extend(1.0 if j == t else 0.0 for t in range(n - 1))
        v.append(1.0)
        return np.array(v)

    @property
    def A(self) -> np.ndarray:
        return np.column_stack([self.column_vector(c) for c in self.columns])

    @property
    def b(self) -> np.ndarray:
        v = []
        for masses, n in zip(self.cell_masses, self.sizes):
            v.extend(masses[: n - 1])
        v.append(1.0)
        return np.array(v, dtype=float)

    def solve(self) -> np.ndarray:
        A = self.A
        if A.shape[0] != A.shape[1]:
            raise PreconditionError(f"system is {A.shape[0]}x{A.shape[1]}, not square")
        x = np.linalg.solve(A, self.b)
        return x + np.linalg.solve(A, self.b - A @ x)

    def with_columns(self, columns) -> "CandidateSolutionSystem":
        return CandidateSolutionSystem(self.sizes, tuple(columns), self.cell_masses, self.cells, self.E)


def full_candidate_system(problem: TotalBeliefProblem, E: int) -> CandidateSolutionSystem:
    """All ``n_max`` columns of the subproblem for prior focal set ``E``."""
    cells = tuple(i for i in range(problem.n_cells) if E >> i & 1)
    sizes = tuple(len(problem.conditionals[i]) for i in cells)
    masses = tuple(problem.cell_masses(i) for i in cells)
    cols = tuple(itertools.product(*[range(n) for n in sizes]))
    return CandidateSolutionSystem(sizes, cols, masses, cells, E)


@dataclass(frozen=True)
class MinimalSolution:
    """Nonnegative solution of one square subsystem."""

    columns: tuple
    choices: tuple
    x: np.ndarray

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.x > 0))

    def dense(self, n_max: int) -> np.ndarray:
        """Solution as a vector over all ``n_max`` columns of the subproblem."""
        out = np.zeros(n_max)
        out[list(self.columns)] = self.x
        return out


def enumerate_minimal_solutions(
    problem: TotalBeliefProblem,
    E: int,
    limit: int | None = None,
    max_subsets: int = MAX_SUBSETS,
) -> list[MinimalSolution]:
    """Nonnegative solutions of every ``n_min``-column subsystem for ``E``.

    Singular subsystems are skipped. Components down to ``-1e-10`` count
    as nonnegative and are clipped to zero.

    Raises
    ------
    IntractableError
        If more than ``max_subsets`` column subsets would be tried.
    """
    full = full_candidate_system(problem, E)
    k, r = full.n_max, full.n_min
    total = math.comb(k, r)
    if total > max_subsets:
        raise IntractableError(f"{total} column subsets exceed the cap of {max_subsets}")
    A, b = full.A, full.b
    out: list[MinimalSolution] = []
    for combos in _iter_combos(k, r):
        xs = _solve_batch(A, b, combos)
        good = np.all(xs >= -NEG_TOL, axis=1)
        for c, x in zip(combos[good], xs[good]):
            x = np.clip(x, 0.0, None)
            out.append(MinimalSolution(tuple(int(i) for i in c), tuple(full.columns[i] for i in c), x))
            if limit is not None and len(out) >= limit:
                return out
    return out


def subsolution_mass(problem: TotalBeliefProblem, sol: MinimalSolution, E: int) -> dict[int, float]:
    """Masks and (unweighted) masses of a subproblem solution."""
    cells = tuple(i for i in range(problem.n_cells) if E >> i & 1)
    focal = [problem.cell_focal(i) for i in cells]
    out: dict[int, float] = {}
    for choice, v in zip(sol.choices, sol.x):
        mask = 0
        for f, j in zip(focal, choice):
            mask |= f[j]
        out[mask] = out.get(mask, 0.0) + float(v)
    return out


def enumerate_special_solutions(problem: TotalBeliefProblem, limit: int | None = None) -> list[MassFunction]:
    """All combinations of minimal subsolutions, weighted by the prior.

    Requires a prior with pairwise disjoint focal sets.
    """
    if not problem.has_disjoint_prior():
        raise PreconditionError("the prior's focal sets overlap; use enumerate_vertex_solutions")
    per_E = []
    for E in problem.prior.focal:
        sols = enumerate_minimal_solutions(problem, E)
        per_E.append([(E, subsolution_mass(problem, s, E)) for s in sols])
    out = []
    seen = set()
    for combo in itertools.product(*per_E):
        masses: dict[int, float] = {}
        for E, sub in combo:
            w = problem.prior[E]
            for k, v in sub.items():
                masses[k] = masses.get(k, 0.0) + w * v
        m = MassFunction(problem.fine, masses)
        key = tuple((k, round(v, 12)) for k, v in m.items())
        if key in seen:
            continue
        seen.add(key)
        out.append(m)
        if limit is not None and len(out) >= limit:
            break
    return out


def enumerate_vertex_solutions(
    problem: TotalBeliefProblem,
    limit: int | None = None,
    max_subsets: int = MAX_SUBSETS,
) -> list[MassFunction]:
    """Basic nonnegative solutions of the full constraint system.

    Works for any prior. Returns only the canonical solution when the
    number of column subsets exceeds ``max_subsets``.
    """
    system = build_constraint_system(problem)
    A, b = system.A, system.b
    r = system.rank
    k = system.unknown_count
    if math.comb(k, r) > max_subsets:
        return [construct_total(problem)]
    # independent rows via pivoted QR of the transpose
    _, _, piv = scipy.linalg.qr(A.T, pivoting=True, mode="economic")
    rows = np.sort(piv[:r])
    Ar, br = A[rows], b[rows]
    out = []
    seen = set()
    for combos in _iter_combos(k, r):
        xs = _solve_batch(Ar, br, combos)
        good = np.all(xs >= -NEG_TOL, axis=1)
        for c, y in zip(combos[good], xs[good]):
            x = np.zeros(k)
            x[c] = np.clip(y, 0.0, None)
            if system.residual(x) > 1e-9:
                continue
            key = tuple(np.round(x, 12))
            if key in seen:
                continue
            seen.add(key)
            out.append(system.mass_function(x, problem.fine))
            if limit is not None and len(out) >= limit:
                return out
    return out


def in_convex_hull(point, vertices, tol: float = 1e-9) -> bool:
    """Whether ``point`` is a convex combination of ``vertices`` (rows)."""
    from scipy.optimize import nnls

    V = np.asarray(vertices, dtype=float)
    p = np.asarray(point, dtype=float)
    M = np.vstack([V.T, np.ones(V.shape[0])])
    rhs = np.concatenate([p, [1.0]])
    _, resid = nnls(M, rhs)
    return resid <= tol


# column substitution ---------------------------------------------------------------


@dataclass(frozen=True)
class SubstitutionResult:
    system: CandidateSolutionSystem
    old_x: np.ndarray
    new_x: np.ndarray
    replaced: int
    new_column: tuple
    companions: tuple
    selections: tuple
    checks: dict = field(default_factory=dict)

    @property
    def most_negative_before(self) -> float:
        return float(min(self.old_x.min(), 0.0))

    @property
    def most_negative_after(self) -> float:
        return float(min(self.new_x.min(), 0.0))


def _onehot(choice, sizes) -> np.ndarray:
    v = np.zeros(sum(sizes))
    off = 0
    for j, n in zip(choice, sizes):
        v[off + j] = 1.0
        off += n
    return v


def _as_choice(v: np.ndarray, sizes) -> tuple | None:
    """Choice vector if ``v`` has exactly one unit entry per cell block."""
    out = []
    off = 0
    for n in sizes:
        block = v[off : off + n]
        if not (np.all((np.abs(block) < 1e-9) | (np.abs(block - 1.0) < 1e-9)) and abs(block.sum() - 1.0) < 1e-9):
            return None
        out.append(int(np.argmax(block)))
        off += n
    return tuple(out)


def column_substitution(system: CandidateSolutionSystem, column_index: int, tol: float = 1e-12) -> SubstitutionResult:
    """Replace a column carrying a negative solution component.

    Searches companion sets ``C`` (covering every component of the column,
    ``2 <= |C| <= N``) and selection sets ``S`` with ``|S| = |C| - 2`` such
    that ``e' = -e + sum_C - sum_S`` is a new admissible column, then
    re-solves. The four predicted component effects are checked against
    the re-solved system and reported in ``checks``.

    Raises
    ------
    PreconditionError
        If the component of ``column_index`` is not negative.
    NoAdmissibleSubstitution
        If no companion cover with a complete selection set exists.
    """
    x = system.solve()
    s = float(x[column_index])
    if not s < 0:
        raise PreconditionError("the chosen column has a nonnegative solution component")
    sizes = system.sizes
    N = len(sizes)
    e = system.columns[column_index]
    oh = {c: _onehot(c, sizes) for c in system.columns}
    others = [i for i in range(len(system.columns)) if i != column_index]
    existing = set(system.columns)
    for size_c in range(2, N + 1):
        for comp in itertools.combinations(others, size_c):
            cover = all(any(system.columns[i][k] == e[k] for i in comp) for k in range(N))
            if not cover:
                continue
            base = -oh[e] + sum(oh[system.columns[i]] for i in comp)
            rest = [i for i in others if i not in comp]
            for sel in itertools.combinations(rest, size_c - 2):
                v = base - sum((oh[system.columns[i]] for i in sel), np.zeros_like(base))
                new = _as_choice(v, sizes)
                if new is None or new in existing:
                    continue
                cols = list(system.columns)
                cols[column_index] = new
                new_sys = system.with_columns(cols)
                try:
                    new_x = new_sys.solve()
                except np.linalg.LinAlgError:
                    continue
                expected = x.copy()
                expected[column_index] = -s
                for i in comp:
                    expected[i] = x[i] + s
                for i in sel:
                    expected[i] = x[i] - s
                untouched = [i for i in others if i not in comp and i not in sel]
                checks = {
                    "new_component": abs(new_x[column_index] + s) <= 1e-9,
                    "companions_decreased": all(abs(new_x[i] - (x[i] + s)) <= 1e-9 for i in comp),
                    "selections_increased": all(abs(new_x[i] - (x[i] - s)) <= 1e-9 for i in sel),
                    "others_unchanged": all(abs(new_x[i] - x[i]) <= 1e-9 for i in untouched),
                }
                return SubstitutionResult(new_sys, x, new_x, column_index, new, comp, sel, checks)
    raise NoAdmissibleSubstitution(f"column {e} admits no companion cover with a complete selection")


# random instances ------------------------------------------------------------------


def random_problem(
    rng: np.random.Generator,
    n_coarse: int = 3,
    max_cell: int = 3,
    max_focal: int = 3,
    prior: str = "full",
) -> TotalBeliefProblem:
    """Random problem for property tests.

    ``prior`` is ``'full'`` (every nonempty coarse subset focal),
    ``'random'`` (random focal sets), ``'bayesian'`` or ``'disjoint'``.
    """
    coarse = Frame([f"w{i + 1}" for i in range(n_coarse)])
    cells = {}
    fine_labels = []
    for i, w in enumerate(coarse.labels):
        size = int(rng.integers(1, max_cell + 1))
        labs = [f"t{i + 1}_{j + 1}" for j in range(size)]
        cells[w] = labs
        fine_labels.extend(labs)
    fine = Frame(fine_labels)
    rho = Refining(coarse, fine, cells)
    conds = []
    for i, w in enumerate(coarse.labels):
        cf = rho.cell_frame(i)
        k = int(rng.integers(1, min(max_focal, (1 << cf.size) - 1) + 1))
        conds.append(MassFunction.random(cf, rng, n_focal=k))
    if prior == "full":
        m0 = MassFunction.random(coarse, rng)
    elif prior == "random":
        k = int(rng.integers(1, (1 << n_coarse)))
        m0 = MassFunction.random(coarse, rng, n_focal=k)
        covered = 0
        for f in m0.focal:
            covered |= f
        if covered != coarse.full:
            # every coarse outcome needs positive prior plausibility
            masses = {f: 0.5 * v for f, v in m0.items()}
            masses[coarse.full] = masses.get(coarse.full, 0.0) + 0.5
            m0 = MassFunction(coarse, masses)
    elif prior == "bayesian":
        m0 = MassFunction.bayesian(coarse, rng.dirichlet(np.ones(n_coarse)))
    elif prior == "disjoint":
        blocks = rng.integers(0, n_coarse, size=n_coarse)
        masks = {}
        for i, bl in enumerate(blocks):
            masks[int(bl)] = masks.get(int(bl), 0) | (1 << i)
        w = rng.dirichlet(np.ones(len(masks)))
        m0 = MassFunction(coarse, {mk: float(v) for mk, v in zip(masks.values(), w)})
    else:
        raise ValueError(f"unknown prior kind {prior!r}")
    return TotalBeliefProblem(rho, m0, tuple(conds))


def example_problem() -> TotalBeliefProblem:
    """Three-cell instance with 2, 1 and 2 conditional focal elements.

    The cells are ``{a1, a2}``, ``{b1}`` and ``{c1, c2}``; conditional 1 is
    ``{a1}: 1/2, {a2}: 1/2``, conditional 2 is ``{b1}: 1`` and conditional 3
    is ``{c1}: 1/3, {c1, c2}: 2/3``. The prior gives ``1/16`` to each
    singleton, ``2/16`` to ``{w1, w2}``, ``4/16`` to ``{w2, w3}``, ``3/16``
    to ``{w1, w3}`` and ``1/4`` to the whole coarse frame.
    """
    coarse = Frame(["w1", "w2", "w3"])
    fine = Frame(["a1", "a2", "b1", "c1", "c2"])
    rho = Refining(coarse, fine, {"w1": ["a1", "a2"], "w2": ["b1"], "w3": ["c1", "c2"]})
    m1 = MassFunction.from_sets(rho.cell_frame(0), {("a1",): 0.5, ("a2",): 0.5})
    m2 = MassFunction.from_sets(rho.cell_frame(1), {("b1",): 1.0})
    m3 = MassFunction.from_sets(rho.cell_frame(2), {("c1",): 1 / 3, ("c1", "c2"): 2 / 3})
    m0 = MassFunction.from_sets(
        coarse,
        {
            ("w1",): 1 / 16,
            ("w2",): 1 / 16,
            ("w3",): 1 / 16,
            ("w1", "w2"): 2 / 16,
            ("w2", "w3"): 4 / 16,
            ("w1", "w3"): 3 / 16,
            ("w1", "w2", "w3"): 1 / 4,
        },
    )
    return TotalBeliefProblem(rho, m0, (m1, m2, m3))
