"""Dense linear programming kernel.

Solves  maximize c.x  subject to  A x = b,  l <= x <= u  with a two-phase
tableau simplex using Bland's rule, so identical inputs always take the
same pivot sequence.  A brute-force vertex enumerator doubles as the test
oracle.  Everything is dense float64; problem sizes here are desk scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, SolverFailure

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11

_ENUM_MAX_VARS = 12


@dataclass(frozen=True)
class LpProblem:
    """maximize objective.x  s.t.  eq_matrix x = eq_rhs, bounds respected.

    Bounds may be -inf / +inf.  Complex constraints never appear here;
    callers pre-split them into real and imaginary rows.
    """

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        a = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        b = np.asarray(self.eq_rhs, dtype=float).ravel()
        lo = np.asarray(self.lower_bounds, dtype=float).ravel()
        hi = np.asarray(self.upper_bounds, dtype=float).ravel()
        n = c.size
        if a.size == 0:
            a = np.zeros((0, n))
        if a.shape[0] != b.size:
            raise InputError("eq_matrix row count %d != rhs length %d" % (a.shape[0], b.size))
        if a.shape[1] != n:
            raise InputError("eq_matrix column count %d != objective length %d" % (a.shape[1], n))
        if lo.size != n or hi.size != n:
            raise InputError("bounds length mismatch")
        if np.any(lo > hi):
            raise InputError("lower bound exceeds upper bound at index %d"
                             % int(np.argmax(lo > hi)))
        for name, arr in (("objective", c), ("eq_matrix", a), ("eq_rhs", b)):
            if not np.all(np.isfinite(arr)):
                raise InputError("%s contains non-finite entries" % name)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "eq_matrix", a)
        object.__setattr__(self, "eq_rhs", b)
        object.__setattr__(self, "lower_bounds", lo)
        object.__setattr__(self, "upper_bounds", hi)

    @property
    def num_vars(self) -> int:
        return self.objective.size


@dataclass(frozen=True)
class LpResult:
    status: str                       # "optimal" | "infeasible" | "unbounded"
    solution: np.ndarray | None = None
    objective_value: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass
class _StandardForm:
    """maximize c.y  s.t.  A y = b, y >= 0, plus the recipe to map y back."""

    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    # recipe[j] = list of (y-index, scale, shift-contribution handled via offset)
    terms: list = field(default_factory=list)
    offsets: np.ndarray | None = None
    const_obj: float = 0.0


def _to_standard_form(p: LpProblem) -> _StandardForm:
    m, n = p.eq_matrix.shape
    cols = []          # columns of the standard-form matrix
    cvec = []
    terms = [None] * n
    offsets = np.zeros(n)
    extra_rows = []    # (y_index, slack_index, range_value) for doubly bounded vars
    const_obj = 0.0
    rhs = p.eq_rhs.copy()

    def add_col(col, cost):
        cols.append(col)
        cvec.append(cost)
        return len(cols) - 1

    for j in range(n):
        lo, hi = p.lower_bounds[j], p.upper_bounds[j]
        aj = p.eq_matrix[:, j]
        if np.isfinite(lo):
            k = add_col(aj.copy(), p.objective[j])
            terms[j] = [(k, 1.0)]
            offsets[j] = lo
            if lo != 0.0:
                rhs -= aj * lo
                const_obj += p.objective[j] * lo
            if np.isfinite(hi):
                s = add_col(np.zeros(m), 0.0)
                extra_rows.append((k, s, hi - lo))
        elif np.isfinite(hi):
            k = add_col(-aj, -p.objective[j])
            terms[j] = [(k, -1.0)]
            offsets[j] = hi
            rhs -= aj * hi
            const_obj += p.objective[j] * hi
        else:
            kp = add_col(aj.copy(), p.objective[j])
            km = add_col(-aj, -p.objective[j])
            terms[j] = [(kp, 1.0), (km, -1.0)]

    ncol = len(cols)
    nrow = m + len(extra_rows)
    a = np.zeros((nrow, ncol))
    for k, col in enumerate(cols):
        a[:m, k] = col
    b = np.concatenate([rhs, np.zeros(len(extra_rows))])
    for i, (k, s, rng) in enumerate(extra_rows):
        a[m + i, k] = 1.0
        a[m + i, s] = 1.0
        b[m + i] = rng
    return _StandardForm(c=np.array(cvec), a=a, b=b, terms=terms,
                         offsets=offsets, const_obj=const_obj)


_REFACTOR_EVERY = 30


class _Tableau:
    """Simplex working state over an extended matrix [A | b].

    The tableau is updated by pivoting but re-derived from the original
    data (B^{-1}[A | b] via a fresh LU solve) every few iterations and
    before any optimal/unbounded verdict, so rounding errors cannot
    accumulate across long pivot sequences.
    """

    def __init__(self, a_ext, b, n_real):
        self.a_ext = a_ext
        self.b = b
        self.n_real = n_real
        self.m, self.n = a_ext.shape
        self.basis = None
        self.tab = None

    def refactor(self):
        bmat = self.a_ext[:, self.basis]
        rhs = np.hstack([self.a_ext, self.b[:, None]])
        try:
            self.tab = np.linalg.solve(bmat, rhs)
        except np.linalg.LinAlgError:
            # nearly singular basis: fall back to least squares, the next
            # pivots will repair it
            self.tab = np.linalg.lstsq(bmat, rhs, rcond=None)[0]

    def reduced_costs(self, cost):
        rc = cost - cost[self.basis] @ self.tab[:, : self.n]
        rc[self.basis] = 0.0
        return rc

    def pivot(self, leave, entering):
        piv = self.tab[leave, entering]
        self.tab[leave, :] /= piv
        col = self.tab[:, entering].copy()
        col[leave] = 0.0
        self.tab -= np.outer(col, self.tab[leave, :])
        self.basis[leave] = entering


def _harris_leave(state: _Tableau, rows, col, feas_tol):
    """Two-pass ratio test: first the tolerance-relaxed ratio bound, then
    the numerically largest pivot among candidates inside the bound.
    Ties break on the smallest basis variable, keeping runs deterministic.
    """
    rhs = np.maximum(state.tab[rows, -1], 0.0)
    slack = feas_tol * (1.0 + np.abs(rhs))
    theta = ((rhs + slack) / col[rows]).min()
    inside = rows[rhs / col[rows] <= theta]
    piv = col[inside]
    biggest = piv.max()
    cand = inside[piv >= biggest * (1.0 - 1e-9)]
    return int(cand[np.argmin(state.basis[cand])])


def _bland_simplex(state: _Tableau, cost, opt_tol, pivot_tol, budget,
                   allow_artificial_entering, feas_tol=FEAS_TOL):
    """Deterministic simplex loop: lowest eligible index enters (Bland),
    the leaving row comes from a two-pass ratio test that prefers large
    pivot entries, and the tableau is refactorized from original data
    every few pivots and before any verdict.  Returns "optimal" or
    "unbounded"; raises SolverFailure when the budget runs out or the
    basis degrades beyond repair."""
    n_enter = state.n if allow_artificial_entering else state.n_real
    since_refactor = 0
    for _ in range(budget):
        if since_refactor >= _REFACTOR_EVERY:
            state.refactor()
            since_refactor = 0
            floor = -1e-6 * (1.0 + float(np.abs(state.b).max(initial=0.0)))
            if float(state.tab[:, -1].min(initial=0.0)) < floor:
                raise SolverFailure("numerically corrupted basis: basic value "
                                    "%.3e" % float(state.tab[:, -1].min()))
        rc = state.reduced_costs(cost)
        entering = -1
        for j in range(n_enter):
            if rc[j] > opt_tol:
                entering = j
                break
        if entering < 0:
            if since_refactor > 0:
                state.refactor()
                since_refactor = 0
                rc = state.reduced_costs(cost)
                entering = -1
                for j in range(n_enter):
                    if rc[j] > opt_tol:
                        entering = j
                        break
            if entering < 0:
                return "optimal"
        col = state.tab[:, entering]
        rows = np.nonzero(col > pivot_tol)[0]
        if rows.size == 0:
            if since_refactor > 0:
                state.refactor()
                since_refactor = 0
                continue
            return "unbounded"
        leave = _harris_leave(state, rows, col, feas_tol)
        state.pivot(leave, entering)
        since_refactor += 1
    raise SolverFailure("pivot budget exhausted after %d iterations" % budget)


def solve_lp(problem: LpProblem, feas_tol: float = FEAS_TOL,
             opt_tol: float = OPT_TOL) -> LpResult:
    """Two-phase simplex with Bland's rule; deterministic across runs."""
    sf = _to_standard_form(problem)
    nrow, ncol = sf.a.shape

    a = sf.a.copy()
    b = sf.b.copy()
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0
    a_ext = np.hstack([a, np.eye(nrow)])
    state = _Tableau(a_ext, b, n_real=ncol)
    state.basis = np.arange(ncol, ncol + nrow)
    state.refactor()
    cost1 = np.concatenate([np.zeros(ncol), -np.ones(nrow)])
    budget = 500 + 50 * (nrow + ncol)
    _bland_simplex(state, cost1, opt_tol, PIVOT_TOL, budget,
                   allow_artificial_entering=True)
    scale = 1.0 + np.abs(b).max(initial=0.0)
    values = state.tab[:, -1]
    phase1_obj = -float(values[state.basis >= ncol].sum())
    if phase1_obj < -feas_tol * scale:
        return LpResult(status="infeasible")

    # Drive leftover zero-level artificials out of the basis; rows with no
    # real-column support are redundant and leave with the artificial kept
    # basic at zero (harmless: entering is restricted to real columns and a
    # redundant row is all zeros there, so its value never moves).
    for i in range(nrow):
        if state.basis[i] >= ncol:
            row = state.tab[i, :ncol]
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > 1e-8:  # only on solid pivots; tiny rows are redundant
                state.pivot(i, j)
    state.refactor()

    cost2 = np.concatenate([sf.c, np.zeros(nrow)])
    status = _bland_simplex(state, cost2, opt_tol, PIVOT_TOL, budget,
                            allow_artificial_entering=False)
    if status == "unbounded":
        return LpResult(status="unbounded")

    y = np.zeros(ncol)
    for i in range(nrow):
        if state.basis[i] < ncol:
            y[state.basis[i]] = max(0.0, state.tab[i, -1])
    x = sf.offsets.copy()
    for j, parts in enumerate(sf.terms):
        for k, scale_k in parts:
            x[j] += scale_k * y[k]
    obj = float(problem.objective @ x)
    return LpResult(status="optimal", solution=x, objective_value=obj)


def enumerate_vertices(problem: LpProblem):
    """All basic feasible solutions of the bounded polytope, by brute force.

    Basic sets are column subsets of the independent equality rows; every
    nonbasic variable sits at one of its finite bounds.  Intended purely as
    an oracle: the best returned objective equals the LP optimum whenever
    the problem has one.  Guarded to <= 12 variables.
    """
    n = problem.num_vars
    if n > _ENUM_MAX_VARS:
        raise InputError("enumerate_vertices limited to %d variables, got %d"
                         % (_ENUM_MAX_VARS, n))
    a_full = problem.eq_matrix
    b_full = problem.eq_rhs
    lo, hi = problem.lower_bounds, problem.upper_bounds

    # independent rows via partially pivoted elimination
    work = np.hstack([a_full, b_full[:, None]]).astype(float)
    rows = []
    col_used = set()
    for _ in range(min(work.shape[0], n)):
        best_r, best_c, best_v = -1, -1, 0.0
        for r in range(work.shape[0]):
            if r in rows:
                continue
            for c in range(n):
                if c in col_used:
                    continue
                if abs(work[r, c]) > max(abs(best_v), PIVOT_TOL):
                    best_r, best_c, best_v = r, c, work[r, c]
        if best_r < 0:
            break
        rows.append(best_r)
        col_used.add(best_c)
        for r in range(work.shape[0]):
            if r != best_r:
                work[r, :] -= work[r, best_c] / best_v * work[best_r, :]
    rank = len(rows)
    a = a_full[sorted(rows)]
    b = b_full[sorted(rows)]

    tol = 1e-9 * (1.0 + np.abs(b_full).max(initial=0.0))
    seen = {}
    for basic in itertools.combinations(range(n), rank):
        nonbasic = [j for j in range(n) if j not in basic]
        choices = []
        ok = True
        for j in nonbasic:
            opts = [v for v in (lo[j], hi[j]) if np.isfinite(v)]
            if not opts:
                ok = False
                break
            choices.append(sorted(set(opts)))
        if not ok:
            continue
        a_b = a[:, list(basic)]
        for vals in itertools.product(*choices):
            rhs = b.copy()
            for j, v in zip(nonbasic, vals):
                rhs -= a[:, j] * v
            x = np.zeros(n)
            for j, v in zip(nonbasic, vals):
                x[j] = v
            if rank:
                try:
                    xb = np.linalg.solve(a_b, rhs)
                except np.linalg.LinAlgError:
                    continue
                x[list(basic)] = xb
            if np.any(x < lo - tol) or np.any(x > hi + tol):
                continue
            if a_full.shape[0] and np.abs(a_full @ x - b_full).max() > tol:
                continue
            key = tuple(np.round(x, 9))
            if key not in seen:
                seen[key] = (x, float(problem.objective @ x))
    return [seen[k] for k in sorted(seen)]
