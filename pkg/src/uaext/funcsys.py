"""Degree-capped function systems on finite spaces.

A system is the span of all monomials in its generators up to a total
degree cap, reduced to a numerically independent basis.  The cap models
uniform closure at finite resolution: a genuinely closed separating
algebra on a finite grid would collapse to the full function space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .space import FiniteSpace

RANK_TOL = 1e-9
SPAN_TOL = 1e-10
INTERP_TOL = 1e-8
SEPARATION_TOL = 1e-10


@dataclass(frozen=True)
class FunctionTable:
    space: FiniteSpace
    values: np.ndarray  # complex, one per point
    name: str | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.space.size,):
            raise InputError("table length %d != point count %d"
                             % (v.size, self.space.size))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def table(space: FiniteSpace, values, name=None) -> FunctionTable:
    return FunctionTable(space=space, values=np.asarray(values, dtype=complex), name=name)


def coordinate_table(space: FiniteSpace, k: int = 0, name: str = "z") -> FunctionTable:
    return table(space, space.coords[:, k], name=name)


def constant_table(space: FiniteSpace, value=1.0, name: str = "1") -> FunctionTable:
    return table(space, np.full(space.size, value, dtype=complex), name=name)


@dataclass(frozen=True)
class FunctionSystem:
    space: FiniteSpace
    basis: tuple                # FunctionTable, numerically independent
    generators: tuple           # FunctionTable
    degree_cap: int
    rank_tol: float
    separates_points: bool
    q: np.ndarray = None        # orthonormal column basis of the span
    r: np.ndarray = None        # upper triangular, basis_matrix = q @ r
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def basis_matrix(self) -> np.ndarray:
        return np.column_stack([t.values for t in self.basis])


def _orthonormalize(columns, rank_tol):
    """Greedy rank-revealing selection in the given column order.

    Returns (kept indices, Q, R) with two rounds of classical
    Gram-Schmidt per column for stability.
    """
    kept, qcols, rcols = [], [], []
    norms = [float(np.linalg.norm(v)) for v in columns]
    floor = rank_tol * max(norms, default=0.0)
    for idx, v in enumerate(columns):
        nv = norms[idx]
        if nv <= floor or nv == 0.0:
            continue
        r = np.zeros(len(qcols) + 1, dtype=complex)
        w = v.astype(complex)
        for _ in range(2):
            for k, qk in enumerate(qcols):
                c = np.vdot(qk, w)
                r[k] += c
                w = w - c * qk
        res = np.linalg.norm(w)
        if res > rank_tol * nv:
            r[len(qcols)] = res
            kept.append(idx)
            qcols.append(w / res)
            rcols.append(r)
    d = len(qcols)
    q = np.column_stack(qcols) if d else np.zeros((len(columns[0]) if columns else 0, 0), complex)
    rmat = np.zeros((d, d), dtype=complex)
    for j, col in enumerate(rcols):
        rmat[: j + 1, j] = col[: j + 1]
    return kept, q, rmat


def _monomial_exponents(n_gens, cap):
    """Exponent multisets ordered by total degree, then lexicographically."""
    out = [()]
    for d in range(1, cap + 1):
        out.extend(itertools.combinations_with_replacement(range(n_gens), d))
    return out


def _monomial_name(combo, gen_names):
    if not combo:
        return "1"
    parts = []
    for g, grp in itertools.groupby(combo):
        e = len(list(grp))
        parts.append(gen_names[g] if e == 1 else "%s^%d" % (gen_names[g], e))
    return "*".join(parts)


def _check_separation(columns_matrix, tol=SEPARATION_TOL):
    """True iff every point pair differs by > tol in some basis member.

    Project the per-point value vectors onto a fixed direction; only
    points whose projections are within the violation diameter need the
    exact comparison, which keeps generic grids near O(n log n).
    """
    n, d = columns_matrix.shape
    if n < 2:
        return True
    if d == 0:
        return False
    rng = np.random.default_rng(1234321)
    h = rng.normal(size=2 * d)
    h /= np.linalg.norm(h)
    flat = np.hstack([columns_matrix.real, columns_matrix.imag])
    proj = flat @ h
    window = tol * np.sqrt(2.0 * d) + 1e-15
    order = np.argsort(proj, kind="stable")
    for a in range(n - 1):
        i = order[a]
        b = a + 1
        while b < n and proj[order[b]] - proj[i] <= window:
            j = order[b]
            if np.abs(columns_matrix[i] - columns_matrix[j]).max() <= tol:
                return False
            b += 1
    return True


def generate_system(space: FiniteSpace, generators, degree_cap: int,
                    rank_tol: float = RANK_TOL) -> FunctionSystem:
    """Span of {1} and all generator monomials of total degree <= cap."""
    gens = list(generators)
    if not gens:
        raise InputError("need at least one generator")
    for g in gens:
        if g.space.size != space.size:
            raise InputError("generator %r lives on a different space" % (g.name,))
    if degree_cap < 1:
        raise InputError("degree cap must be >= 1")
    gen_names = [g.name or "g%d" % i for i, g in enumerate(gens)]
    gen_vals = [g.values for g in gens]
    combos = _monomial_exponents(len(gens), degree_cap)
    columns = []
    for combo in combos:
        v = np.ones(space.size, dtype=complex)
        for gi in combo:
            v = v * gen_vals[gi]
        columns.append(v)
    kept, q, r = _orthonormalize(columns, rank_tol)
    basis = tuple(FunctionTable(space=space, values=columns[i],
                                name=_monomial_name(combos[i], gen_names))
                  for i in kept)
    sep = _check_separation(np.column_stack([t.values for t in basis]) if basis
                            else np.zeros((space.size, 0), complex))
    return FunctionSystem(space=space, basis=basis, generators=tuple(gens),
                          degree_cap=degree_cap, rank_tol=rank_tol,
                          separates_points=sep, q=q, r=r)


def full_system(space: FiniteSpace) -> FunctionSystem:
    """C(grid): indicator tables at every point."""
    eye = np.eye(space.size, dtype=complex)
    basis = tuple(FunctionTable(space=space, values=eye[:, i],
                                name="e[%s]" % space.labels[i])
                  for i in range(space.size))
    return FunctionSystem(space=space, basis=basis, generators=basis,
                          degree_cap=1, rank_tol=RANK_TOL,
                          separates_points=space.size >= 1,
                          q=eye.copy(), r=np.eye(space.size, dtype=complex))


def _system_from_tables(space, tables, generators, degree_cap, rank_tol, meta=None):
    kept, q, r = _orthonormalize([t.values for t in tables], rank_tol)
    basis = tuple(tables[i] for i in kept)
    sep = _check_separation(np.column_stack([t.values for t in basis]) if basis
                            else np.zeros((space.size, 0), complex))
    return FunctionSystem(space=space, basis=basis, generators=tuple(generators),
                          degree_cap=degree_cap, rank_tol=rank_tol,
                          separates_points=sep, q=q, r=r, meta=meta or {})


def _values_of(system: FunctionSystem, f) -> np.ndarray:
    if isinstance(f, FunctionTable):
        if f.space.size != system.space.size:
            raise InputError("table lives on a different space")
        return f.values
    coeffs = np.asarray(f, dtype=complex)
    if coeffs.shape != (system.dim,):
        raise InputError("coefficient vector length %d != system dimension %d"
                         % (coeffs.size, system.dim))
    return system.basis_matrix @ coeffs


def sup_norm(f, system: FunctionSystem | None = None) -> float:
    """Max modulus over the grid; coefficient input is evaluated first."""
    if isinstance(f, FunctionTable):
        return float(np.abs(f.values).max())
    if system is None:
        raise InputError("coefficient input needs the owning system")
    return float(np.abs(_values_of(system, f)).max())


def span_residual(system: FunctionSystem, f) -> float:
    """Euclidean distance from f to the basis span."""
    if isinstance(f, FunctionTable):
        if f.space.size != system.space.size:
            raise InputError("table lives on a different space")
        v = f.values
    else:
        v = np.asarray(f, dtype=complex)
        if v.shape != (system.space.size,):
            raise InputError("value vector length mismatch")
    y = system.q.conj().T @ v
    return float(np.linalg.norm(v - system.q @ y))


def project_coefficients(system: FunctionSystem, f) -> tuple[np.ndarray, float]:
    """Coefficients in the (monomial) basis plus projection residual."""
    if isinstance(f, FunctionTable):
        v = f.values
    else:
        v = np.asarray(f, dtype=complex)
    if v.shape != (system.space.size,):
        raise InputError("value vector length mismatch")
    y = system.q.conj().T @ v
    resid = float(np.linalg.norm(v - system.q @ y))
    if system.dim == 0:
        return np.zeros(0, dtype=complex), resid
    from numpy.linalg import solve
    coeffs = solve(system.r, y)
    return coeffs, resid


def restrict_system(system: FunctionSystem, subset) -> FunctionSystem:
    """Restriction to a point subset, re-reduced to an independent basis."""
    idx = _resolve_subset(system.space, subset)
    if not idx:
        raise InputError("empty restriction subset")
    sub = FiniteSpace(labels=tuple(system.space.labels[i] for i in idx),
                      coords=system.space.coords[idx, :])
    tables = [FunctionTable(space=sub, values=t.values[idx], name=t.name)
              for t in system.basis]
    gens = [FunctionTable(space=sub, values=g.values[idx], name=g.name)
            for g in system.generators]
    return _system_from_tables(sub, tables, gens, system.degree_cap,
                               system.rank_tol, meta=dict(system.meta))


def pullback_system(mapping, system: FunctionSystem) -> FunctionSystem:
    """Compose every table with the surjection; sup norms are preserved
    exactly because the map is onto."""
    if system.space.size != mapping.target.size:
        raise InputError("system does not live on the map's target")
    a = mapping.assignment
    src = mapping.source
    tables = [FunctionTable(space=src, values=t.values[a], name=t.name)
              for t in system.basis]
    gens = [FunctionTable(space=src, values=g.values[a], name=g.name)
            for g in system.generators]
    return _system_from_tables(src, tables, gens, system.degree_cap,
                               system.rank_tol, meta=dict(system.meta))


def pullback_table(mapping, t: FunctionTable) -> FunctionTable:
    if t.space.size != mapping.target.size:
        raise InputError("table does not live on the map's target")
    return FunctionTable(space=mapping.source, values=t.values[mapping.assignment],
                         name=t.name)


def _resolve_subset(space: FiniteSpace, subset):
    idx = []
    for p in subset:
        idx.append(space.index_of(p) if isinstance(p, str) else int(p))
    seen = set()
    out = []
    for i in idx:
        if not 0 <= i < space.size:
            raise InputError("point index %d out of range" % i)
        if i not in seen:
            seen.add(i)
            out.append(i)
    return out


def interpolation_feasible(system: FunctionSystem, on_set, off_set,
                           value_on: complex = 1.0,
                           tol: float = INTERP_TOL) -> dict:
    """Least-squares test for a member equal to value_on on one set and 0
    on the other.  Feasible iff the residual is below tol."""
    k_idx = _resolve_subset(system.space, on_set)
    e_idx = _resolve_subset(system.space, off_set)
    if not k_idx or not e_idx:
        raise InputError("both point sets must be non-empty")
    if set(k_idx) & set(e_idx):
        raise InputError("point sets overlap")
    bmat = system.basis_matrix
    rows = bmat[k_idx + e_idx, :]
    rhs = np.concatenate([np.full(len(k_idx), value_on, dtype=complex),
                          np.zeros(len(e_idx), dtype=complex)])
    coeffs, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    resid = float(np.linalg.norm(rows @ coeffs - rhs))
    return {"feasible": resid <= tol, "residual": resid, "witness": coeffs}
