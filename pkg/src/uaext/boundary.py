"""Choquet/Shilov boundary and peak sets through linear programming.

A point is in the Choquet set when no representing measure for its
evaluation can move any mass off the point.  On a finite grid the Shilov
boundary coincides with this set (closure is the identity), so one LP
family answers both questions.  Peak sets are certified through a
one-sided polygonal relaxation of the strict modulus constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, SolverFailure
from .funcsys import FunctionSystem, FunctionTable, _resolve_subset
from .lp import LpProblem, solve_lp
from .space import Measure

CHOQUET_TOL = 1e-6
PEAK_MARGIN = 1e-3
POLYGON_SIDES = 16


@dataclass(frozen=True)
class ChoquetReport:
    point: int
    label: str
    escaping_mass: float
    is_choquet: bool
    witness: Measure | None = None


def _representing_rows(system: FunctionSystem, x: int):
    """Equality rows pinning a probability measure that reproduces
    evaluation at x on every basis member (real and imaginary parts).

    The rows are built from the orthonormal span basis rather than the raw
    monomials: the constraint set is identical, but simplex bases stay
    well-conditioned for high degree caps.
    """
    n = system.space.size
    qmat = system.q
    rows = [np.ones(n)]
    rhs = [1.0]
    for k in range(system.dim):
        col = qmat[:, k]
        rows.append(col.real.copy())
        rhs.append(float(col[x].real))
        rows.append(col.imag.copy())
        rhs.append(float(col[x].imag))
    return np.vstack(rows), np.array(rhs)


def choquet_escape(system: FunctionSystem, x, choquet_tol: float = CHOQUET_TOL,
                   want_witness: bool = True) -> ChoquetReport:
    """Maximize the representing mass that escapes the point itself."""
    if isinstance(x, str):
        x = system.space.index_of(x)
    n = system.space.size
    if not 0 <= x < n:
        raise InputError("point index %d out of range" % x)
    a, b = _representing_rows(system, x)
    c = np.ones(n)
    c[x] = 0.0
    problem = LpProblem(objective=c, eq_matrix=a, eq_rhs=b,
                        lower_bounds=np.zeros(n),
                        upper_bounds=np.full(n, np.inf))
    result = solve_lp(problem)
    if result.status != "optimal":
        raise SolverFailure("escape program for point %r ended %s; the point "
                            "mass is always feasible"
                            % (system.space.labels[x], result.status))
    mass = min(1.0, max(0.0, float(result.objective_value)))
    witness = None
    if want_witness:
        witness = Measure(space=system.space,
                          weights=np.maximum(result.solution, 0.0).astype(complex))
    return ChoquetReport(point=int(x), label=system.space.labels[x],
                         escaping_mass=mass, is_choquet=mass <= choquet_tol,
                         witness=witness)


def choquet_scan(system: FunctionSystem, choquet_tol: float = CHOQUET_TOL,
                 want_witness: bool = False):
    return [choquet_escape(system, x, choquet_tol, want_witness)
            for x in range(system.space.size)]


def choquet_set(system: FunctionSystem, choquet_tol: float = CHOQUET_TOL) -> tuple:
    """Indices of all Choquet points; on a finite grid this is also the
    computed Shilov set."""
    return tuple(r.point for r in choquet_scan(system, choquet_tol)
                 if r.is_choquet)


def choquet_csv(reports) -> str:
    lines = ["label,escaping_mass,is_choquet"]
    for r in reports:
        lines.append("%s,%.17g,%s" % (r.label, r.escaping_mass,
                                      "true" if r.is_choquet else "false"))
    return "\n".join(lines) + "\n"


def peak_set_feasible(system: FunctionSystem, on_set, margin: float = PEAK_MARGIN,
                      polygon_sides: int = POLYGON_SIDES) -> dict:
    """Search for a member equal to 1 on the set whose values elsewhere lie
    in a regular polygon inscribed in the disk of radius 1 - margin.

    Feasible certifies a genuine peaking function at grid scale (the
    polygon sits inside the open unit disk).  Infeasible only means no
    witness at this margin and side count.
    """
    if not 0.0 < margin < 1.0:
        raise InputError("margin must lie in (0, 1)")
    if polygon_sides < 8:
        raise InputError("polygon needs at least 8 sides")
    e_idx = _resolve_subset(system.space, on_set)
    n = system.space.size
    if not e_idx or len(e_idx) >= n:
        raise InputError("peak set must be a non-empty proper subset")
    off_idx = [y for y in range(n) if y not in set(e_idx)]
    d = system.dim
    bmat = system.q  # orthonormal working basis keeps the LP well-conditioned
    radius = (1.0 - margin) * np.cos(np.pi / polygon_sides)
    n_slack = len(off_idx) * polygon_sides
    nvars = 2 * d + n_slack

    rows, rhs = [], []
    for p in e_idx:
        re_row = np.zeros(nvars)
        im_row = np.zeros(nvars)
        re_row[:d] = bmat[p].real
        re_row[d:2 * d] = -bmat[p].imag
        im_row[:d] = bmat[p].imag
        im_row[d:2 * d] = bmat[p].real
        rows.extend([re_row, im_row])
        rhs.extend([1.0, 0.0])
    slack = 0
    for y in off_idx:
        for j in range(polygon_sides):
            theta = 2.0 * np.pi * (j + 0.5) / polygon_sides
            ct, st = np.cos(theta), np.sin(theta)
            row = np.zeros(nvars)
            row[:d] = ct * bmat[y].real + st * bmat[y].imag
            row[d:2 * d] = -ct * bmat[y].imag + st * bmat[y].real
            row[2 * d + slack] = 1.0
            rows.append(row)
            rhs.append(radius)
            slack += 1
    lo = np.concatenate([np.full(2 * d, -np.inf), np.zeros(n_slack)])
    hi = np.full(nvars, np.inf)
    problem = LpProblem(objective=np.zeros(nvars), eq_matrix=np.vstack(rows),
                        eq_rhs=np.array(rhs), lower_bounds=lo, upper_bounds=hi)
    result = solve_lp(problem)
    if result.status == "unbounded":
        raise SolverFailure("feasibility program reported unbounded")
    if result.status != "optimal":
        return {"feasible": False, "witness": None, "witness_table": None}
    q_coeffs = result.solution[:d] + 1j * result.solution[d:2 * d]
    coeffs = np.linalg.solve(system.r, q_coeffs) if d else q_coeffs
    witness = FunctionTable(space=system.space, values=bmat @ q_coeffs,
                            name="peak_witness")
    return {"feasible": True, "witness": coeffs, "witness_table": witness}


def polygon_contains(values, margin: float = PEAK_MARGIN,
                     polygon_sides: int = POLYGON_SIDES,
                     tol: float = 1e-9) -> bool:
    """Whether complex values sit inside the peak-constraint polygon."""
    radius = (1.0 - margin) * np.cos(np.pi / polygon_sides)
    v = np.asarray(values, dtype=complex)
    for j in range(polygon_sides):
        theta = 2.0 * np.pi * (j + 0.5) / polygon_sides
        proj = np.cos(theta) * v.real + np.sin(theta) * v.imag
        if proj.max(initial=-np.inf) > radius + tol:
            return False
    return True
