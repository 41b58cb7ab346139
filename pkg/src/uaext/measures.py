"""Annihilating measures, operator adjoints on measures, Jensen checks.

The annihilator of a system is the null space of the transposed
evaluation matrix; its basis is orthonormal with a canonical phase so
repeated runs produce identical weight vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .funcsys import FunctionSystem, FunctionTable, project_coefficients
from .space import Measure, SUPPORT_TOL

ANNIH_TOL = 1e-10
JENSEN_TOL = 1e-9
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class AnnihilatorBasis:
    system: FunctionSystem
    measures: tuple  # of Measure

    @property
    def dim(self) -> int:
        return len(self.measures)

    def weight_matrix(self) -> np.ndarray:
        if not self.measures:
            return np.zeros((self.system.space.size, 0), dtype=complex)
        return np.column_stack([m.weights for m in self.measures])


def _canonical_phase(vec: np.ndarray) -> np.ndarray:
    mags = np.abs(vec)
    k = int(np.argmax(mags > mags.max() * (1 - 1e-12)))
    pivot = vec[k]
    if abs(pivot) == 0.0:
        return vec
    return vec * (abs(pivot) / pivot)


def annihilator_basis(system: FunctionSystem) -> AnnihilatorBasis:
    """Orthonormal basis of measures killing every basis member."""
    n = system.space.size
    if system.dim == 0:
        mat = np.zeros((1, n), dtype=complex)
    else:
        mat = system.basis_matrix.T  # rows integrate the basis members
    u, s, vh = np.linalg.svd(mat, full_matrices=True)
    smax = s.max(initial=0.0)
    rank = int(np.sum(s > system.rank_tol * max(smax, 1.0)))
    null = vh[rank:].conj().T
    measures = tuple(Measure(space=system.space, weights=_canonical_phase(null[:, j]))
                     for j in range(null.shape[1]))
    return AnnihilatorBasis(system=system, measures=measures)


def adjoint_measure(operator, lam: Measure) -> Measure:
    """The measure representing lam∘T: weight the operator's row measures
    by lam and sum.  Integrating any source table against the result
    equals integrating the operator image against lam."""
    if lam.space.size != operator.target_space.size:
        raise InputError("functional lives on a different space than the operator target")
    w = np.zeros(operator.source_space.size, dtype=complex)
    for x, row in enumerate(operator.rows):
        lx = lam.weights[x]
        if lx != 0.0:
            w = w + lx * row.weights
    return Measure(space=operator.source_space, weights=w)


def evaluation_functional(system: FunctionSystem, x: int) -> np.ndarray:
    """Values of the basis members at a point: the functional f -> f(x)."""
    return np.array([t.values[x] for t in system.basis], dtype=complex)


def default_jensen_probes(system: FunctionSystem):
    probes = list(system.basis)
    gens = system.generators
    for i in range(len(gens)):
        for j in range(i, len(gens)):
            probes.append(FunctionTable(space=system.space,
                                        values=gens[i].values * gens[j].values,
                                        name=None))
    return probes


def jensen_check(mu: Measure, phi_values, system: FunctionSystem,
                 probes=None, tol: float = JENSEN_TOL,
                 in_span_tol: float = 1e-8) -> dict:
    """Verify log|phi(f)| <= integral of log|f| against mu for each probe.

    Probes outside the span cannot be evaluated through phi and are
    skipped (counted in the report).  A probe vanishing on a positively
    weighted point forces the right side to -inf, so the check then
    demands phi(f) = 0.
    """
    if not mu.is_probability():
        raise InputError("jensen_check needs a probability measure")
    phi = np.asarray(phi_values, dtype=complex)
    if phi.shape != (system.dim,):
        raise InputError("functional values length %d != system dimension %d"
                         % (phi.size, system.dim))
    if probes is None:
        probes = default_jensen_probes(system)
    w = mu.weights.real
    active = w > SUPPORT_TOL
    worst = float("-inf")
    used = skipped = 0
    for f in probes:
        coeffs, resid = project_coefficients(system, f)
        scale = 1.0 + float(np.abs(f.values).max())
        if resid > in_span_tol * scale:
            skipped += 1
            continue
        used += 1
        value = complex(np.dot(coeffs, phi))
        mods = np.abs(f.values)
        if np.any(active & (mods < _LOG_FLOOR)):
            rhs = float("-inf")
        else:
            rhs = float(np.sum(w[active] * np.log(mods[active])))
        lhs = float("-inf") if abs(value) < _LOG_FLOOR else math.log(abs(value))
        if rhs == float("-inf"):
            violation = 0.0 if abs(value) <= 1e-12 else float("inf")
        elif lhs == float("-inf"):
            violation = float("-inf")
        else:
            violation = lhs - rhs
        worst = max(worst, violation)
    return {"check": "jensen", "holds": worst <= tol,
            "worst_violation": worst, "probe_count": used, "skipped": skipped}
