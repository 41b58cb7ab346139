"""Extensions by adjoining roots of a monic polynomial over the base.

The extension space consists of pairs (x, z) with z a root of the
polynomial at x; the section operator averages over the root slots with
multiplicity weights, which keeps it stochastic even through branch
points.  Roots are sorted, never continuation-tracked: the constructions
need fiberwise sets, not global branch labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .averaging import (Certificate, Clause, ExtensionBundle, gce_certificate,
                        make_bundle, make_operator, _clause)
from .boundary import CHOQUET_TOL, choquet_set
from .errors import InputError, RootFindingError
from .funcsys import (FunctionSystem, FunctionTable, generate_system,
                      pullback_table, restrict_system, span_residual)
from .space import (FiniteSpace, Measure, MERGE_TOL, SurjectionMap,
                    make_surjection)

ROOT_TOL = 1e-10
COEFF_SPAN_TOL = 1e-9
VIETA_TOL = 1e-10


@dataclass(frozen=True)
class ColeSpec:
    """Monic polynomial of the given degree with coefficient tables drawn
    from the base system's span: constant term first, so the polynomial is
    coeffs[0] + coeffs[1] t + ... + t^degree."""

    base: FunctionSystem
    coefficients: tuple
    degree: int
    extension_degree_cap: int = 0
    coefficient_span_tol: float = COEFF_SPAN_TOL

    def __post_init__(self):
        if self.degree < 2:
            raise InputError("extension degree must be >= 2")
        if len(self.coefficients) != self.degree:
            raise InputError("need %d coefficient tables, got %d"
                             % (self.degree, len(self.coefficients)))
        for h in self.coefficients:
            if h.space.size != self.base.space.size:
                raise InputError("coefficient table lives off the base space")
            resid = span_residual(self.base, h)
            if resid > self.coefficient_span_tol:
                raise InputError("coefficient %r is not in the base span "
                                 "(residual %.3e)" % (h.name, resid))
        if self.extension_degree_cap <= 0:
            object.__setattr__(self, "extension_degree_cap",
                               2 * self.base.degree_cap)
        object.__setattr__(self, "coefficients", tuple(self.coefficients))


@dataclass(frozen=True)
class ColeBundle:
    bundle: ExtensionBundle
    root_slots: tuple        # per base point: tuple of (root, multiplicity)
    root_coordinate: FunctionTable
    spec: ColeSpec


def _horner(coeffs_desc, z):
    acc = coeffs_desc[0]
    for c in coeffs_desc[1:]:
        acc = acc * z + c
    return acc


def roots_of_monic(coeffs, degree: int, root_tol: float = ROOT_TOL):
    """Roots (with multiplicity) of t^degree + sum coeffs[k] t^k.

    coeffs holds the constant term first and excludes the leading 1.
    Roots from the companion matrix are Newton-polished and sorted by
    (real, imag); the residual contract is enforced.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (degree,):
        raise InputError("expected %d coefficients, got %s" % (degree, c.shape))
    desc = np.concatenate([[1.0 + 0j], c[::-1]])
    roots = np.roots(desc)
    deriv = np.polyder(desc)
    for _ in range(4):
        vals = np.polyval(desc, roots)
        dvals = np.polyval(deriv, roots)
        safe = np.abs(dvals) > 1e-30
        step = np.zeros_like(roots)
        step[safe] = vals[safe] / dvals[safe]
        cand = roots - step
        better = np.abs(np.polyval(desc, cand)) < np.abs(vals)
        roots = np.where(better, cand, roots)
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    resid = np.abs(_horner(desc, roots))
    allowed = root_tol * scale * (1.0 + np.abs(roots)) ** degree
    if np.any(resid > allowed):
        raise RootFindingError("root residual %.3e exceeds contract %.3e"
                               % (float(resid.max()), float(allowed.min())))
    return roots


def cole_extend(spec: ColeSpec, merge_tol: float = MERGE_TOL) -> ColeBundle:
    """Build the root locus, the first-coordinate projection, the adjoined
    root coordinate, the extension system, and the root-average operator.

    The bundle's base system is regenerated from the base generators at
    the extension cap, so images of in-cap extension products land back
    inside the recorded span.
    """
    base = spec.base
    bspace = base.space
    n = spec.degree
    coeff_vals = [h.values for h in spec.coefficients]
    slots = []
    for i in range(bspace.size):
        try:
            roots = roots_of_monic([cv[i] for cv in coeff_vals], n)
        except RootFindingError as err:
            raise RootFindingError("at base point %r: %s"
                                   % (bspace.labels[i], err)) from err
        grouped = []
        for z in roots:  # roots are sorted, greedy clustering is stable
            for k, (rep, mult) in enumerate(grouped):
                if abs(z - rep) <= merge_tol:
                    grouped[k] = (rep, mult + 1)
                    break
            else:
                grouped.append((z, 1))
        slots.append(tuple(grouped))

    labels, coords, assign = [], [], []
    for i in range(bspace.size):
        for k, (z, _mult) in enumerate(slots[i]):
            labels.append("%s:r%d" % (bspace.labels[i], k))
            coords.append(np.concatenate([bspace.coords[i], [z]]))
            assign.append(i)
    ext_space = FiniteSpace(labels=tuple(labels), coords=np.array(coords))
    pi = make_surjection(ext_space, bspace, assign)
    root_coord = FunctionTable(space=ext_space, values=ext_space.coords[:, -1],
                               name="p")

    cap = spec.extension_degree_cap
    pulled_gens = [pullback_table(pi, g) for g in base.generators]
    ext_system = generate_system(ext_space, [root_coord] + pulled_gens,
                                 degree_cap=cap, rank_tol=base.rank_tol)
    base_ext = generate_system(bspace, list(base.generators),
                               degree_cap=max(cap, base.degree_cap),
                               rank_tol=base.rank_tol)

    rows = []
    offset = 0
    for i in range(bspace.size):
        w = np.zeros(ext_space.size, dtype=complex)
        for k, (_z, mult) in enumerate(slots[i]):
            w[offset + k] = mult / n
        offset += len(slots[i])
        rows.append(Measure(space=ext_space, weights=w))
    t_op = make_operator(pi, rows)

    bundle = make_bundle(base_ext, ext_system, pi, t_op,
                         declared_flags={"open_map": True,
                                         "group_implemented": n == 2},
                         meta={"kind": "cole", "degree": n,
                               "extension_degree_cap": cap,
                               "base_degree_cap": base.degree_cap})
    return ColeBundle(bundle=bundle, root_slots=tuple(slots),
                      root_coordinate=root_coord, spec=spec)


def vieta_residual(cb: ColeBundle) -> float:
    """Worst deviation of the root sums/products from the coefficients."""
    n = cb.spec.degree
    h0 = cb.spec.coefficients[0].values
    hn1 = cb.spec.coefficients[-1].values
    worst = 0.0
    for i, slots in enumerate(cb.root_slots):
        rsum = sum(z * m for z, m in slots)
        rprod = 1.0 + 0j
        for z, m in slots:
            rprod *= z ** m
        scale = max(1.0, abs(h0[i]), abs(hn1[i]))
        worst = max(worst, abs(rsum + hn1[i]),
                    abs(rprod - (-1.0) ** n * h0[i]) / scale)
    return worst


def cole_report(cb: ColeBundle, include_boundary: bool = True,
                choquet_tol: float = CHOQUET_TOL) -> Certificate:
    """Certificate for the root-adjunction bundle: the section-extension
    clauses, fiber sizes bounded by the degree, extension restricted to a
    fiber spanning everything there, Vieta consistency, and the boundary
    correspondence under pullback."""
    bundle = cb.bundle
    base_cert = gce_certificate(bundle)
    clauses = list(base_cert.clauses)
    n = cb.spec.degree

    worst_fiber = max(len(f) for f in bundle.pi.fibers)
    clauses.append(Clause(name="fiber_sizes", residual=float(worst_fiber),
                          tolerance=float(n),
                          status="pass" if worst_fiber <= n else "fail",
                          detail="largest fiber has %d points, degree is %d"
                                 % (worst_fiber, n)))

    span_ok = True
    for x in range(bundle.pi.target.size):
        fib = list(bundle.pi.fibers[x])
        sub = restrict_system(bundle.B, fib)
        if sub.dim != len(fib):
            span_ok = False
            break
    clauses.append(Clause(name="fiber_restriction_full",
                          status="pass" if span_ok else "fail",
                          detail="extension restricted to each fiber spans "
                                 "the full function space on it"))

    clauses.append(_clause("vieta", vieta_residual(cb), VIETA_TOL))

    if include_boundary:
        set_a = set(choquet_set(bundle.A, choquet_tol))
        set_b = set(choquet_set(bundle.B, choquet_tol))
        lifted = {y for y in range(bundle.pi.source.size)
                  if int(bundle.pi.assignment[y]) in set_a}
        ok = set_b == lifted
        extra = sorted(set_b - lifted)[:4]
        missing = sorted(lifted - set_b)[:4]
        clauses.append(Clause(name="choquet_pullback",
                              status="pass" if ok else "fail",
                              detail="boundary upstairs equals the preimage of "
                                     "the boundary downstairs"
                                     + ("" if ok else "; extra %r missing %r"
                                        % (extra, missing))))
    else:
        clauses.append(Clause(name="choquet_pullback", status="skipped",
                              detail="boundary comparison disabled"))

    clauses.append(Clause(name="naturality", status="skipped",
                          detail="character spaces have no finite-grid model"))
    return Certificate(kind="cole", clauses=clauses, meta=dict(base_cert.meta))
