"""Finite group actions, orbit averages, and projection reconstruction.

Only finite groups are represented; circle actions enter through their
cyclic discretizations, whose uniform averages are exact on the Fourier
modes the constructions need.  Orbit sums run over index-sorted members
through fsum, so group translates of a table average to byte-identical
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .averaging import (Certificate, Clause, ExtensionBundle, OperatorTable,
                        _clause, _fiber_constant_subspace, default_probes,
                        make_bundle, make_operator, operator_norm)
from .cole import ColeSpec, cole_extend
from .errors import InputError, ReconstructionError, ValidationError
from .funcsys import (FunctionSystem, FunctionTable, _system_from_tables,
                      generate_system, span_residual)
from .space import (FiniteSpace, Measure, MERGE_TOL, SurjectionMap,
                    make_surjection)

PROJECTION_TOL = 1e-10
POINT_MASS_TOL = 1e-9
STABILITY_TOL = 1e-9
RECONSTRUCT_TOL = 1e-9
PULLBACK_MATCH_TOL = 1e-8


@dataclass(frozen=True)
class GroupAction:
    space: FiniteSpace
    elements: tuple          # permutation index arrays
    multiplication: np.ndarray
    identity_index: int
    orbits: tuple            # sorted tuples of point indices

    @property
    def order(self) -> int:
        return len(self.elements)

    def orbit_of(self, y: int) -> tuple:
        for orb in self.orbits:
            if y in orb:
                return orb
        raise InputError("point index %d out of range" % y)


def make_action(space: FiniteSpace, permutations) -> GroupAction:
    """Validate a permutation list as a group acting on the space."""
    elems = []
    n = space.size
    for k, p in enumerate(permutations):
        arr = np.asarray(p, dtype=np.int64)
        if arr.shape != (n,) or not np.array_equal(np.sort(arr), np.arange(n)):
            raise ValidationError("element %d is not a permutation of the points" % k)
        elems.append(arr)
    keys = {p.tobytes(): i for i, p in enumerate(elems)}
    if len(keys) != len(elems):
        raise ValidationError("duplicate group elements")
    ident = keys.get(np.arange(n, dtype=np.int64).tobytes())
    if ident is None:
        raise ValidationError("identity permutation missing")
    order = len(elems)
    mult = np.zeros((order, order), dtype=int)
    for i in range(order):
        for j in range(order):
            k = keys.get(elems[i][elems[j]].tobytes())
            if k is None:
                raise ValidationError("closure violation: element %d composed "
                                      "with %d is not in the list" % (i, j))
            mult[i, j] = k
    for i in range(order):
        if not any(mult[i, j] == ident and mult[j, i] == ident
                   for j in range(order)):
            raise ValidationError("element %d has no inverse" % i)
    seen = set()
    orbits = []
    for y in range(n):
        if y in seen:
            continue
        orb = sorted({int(p[y]) for p in elems})
        seen.update(orb)
        orbits.append(tuple(orb))
    orbits.sort(key=lambda o: o[0])
    return GroupAction(space=space, elements=tuple(elems),
                       multiplication=mult, identity_index=ident,
                       orbits=tuple(orbits))


def translate_table(action: GroupAction, s: int, f: FunctionTable) -> FunctionTable:
    """The table y -> f(s.y)."""
    perm = action.elements[s]
    return FunctionTable(space=action.space, values=f.values[perm], name=f.name)


def haar_average(action: GroupAction, values) -> np.ndarray:
    """Uniform orbit average, summed over sorted members with fsum so the
    result is identical for any group translate of the input."""
    v = np.asarray(values, dtype=complex)
    out = np.empty_like(v)
    for orb in action.orbits:
        re = math.fsum(v[m].real for m in orb) / len(orb)
        im = math.fsum(v[m].imag for m in orb) / len(orb)
        for m in orb:
            out[m] = complex(re, im)
    return out


def orbit_quotient(action: GroupAction):
    """Quotient space (orbit coordinates averaged, labels from the smallest
    member) and the orbit surjection."""
    space = action.space
    labels, coords = [], []
    assign = np.zeros(space.size, dtype=int)
    for k, orb in enumerate(action.orbits):
        labels.append(space.labels[orb[0]])
        coords.append(space.coords[list(orb), :].mean(axis=0))
        for m in orb:
            assign[m] = k
    quotient = FiniteSpace(labels=tuple(labels), coords=np.array(coords))
    return quotient, make_surjection(space, quotient, assign)


def haar_extension(action: GroupAction, system: FunctionSystem,
                   invariant_generators=None,
                   degree_cap: int | None = None) -> ExtensionBundle:
    """Realize the system as an extension of its invariant part over the
    orbit quotient, with the orbit average as the section operator.

    By default the base is the independent span of the averaged basis;
    explicitly supplied invariant generators produce a generated system
    at the requested cap instead.
    """
    if system.space.size != action.space.size:
        raise InputError("system does not live on the action's space")
    quotient, pi = orbit_quotient(action)
    rows = []
    for orb in action.orbits:
        w = np.zeros(action.space.size, dtype=complex)
        for m in orb:
            w[m] = 1.0 / len(orb)
        rows.append(Measure(space=action.space, weights=w))
    t_op = make_operator(pi, rows)

    if invariant_generators is not None:
        base = generate_system(quotient, list(invariant_generators),
                               degree_cap=degree_cap or system.degree_cap,
                               rank_tol=system.rank_tol)
    else:
        pushed = []
        for b in system.basis:
            avg = haar_average(action, b.values)
            pushed.append(FunctionTable(space=quotient,
                                        values=avg[[orb[0] for orb in action.orbits]],
                                        name=b.name))
        base = _system_from_tables(quotient, pushed, pushed, 1, system.rank_tol)
    embed = max(span_residual(system, b.values[pi.assignment]) for b in base.basis)
    return make_bundle(base, system, pi, t_op,
                       declared_flags={"open_map": True, "group_implemented": True},
                       meta={"kind": "haar_quotient", "group_order": action.order,
                             "embed_residual": embed},
                       strict=False)


def implemented_report(bundle: ExtensionBundle, action: GroupAction,
                       probes=None) -> Certificate:
    """Certificate that the bundle's section operator is the group's orbit
    average: orbits coincide with fibers, rows are uniform orbit measures,
    the extension is stable under translation, and its fiber-constant part
    is exactly the pulled-back base."""
    if action.space.size != bundle.pi.source.size:
        raise InputError("action does not live on the bundle's extension space")
    if bundle.T is None:
        raise InputError("bundle has no section operator")
    clauses = []

    orbit_sets = {frozenset(o) for o in action.orbits}
    fiber_sets = {frozenset(f) for f in bundle.pi.fibers}
    ok = orbit_sets == fiber_sets
    clauses.append(Clause(name="orbits_equal_fibers",
                          status="pass" if ok else "fail",
                          detail="%d orbits vs %d fibers" %
                                 (len(orbit_sets), len(fiber_sets))))

    orbit_of_point = {}
    for orb in action.orbits:
        for m in orb:
            orbit_of_point[m] = orb
    dev = 0.0
    for x in range(bundle.pi.target.size):
        orb = orbit_of_point[bundle.pi.fibers[x][0]]
        w = np.zeros(action.space.size, dtype=complex)
        w[list(orb)] = 1.0 / len(orb)
        dev = max(dev, float(np.abs(bundle.T.rows[x].weights - w).max()))
    clauses.append(_clause("rows_are_orbit_averages", dev, PROJECTION_TOL))

    worst = 0.0
    bmat = bundle.B.basis_matrix
    q = bundle.B.q
    for s in range(action.order):
        translated = bmat[action.elements[s], :]
        resid = translated - q @ (q.conj().T @ translated)
        worst = max(worst, float(np.linalg.norm(resid, axis=0).max()))
    clauses.append(_clause("translation_stability", worst, STABILITY_TOL,
                           probes=action.order * bundle.B.dim))

    members, pushed = _fiber_constant_subspace(bundle)
    dim_w = members.shape[1]
    inter = max((span_residual(bundle.A, pushed[:, j]) for j in range(dim_w)),
                default=0.0)
    inter_res = inter if dim_w == bundle.A.dim else float("inf")
    clauses.append(_clause("pullback_intersection", inter_res, STABILITY_TOL,
                           detail="fiber-constant dim %d vs base dim %d"
                                  % (dim_w, bundle.A.dim)))
    return Certificate(kind="implemented_by_group", clauses=clauses,
                       meta={"group_order": action.order})


def projection_from_bundle(bundle: ExtensionBundle) -> OperatorTable:
    """Lift the section operator to the projection on the extension space."""
    if bundle.T is None:
        raise InputError("bundle has no section operator")
    rows = [bundle.T.rows[int(x)] for x in bundle.pi.assignment]
    return OperatorTable(source_space=bundle.pi.source,
                         target_space=bundle.pi.source, rows=tuple(rows))


def bicontractive_analyze(proj: OperatorTable, system: FunctionSystem,
                          probes=None, seed: int = 7) -> dict:
    """Decide whether a unital projection and its complement both have norm
    one, and if so recover the order-two symmetry behind it.

    theta = 2P - I must then be an involutive homomorphism; on the finite
    model that forces every theta row to be a single +1 point mass, whose
    assembly is the recovered involution.
    """
    if proj.source_space.size != proj.target_space.size:
        raise InputError("projection must act on a single space")
    n = proj.source_space.size
    r = proj.matrix
    ones = np.ones(n, dtype=complex)
    unital = float(np.abs(r @ ones - 1.0).max())
    if unital > PROJECTION_TOL:
        raise InputError("operator is not unital (residual %.3e)" % unital)
    idem = float(np.abs(r @ r - r).max())
    if idem > PROJECTION_TOL:
        raise InputError("operator is not a projection (P^2 - P residual %.3e)"
                         % idem)
    norm_p = operator_norm(proj)
    comp = np.eye(n, dtype=complex) - r
    norm_q = float(np.abs(comp).sum(axis=1).max())
    is_bi = abs(norm_p - 1.0) <= PROJECTION_TOL and abs(norm_q - 1.0) <= PROJECTION_TOL

    clauses = [
        _clause("projection_idempotent", idem, PROJECTION_TOL),
        _clause("projection_norm_one", abs(norm_p - 1.0), PROJECTION_TOL,
                detail="|P| = %.17g" % norm_p),
        _clause("complement_norm_one", abs(norm_q - 1.0), PROJECTION_TOL,
                detail="|I - P| = %.17g" % norm_q),
    ]

    theta_matrix = 2.0 * r - np.eye(n, dtype=complex)
    theta = OperatorTable(source_space=proj.source_space,
                          target_space=proj.source_space,
                          rows=tuple(Measure(space=proj.source_space,
                                             weights=theta_matrix[i])
                                     for i in range(n)))
    rho_map = None
    action = None
    if is_bi:
        invol = float(np.abs(theta_matrix @ theta_matrix - np.eye(n)).max())
        clauses.append(_clause("theta_involution", invol, PROJECTION_TOL))
        if probes is None:
            probes = default_probes(system, seed=seed)
        pm = np.column_stack([f.values for f in probes])
        timg = theta_matrix @ pm
        mult = 0.0
        for i in range(pm.shape[1]):
            prod = pm * pm[:, i][:, None]
            mult = max(mult, float(np.abs(theta_matrix @ prod
                                          - timg * timg[:, i][:, None]).max()))
        clauses.append(_clause("theta_multiplicative", mult, POINT_MASS_TOL,
                               probes=pm.shape[1] ** 2))

        perm = np.full(n, -1, dtype=int)
        point_mass_res = 0.0
        for y in range(n):
            row = theta_matrix[y]
            j = int(np.argmax(np.abs(row)))
            rest = float(np.abs(row).sum() - abs(row[j]))
            point_mass_res = max(point_mass_res, abs(row[j] - 1.0), rest)
            perm[y] = j
        clauses.append(_clause("theta_rows_point_masses", point_mass_res,
                               POINT_MASS_TOL))
        if point_mass_res <= POINT_MASS_TOL:
            if sorted(perm.tolist()) == list(range(n)) and np.all(perm[perm] == np.arange(n)):
                rho_map = make_surjection(proj.source_space, proj.source_space, perm)
                ident = np.arange(n)
                action = make_action(proj.source_space,
                                     [ident, perm] if not np.array_equal(perm, ident)
                                     else [ident])
                clauses.append(Clause(name="involution_recovered", status="pass",
                                      detail="order-%d symmetry assembled"
                                             % (action.order,)))
            else:
                clauses.append(Clause(name="involution_recovered", status="fail",
                                      detail="rows are point masses but do not "
                                             "assemble into an involution"))
        else:
            clauses.append(Clause(
                name="involution_recovered", status="fail",
                detail="theta rows are not signed point masses; the finite "
                       "model requires composition-operator structure"))
    cert = Certificate(kind="bicontractive", clauses=clauses,
                       meta={"is_bicontractive": is_bi})
    return {"is_bicontractive": is_bi, "theta": theta, "rho": rho_map,
            "action": action, "certificate": cert}


def reconstruct_cole(bundle: ExtensionBundle, rho: SurjectionMap,
                     h0: FunctionTable, merge_tol: float = MERGE_TOL) -> dict:
    """Rebuild the square-root extension from a bicontractive bundle and a
    generator annihilated by the section operator, then match the given
    extension space point-by-point against the rebuilt root locus.

    The caller declares that the extension is generated by the pulled-back
    base together with h0; that hypothesis is recorded, not verified.
    """
    if bundle.T is None:
        raise InputError("bundle has no section operator")
    if h0.space.size != bundle.pi.source.size:
        raise InputError("h0 lives off the extension space")
    t_h0 = bundle.T.apply_values(h0.values)
    if np.abs(t_h0).max() > RECONSTRUCT_TOL:
        raise InputError("T(h0) must vanish (worst %.3e)" % float(np.abs(t_h0).max()))

    sq = h0.values * h0.values
    pi = bundle.pi
    h_down = np.zeros(pi.target.size, dtype=complex)
    spread = 0.0
    for x in range(pi.target.size):
        fib = list(pi.fibers[x])
        vals = sq[fib]
        spread = max(spread, float(np.abs(vals - vals[0]).max()))
        h_down[x] = vals[0]
    if spread > RECONSTRUCT_TOL:
        raise ReconstructionError("h0^2 is not fiber-constant (spread %.3e)" % spread)
    h_table = FunctionTable(space=pi.target, values=h_down, name="h")
    h_resid = span_residual(bundle.A, h_table)

    spec = ColeSpec(base=bundle.A,
                    coefficients=(FunctionTable(space=pi.target, values=-h_down,
                                                name="-h"),
                                  FunctionTable(space=pi.target,
                                                values=np.zeros(pi.target.size,
                                                                dtype=complex),
                                                name="0")),
                    degree=2,
                    extension_degree_cap=bundle.B.degree_cap,
                    coefficient_span_tol=float("inf"))  # reported, not enforced
    cb = cole_extend(spec, merge_tol=merge_tol)
    ext = cb.bundle

    # match y -> (pi(y), h0(y)) against the rebuilt root locus
    psi = np.full(pi.source.size, -1, dtype=int)
    collision = None
    used = {}
    fiber_start = {}
    pos = 0
    for x in range(pi.target.size):
        fiber_start[x] = pos
        pos += len(cb.root_slots[x])
    match_res = 0.0
    for y in range(pi.source.size):
        x = int(pi.assignment[y])
        slots = cb.root_slots[x]
        dists = [abs(h0.values[y] - z) for z, _m in slots]
        k = int(np.argmin(dists))
        match_res = max(match_res, float(dists[k]))
        target = fiber_start[x] + k
        if dists[k] > merge_tol * 10:
            collision = (y, None)
            continue
        if target in used:
            collision = (used[target], y)
            continue
        used[target] = y
        psi[y] = target
    matched = (collision is None and np.all(psi >= 0)
               and len(used) == ext.pi.source.size)

    clauses = [
        _clause("h0_killed_by_section", float(np.abs(t_h0).max()), RECONSTRUCT_TOL),
        _clause("h0_square_fiber_constant", spread, RECONSTRUCT_TOL),
        _clause("h_in_base_span", h_resid, PULLBACK_MATCH_TOL),
        Clause(name="point_matching",
               status="pass" if matched else "fail",
               residual=match_res, tolerance=10 * merge_tol,
               detail="bijection onto the rebuilt root locus" if matched
               else "collision at %r" % (collision,)),
    ]
    if matched:
        proj_ok = np.array_equal(ext.pi.assignment[psi], pi.assignment)
        clauses.append(Clause(name="projection_compatible",
                              status="pass" if proj_ok else "fail",
                              detail="rebuilt projection composed with the "
                                     "matching equals the original"))
        neg = 0.0
        for y in range(pi.source.size):
            yr = int(rho.assignment[y])
            neg = max(neg, abs(h0.values[yr] + h0.values[y]))
            if pi.assignment[yr] != pi.assignment[y]:
                neg = float("inf")
        clauses.append(_clause("involution_negates_root", neg, RECONSTRUCT_TOL))
        pull = 0.0
        for g in ([cb.root_coordinate]
                  + [t for t in ext.B.generators if t.name != "p"]):
            pulled = FunctionTable(space=pi.source, values=g.values[psi],
                                   name=g.name)
            pull = max(pull, span_residual(bundle.B, pulled))
        clauses.append(_clause("pullback_generates_extension", pull,
                               PULLBACK_MATCH_TOL))
    cert = Certificate(kind="cole_reconstruction", clauses=clauses,
                       meta={"declared_generated_by_h0": True})
    psi_map = None
    if matched:
        psi_map = make_surjection(pi.source, ext.pi.source, psi)
    return {"psi": psi_map, "matched": matched, "certificate": cert,
            "rebuilt": cb}
