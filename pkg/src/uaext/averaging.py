"""Operator tables, extension bundles, and the certificate suite.

An operator from functions-on-Y to functions-on-X is stored as one row
measure per target point.  Certificates never raise on a mathematical
failure: negative results are data, and adversarial inputs are part of
the test diet.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ValidationError
from .funcsys import (FunctionSystem, FunctionTable, pullback_table,
                      restrict_system, span_residual)
from .hull import hull_distance
from .measures import annihilator_basis
from .space import FiniteSpace, Measure, SurjectionMap, pushforward_measure

UNITAL_TOL = 1e-12
NORM_TOL = 1e-10
SECTION_TOL = 1e-10
EMBED_TOL = 1e-9
TB_IN_A_TOL = 1e-8
ADJOINT_ANNIH_TOL = 1e-9
FIBER_MASS_TOL = 1e-12
HULL_TOL = 1e-9
KELLEY_TOL = 1e-10
MODULE_TOL = 1e-10
INTERSECT_TOL = 1e-9
HOMOMORPHISM_TOL = 1e-10
DEFAULT_SEED = 7


@dataclass(frozen=True)
class OperatorTable:
    """Linear map C(source) -> C(target): (Tf)(x) integrates f against the
    x-th row measure."""

    source_space: FiniteSpace
    target_space: FiniteSpace
    rows: tuple  # one Measure on source_space per target point

    def __post_init__(self):
        if len(self.rows) != self.target_space.size:
            raise InputError("row count %d != target size %d"
                             % (len(self.rows), self.target_space.size))
        for mu in self.rows:
            if mu.space.size != self.source_space.size:
                raise InputError("row measure lives on the wrong space")
        object.__setattr__(self, "rows", tuple(self.rows))

    @functools.cached_property
    def matrix(self) -> np.ndarray:
        return np.vstack([mu.weights for mu in self.rows])

    def apply_values(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=complex)
        if v.shape[0] != self.source_space.size:
            raise InputError("argument length mismatch")
        return self.matrix @ v

    def apply(self, f: FunctionTable) -> FunctionTable:
        return FunctionTable(space=self.target_space,
                             values=self.apply_values(f.values), name=f.name)


def make_operator(pi: SurjectionMap, rows) -> OperatorTable:
    """Operator aligned with a surjection: rows indexed by target points.
    Unitality and the section identity are checked downstream, never
    assumed here."""
    rows = list(rows)
    if len(rows) != pi.target.size:
        raise InputError("need one row per target point (%d), got %d"
                         % (pi.target.size, len(rows)))
    return OperatorTable(source_space=pi.source, target_space=pi.target,
                         rows=tuple(rows))


def operator_from_matrix(source: FiniteSpace, target: FiniteSpace,
                         matrix) -> OperatorTable:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (target.size, source.size):
        raise InputError("matrix shape mismatch")
    return OperatorTable(source_space=source, target_space=target,
                         rows=tuple(Measure(space=source, weights=m[i])
                                    for i in range(target.size)))


def identity_operator(space: FiniteSpace) -> OperatorTable:
    return operator_from_matrix(space, space, np.eye(space.size, dtype=complex))


def compose_operators(outer: OperatorTable, inner: OperatorTable) -> OperatorTable:
    """outer after inner, as maps on functions: rows integrate along inner."""
    if outer.source_space.size != inner.target_space.size:
        raise InputError("operators do not compose")
    return operator_from_matrix(inner.source_space, outer.target_space,
                                outer.matrix @ inner.matrix)


def fiber_average_operator(pi: SurjectionMap) -> OperatorTable:
    rows = []
    for x in range(pi.target.size):
        w = np.zeros(pi.source.size, dtype=complex)
        f = pi.fibers[x]
        for y in f:
            w[y] = 1.0 / len(f)
        rows.append(Measure(space=pi.source, weights=w))
    return make_operator(pi, rows)


def operator_norm(op: OperatorTable) -> float:
    """Sup-norm operator norm: max row total variation (exact here)."""
    return max(mu.total_variation for mu in op.rows)


def lift(pi: SurjectionMap, values_on_target) -> np.ndarray:
    return np.asarray(values_on_target, dtype=complex)[pi.assignment]


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Clause:
    name: str
    status: str                  # "pass" | "fail" | "skipped"
    residual: float | None = None
    tolerance: float | None = None
    detail: str = ""
    probe_count: int | None = None

    def to_jsonable(self) -> dict:
        return {"clause": self.name, "status": self.status,
                "pass": self.status == "pass",
                "residual": self.residual, "tolerance": self.tolerance,
                "detail": self.detail, "probe_count": self.probe_count}


@dataclass
class Certificate:
    kind: str
    clauses: list
    applicable: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.clauses)

    def clause(self, name: str) -> Clause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_jsonable(self) -> dict:
        return {"kind": self.kind, "pass": self.passed,
                "applicable": self.applicable,
                "clauses": [c.to_jsonable() for c in self.clauses],
                "meta": self.meta}


def _clause(name, residual, tol, detail="", probes=None) -> Clause:
    status = "pass" if residual <= tol else "fail"
    return Clause(name=name, status=status, residual=float(residual),
                  tolerance=tol, detail=detail, probe_count=probes)


def default_probes(system: FunctionSystem, count: int = 20,
                   seed: int = DEFAULT_SEED):
    """The system's basis plus seeded random combinations of it."""
    rng = np.random.default_rng(seed)
    probes = list(system.basis)
    bmat = system.basis_matrix
    for k in range(count):
        c = rng.normal(size=system.dim) + 1j * rng.normal(size=system.dim)
        probes.append(FunctionTable(space=system.space, values=bmat @ c,
                                    name="probe%02d" % k))
    return probes


def random_probes(space: FiniteSpace, count: int = 20, seed: int = DEFAULT_SEED):
    rng = np.random.default_rng(seed)
    out = [FunctionTable(space=space, values=np.ones(space.size, complex), name="1")]
    for k in range(count):
        v = rng.normal(size=space.size) + 1j * rng.normal(size=space.size)
        out.append(FunctionTable(space=space, values=v, name="probe%02d" % k))
    return out


def _summation_matrix(pi: SurjectionMap) -> np.ndarray:
    s = np.zeros((pi.target.size, pi.source.size))
    s[pi.assignment, np.arange(pi.source.size)] = 1.0
    return s


def equivalences_report(op: OperatorTable, pi: SurjectionMap, probes=None,
                        seed: int = DEFAULT_SEED,
                        hull_tol: float = HULL_TOL) -> Certificate:
    """Averaging equivalences for a section operator.

    Precondition row: T∘Π* = id, checked exactly via the pushforward of
    every row.  Clauses (a) Kelley identity for the lifted projection,
    (b) module property against the full indicator basis downstairs,
    (c) rows supported in their fibers, (d) values inside the convex hull
    of fiber values.  All clauses are evaluated even when the
    precondition fails; the certificate is then marked not applicable.
    """
    if op.source_space.size != pi.source.size or op.target_space.size != pi.target.size:
        raise InputError("operator and surjection are not aligned")
    if probes is None:
        probes = random_probes(op.source_space, seed=seed)
    nx, ny = pi.target.size, pi.source.size
    r = op.matrix

    # section identity: pushforward of each row must be the point mass
    push = np.zeros((nx, nx), dtype=complex)
    for x in range(nx):
        push[x] = pushforward_measure(pi, op.rows[x]).weights
    section_res = float(np.abs(push - np.eye(nx)).max())
    clauses = [_clause("section_identity", section_res, SECTION_TOL)]
    applicable = clauses[0].status == "pass"

    pm = np.column_stack([f.values for f in probes])       # (ny, k)
    timg = r @ pm                                          # (nx, k)
    lifted = timg[pi.assignment, :]                        # P(f) for all probes

    # (a) Kelley identity for P = lift∘T over probe pairs
    kelley = 0.0
    for j in range(pm.shape[1]):
        ph = lifted[:, j]
        prod = pm * ph[:, None]
        lhs = (r @ prod)[pi.assignment, :]
        rhs = lifted * lifted[:, j][:, None]
        kelley = max(kelley, float(np.abs(lhs - rhs).max()))
    clauses.append(_clause("kelley_identity", kelley, KELLEY_TOL,
                           probes=pm.shape[1] ** 2))

    # (b) module property with g running over all indicators downstairs
    module = 0.0
    fibers = pi.fibers
    for j in range(pm.shape[1]):
        weighted = r * pm[:, j][None, :]
        blocked = np.column_stack([weighted[:, list(f)].sum(axis=1) for f in fibers])
        blocked[np.arange(nx), np.arange(nx)] -= timg[:, j]
        module = max(module, float(np.abs(blocked).max()))
    clauses.append(_clause("module_property", module, MODULE_TOL,
                           detail="g over all indicator tables on the base",
                           probes=pm.shape[1] * nx))

    # (c) rows supported in their fibers
    off = 0.0
    absr = np.abs(r)
    for x in range(nx):
        mask = np.ones(ny, dtype=bool)
        mask[list(fibers[x])] = False
        off = max(off, float(absr[x, mask].sum()))
    clauses.append(_clause("fiber_support", off, FIBER_MASS_TOL))

    # (d) convex hull membership of operator values
    worst_hull = 0.0
    for j in range(pm.shape[1]):
        fv = pm[:, j]
        for x in range(nx):
            d = hull_distance(timg[x, j], fv[list(fibers[x])])
            if d > worst_hull:
                worst_hull = d
    clauses.append(_clause("convex_hull", worst_hull, hull_tol,
                           probes=pm.shape[1] * nx))

    return Certificate(kind="averaging_equivalences", clauses=clauses,
                       applicable=applicable,
                       meta={"probe_count": len(probes), "seed": seed})


@dataclass(frozen=True)
class ExtensionBundle:
    """The quadruple: base system A on X, extension B on Y, the surjection,
    and (optionally) the norm-one section operator."""

    A: FunctionSystem
    B: FunctionSystem
    pi: SurjectionMap
    T: OperatorTable | None = None
    declared_flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def make_bundle(A: FunctionSystem, B: FunctionSystem, pi: SurjectionMap,
                T: OperatorTable | None = None, declared_flags=None,
                meta=None, strict: bool = True) -> ExtensionBundle:
    """Assemble and (by default) validate an extension bundle.

    strict=False skips the invariant checks so adversarial bundles can be
    built for certificate testing; structural mismatches always raise.
    """
    if A.space.size != pi.target.size:
        raise InputError("base system does not live on the map's target")
    if B.space.size != pi.source.size:
        raise InputError("extension system does not live on the map's source")
    if T is not None:
        if T.source_space.size != pi.source.size or T.target_space.size != pi.target.size:
            raise InputError("operator is not aligned with the surjection")
    if strict:
        embed = max(span_residual(B, pullback_table(pi, a)) for a in A.basis)
        if embed > EMBED_TOL:
            raise ValidationError("pullback of the base is not contained in the "
                                  "extension (residual %.3e)" % embed)
        if T is not None:
            ones = np.ones(pi.source.size, dtype=complex)
            unital = float(np.abs(T.apply_values(ones) - 1.0).max())
            if unital > UNITAL_TOL:
                raise ValidationError("operator is not unital (residual %.3e)" % unital)
            sec = max(float(np.abs(T.apply_values(pullback_table(pi, a).values)
                                   - a.values).max()) for a in A.basis)
            if sec > SECTION_TOL:
                raise ValidationError("T∘Π* != id on the base basis (residual %.3e)" % sec)
    return ExtensionBundle(A=A, B=B, pi=pi, T=T,
                           declared_flags=dict(declared_flags or {}),
                           meta=dict(meta or {}))


def _fiber_constant_subspace(bundle: ExtensionBundle):
    """Orthonormal coefficients (in B's Q-basis) of the fiber-constant
    members of span(B), plus their pushed-down tables on X."""
    qb = bundle.B.q
    pi = bundle.pi
    rows = []
    for f in pi.fibers:
        f = list(f)
        if len(f) > 1:
            rows.append(qb[f[1:], :] - qb[f[0], :][None, :])
    if rows:
        dmat = np.vstack(rows)
        u, s, vh = np.linalg.svd(dmat, full_matrices=True)
        smax = s.max(initial=0.0)
        rank = int(np.sum(s > 1e-9 * max(smax, 1.0)))
        null = vh[rank:].conj().T
    else:
        null = np.eye(qb.shape[1], dtype=complex)
    members = qb @ null  # (ny, dim_W) fiber-constant tables upstairs
    nx = pi.target.size
    pushed = np.zeros((nx, members.shape[1]), dtype=complex)
    for x in range(nx):
        f = list(pi.fibers[x])
        pushed[x] = members[f, :].mean(axis=0)
    return members, pushed


def gce_certificate(bundle: ExtensionBundle, probes=None,
                    seed: int = DEFAULT_SEED) -> Certificate:
    """Clause-by-clause certificate that the bundle is a norm-one section
    extension: unitality, norm one, section identity, T maps the
    extension into (and onto) the base, adjoint and pushforward behaviour
    of annihilators, nontriviality propagation, and the identification of
    the fiber-constant part of the extension with the base.

    All clauses are closed-form linear algebra on the finite model; the
    probes argument is recorded for provenance only.
    """
    if bundle.T is None:
        raise InputError("bundle has no section operator")
    A, B, pi, T = bundle.A, bundle.B, bundle.pi, bundle.T
    nx, ny = pi.target.size, pi.source.size
    r = T.matrix
    clauses = []

    ones = np.ones(ny, dtype=complex)
    unital = float(np.abs(r @ ones - 1.0).max())
    clauses.append(_clause("unital", unital, UNITAL_TOL))

    norm = operator_norm(T)
    clauses.append(_clause("norm_one", abs(norm - 1.0), NORM_TOL,
                           detail="operator norm %.17g" % norm))

    embed = max(span_residual(B, pullback_table(pi, a)) for a in A.basis)
    clauses.append(_clause("pullback_contained", embed, EMBED_TOL))

    section = max(float(np.abs(T.apply_values(pullback_table(pi, a).values)
                               - a.values).max()) for a in A.basis)
    clauses.append(_clause("section_identity", section, SECTION_TOL))

    tb = max(span_residual(A, r @ b.values) for b in B.basis)
    clauses.append(_clause("maps_extension_into_base", tb, TB_IN_A_TOL))

    onto = Clause(name="maps_onto_base",
                  status="pass" if section <= SECTION_TOL else "fail",
                  residual=section, tolerance=SECTION_TOL,
                  detail="every base member a is T of its own pullback")
    clauses.append(onto)

    ann_a = annihilator_basis(A)
    na = ann_a.weight_matrix()           # (nx, dim A-perp)
    mb = B.basis_matrix                  # (ny, dim B)
    if na.shape[1]:
        adj = float(np.abs(mb.T @ (r.T @ na)).max())
    else:
        adj = 0.0
    clauses.append(_clause("adjoint_annihilators", adj, ADJOINT_ANNIH_TOL,
                           detail="T* of the base annihilator basis kills the extension"))

    s = _summation_matrix(pi)
    ident = float(np.abs(s @ r.T - np.eye(nx)).max())
    clauses.append(_clause("pushforward_adjoint_identity", ident, UNITAL_TOL * 10))

    # pushforward of the extension annihilator: range of S restricted to
    # the orthogonal complement of the conjugated extension span
    qc = np.conj(B.q)
    composite = s - (s @ qc) @ qc.conj().T
    ma = A.basis_matrix
    contain = float(np.abs(ma.T @ composite).max())
    sv = np.linalg.svd(composite, compute_uv=False)
    smax = sv.max(initial=0.0)
    rank = int(np.sum(sv > 1e-9 * max(smax, 1.0)))
    expected = nx - A.dim
    rank_res = contain if rank == expected else float("inf")
    clauses.append(_clause("annihilator_pushforward_rank", rank_res, ADJOINT_ANNIH_TOL,
                           detail="rank %d, expected %d = |X| - dim(A)" % (rank, expected)))

    if A.dim < nx:
        ok = rank == expected and rank >= 1
        clauses.append(Clause(name="nontriviality_propagation",
                              status="pass" if ok else "fail",
                              residual=None, tolerance=None,
                              detail="dim(A)=%d < |X|=%d forces dim(B)=%d < |Y|=%d "
                                     "via annihilator pushforward surjectivity"
                                     % (A.dim, nx, B.dim, ny)))
    else:
        clauses.append(Clause(name="nontriviality_propagation", status="skipped",
                              detail="base system is already the full function space"))

    members, pushed = _fiber_constant_subspace(bundle)
    dim_w = members.shape[1]
    if dim_w:
        inter = max(span_residual(A, pushed[:, j]) for j in range(dim_w))
    else:
        inter = 0.0
    inter_res = inter if dim_w == A.dim else float("inf")
    clauses.append(_clause("pullback_intersection", inter_res, INTERSECT_TOL,
                           detail="fiber-constant subspace of the extension has "
                                  "dim %d, dim(A) = %d" % (dim_w, A.dim)))

    meta = {"seed": seed, "dims": {"X": nx, "Y": ny, "A": A.dim, "B": B.dim},
            "probe_count": len(probes) if probes is not None else 0}
    return Certificate(kind="gce", clauses=clauses, meta=meta)


def homomorphism_report(bundle: ExtensionBundle, probes=None,
                        seed: int = DEFAULT_SEED,
                        tol: float = HOMOMORPHISM_TOL) -> Certificate:
    """Two-sided check of the multiplicativity criterion: T restricted to
    the extension is a homomorphism exactly when each row measure
    reproduces evaluation at a single fiber point."""
    if bundle.T is None:
        raise InputError("bundle has no section operator")
    B, pi, T = bundle.B, bundle.pi, bundle.T
    r = T.matrix
    if probes is None:
        probes = list(B.basis)
    pm = np.column_stack([f.values for f in probes])
    timg = r @ pm
    mult = 0.0
    worst_pair = None
    for i in range(pm.shape[1]):
        prod = pm * pm[:, i][:, None]
        res = np.abs(r @ prod - timg * timg[:, i][:, None]).max(axis=0)
        j = int(np.argmax(res))
        if res[j] > mult:
            mult = float(res[j])
            worst_pair = (probes[j].name, probes[i].name)
    mb = B.basis_matrix
    row_dev = 0.0
    for x in range(pi.target.size):
        ints = mb.T @ r[x]
        best = min(float(np.abs(ints - mb[y]).max()) for y in pi.fibers[x])
        row_dev = max(row_dev, best)
    clauses = [
        _clause("multiplicative_on_extension", mult, tol,
                detail="worst pair %r" % (worst_pair,), probes=pm.shape[1] ** 2),
        _clause("rows_represent_points", row_dev, tol),
    ]
    agree = (clauses[0].status == "pass") == (clauses[1].status == "pass")
    clauses.append(Clause(name="criterion_consistency",
                          status="pass" if agree else "fail",
                          detail="multiplicativity holds iff rows evaluate at points"))
    return Certificate(kind="homomorphism", clauses=clauses,
                       meta={"seed": seed, "probe_count": len(probes)})


def restrict_bundle(bundle: ExtensionBundle, base_subset) -> ExtensionBundle:
    """Restrict to a base subset and its full preimage; the locality of
    the construction means certificates survive restriction."""
    from .funcsys import _resolve_subset  # shared index resolution
    k_idx = _resolve_subset(bundle.A.space, base_subset)
    if not k_idx:
        raise InputError("empty base subset")
    pi = bundle.pi
    l_idx = [y for y in range(pi.source.size) if pi.assignment[y] in set(k_idx)]
    a_sub = restrict_system(bundle.A, k_idx)
    b_sub = restrict_system(bundle.B, l_idx)
    x_pos = {x: i for i, x in enumerate(k_idx)}
    y_pos = {y: i for i, y in enumerate(l_idx)}
    assign = [x_pos[pi.assignment[y]] for y in l_idx]
    pi_sub = SurjectionMap(source=b_sub.space, target=a_sub.space,
                           assignment=np.array(assign, dtype=int))
    t_sub = None
    if bundle.T is not None:
        rows = []
        for x in k_idx:
            w = bundle.T.rows[x].weights
            lost = float(np.abs(np.delete(w, l_idx)).sum()) if len(l_idx) < w.size else 0.0
            if lost > FIBER_MASS_TOL:
                raise ValidationError("row at base point %d carries %.3e mass "
                                      "outside the restriction" % (x, lost))
            rows.append(Measure(space=b_sub.space, weights=w[l_idx]))
        t_sub = make_operator(pi_sub, rows)
    meta = dict(bundle.meta)
    meta["restricted_to"] = [bundle.A.space.labels[i] for i in k_idx]
    return ExtensionBundle(A=a_sub, B=b_sub, pi=pi_sub, T=t_sub,
                           declared_flags=dict(bundle.declared_flags), meta=meta)
