"""Builders for the example bundles exercised by the certificate suite.

Each builder returns a ready-to-verify ExtensionBundle (plus the group
action where one implements the averaging).  Parameters are desk-scale
defaults; every construction is deterministic in its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .averaging import ExtensionBundle, make_bundle, make_operator
from .errors import InputError
from .funcsys import (FunctionSystem, FunctionTable, _system_from_tables,
                      coordinate_table, full_system, generate_system,
                      pullback_table, span_residual, table)
from .group_ext import GroupAction, make_action
from .space import (FiniteSpace, Measure, MERGE_TOL, make_space,
                    make_surjection)

GALLERY_NAMES = ("disk", "basener", "dfp", "tensor_disk", "contraction")
DFP_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class DiskGridSpec:
    """Boundary circle samples plus staggered interior rings and the origin."""

    n_boundary: int = 32
    rings: int = 6
    points_per_ring: int = 8
    r_max: float = 0.6
    include_center: bool = True

    def points(self):
        pts = [np.exp(2j * np.pi * k / self.n_boundary)
               for k in range(self.n_boundary)]
        for i in range(1, self.rings + 1):
            r = self.r_max * i / self.rings
            for k in range(self.points_per_ring):
                pts.append(r * np.exp(2j * np.pi * (k + 0.5 * i)
                                      / self.points_per_ring))
        if self.include_center:
            pts.append(0j)
        return pts


def build_disk_algebra(grid_spec: DiskGridSpec | None = None,
                       degree_cap: int = 10) -> FunctionSystem:
    """Polynomials in z on a disk grid.  Choquet scans need the boundary
    circle; a grid without it gets a warning attached, not an error."""
    spec = grid_spec or DiskGridSpec()
    space = make_space(spec.points())
    system = generate_system(space, [coordinate_table(space, name="z")],
                             degree_cap=degree_cap)
    if spec.n_boundary < 1:
        system.meta["warnings"] = ["no boundary circle samples: boundary "
                                   "detection will be meaningless"]
    system.meta["grid"] = {"n_boundary": spec.n_boundary,
                           "interior": space.size - spec.n_boundary}
    return system


def _cyclic_fiber_action(space: FiniteSpace, n_fibers: int, m: int,
                         singleton_indices=()) -> GroupAction:
    """Z_m rotating consecutive blocks of m points, fixing listed points.

    Assumes the space was assembled fiber-by-fiber in index order.
    """
    n = space.size
    gen = np.arange(n)
    pos = 0
    singles = set(singleton_indices)
    while pos < n:
        if pos in singles:
            pos += 1
            continue
        block = list(range(pos, pos + m))
        for i, y in enumerate(block):
            gen[y] = block[(i + 1) % m]
        pos += m
    elems = [np.arange(n)]
    cur = gen.copy()
    while not np.array_equal(cur, np.arange(n)):
        elems.append(cur.copy())
        cur = gen[cur]
    return make_action(space, elems)


def build_basener(r0: float = 0.4, r1: float = 0.7, n_r: int = 5,
                  n_theta: int = 24, m_fiber: int = 64,
                  degree_cap: int = 4) -> dict:
    """The sphere bundle over an annulus: each base point carries a circle
    of radius sqrt(1 - |z|^2) in the second coordinate, the rational
    system downstairs is Laurent in z, upstairs it is Laurent in both the
    fiber coordinate and the pulled-back z, and the section operator is
    the exact fiber average implemented by the cyclic rotation."""
    if not 0.0 < r0 < r1:
        raise InputError("need 0 < r0 < r1")
    if r1 > 1.0 - 1e-3:
        raise InputError("the base must sit strictly inside the open unit disk")
    base_labels, base_coords = [], []
    k = 0
    radii = [r0 + (r1 - r0) * i / max(n_r - 1, 1) for i in range(n_r)]
    for r in radii:
        for t in range(n_theta):
            base_labels.append("k%03d" % k)
            base_coords.append([r * np.exp(2j * np.pi * t / n_theta)])
            k += 1
    base_space = FiniteSpace(labels=tuple(base_labels),
                             coords=np.array(base_coords))
    zvals = base_space.coords[:, 0]
    a_sys = generate_system(base_space,
                            [table(base_space, zvals, name="z"),
                             table(base_space, 1.0 / zvals, name="1/z")],
                            degree_cap=degree_cap)

    labels, coords, assign = [], [], []
    for i in range(base_space.size):
        radius = np.sqrt(1.0 - abs(zvals[i]) ** 2)
        for j in range(m_fiber):
            labels.append("%s:f%02d" % (base_space.labels[i], j))
            coords.append([zvals[i], radius * np.exp(2j * np.pi * j / m_fiber)])
            assign.append(i)
    cover = FiniteSpace(labels=tuple(labels), coords=np.array(coords))
    pi = make_surjection(cover, base_space, assign)
    wvals = cover.coords[:, 1]
    b_sys = generate_system(cover,
                            [table(cover, wvals, name="p"),
                             table(cover, 1.0 / wvals, name="1/p"),
                             table(cover, cover.coords[:, 0], name="z"),
                             table(cover, 1.0 / cover.coords[:, 0], name="1/z")],
                            degree_cap=degree_cap)
    rows = []
    for i in range(base_space.size):
        w = np.zeros(cover.size, dtype=complex)
        w[list(pi.fibers[i])] = 1.0 / m_fiber
        rows.append(Measure(space=cover, weights=w))
    t_op = make_operator(pi, rows)
    bundle = make_bundle(a_sys, b_sys, pi, t_op,
                         declared_flags={"open_map": True,
                                         "group_implemented": True},
                         meta={"kind": "basener", "m_fiber": m_fiber,
                               "r0": r0, "r1": r1})
    action = _cyclic_fiber_action(cover, base_space.size, m_fiber)
    return {"bundle": bundle, "action": action}


def default_null_functions(base: FunctionSystem, count: int = 8):
    """A null sequence in the ideal vanishing at the origin: decreasing
    multiples of low powers of z, so section images of capped products
    stay inside the base cap."""
    z = base.space.coords[:, 0]
    out = []
    for n in range(1, count + 1):
        power = 1 + (n - 1) % 3
        out.append(table(base.space, 0.5 ** n * z ** power,
                         name="f%d" % n))
    return out


def build_dfp(base: FunctionSystem, x0, f_list, m_fiber: int = 32,
              degree_cap: int = 4) -> dict:
    """The distinguished-point extension: over each base point the fiber is
    a circle of radius sqrt(max_n |f_n|) in the last coordinate with the
    ratio coordinates z_n = f_n / w, except over the distinguished point,
    where every f_n vanishes and the fiber collapses to one point."""
    if isinstance(x0, str):
        x0 = base.space.index_of(x0)
    f_list = list(f_list)
    if not f_list:
        raise InputError("need at least one null function")
    for f in f_list:
        if abs(f.values[x0]) > DFP_ZERO_TOL:
            raise InputError("null function %r does not vanish at the "
                             "distinguished point (|value| = %.3e)"
                             % (f.name, abs(f.values[x0])))
        resid = span_residual(base, f)
        if resid > 1e-9:
            raise InputError("null function %r is outside the base span" % (f.name,))
    n_funcs = len(f_list)
    fmat = np.column_stack([f.values for f in f_list])
    mvals = np.abs(fmat).max(axis=1)

    labels, coords, assign, singleton_rows = [], [], [], []
    for i in range(base.space.size):
        if mvals[i] <= DFP_ZERO_TOL:
            singleton_rows.append(len(labels))
            labels.append("%s:pt" % base.space.labels[i])
            coords.append(np.concatenate([base.space.coords[i],
                                          np.zeros(n_funcs + 1, dtype=complex)]))
            assign.append(i)
            continue
        radius = np.sqrt(mvals[i])
        for j in range(m_fiber):
            w = radius * np.exp(2j * np.pi * j / m_fiber)
            labels.append("%s:f%02d" % (base.space.labels[i], j))
            coords.append(np.concatenate([base.space.coords[i],
                                          fmat[i] / w, [w]]))
            assign.append(i)
    cover = FiniteSpace(labels=tuple(labels), coords=np.array(coords))
    pi = make_surjection(cover, base.space, assign)

    arity = base.space.arity
    gens = [pullback_table(pi, g) for g in base.generators]
    for nn in range(n_funcs):
        gens.append(table(cover, cover.coords[:, arity + nn], name="z%d" % (nn + 1)))
    gens.append(table(cover, cover.coords[:, arity + n_funcs], name="w"))
    b_sys = generate_system(cover, gens, degree_cap=degree_cap,
                            rank_tol=base.rank_tol)

    rows = []
    for i in range(base.space.size):
        w = np.zeros(cover.size, dtype=complex)
        fib = list(pi.fibers[i])
        w[fib] = 1.0 / len(fib)
        rows.append(Measure(space=cover, weights=w))
    t_op = make_operator(pi, rows)
    bundle = make_bundle(base, b_sys, pi, t_op,
                         declared_flags={"open_map": True,
                                         "group_implemented": True},
                         meta={"kind": "dfp", "m_fiber": m_fiber,
                               "n_null_functions": n_funcs,
                               "distinguished_point": base.space.labels[x0]})
    action = _cyclic_fiber_action(cover, base.space.size, m_fiber,
                                  singleton_indices=singleton_rows)
    return {"bundle": bundle, "action": action}


def diameter_grid(n: int = 11) -> FiniteSpace:
    return make_space([complex(-1.0 + 2.0 * k / (n - 1), 0.0) for k in range(n)])


def build_tensor_disk(disk_space: FiniteSpace | None = None, m_fiber: int = 16,
                      degree_cap: int = 4) -> ExtensionBundle:
    """Product of a disk grid with a circle, with the section at w = 1.
    The rows are point masses, so the section operator is multiplicative
    on the whole product system."""
    base_space = disk_space or diameter_grid()
    a_sys = generate_system(base_space,
                            [coordinate_table(base_space, name="z")],
                            degree_cap=degree_cap)
    labels, coords, assign = [], [], []
    for i in range(base_space.size):
        for j in range(m_fiber):
            labels.append("%s:f%02d" % (base_space.labels[i], j))
            coords.append([base_space.coords[i, 0],
                           np.exp(2j * np.pi * j / m_fiber)])
            assign.append(i)
    cover = FiniteSpace(labels=tuple(labels), coords=np.array(coords))
    pi = make_surjection(cover, base_space, assign)
    b_sys = generate_system(cover,
                            [table(cover, cover.coords[:, 0], name="z"),
                             table(cover, cover.coords[:, 1], name="w")],
                            degree_cap=degree_cap)
    rows = []
    for i in range(base_space.size):
        w = np.zeros(cover.size, dtype=complex)
        w[pi.fibers[i][0]] = 1.0  # fiber points start at angle 0, i.e. w = 1
        rows.append(Measure(space=cover, weights=w))
    t_op = make_operator(pi, rows)
    return make_bundle(a_sys, b_sys, pi, t_op,
                       declared_flags={"open_map": True,
                                       "group_implemented": False},
                       meta={"kind": "tensor_disk", "m_fiber": m_fiber,
                             "section": "w=1",
                             "section_is_homomorphism": True})


def build_contraction(cover: FiniteSpace, contracted, a0: FunctionSystem,
                      merge_tol: float = MERGE_TOL) -> ExtensionBundle:
    """Contract a point set to a single base point: downstairs everything,
    upstairs the tables whose restriction to the contracted set stays in
    the given system's span.  A plain extension: no section operator."""
    k_idx = []
    for p in contracted:
        k_idx.append(cover.index_of(p) if isinstance(p, str) else int(p))
    k_idx = sorted(set(k_idx))
    if len(k_idx) < 2 or len(k_idx) >= cover.size:
        raise InputError("contracted set must have >= 2 points and be proper")
    if a0.space.size != len(k_idx):
        raise InputError("the restricted system must live on the contracted set")
    survivors = [y for y in range(cover.size) if y not in set(k_idx)]
    x0_coord = cover.coords[k_idx, :].mean(axis=0)
    for y in survivors:
        gap = np.linalg.norm(np.concatenate([(cover.coords[y] - x0_coord).real,
                                             (cover.coords[y] - x0_coord).imag]))
        if gap <= merge_tol:
            raise InputError("contracted point lands on surviving point %r"
                             % (cover.labels[y],))
    labels = [cover.labels[y] for y in survivors] + ["x0"]
    coords = np.vstack([cover.coords[survivors, :], x0_coord[None, :]])
    base_space = FiniteSpace(labels=tuple(labels), coords=coords)
    pos = {y: i for i, y in enumerate(survivors)}
    assign = [pos.get(y, len(survivors)) for y in range(cover.size)]
    pi = make_surjection(cover, base_space, assign)

    tables = []
    eye = np.eye(cover.size, dtype=complex)
    for y in survivors:
        tables.append(FunctionTable(space=cover, values=eye[:, y],
                                    name="e[%s]" % cover.labels[y]))
    for t in a0.basis:
        v = np.zeros(cover.size, dtype=complex)
        v[k_idx] = t.values
        tables.append(FunctionTable(space=cover, values=v,
                                    name="k[%s]" % (t.name or "")))
    b_sys = _system_from_tables(cover, tables, tables, 1, a0.rank_tol,
                                meta={"kind": "contraction_extension"})
    a_sys = full_system(base_space)
    return make_bundle(a_sys, b_sys, pi, None,
                       declared_flags={"open_map": False,
                                       "group_implemented": False},
                       meta={"kind": "contraction",
                             "contracted": [cover.labels[y] for y in k_idx]})


def build_gallery(name: str, **params):
    """Dispatch a gallery build by name with keyword parameters."""
    if name == "disk":
        grid_keys = {"n_boundary", "rings", "points_per_ring", "r_max",
                     "include_center"}
        grid = DiskGridSpec(**{k: v for k, v in params.items() if k in grid_keys})
        return build_disk_algebra(grid, params.get("degree_cap", 10))
    if name == "basener":
        return build_basener(**params)
    if name == "dfp":
        base = params.pop("base", None)
        if base is None:
            base = build_disk_algebra(DiskGridSpec(), params.pop("base_cap", 6))
        x0 = params.pop("x0", None)
        if x0 is None:
            x0 = int(np.argmin(np.abs(base.space.coords[:, 0])))
        f_list = params.pop("f_list", None)
        if f_list is None:
            f_list = default_null_functions(base, params.pop("n_null", 8))
        return build_dfp(base, x0, f_list, **params)
    if name == "tensor_disk":
        return build_tensor_disk(params.get("disk_space"),
                                 params.get("m_fiber", 16),
                                 params.get("degree_cap", 4))
    if name == "contraction":
        return build_contraction(params["cover"], params["contracted"],
                                 params["a0"])
    raise InputError("unknown gallery name %r; expected one of %s"
                     % (name, ", ".join(GALLERY_NAMES)))
