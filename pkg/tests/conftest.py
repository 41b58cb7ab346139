"""Shared constructions for the test suite."""

import numpy as np

from uaext.averaging import fiber_average_operator, make_bundle
from uaext.funcsys import coordinate_table, generate_system, pullback_table
from uaext.space import make_space, make_surjection


def circle_points(n, radius=1.0):
    return [radius * np.exp(2j * np.pi * k / n) for k in range(n)]


def disk_points(n_boundary=32, rings=6, per_ring=8, r_max=0.6):
    """Unit circle samples plus staggered interior rings and the origin."""
    pts = circle_points(n_boundary)
    for i in range(1, rings + 1):
        r = r_max * i / rings
        for k in range(per_ring):
            pts.append(r * np.exp(2j * np.pi * (k + 0.5 * i) / per_ring))
    pts.append(0j)
    return pts


def three_fiber_cover(sizes=(2, 3, 4)):
    """A small cover with prescribed fiber sizes over labelled base points."""
    base = make_space([complex(k, 0) for k in range(len(sizes))])
    pts, assign = [], []
    for x, m in enumerate(sizes):
        for j in range(m):
            pts.append((complex(x, 0), complex(j + 1, x)))
            assign.append(x)
    cover = make_space(pts)
    # make_space sorts points; recompute the assignment from coordinates
    assign = [int(round(z.real)) for z in cover.coords[:, 0]]
    return base, cover, make_surjection(cover, base, assign)


def copy_extension_bundle(n=8, cap=3):
    """Two disjoint copies of a circle grid with the sheet average: the
    square-root-of-one extension, small enough for exhaustive checks."""
    base = make_space(circle_points(n))
    zvals = base.coords[:, 0]
    cover = make_space([(z, s) for z in zvals for s in (1.0, -1.0)])
    assign = [int(np.argmin(np.abs(zvals - z))) for z, _ in cover.coords]
    pi = make_surjection(cover, base, assign)
    a_sys = generate_system(base, [coordinate_table(base, name="z")], degree_cap=cap)
    b_sys = generate_system(
        cover,
        [pullback_table(pi, coordinate_table(base, name="z")),
         coordinate_table(cover, k=1, name="s")],
        degree_cap=cap)
    t_op = fiber_average_operator(pi)
    return make_bundle(a_sys, b_sys, pi, t_op,
                       declared_flags={"open_map": True, "group_implemented": True})
