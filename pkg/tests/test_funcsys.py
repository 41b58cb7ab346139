import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uaext.errors import InputError
from uaext.funcsys import (constant_table, coordinate_table, full_system,
                           generate_system, interpolation_feasible,
                           project_coefficients, pullback_system,
                           pullback_table, restrict_system, span_residual,
                           sup_norm, table)
from uaext.space import make_space, make_surjection


def circle_space(n, radius=1.0):
    return make_space([radius * np.exp(2j * np.pi * k / n) for k in range(n)])


def disk_space(n_boundary=32, rings=6, per_ring=8, r_max=0.6, center=True):
    pts = [np.exp(2j * np.pi * k / n_boundary) for k in range(n_boundary)]
    for i in range(1, rings + 1):
        r = r_max * i / rings
        for k in range(per_ring):
            pts.append(r * np.exp(2j * np.pi * (k + 0.5 * i) / per_ring))
    if center:
        pts.append(0j)
    return make_space(pts)


def annulus_space(r0=0.4, r1=0.7, n_r=5, n_theta=24):
    pts = []
    for i in range(n_r):
        r = r0 + (r1 - r0) * i / max(n_r - 1, 1)
        for k in range(n_theta):
            pts.append(r * np.exp(2j * np.pi * k / n_theta))
    return make_space(pts)


def test_polynomial_dimension_on_disk():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(100, 2))
    sp = make_space([complex(a, b) for a, b in pts])
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=5)
    assert sys.dim == 6
    assert sys.separates_points


def test_constant_generator_degenerates():
    sp = circle_space(8)
    sys = generate_system(sp, [constant_table(sp)], degree_cap=3)
    assert sys.dim == 1
    assert not sys.separates_points


def test_laurent_dimension_on_annulus():
    sp = annulus_space()
    z = coordinate_table(sp, name="z")
    zi = table(sp, 1.0 / sp.coords[:, 0], name="1/z")
    sys = generate_system(sp, [z, zi], degree_cap=4)
    assert sys.dim == 9


def test_constant_in_span_and_products_in_span():
    sp = disk_space()
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=5)
    assert span_residual(sys, constant_table(sp)) <= 1e-10
    # multiplicative consistency: products of generators within the cap
    z = sp.coords[:, 0]
    assert span_residual(sys, table(sp, z * z)) <= 1e-10
    assert span_residual(sys, table(sp, z ** 2 * z ** 3)) <= 1e-10


def test_sup_norm_examples():
    sp = circle_space(64)
    assert sup_norm(constant_table(sp)) == 1.0
    assert abs(sup_norm(coordinate_table(sp)) - 1.0) < 1e-12
    z = sp.coords[:, 0]
    # z^2 - 1 attains modulus 2 at the grid points z = +-1
    assert abs(sup_norm(table(sp, z ** 2 - 1)) - 2.0) < 1e-12
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=2)
    coeffs = np.zeros(sys.dim, dtype=complex)
    coeffs[0] = 3.0
    assert abs(sup_norm(coeffs, sys) - 3.0) < 1e-12


def test_span_residual_basis_members_and_conjugate():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, size=(80, 2))
    sp = make_space([complex(a, b) for a, b in pts])
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=4)
    for t in sys.basis:
        assert span_residual(sys, t) <= 1e-12
    conj = table(sp, np.conj(sp.coords[:, 0]))
    assert span_residual(sys, conj) > 0.1


def test_span_residual_aliasing_on_circle():
    # 64 samples, cap 5: z^6 is far from the span
    sp = circle_space(64)
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=5)
    z6 = table(sp, sp.coords[:, 0] ** 6)
    assert span_residual(sys, z6) > 0.5
    # but on a 5-point grid z^5 aliases the constant, so z^6 aliases z
    tiny = circle_space(5)
    sys_tiny = generate_system(tiny, [coordinate_table(tiny)], degree_cap=5)
    z6t = table(tiny, tiny.coords[:, 0] ** 6)
    assert span_residual(sys_tiny, z6t) <= 1e-10


def test_restrict_dimension_bounds():
    sp = circle_space(16)
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=5)
    same = restrict_system(sys, range(16))
    assert same.dim == sys.dim
    small = restrict_system(sys, [0, 5, 9])
    assert small.dim <= 3
    with pytest.raises(InputError):
        restrict_system(sys, [])


def test_restriction_monotonicity():
    sp = circle_space(12)
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=7)
    for size in (2, 5, 9):
        sub = restrict_system(sys, range(size))
        assert sub.dim <= min(sys.dim, size)


def test_pullback_isometry_and_fiber_constancy():
    base = circle_space(8)
    cover = make_space([(z, s) for z in base.coords[:, 0] for s in (1, -1)])
    assign = [int(np.argmin(np.abs(base.coords[:, 0] - z))) for z, _ in cover.coords]
    m = make_surjection(cover, base, assign)
    sys = generate_system(base, [coordinate_table(base)], degree_cap=3)
    pulled = pullback_system(m, sys)
    assert pulled.dim == sys.dim
    rng = np.random.default_rng(11)
    for _ in range(20):
        coeffs = rng.normal(size=sys.dim) + 1j * rng.normal(size=sys.dim)
        f = table(base, sys.basis_matrix @ coeffs)
        pf = pullback_table(m, f)
        assert sup_norm(pf) == sup_norm(f)  # exact: values are copies
        for x in range(base.size):
            ys = [y for y, xx in enumerate(m.assignment) if xx == x]
            assert np.ptp(pf.values[ys].real) == 0 and np.ptp(pf.values[ys].imag) == 0


def test_interpolation_full_system_always_feasible():
    sp = circle_space(10)
    sys = full_system(sp)
    rep = interpolation_feasible(sys, [0, 1], [5, 6])
    assert rep["feasible"]


def test_interpolation_constants_only_infeasible():
    sp = circle_space(10)
    sys = generate_system(sp, [constant_table(sp)], degree_cap=1)
    rep = interpolation_feasible(sys, [0], [5])
    assert not rep["feasible"]
    with pytest.raises(InputError):
        interpolation_feasible(sys, [0, 1], [1, 2])


def test_interpolation_cross_checked_with_direct_fit():
    rng = np.random.default_rng(8)
    pts = [complex(a, b) for a, b in rng.uniform(-1, 1, size=(200, 2))]
    sp = make_space(pts)
    z = sp.coords[:, 0]
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=8)
    near = [int(i) for i in np.nonzero(np.abs(z - 0.8) < 0.15)[0]][:4]
    far = [int(i) for i in np.nonzero(np.abs(z + 0.8) < 0.15)[0]][:4]
    assert near and far
    rep = interpolation_feasible(sys, near, far)
    # independent oracle: direct Vandermonde least squares
    van = np.column_stack([z ** k for k in range(9)])
    rows = van[near + far, :]
    rhs = np.concatenate([np.ones(len(near)), np.zeros(len(far))]).astype(complex)
    sol, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    resid = np.linalg.norm(rows @ sol - rhs)
    assert rep["feasible"] == (resid <= 1e-8)
    assert abs(rep["residual"] - resid) <= 1e-9


def test_separation_direct_scan_agreement():
    for builder, cap in [(lambda: circle_space(12), 3),
                         (lambda: circle_space(2), 1)]:
        sp = builder()
        sys = generate_system(sp, [coordinate_table(sp)], degree_cap=cap)
        bmat = sys.basis_matrix
        violated = False
        for i in range(sp.size):
            for j in range(i + 1, sp.size):
                if np.abs(bmat[i] - bmat[j]).max() <= 1e-10:
                    violated = True
        assert sys.separates_points == (not violated)
    sp = circle_space(6)
    sys = generate_system(sp, [constant_table(sp)], degree_cap=2)
    assert not sys.separates_points


def test_project_coefficients_roundtrip():
    sp = circle_space(32)
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=6)
    rng = np.random.default_rng(4)
    c = rng.normal(size=sys.dim) + 1j * rng.normal(size=sys.dim)
    f = sys.basis_matrix @ c
    c2, resid = project_coefficients(sys, f)
    assert resid <= 1e-10
    assert np.allclose(c, c2, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=3, max_value=40), st.integers(min_value=1, max_value=6))
def test_circle_monomial_dimension_property(n, cap):
    sp = circle_space(n)
    sys = generate_system(sp, [coordinate_table(sp)], degree_cap=cap)
    assert sys.dim == min(cap + 1, n)
