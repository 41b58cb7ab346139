import numpy as np
import pytest
from conftest import disk_points
from hypothesis import given, settings
from hypothesis import strategies as st

from uaext.averaging import gce_certificate
from uaext.cole import (ColeSpec, cole_extend, cole_report, roots_of_monic,
                        vieta_residual)
from uaext.errors import InputError
from uaext.funcsys import (constant_table, coordinate_table, generate_system,
                           span_residual, table)
from uaext.space import make_space


def small_disk_system(cap=3, n_boundary=12, rings=2, per_ring=5, r_max=0.5):
    sp = make_space(disk_points(n_boundary, rings, per_ring, r_max))
    return generate_system(sp, [coordinate_table(sp, name="z")], degree_cap=cap)


def test_roots_quadratics():
    assert np.allclose(roots_of_monic([-1.0, 0.0], 2), [-1.0, 1.0])
    r = roots_of_monic([1.0, 0.0], 2)  # t^2 + 1, sorted by (re, im)
    assert np.allclose(r, [-1j, 1j])


def test_roots_cubic_against_expanded_product():
    # (t-1)(t-2)(t-3) = t^3 - 6t^2 + 11t - 6
    r = roots_of_monic([-6.0, 11.0, -6.0], 3)
    assert np.allclose(sorted(r.real), [1, 2, 3], atol=1e-9)
    assert np.abs(r.imag).max() < 1e-9


def test_roots_bad_input():
    with pytest.raises(InputError):
        roots_of_monic([1.0], 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 30), st.integers(min_value=2, max_value=5))
def test_roots_recover_random_factorizations(seed, degree):
    rng = np.random.default_rng(seed)
    true = rng.normal(size=degree) + 1j * rng.normal(size=degree)
    poly = np.array([1.0 + 0j])
    for z in true:
        poly = np.convolve(poly, [1.0, -z])
    coeffs = poly[1:][::-1]  # back to constant-first, monic leading dropped
    got = roots_of_monic(coeffs, degree)
    assert np.allclose(np.sort_complex(got), np.sort_complex(true), atol=1e-6)


def test_copy_extension_from_constant_polynomial():
    base = small_disk_system(cap=2)
    spec = ColeSpec(base=base,
                    coefficients=(constant_table(base.space, -1.0, name="-1"),
                                  constant_table(base.space, 0.0, name="0")),
                    degree=2)
    cb = cole_extend(spec)
    assert cb.bundle.pi.source.size == 2 * base.space.size
    for f in cb.bundle.pi.fibers:
        assert len(f) == 2
    # copy average: T∘Π* is exactly the identity
    r = cb.bundle.T.matrix
    for a in cb.bundle.A.basis:
        lifted = a.values[cb.bundle.pi.assignment]
        assert np.abs(r @ lifted - a.values).max() == 0.0


def test_square_root_of_z_fibers_match_quadratic_formula():
    base = small_disk_system(cap=3)
    z = coordinate_table(base.space, name="z")
    spec = ColeSpec(base=base,
                    coefficients=(table(base.space, -z.values, name="-z"),
                                  constant_table(base.space, 0.0, name="0")),
                    degree=2)
    cb = cole_extend(spec)
    for i, slots in enumerate(cb.root_slots):
        zval = base.space.coords[i, 0]
        if abs(zval) < 1e-14:
            assert len(slots) == 1
            assert slots[0][1] == 2  # double root, multiplicity kept in weights
        else:
            assert len(slots) == 2
            expect = np.sqrt(zval)
            got = sorted((s[0] for s in slots), key=lambda w: (w.real, w.imag))
            want = sorted([expect, -expect], key=lambda w: (w.real, w.imag))
            assert np.allclose(got, want, atol=1e-9)
    # roots of t^2 - z sum to zero: T kills the root coordinate
    timg = cb.bundle.T.apply(cb.root_coordinate)
    assert np.abs(timg.values).max() <= 1e-12
    assert vieta_residual(cb) <= 1e-10


def test_extension_images_return_to_base_span():
    base = small_disk_system(cap=3)
    z = coordinate_table(base.space, name="z")
    spec = ColeSpec(base=base,
                    coefficients=(table(base.space, -z.values, name="-z"),
                                  constant_table(base.space, 0.0, name="0")),
                    degree=2)
    cb = cole_extend(spec)
    r = cb.bundle.T.matrix
    for b in cb.bundle.B.basis:
        assert span_residual(cb.bundle.A, r @ b.values) <= 1e-8, b.name


def test_cole_report_copy_extension():
    base = small_disk_system(cap=2)
    spec = ColeSpec(base=base,
                    coefficients=(constant_table(base.space, -1.0, name="-1"),
                                  constant_table(base.space, 0.0, name="0")),
                    degree=2)
    cert = cole_report(cole_extend(spec))
    assert cert.passed
    assert cert.clause("choquet_pullback").status == "pass"
    assert cert.clause("naturality").status == "skipped"


def test_cole_report_square_root_bundle():
    base = small_disk_system(cap=3)
    z = coordinate_table(base.space, name="z")
    spec = ColeSpec(base=base,
                    coefficients=(table(base.space, -z.values, name="-z"),
                                  constant_table(base.space, 0.0, name="0")),
                    degree=2)
    cb = cole_extend(spec)
    cert = cole_report(cb)
    assert cert.passed, [(c.name, c.status) for c in cert.clauses]
    assert cert.clause("fiber_sizes").status == "pass"
    assert cert.clause("fiber_restriction_full").status == "pass"


def test_coefficient_outside_span_rejected():
    base = small_disk_system(cap=2)
    conj = table(base.space, np.conj(base.space.coords[:, 0]), name="zbar")
    with pytest.raises(InputError):
        ColeSpec(base=base, coefficients=(conj, constant_table(base.space, 0.0)),
                 degree=2)


def test_tower_composes():
    # adjoin square roots of two polynomials with disjoint zero sets; the
    # composed projection and composed averages again certify
    sp = make_space([np.exp(2j * np.pi * k / 6) * (0.5 + 0.08 * k) for k in range(6)])
    base = generate_system(sp, [coordinate_table(sp, name="z")], degree_cap=3)
    z = sp.coords[:, 0]
    g1 = table(sp, (z - z[0]) * (z - z[1]), name="g1")
    spec1 = ColeSpec(base=base,
                     coefficients=(table(sp, -g1.values, name="-g1"),
                                   constant_table(sp, 0.0)),
                     degree=2, extension_degree_cap=6)
    cb1 = cole_extend(spec1)
    b1 = cb1.bundle

    from uaext.funcsys import pullback_table
    g2 = table(sp, (z - z[3]) * (z - z[4]), name="g2")
    g2_up = pullback_table(b1.pi, g2)
    assert span_residual(b1.B, g2_up) <= 1e-9
    spec2 = ColeSpec(base=b1.B,
                     coefficients=(table(b1.B.space, -g2_up.values, name="-g2"),
                                   constant_table(b1.B.space, 0.0)),
                     degree=2, extension_degree_cap=12)
    cb2 = cole_extend(spec2)
    b2 = cb2.bundle

    # composite surjection and composite average
    from uaext.averaging import compose_operators, make_bundle
    from uaext.space import make_surjection
    comp_assign = b1.pi.assignment[b2.pi.assignment]
    comp_pi = make_surjection(b2.pi.source, b1.pi.target, comp_assign)
    comp_t = compose_operators(b1.T, b2.T)
    for x in range(sp.size):
        fib = {y for y in range(b2.pi.source.size) if comp_assign[y] == x}
        assert fib == set().union(*[set(b2.pi.fibers[y1]) for y1 in b1.pi.fibers[x]])
    comp_bundle = make_bundle(b1.A, b2.B, comp_pi, comp_t,
                              meta={"kind": "cole_tower"})
    cert = gce_certificate(comp_bundle)
    assert cert.passed, [(c.name, c.status, c.residual) for c in cert.clauses]
