import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uaext.errors import InputError, ValidationError
from uaext.space import (Measure, fiber, make_space, make_surjection,
                         point_mass, pushforward_measure)


def circle(n, radius=1.0):
    return [radius * np.exp(2j * np.pi * k / n) for k in range(n)]


def test_three_distinct_points():
    sp = make_space(circle(3))
    assert sp.size == 3
    assert len(set(sp.labels)) == 3


def test_duplicate_point_merges():
    sp = make_space([1 + 0j, 1 + 0j, 2 + 0j], merge_tol=1e-8)
    assert sp.size == 2
    sp2 = make_space([1 + 0j], merge_tol=1e-8)
    assert sp2.size == 1


def test_labels_stable_across_runs():
    pts = circle(16)
    a = make_space(pts)
    b = make_space(list(reversed(pts)))
    assert a.labels == b.labels
    assert np.array_equal(a.coords, b.coords)


def test_empty_and_mixed_arity_rejected():
    with pytest.raises(InputError):
        make_space([])
    with pytest.raises(InputError):
        make_space([(1 + 0j,), (1 + 0j, 2 + 0j)])


def test_identity_surjection_fibers():
    sp = make_space(circle(5))
    m = make_surjection(sp, sp, range(5))
    for i in range(5):
        assert fiber(m, i) == (i,)
    assert fiber(m, sp.labels[2]) == (2,)


def test_double_cover_fibers():
    base = make_space(circle(3))
    cover = make_space(circle(6, radius=2.0))
    m = make_surjection(cover, base, [0, 1, 2, 0, 1, 2])
    for i in range(3):
        assert len(fiber(m, i)) == 2
    # partition property
    all_pts = sorted(y for i in range(3) for y in fiber(m, i))
    assert all_pts == list(range(6))


def test_non_surjective_assignment_names_unhit_point():
    base = make_space(circle(3))
    cover = make_space(circle(6, radius=2.0))
    with pytest.raises(ValidationError) as err:
        make_surjection(cover, base, [0, 0, 0, 1, 1, 1])
    assert base.labels[2] in str(err.value)


def test_unknown_fiber_point():
    sp = make_space(circle(4))
    m = make_surjection(sp, sp, range(4))
    with pytest.raises(InputError):
        fiber(m, "nope")
    with pytest.raises(InputError):
        fiber(m, 11)


def test_pushforward_point_mass():
    base = make_space(circle(3))
    cover = make_space(circle(6, radius=2.0))
    m = make_surjection(cover, base, [0, 1, 2, 0, 1, 2])
    mu = point_mass(cover, 4)
    nu = pushforward_measure(m, mu)
    assert np.allclose(nu.weights, point_mass(base, 1).weights)


def test_pushforward_uniform_fiber_is_point_mass():
    base = make_space(circle(3))
    cover = make_space(circle(6, radius=2.0))
    m = make_surjection(cover, base, [0, 1, 2, 0, 1, 2])
    w = np.zeros(6, dtype=complex)
    for y in fiber(m, 1):
        w[y] = 0.5
    nu = pushforward_measure(m, Measure(space=cover, weights=w))
    assert np.allclose(nu.weights, point_mass(base, 1).weights, atol=1e-15)


def test_pushforward_integral_identity_random_tables():
    rng = np.random.default_rng(5)
    base = make_space(circle(7))
    cover = make_space([(z, s) for z in circle(7) for s in (1, -1)])
    assign = [int(np.argmin(np.abs(base.coords[:, 0] - z))) for z, _ in cover.coords]
    m = make_surjection(cover, base, assign)
    mu = Measure(space=cover, weights=rng.normal(size=14) + 1j * rng.normal(size=14))
    nu = pushforward_measure(m, mu)
    for _ in range(20):
        f = rng.normal(size=7) + 1j * rng.normal(size=7)
        lhs = nu.integrate(f)
        rhs = mu.integrate(f[m.assignment])
        assert abs(lhs - rhs) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 30))
def test_pushforward_total_variation_contracts(seed):
    rng = np.random.default_rng(seed)
    n_base = int(rng.integers(1, 5))
    n_cover = int(rng.integers(n_base, 9))
    base = make_space([complex(k, 0) for k in range(n_base)])
    cover = make_space([complex(k, 1) for k in range(n_cover)])
    assign = list(range(n_base)) + [int(rng.integers(0, n_base))
                                    for _ in range(n_cover - n_base)]
    m = make_surjection(cover, base, assign)
    mu = Measure(space=cover,
                 weights=rng.normal(size=n_cover) + 1j * rng.normal(size=n_cover))
    nu = pushforward_measure(m, mu)
    assert nu.total_variation <= mu.total_variation + 1e-12


def test_probability_flag():
    sp = make_space(circle(4))
    assert Measure(space=sp, weights=np.full(4, 0.25 + 0j)).is_probability()
    assert not Measure(space=sp, weights=np.array([0.5, 0.5, 0.25, -0.25], complex)).is_probability()
    assert not Measure(space=sp, weights=np.array([0.5, 0.5, 0.25j, -0.25j], complex)).is_probability()


def test_support_and_total_variation():
    sp = make_space(circle(3))
    mu = Measure(space=sp, weights=np.array([1.0, 0.0, -2.0], complex))
    assert mu.total_variation == 3.0
    assert mu.support() == (0, 2)
