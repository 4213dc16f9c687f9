import math

import mpmath as mp
import pytest

import oracles
from pantsdecomp.bounds import (
    BoundError,
    BoundTable,
    acosh_stable,
    bavard_bound,
    bers_bound,
    disk_area,
    hexagon_third_side,
    loop_to_geodesic_distance_bound,
    neighborhood_radius_bound,
    r_g,
    r_g_rough,
    seam_length,
    surface_area,
    tri_rectangle_check,
    weak_radius_bound,
)
from helpers import ASINH1, SHORT

GENERA = [2, 3, 4, 7, 10, 57, 100, 1000, 10_000]


@pytest.mark.parametrize("fn", [bavard_bound, r_g, r_g_rough, bers_bound, weak_radius_bound, surface_area])
@pytest.mark.parametrize("g", [1, 0, -3, 2.5, True])
def test_genus_domain(fn, g):
    with pytest.raises(BoundError):
        fn(g)


@pytest.mark.parametrize("g", GENERA)
def test_against_mpmath(g):
    assert bavard_bound(g) == pytest.approx(float(oracles.bavard(g)), rel=1e-13)
    assert r_g(g) == pytest.approx(float(oracles.r_g(g)), rel=1e-13)
    assert r_g_rough(g) == pytest.approx(float(oracles.r_g_rough(g)), rel=1e-14)
    assert bers_bound(g) == pytest.approx(float(oracles.bers(g)), rel=1e-14)
    assert weak_radius_bound(g) == pytest.approx(float(oracles.weak_radius(g)), rel=1e-14)


def test_genus_two_values():
    # mpmath, 40 digits
    assert bavard_bound(2) == pytest.approx(3.438214, abs=1e-6)
    assert r_g(2) == pytest.approx(2.081868, abs=1e-6)
    assert r_g_rough(2) == pytest.approx(2.673133, abs=1e-6)
    assert bers_bound(2) == pytest.approx(20.893842, abs=1e-6)
    assert r_g_rough(3) == pytest.approx(math.log(10) + ASINH1, abs=1e-14)
    assert r_g_rough(3) == pytest.approx(3.183959, abs=1e-6)


def test_bers_composition():
    assert bers_bound(3) == pytest.approx(8 * math.pi + 4 * r_g(3), abs=1e-13)


def test_bavard_below_twice_r_g():
    assert bavard_bound(2) < 2 * r_g(2)
    assert r_g(2) < r_g_rough(2)


def test_bavard_growth_sweep():
    # ratio to 2 log g stays bounded and the bound grows with g
    prev = 0.0
    for g in range(2, 10_001, 37):
        b = bavard_bound(g)
        assert b > prev
        prev = b
        assert b / (2 * math.log(g)) < 3.0


def test_bers_asymptotic_slope():
    # (B - 4 pi (g - 1)) / log g stays bounded: the excess over the area term is logarithmic
    for g in (10, 100, 1000, 10_000):
        assert (bers_bound(g) - surface_area(g)) / math.log(g) < 8.0
    assert bers_bound(10_000) / 9_999 == pytest.approx(4 * math.pi, abs=0.02)


def test_loop_bound_substitution_g2():
    v = loop_to_geodesic_distance_bound(bavard_bound(2), SHORT)
    assert v == pytest.approx(r_g(2), abs=1e-10)


def test_loop_bound_against_mpmath():
    for L, ell in [(2.0, 2.0), (0.5, 3.0), (3.4, 1.8), (6.0, 0.2)]:
        assert loop_to_geodesic_distance_bound(L, ell) == pytest.approx(float(oracles.loop_bound(L, ell)), rel=1e-13)


def test_loop_bound_long_geodesic_limit():
    assert loop_to_geodesic_distance_bound(2.0, 60.0) == pytest.approx(1.0, abs=1e-12)


def test_loop_bound_rejects_nonpositive():
    with pytest.raises(BoundError):
        loop_to_geodesic_distance_bound(0.0, 1.0)
    with pytest.raises(BoundError):
        loop_to_geodesic_distance_bound(1.0, -1.0)


def test_disk_area():
    assert disk_area(0.0) == 0.0
    assert disk_area(1.0) == pytest.approx(float(oracles.disk_area(1)), rel=1e-14)
    assert disk_area(1.0) == pytest.approx(3.412276, abs=1e-6)
    assert disk_area(1e-8) == pytest.approx(math.pi * 1e-16, rel=1e-8)
    with pytest.raises(BoundError):
        disk_area(-0.1)


def test_weak_radius_examples():
    assert weak_radius_bound(2) == pytest.approx(2 * math.log(3 + math.sqrt(8)), abs=1e-14)
    assert weak_radius_bound(2) == pytest.approx(3.525494, abs=1e-6)
    for g in range(2, 10_001, 11):
        assert weak_radius_bound(g) < 2 * math.log(4 * g - 2)


@pytest.mark.parametrize("g", GENERA)
def test_weak_bound_is_twice_the_area_radius(g):
    # the disk whose area equals the surface's has radius half the weak bound
    assert disk_area(weak_radius_bound(g) / 2) == pytest.approx(surface_area(g), rel=1e-6)


def test_tri_rectangle_examples():
    assert tri_rectangle_check(0.0, 5.0)
    assert not tri_rectangle_check(ASINH1, SHORT)
    assert tri_rectangle_check(0.5, 1.0)
    assert not tri_rectangle_check(2.0, 3.0)
    with pytest.raises(BoundError):
        tri_rectangle_check(-0.1, 1.0)


def test_hexagon_examples():
    with pytest.raises(BoundError, match="degenerate pants"):
        hexagon_third_side(SHORT, SHORT, SHORT)
    ref = float(oracles.hexagon(4, 4, 1))
    assert ref == pytest.approx(5.003784, abs=1e-6)
    assert hexagon_third_side(4.0, 4.0, 1.0) == pytest.approx(ref, abs=1e-12)
    with pytest.raises(BoundError):
        hexagon_third_side(0.0, 1.0, 1.0)


def test_hexagon_inverts_seam():
    for l1, l2, l3 in [(3, 3, 3), (1.8, 4.0, 2.2), (0.5, 6.0, 5.9)]:
        c = seam_length(l1, l2, l3)
        assert hexagon_third_side(l1, l2, c) == pytest.approx(l3, abs=1e-9)


def test_acosh_stable_near_one():
    t = 1e-12
    assert acosh_stable(1.0 + t) == pytest.approx(float(mp.acosh(1 + mp.mpf(t))), rel=1e-4)
    assert acosh_stable(1.0) == 0.0
    with pytest.raises(BoundError):
        acosh_stable(0.5)


def test_neighborhood_radius_examples():
    for g in (2, 3, 10):
        assert neighborhood_radius_bound(surface_area(g), g) == pytest.approx(ASINH1, abs=1e-14)
        assert neighborhood_radius_bound(2 * surface_area(g), g) == pytest.approx(math.asinh(0.5), abs=1e-14)
    assert math.asinh(0.5) == pytest.approx(0.481212, abs=1e-6)
    values = [neighborhood_radius_bound(L, 2) for L in (1e3, 1e2, 10.0, 1.0, 1e-3, 1e-9)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[-1] > 20.0
    with pytest.raises(BoundError):
        neighborhood_radius_bound(0.0, 2)


def test_bound_table():
    t = BoundTable.for_genus(2)
    assert [name for name, _ in t.rows()] == ["bavard", "r_g", "r_g_rough", "bers"]
    assert t.bers == bers_bound(2)
