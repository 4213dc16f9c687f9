import math

import numpy as np
import pytest

import oracles
from helpers import SHORT, crossing_by_sampling, fn_group, loop_points, sample_chords, shortest_loop_lift, surface_distance
from pantsdecomp import geodesy as gd
from pantsdecomp import lorentz as lz
from pantsdecomp.bounds import bavard_bound, r_g, seam_length, tri_rectangle_check
from pantsdecomp.hypcore import GeometryError, HPoint, apply, dist


def brute_force_systole(group, max_len=8):
    """Shortest translation length over all reduced words up to ``max_len``."""
    n = len(group.generators)
    letters = [k for k in range(1, n + 1)] + [-k for k in range(1, n + 1)]
    best = math.inf
    frontier = [((x,), group.letter_matrix(x)) for x in letters]
    for depth in range(1, max_len + 1):
        nxt = []
        for w, m in frontier:
            t = abs(m[0, 0] + m[1, 1])
            if t > 2 and w[0] != -w[-1]:
                best = min(best, 2 * math.acosh(t / 2))
            if depth < max_len:
                for x in letters:
                    if x != -w[-1]:
                        nxt.append((w + (x,), m @ group.letter_matrix(x)))
        # keep the search small: prune words that already move i far
        frontier = [(w, m) for w, m in nxt if (m * m).sum() < 2 * math.cosh(best + 8.0)]
    return best


# ---------------------------------------------------------------- enumeration


def test_enumerate_ball_small_radius_is_empty(bolza):
    assert list(gd.enumerate_ball(bolza, HPoint(0.0, 1.0), 0.5)) == []


def test_enumerate_ball_bolza(bolza):
    p = HPoint(0.0, 1.0)
    got = list(gd.enumerate_ball(bolza, p, 3.06))
    words = [w for w, _ in got]
    assert len(words) == len(set(words))
    disp = [dist(p, apply(m, p)) for _, m in got]
    assert min(disp) == pytest.approx(float(oracles.bolza_systole()), abs=1e-6)
    assert all(d <= 3.06 + 1e-9 for d in disp)


def test_enumerate_ball_radius_must_be_positive(bolza):
    with pytest.raises(ValueError):
        list(gd.enumerate_ball(bolza, HPoint(0.0, 1.0), 0.0))


# ---------------------------------------------------------------- systole


def test_bolza_systole(bolza):
    c, length = gd.systole(bolza)
    assert length == pytest.approx(float(oracles.bolza_systole()), abs=1e-6)
    assert c.length == pytest.approx(length, abs=1e-12)


def test_bolza_systole_brute_force(bolza):
    assert brute_force_systole(bolza, 6) == pytest.approx(gd.systole(bolza)[1], abs=1e-9)


def test_short_edge_is_systolic():
    grp = fn_group((1.0, 3.0, 3.5), (1.0, 0.5, 2.0))
    c, length = gd.systole(grp)
    assert length == pytest.approx(1.0, abs=1e-6)
    assert any(gd.same_class(c, gd.geometry(grp).curve(w)) for w in grp.edge_words[:1])
    assert brute_force_systole(grp, 5) == pytest.approx(length, abs=1e-9)


def test_systole_invariant_under_full_twists():
    lengths = (2.0, 3.0, 3.5)
    a = gd.systole(fn_group(lengths, (0.3, 0.2, 0.1)))[1]
    b = gd.systole(fn_group(lengths, (0.3 + 2.0, 0.2 - 3.0, 0.1 + 3.5)))[1]
    assert a == pytest.approx(b, abs=1e-8)


def test_short_classes(bolza):
    assert gd.short_classes(bolza, SHORT) == []
    grp = fn_group((1.5, 3.0, 3.5), (1.0, 0.5, 2.0))
    found = gd.short_classes(grp, SHORT)
    assert [round(c.length, 6) for c in found] == [1.5]
    grp = fn_group((1.0, 1.2, 3.5), (0.3, 0.2, 0.1))
    found = gd.short_classes(grp, SHORT)
    assert [round(c.length, 6) for c in found] == [1.0, 1.2]
    assert gd.disjoint(grp, found[0], found[1])


# ---------------------------------------------------------------- loops and distances


def test_shortest_loop_bavard(bolza, theta3):
    rng = np.random.default_rng(3)
    for grp in (bolza, theta3):
        for _ in range(20):
            x = HPoint(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 1.6))
            c, length = gd.shortest_loop_at(grp, x)
            assert length <= bavard_bound(2) + 1e-12
            assert c.length <= length + 1e-9


def test_shortest_loop_at_bolza_center(bolza):
    _, length = gd.shortest_loop_at(bolza, HPoint(0.0, 1.0))
    assert length <= bavard_bound(2)


def test_shortest_loop_on_systole_axis(bolza):
    c, sys_len = gd.systole(bolza)
    geo = gd.geometry(bolza)
    ch = c.chords[0]
    x = geo.from_frame(lz.normalize_timelike(ch.start + ch.end))
    _, length = gd.shortest_loop_at(bolza, x)
    assert length == pytest.approx(sys_len, abs=1e-8)


def test_dist_to_curve_on_axis(theta3):
    geo = gd.geometry(theta3)
    c = geo.curve(theta3.edge_words[0])
    for X in sample_chords(c, 3):
        assert gd.dist_to_curve(theta3, geo.from_frame(X), c) == pytest.approx(0.0, abs=1e-7)


def test_dist_to_curve_matches_sampling(theta3):
    geo = gd.geometry(theta3)
    c = geo.curve(theta3.edge_words[1])
    pts = sample_chords(c, 400)
    rng = np.random.default_rng(4)
    for _ in range(5):
        x = HPoint(rng.uniform(-0.3, 0.3), rng.uniform(0.7, 1.4))
        d = gd.dist_to_curve(theta3, x, c)
        X = geo.to_frame(x)
        sampled = min(surface_distance(geo, X, Y, d + 1.0) for Y in pts)
        assert sampled >= d - 1e-9
        assert sampled == pytest.approx(d, abs=1e-3)


def test_loop_geodesic_far_distance(theta3):
    # tri-rectangle inequality and the distance radius on loops whose geodesic is long enough
    geo = gd.geometry(theta3)
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(15):
        x = HPoint(rng.uniform(-0.4, 0.4), rng.uniform(0.6, 1.5))
        c, L = gd.shortest_loop_at(theta3, x)
        if c.length < SHORT:
            continue
        X = geo.to_frame(x)
        far = max(surface_distance(geo, X, Y, r_g(2) + 1.0) for Y in sample_chords(c, 6))
        assert far < r_g(2)
        checked += 1
    assert checked > 0


# ---------------------------------------------------------------- disjointness


def test_edge_curves_pairwise_disjoint(theta3):
    geo = gd.geometry(theta3)
    cs = [geo.curve(w) for w in theta3.edge_words]
    for a in cs:
        assert gd.is_simple(a)
        assert gd.disjoint(theta3, a, a)
        for b in cs:
            assert gd.disjoint(theta3, a, b) == gd.disjoint(theta3, b, a)
            assert gd.disjoint(theta3, a, b)


def test_transversal_crosses_edge(theta3):
    geo = gd.geometry(theta3)
    edge = geo.curve(theta3.edge_words[0])
    t = geo.curve((2,))
    assert not gd.disjoint(theta3, edge, t)
    assert not gd.disjoint(theta3, t, edge)
    assert crossing_by_sampling(geo, t, edge)
    assert not crossing_by_sampling(geo, geo.curve(theta3.edge_words[1]), edge)


def test_non_simple_class(theta3):
    c = gd.geometry(theta3).curve((1, 4))
    assert not gd.is_simple(c)
    assert not gd.disjoint(theta3, c, c)


def test_same_class_detects_conjugates(theta3):
    geo = gd.geometry(theta3)
    a = geo.curve((1, 2))
    b = geo.curve((2, 1))
    c = geo.curve((-2, -1))
    assert gd.same_class(a, b)
    assert gd.same_class(a, c)
    assert not gd.same_class(a, geo.curve((2,)))


def test_trivial_word_has_no_geodesic(theta3):
    with pytest.raises(GeometryError, match="no closed geodesic"):
        gd.geometry(theta3).curve((1, -1))


# ---------------------------------------------------------------- components


def test_components_counts(theta3):
    geo = gd.geometry(theta3)
    cs = [geo.curve(w) for w in theta3.edge_words]
    empty = gd.components(theta3, gd.CutSet())
    assert len(empty) == 1 and empty[0].sides == () and empty[0].euler_characteristic == -2
    one = gd.components(theta3, gd.CutSet((cs[0],)))
    assert len(one) == 1 and len(one[0].sides) == 2 and one[0].euler_characteristic == -2
    full = gd.components(theta3, gd.CutSet(tuple(cs)))
    assert len(full) == 2
    assert all(h.is_pants and len(h.sides) == 3 for h in full)
    assert sum(h.euler_characteristic for h in full) == -2
    # each curve bounds two sides in total
    sides = [s for h in full for s in h.sides]
    assert sorted(sides) == sorted((i, e) for i in range(3) for e in (-1, 1))


def test_same_component(dumbbell):
    geo = gd.geometry(dumbbell)
    sep = gd.CutSet((geo.curve(dumbbell.edge_words[1]),))
    halves = gd.components(dumbbell, sep)
    assert len(halves) == 2
    assert all(h.is_one_holed_torus_candidate for h in halves)
    a, b = halves[0].base_point, halves[1].base_point
    assert gd.same_component(dumbbell, a, a, sep)
    assert not gd.same_component(dumbbell, a, b, sep)
    assert gd.same_component(dumbbell, a, b, gd.CutSet())
    nonsep = gd.CutSet((geo.curve(dumbbell.edge_words[0]),))
    assert len(gd.components(dumbbell, nonsep)) == 1


# ---------------------------------------------------------------- farthest points, orthogeodesics


def test_farthest_point_empty_boundary(theta3):
    h = gd.components(theta3, gd.CutSet())[0]
    _, d = gd.farthest_point(theta3, gd.CutSet(), h, samples=50)
    assert d == math.inf


def test_farthest_point_in_pants_is_close(theta3):
    geo = gd.geometry(theta3)
    cut = gd.CutSet(tuple(geo.curve(w) for w in theta3.edge_words))
    for h in gd.components(theta3, cut):
        _, d = gd.farthest_point(theta3, cut, h, samples=1000)
        assert d < r_g(2)


def test_farthest_point_monotone_in_samples(theta3):
    geo = gd.geometry(theta3)
    cut = gd.CutSet((geo.curve(theta3.edge_words[0]),))
    h = gd.components(theta3, cut)[0]
    values = [gd.farthest_point(theta3, cut, h, samples=n, seed=3)[1] for n in (100, 200, 400, 800)]
    assert all(a <= b for a, b in zip(values, values[1:]))
    with pytest.raises(ValueError):
        gd.farthest_point(theta3, cut, h, samples=0)


def test_orthogeodesic_in_symmetric_pants(theta3):
    geo = gd.geometry(theta3)
    cut = gd.CutSet(tuple(geo.curve(w) for w in theta3.edge_words))
    h = gd.components(theta3, cut)[0]
    arc = gd.shortest_orthogeodesic(theta3, cut, h)
    assert arc.length == pytest.approx(seam_length(3.0, 3.0, 3.0), abs=1e-6)
    assert arc.from_side[0] != arc.to_side[0]
    # both feet lie on the boundary geodesics
    for foot, curve in ((arc.near_foot, arc.from_curve), (arc.far_foot, arc.to_curve)):
        assert gd.dist_to_curve(theta3, foot, curve) == pytest.approx(0.0, abs=1e-8)


def test_orthogeodesic_needs_boundary(theta3):
    h = gd.components(theta3, gd.CutSet())[0]
    with pytest.raises(GeometryError):
        gd.shortest_orthogeodesic(theta3, gd.CutSet(), h)


def test_tri_rectangle_on_measured_pairs(bolza, theta3):
    rng = np.random.default_rng(12)
    for grp in (bolza, theta3):
        for _ in range(6):
            x = HPoint(rng.uniform(-0.4, 0.4), rng.uniform(0.6, 1.5))
            c, L = gd.shortest_loop_at(grp, x)
            _, m = shortest_loop_lift(grp, x, bavard_bound(2) + 1e-6)
            assert dist(x, apply(m, x)) == pytest.approx(L, abs=1e-9)
            d = min(gd.dist_to_curve(grp, y, c) for y in loop_points(x, m, 24))
            assert tri_rectangle_check(d, c.length)
