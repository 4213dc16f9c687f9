"""Shared surface builders and brute-force oracles for the tests."""
import math

import numpy as np

from pantsdecomp import geodesy as gd
from pantsdecomp import lorentz as lz
from pantsdecomp.surface import FNCoordinates, build_pants_graph, fn_to_group

ASINH1 = math.asinh(1.0)
SHORT = 2.0 * ASINH1


def fn_group(lengths, twists, shape="linear"):
    g = (len(lengths) + 3) // 3
    return fn_to_group(build_pants_graph(g, shape), FNCoordinates(tuple(lengths), tuple(twists)))


def surface_distance(geo, X, Y, cap):
    """Distance on the surface between frame points, exact when below ``cap``."""
    D = geo.domain
    X = D.reduce(X)[0]
    Y = D.reduce(Y)[0]
    tiles = D.tiles(cap + 2.0 * D.radius)
    return float(np.min(np.arccosh(np.maximum(1.0, -lz.mdot(X, tiles.mats @ Y)))))


def sample_chords(curve, per_chord=8):
    """Points spread along every chord of a curve (frame coordinates)."""
    out = []
    for ch in curve.chords:
        T = lz.line_tangent_at(ch.normal, ch.start)
        for t in np.linspace(0.0, ch.length, per_chord):
            out.append(lz.normalize_timelike(lz.point_along(ch.start, T, t)))
    return out


def crossing_by_sampling(geo, c1, c2, per_chord=200):
    """Sign-change oracle: does some chord of ``c1`` change side of a lift of ``c2``?"""
    tiles = geo.domain.tiles(2.0 * geo.domain.radius + 1e-9)
    lines = np.einsum("tij,cj->tci", tiles.mats, c2.normals).reshape(-1, 3)
    for ch in c1.chords:
        T = lz.line_tangent_at(ch.normal, ch.start)
        pts = np.array([lz.point_along(ch.start, T, t) for t in np.linspace(0.0, ch.length, per_chord)])
        s = np.sign(pts @ (lines * np.array([-1.0, 1.0, 1.0])).T)
        if np.any(s[:-1] * s[1:] < 0):
            return True
    return False


def geometry(group):
    return gd.geometry(group)


def shortest_loop_lift(group, x, radius):
    """Isometry of the shortest loop at ``x`` and its length, via the ball enumeration."""
    for w, m in gd.enumerate_ball(group, x, radius):
        return w, m
    raise AssertionError("no loop within the radius")


def loop_points(x, m, n):
    """Points along the lift of the loop from ``x`` to ``m x``."""
    from pantsdecomp.hypcore import HPoint

    X, Y = x.hyperboloid(), m(x).hyperboloid()
    out = []
    for t in np.linspace(0.0, 1.0, n):
        out.append(HPoint.from_hyperboloid(lz.normalize_timelike((1 - t) * X + t * Y)))
    return out
