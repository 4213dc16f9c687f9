"""Closed-form length bounds for closed hyperbolic surfaces of genus g.

All functions take the genus as a plain integer and are total for ``g >= 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# 2 arcsinh 1: below this length simple closed geodesics are pairwise disjoint
SHORT_CURVE_LENGTH = 2.0 * math.asinh(1.0)
# strict inequalities count as failed within this relative margin
EQUALITY_MARGIN = 1e-12


class BoundError(ValueError):
    pass


def _check_genus(g) -> int:
    if isinstance(g, bool) or int(g) != g or g < 2:
        raise BoundError(f"genus must be an integer >= 2, got {g!r}")
    return int(g)


def acosh_stable(x: float) -> float:
    """arccosh written through log1p so that arguments near 1 keep their digits."""
    if x < 1.0:
        raise BoundError(f"arccosh argument {x} < 1")
    t = x - 1.0
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


def _angle(g: int) -> float:
    return math.pi / (12 * g - 6)


def bavard_bound(g: int) -> float:
    """Upper bound for the shortest geodesic loop through any point."""
    g = _check_genus(g)
    return 2.0 * acosh_stable(1.0 / (2.0 * math.sin(_angle(g))))


def r_g(g: int) -> float:
    """Distance radius R_g: arccosh(1 / (sqrt 2 sin(pi / (12g - 6))))."""
    g = _check_genus(g)
    return acosh_stable(1.0 / (math.sqrt(2.0) * math.sin(_angle(g))))


def r_g_rough(g: int) -> float:
    g = _check_genus(g)
    return math.log(4 * g - 2) + math.asinh(1.0)


def bers_bound(g: int) -> float:
    """Certified maximal curve length 4 pi (g - 1) + 4 R_g."""
    g = _check_genus(g)
    return 4.0 * math.pi * (g - 1) + 4.0 * r_g(g)


def surface_area(g: int) -> float:
    return 4.0 * math.pi * (_check_genus(g) - 1)


def disk_area(r: float) -> float:
    if r < 0:
        raise BoundError("negative radius")
    # 2 pi (cosh r - 1) = 4 pi sinh^2(r/2), exact near 0
    return 4.0 * math.pi * math.sinh(r / 2.0) ** 2


def weak_radius_bound(g: int) -> float:
    """Radius at which an embedded disk would use up the whole surface area."""
    g = _check_genus(g)
    return 2.0 * math.log(2 * g - 1 + math.sqrt(2 * g * (2 * g - 2)))


def loop_to_geodesic_distance_bound(loop_len: float, geo_len: float) -> float:
    """Bound on the distance from a loop's base point to its closed geodesic."""
    if not (loop_len > 0 and geo_len > 0):
        raise BoundError("lengths must be positive")
    return acosh_stable(math.cosh(loop_len / 2.0) / math.tanh(geo_len / 2.0))


def tri_rectangle_check(d: float, geo_len: float) -> bool:
    """Strict inequality sinh(d) sinh(l/2) < 1; equality counts as failure."""
    if d < 0 or not geo_len > 0:
        raise BoundError("need d >= 0 and geo_len > 0")
    return math.sinh(d) * math.sinh(geo_len / 2.0) < 1.0 - EQUALITY_MARGIN


def hexagon_rhs(l1: float, l2: float, c: float) -> float:
    h1, h2 = l1 / 2.0, l2 / 2.0
    return math.sinh(h1) * math.sinh(h2) * math.cosh(c) - math.cosh(h1) * math.cosh(h2)


def hexagon_third_side(l1: float, l2: float, c: float) -> float:
    """Third cuff of the pants with cuffs ``l1``, ``l2`` joined by a seam of length ``c``."""
    if not (l1 > 0 and l2 > 0 and c > 0):
        raise BoundError("lengths must be positive")
    rhs = hexagon_rhs(l1, l2, c)
    if rhs <= 1.0 + EQUALITY_MARGIN * math.cosh(l1 / 2.0) * math.cosh(l2 / 2.0) * math.cosh(c):
        raise BoundError("degenerate pants: hexagon relation gives cosh <= 1")
    return 2.0 * acosh_stable(rhs)


def seam_length(l1: float, l2: float, l3: float) -> float:
    """Seam between cuffs 1 and 2 of the pants with cuff lengths l1, l2, l3."""
    if not (l1 > 0 and l2 > 0 and l3 > 0):
        raise BoundError("lengths must be positive")
    h1, h2, h3 = l1 / 2.0, l2 / 2.0, l3 / 2.0
    return acosh_stable((math.cosh(h3) + math.cosh(h1) * math.cosh(h2)) / (math.sinh(h1) * math.sinh(h2)))


def neighborhood_radius_bound(boundary_len: float, g: int) -> float:
    """Largest r with boundary_len * sinh(r) within the surface area."""
    if not boundary_len > 0:
        raise BoundError("boundary length must be positive")
    return math.asinh(surface_area(g) / boundary_len)


@dataclass(frozen=True)
class BoundTable:
    genus: int
    bavard: float
    r_g: float
    r_g_rough: float
    bers: float

    @classmethod
    def for_genus(cls, g: int) -> "BoundTable":
        return cls(_check_genus(g), bavard_bound(g), r_g(g), r_g_rough(g), bers_bound(g))

    def rows(self):
        return [
            ("bavard", self.bavard),
            ("r_g", self.r_g),
            ("r_g_rough", self.r_g_rough),
            ("bers", self.bers),
        ]
