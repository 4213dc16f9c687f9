"""Upper half-plane geometry: points, isometries, geodesic lines and segments.

Distances, perpendiculars and side tests are evaluated in the hyperboloid
model (see :mod:`pantsdecomp.lorentz`); the public types live in the upper
half-plane.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, fields
from typing import Union

import numpy as np

from . import lorentz as lz


@dataclass
class Tolerances:
    """Every numeric tolerance of the package in one record.

    ``TOL`` is the live instance; change it through :func:`tolerances`.
    """

    det: float = 1e-12
    iso: float = 1e-9
    classify: float = 1e-9
    cross: float = 1e-10
    rel: float = 1e-8
    length: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"tolerance {f.name} must be positive")


TOL = Tolerances()


@contextmanager
def tolerances(**changes):
    """Temporarily override fields of ``TOL``."""
    Tolerances(**{**{f.name: getattr(TOL, f.name) for f in fields(TOL)}, **changes})  # validate
    old = {k: getattr(TOL, k) for k in changes}
    for k, v in changes.items():
        setattr(TOL, k, v)
    try:
        yield TOL
    finally:
        for k, v in old.items():
            setattr(TOL, k, v)


# renormalize by sqrt(det) after this many factors
RENORM_EVERY = 16


class GeometryError(ValueError):
    """Raised for geometrically invalid requests (crossing lines, elliptic holonomy...)."""


class _PointAtInfinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_PointAtInfinity, ())


INFINITY = _PointAtInfinity()
IdealPoint = Union[float, _PointAtInfinity]


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)) or self.y <= 0:
            raise GeometryError(f"not a point of the upper half-plane: ({self.x}, {self.y})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def hyperboloid(self) -> np.ndarray:
        return lz.from_uhp(self.x, self.y)

    @classmethod
    def from_hyperboloid(cls, X) -> "HPoint":
        x, y = lz.to_uhp(X)
        return cls(float(x), float(y))


def _canonical_sign(a, b, c, d):
    for v in (a, b, c, d):
        if v != 0:
            return (a, b, c, d) if v > 0 else (-a, -b, -c, -d)
    raise GeometryError("zero matrix")


@dataclass(frozen=True)
class Isometry:
    """Orientation-preserving isometry as a unit-determinant matrix, up to sign."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0 or not math.isfinite(det):
            raise GeometryError(f"matrix with determinant {det} is not an isometry")
        s = math.sqrt(det)
        a, b, c, d = _canonical_sign(self.a / s, self.b / s, self.c / s, self.d / s)
        # rounding of the renormalized determinant scales with the products
        if abs(a * d - b * c - 1.0) > TOL.det * max(1.0, abs(a * d), abs(b * c)):
            raise GeometryError("determinant did not renormalize to 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_matrix(cls, m) -> "Isometry":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, t: float) -> "Isometry":
        """Translation by ``t`` along the imaginary axis, towards infinity."""
        return cls(math.exp(t / 2), 0.0, 0.0, math.exp(-t / 2))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __call__(self, p: HPoint) -> HPoint:
        return apply(self, p)

    def so21(self) -> np.ndarray:
        return lz.sl2_to_so21(self.matrix)

    def close_to(self, other: "Isometry", tol: float = 1e-9) -> bool:
        m, n = self.matrix, other.matrix
        return min(np.max(np.abs(m - n)), np.max(np.abs(m + n))) <= tol


def compose(factors) -> Isometry:
    """Product of a sequence of isometries, renormalizing long chains."""
    m = np.eye(2)
    for i, f in enumerate(factors, 1):
        m = m @ (f.matrix if isinstance(f, Isometry) else np.asarray(f, dtype=float))
        if i % RENORM_EVERY == 0:
            m = m / math.sqrt(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return Isometry.from_matrix(m)


@dataclass(frozen=True)
class GeodesicLine:
    """Oriented geodesic from ``endpoint_1`` to ``endpoint_2``."""

    endpoint_1: IdealPoint
    endpoint_2: IdealPoint

    def __post_init__(self):
        for e in (self.endpoint_1, self.endpoint_2):
            if e is not INFINITY and not math.isfinite(e):
                raise GeometryError("ideal endpoints are reals or INFINITY")
        if self.endpoint_1 is INFINITY and self.endpoint_2 is INFINITY:
            raise GeometryError("degenerate line")
        if self.endpoint_1 is not INFINITY and self.endpoint_2 is not INFINITY:
            if self.endpoint_1 == self.endpoint_2:
                raise GeometryError("degenerate line")

    def normal(self) -> np.ndarray:
        return lz.line_through_null(_null(self.endpoint_1), _null(self.endpoint_2))

    @classmethod
    def from_normal(cls, N) -> "GeodesicLine":
        u, v = lz.line_endpoints(N)
        return cls(_ideal(lz.null_to_ideal(u)), _ideal(lz.null_to_ideal(v)))

    def reversed(self) -> "GeodesicLine":
        return GeodesicLine(self.endpoint_2, self.endpoint_1)


def _null(e: IdealPoint) -> np.ndarray:
    return lz.ideal_to_null(None if e is INFINITY else float(e))


def _ideal(u) -> IdealPoint:
    return INFINITY if u is None else float(u)


@dataclass(frozen=True)
class GeoSegment:
    start: HPoint
    end: HPoint

    def __post_init__(self):
        if self.start == self.end:
            raise GeometryError("degenerate segment")

    @property
    def length(self) -> float:
        return dist(self.start, self.end)


def dist(p: HPoint, q: HPoint) -> float:
    """Hyperbolic distance in the upper half-plane."""
    return 2.0 * math.asinh(abs(p.z - q.z) / (2.0 * math.sqrt(p.y * q.y)))


def apply(m: Isometry, p: HPoint) -> HPoint:
    z = p.z
    w = (m.a * z + m.b) / (m.c * z + m.d)
    if not w.imag > 0:
        raise GeometryError("isometry image left the upper half-plane; corrupted matrix")
    return HPoint(w.real, w.imag)


def apply_ideal(m: Isometry, u: IdealPoint) -> IdealPoint:
    if u is INFINITY:
        return INFINITY if m.c == 0 else m.a / m.c
    den = m.c * u + m.d
    if den == 0:
        return INFINITY
    return (m.a * u + m.b) / den


def classify(m: Isometry, tol: float | None = None) -> str:
    tol = TOL.classify if tol is None else tol
    t = abs(m.trace)
    if t < 2.0 - tol:
        return "elliptic"
    if t > 2.0 + tol:
        return "hyperbolic"
    if max(abs(m.a - m.d), abs(m.b), abs(m.c)) <= tol:
        return "identity"
    return "parabolic"


def translation_length(m: Isometry) -> float:
    if classify(m) != "hyperbolic":
        raise GeometryError("no closed geodesic: isometry is not hyperbolic")
    return 2.0 * math.acosh(abs(m.trace) / 2.0)


def axis(m: Isometry) -> GeodesicLine:
    """Axis of a hyperbolic isometry, oriented from repelling to attracting fixed point."""
    if classify(m) != "hyperbolic":
        raise GeometryError("no axis: isometry is not hyperbolic")
    a, b, c, d = m.a, m.b, m.c, m.d
    if abs(c) <= 1e-300:
        fixed = b / (d - a)
        # z -> (a z + b)/d: infinity attracts iff |a| > |d|
        return GeodesicLine(fixed, INFINITY) if abs(a) > abs(d) else GeodesicLine(INFINITY, fixed)
    disc = math.sqrt((a + d) ** 2 - 4.0)
    roots = [((a - d) + disc) / (2.0 * c), ((a - d) - disc) / (2.0 * c)]
    # attracting iff |m'(z)| = 1/(cz + d)^2 < 1
    deriv = [1.0 / (c * r + d) ** 2 for r in roots]
    if deriv[0] < deriv[1]:
        return GeodesicLine(roots[1], roots[0])
    return GeodesicLine(roots[0], roots[1])


def axis_normal(m: Isometry) -> np.ndarray:
    """Unit normal of the oriented axis, straight from the traceless part of the matrix."""
    if classify(m) != "hyperbolic":
        raise GeometryError("no axis: isometry is not hyperbolic")
    a, b, c, d = m.a, m.b, m.c, m.d
    t = a + d
    # <n(u), N> = 0 at the fixed points u, the roots of c u^2 + (d - a) u - b
    N = np.array([b - c, b + c, d - a]) * (math.copysign(1.0, t) / math.sqrt(t * t - 4.0))
    return lz.normalize_spacelike(N)


def point_to_line_distance(p: HPoint, line: GeodesicLine) -> float:
    return float(math.asinh(abs(lz.mdot(p.hyperboloid(), line.normal()))))


def common_perpendicular(l1: GeodesicLine, l2: GeodesicLine):
    """Length and segment of the common perpendicular of two disjoint lines."""
    ends1 = {l1.endpoint_1, l1.endpoint_2}
    if l2.endpoint_1 in ends1 or l2.endpoint_2 in ends1:
        raise GeometryError("asymptotic lines")
    n1, n2 = l1.normal(), l2.normal()
    c = abs(float(lz.mdot(n1, n2)))
    if c < 1.0:
        raise GeometryError("lines intersect")
    if c - 1.0 <= 1e-14:
        raise GeometryError("asymptotic lines")
    length, f1, f2 = perpendicular_feet(n1, n2)
    return length, GeoSegment(HPoint.from_hyperboloid(f1), HPoint.from_hyperboloid(f2))


def perpendicular_feet(n1, n2):
    """Length and feet of the common perpendicular of ultraparallel normals."""
    g = float(lz.mdot(n1, n2))
    # n2 - g n1 is orthogonal to n1 and to the perpendicular's normal
    f1 = lz.normalize_timelike(np.asarray(n2) - g * np.asarray(n1))
    f2 = lz.normalize_timelike(np.asarray(n1) - g * np.asarray(n2))
    return math.acosh(abs(g)), f1, f2


def segment_crosses_line(s: GeoSegment, line: GeodesicLine, tol: float | None = None) -> bool:
    """True iff the segment meets the line; endpoint touches count as crossings."""
    tol = TOL.cross if tol is None else tol
    n = line.normal()
    u = float(lz.mdot(s.start.hyperboloid(), n))
    v = float(lz.mdot(s.end.hyperboloid(), n))
    if abs(u) <= tol or abs(v) <= tol:
        return True
    return (u > 0) != (v > 0)
