"""Hyperboloid-model helpers used by the vectorized kernels.

Points of the hyperbolic plane are unit timelike vectors ``X`` with
``<X, X> = -1`` and ``X[0] > 0`` for the form ``-x0*y0 + x1*y1 + x2*y2``.
Geodesic lines are unit spacelike normals ``N``; the line is ``<X, N> = 0``
and the left side of the oriented line is ``<X, N> > 0``.

The upper half-plane point ``x + iy`` corresponds to the symmetric matrix
``(1/y) [[x^2 + y^2, x], [x, 1]] = [[X0 + X1, X2], [X2, X0 - X1]]`` so that
``i`` sits at ``(1, 0, 0)`` and ``M`` in SL(2, R) acts by ``P -> M P M^T``.
"""
from __future__ import annotations

import numpy as np

J = np.diag([-1.0, 1.0, 1.0])


def _real(a):
    # float64 unless already an extended float type
    a = np.asarray(a)
    return a if a.dtype == np.longdouble else a.astype(float, copy=False)


def mdot(a, b):
    """Minkowski product over the last axis (broadcasting)."""
    a = _real(a)
    b = _real(b)
    return -a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def mcross(a, b):
    """Minkowski cross product: orthogonal to both arguments for ``mdot``."""
    c = np.cross(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    c[..., 0] = -c[..., 0]
    return c


def normalize_spacelike(n):
    n = np.asarray(n, dtype=float)
    q = mdot(n, n)
    if np.any(q <= 0):
        raise ValueError("vector is not spacelike")
    return n / np.sqrt(q)[..., None]


def normalize_timelike(x):
    x = np.asarray(x, dtype=float)
    q = -mdot(x, x)
    if np.any(q <= 0):
        raise ValueError("vector is not timelike")
    x = x / np.sqrt(q)[..., None]
    return np.where(x[..., :1] < 0, -x, x)


def from_uhp(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    return np.stack([(r2 + 1.0) / (2.0 * y), (r2 - 1.0) / (2.0 * y), x / y], axis=-1)


def to_uhp(X):
    X = np.asarray(X, dtype=float)
    y = 1.0 / (X[..., 0] - X[..., 1])
    return X[..., 2] * y, y


def from_klein(k):
    k = np.asarray(k, dtype=float)
    s = 1.0 - np.sum(k * k, axis=-1)
    if np.any(s <= 0):
        raise ValueError("Klein coordinates outside the unit disk")
    w = 1.0 / np.sqrt(s)
    return np.concatenate([w[..., None], k * w[..., None]], axis=-1)


def to_klein(X):
    X = np.asarray(X, dtype=float)
    return X[..., 1:] / X[..., :1]


def to_disk(X):
    X = np.asarray(X, dtype=float)
    return X[..., 1:] / (1.0 + X[..., :1])


def ideal_to_null(u):
    """Null vector for the ideal point ``u`` (a float, or ``None`` for infinity)."""
    if u is None:
        return np.array([0.5, 0.5, 0.0])
    return np.array([(u * u + 1.0) / 2.0, (u * u - 1.0) / 2.0, u])


def null_to_ideal(v, tol=1e-14):
    v = np.asarray(v, dtype=float)
    den = v[0] - v[1]
    if abs(den) <= tol * max(abs(v[0]), 1.0):
        return None
    return v[2] / den


def line_through_null(u, v):
    """Unit normal of the line oriented from null vector ``u`` to ``v``."""
    return normalize_spacelike(mcross(v, u))


def line_through_points(X, Y):
    """Unit normal of the line through ``X`` then ``Y`` (left side positive)."""
    return normalize_spacelike(mcross(Y, X))


def line_endpoints(N):
    """Null vectors ``(start, end)`` of the oriented line with normal ``N``."""
    N = np.asarray(N, dtype=float)
    # a point on the line and the unit tangent pointing along the orientation
    foot = _line_foot(N)
    t = mcross(foot, N)
    return foot - t, foot + t


def _line_foot(N):
    # point of the line nearest to (1, 0, 0)
    o = np.array([1.0, 0.0, 0.0])
    x = o - mdot(o, N) * N
    return normalize_timelike(x)


def line_tangent_at(N, X):
    """Unit tangent at ``X`` (on the line ``N``) pointing along its orientation."""
    return mcross(X, N)


def point_along(X, T, s):
    return np.cosh(s) * np.asarray(X) + np.sinh(s) * np.asarray(T)


def dist(X, Y):
    """Hyperbolic distance, stable for nearby points (broadcasting)."""
    d = np.asarray(X, dtype=float) - np.asarray(Y, dtype=float)
    q = np.maximum(mdot(d, d), 0.0)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(q))


def _basis_images(M):
    M = np.asarray(M)
    M = M.astype(np.result_type(M.dtype, np.float64), copy=False)  # keeps longdouble
    basis = (np.eye(2), np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    basis = tuple(P.astype(M.dtype) for P in basis)
    cols = []
    for P in basis:
        Q = M @ P @ np.swapaxes(M, -1, -2)
        cols.append(
            np.stack(
                [(Q[..., 0, 0] + Q[..., 1, 1]) / 2.0, (Q[..., 0, 0] - Q[..., 1, 1]) / 2.0, Q[..., 0, 1]],
                axis=-1,
            )
        )
    return np.stack(cols, axis=-1)


def sl2_to_so21(M):
    """Linear map on hyperboloid coordinates induced by ``M`` (shape ``(..., 3, 3)``)."""
    return _basis_images(M)


def act_points(L, X):
    """Apply SO(2,1) matrices to points; broadcasting ``(..., 3, 3)`` with ``(..., 3)``."""
    return np.einsum("...ij,...j->...i", L, X)


def act_normals(L, N):
    # isometries preserve mdot, so normals transform like points
    return np.einsum("...ij,...j->...i", L, N)
