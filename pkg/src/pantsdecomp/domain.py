"""Dirichlet fundamental domain of a Fuchsian group centred at ``i``.

The domain is the intersection of the half-planes closer to ``p = i`` than
to ``gamma p``.  It is cut out in the Klein model from a growing set of group
elements and accepted only when its area equals ``4 pi (g - 1)``; since any
finite set of bisectors gives a superset of the true domain, matching area is
a certificate.  Side pairings of the domain generate the group and drive a
tile-by-tile enumeration of group elements (``DirichletDomain.tiles``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from . import lorentz as lz
from .bounds import surface_area
from .hypcore import GeometryError
from .surface import FuchsianGroup, free_reduce, inverse_word

P0 = np.array([1.0, 0.0, 0.0])
DEFAULT_BUDGET = 10_000_000


class DomainError(GeometryError):
    pass


def so21_inverse(M):
    # elements of SO(2,1) satisfy M^T J M = J
    return lz.J @ np.swapaxes(M, -1, -2) @ lz.J


def polygon_area(V) -> float:
    """Area of a convex hyperbolic polygon from its hyperboloid vertices (any cyclic order)."""
    V = np.asarray(V, dtype=float)
    n = len(V)
    total = 0.0
    for i in range(n):
        X, U, W = V[i], V[i - 1], V[(i + 1) % n]
        t1 = U + lz.mdot(U, X) * X
        t2 = W + lz.mdot(W, X) * X
        c = lz.mdot(t1, t2) / math.sqrt(lz.mdot(t1, t1) * lz.mdot(t2, t2))
        total += math.acos(max(-1.0, min(1.0, float(c))))
    return (n - 2) * math.pi - total


@dataclass
class Side:
    normal: np.ndarray  # inward: <X, normal> >= 0 on the domain
    element: np.ndarray  # SO(2,1) matrix of gamma; the side lies on the bisector of p, gamma p
    word: tuple
    partner: int = -1


def _clip(poly, labels, a, b, label, eps=1e-13):
    """Clip a Klein polygon by ``a . k <= b``; ``labels[i]`` names the edge leaving vertex i."""
    n = len(poly)
    f = poly @ a - b
    inside = f <= eps
    if inside.all():
        return poly, labels
    if not inside.any():
        return poly[:0], []
    out, out_labels = [], []
    for i in range(n):
        j = (i + 1) % n
        if inside[i]:
            out.append(poly[i])
            out_labels.append(labels[i])
            if not inside[j]:
                t = f[i] / (f[i] - f[j])
                out.append(poly[i] + t * (poly[j] - poly[i]))
                out_labels.append(label)
        elif inside[j]:
            t = f[i] / (f[i] - f[j])
            out.append(poly[i] + t * (poly[j] - poly[i]))
            out_labels.append(labels[i])
    return np.array(out), out_labels


class _ElementSet:
    """Group elements keyed by the image of ``p`` (distinct elements move ``p`` apart).

    Products are formed in SL(2, R) in extended precision, whose entries grow
    like ``e^(d/2)`` rather than ``e^d``, and converted to SO(2,1) for the geometry.
    """

    # displacement below ~1e-3 can only be the identity up to rounding
    IDENTITY_COSH = 1.0 + 5e-7

    def __init__(self, cell):
        self.cell = cell
        self.sl: list = []
        self.mats: list = []
        self.words: list = []
        self._index: dict = {}

    def _key(self, M):
        x = M[1:, 0] / self.cell
        return int(math.floor(x[0] + 0.5)), int(math.floor(x[1] + 0.5))

    def find(self, M) -> int:
        kx, ky = self._key(M)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                i = self._index.get((kx + dx, ky + dy))
                if i is not None:
                    return i
        return -1

    def add(self, S, word) -> int:
        S = S / np.sqrt(S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0])
        M = lz.sl2_to_so21(S)
        if M[0, 0] < self.IDENTITY_COSH:
            return -1
        M = M.astype(float)
        i = self.find(M)
        if i >= 0:
            return i
        self._index[self._key(M)] = len(self.mats)
        self.sl.append(S)
        self.mats.append(M)
        self.words.append(free_reduce(word))
        return len(self.mats) - 1


class DirichletDomain:
    """Certified Dirichlet domain; build with :meth:`build`."""

    def __init__(self, group, sides, vertices, area, budget):
        self.group = group
        self.sides = sides
        self.vertices = vertices  # vertex i starts side i, counterclockwise
        self.area = area
        self.budget = budget
        self.normals = np.array([s.normal for s in sides])
        self.elements = np.array([s.element for s in sides])
        self.inverses = so21_inverse(self.elements)
        self.radius = float(max(lz.dist(P0, v) for v in vertices))
        m = min(float(np.arccosh(max(1.0, s.element[0, 0]))) for s in sides)
        self.min_displacement = m
        # orbit points of p are at least 2 sinh(m/2) apart in Euclidean hyperboloid coordinates
        self.cell = 2.0 * math.sinh(m / 2.0) / 8.0

    # ------------------------------------------------------------ build

    @classmethod
    def build(cls, group: FuchsianGroup, budget: int = DEFAULT_BUDGET, rounds: int = 30) -> "DirichletDomain":
        target = surface_area(group.genus)
        letters = [k for k in range(1, len(group.generators) + 1)] + [-k for k in range(1, len(group.generators) + 1)]
        letter_sl = {x: group.letter_matrix_ld(x) for x in letters}
        # a fine grid: any two elements we meet are far further apart
        elems = _ElementSet(2.0 * math.sinh(0.025) / 8.0)
        for x in letters:
            elems.add(letter_sl[x], (x,))

        # grow the element set by products of current side elements until the
        # polygon is compact and has the right area
        dom = None
        for _ in range(rounds):
            poly, labels = cls._cut(elems)
            compact = all(l is not None for l in labels) and np.max(np.sum(poly**2, axis=1)) < 1.0 - 1e-12
            cosh_lim = math.inf
            if compact:
                dom = cls._assemble(group, elems, poly, labels, budget)
                if dom is not None and abs(dom.area - target) <= 1e-7 * target:
                    dom._pair_sides()
                    return dom
                r = max(lz.dist(P0, lz.from_klein(v)) for v in poly)
                cosh_lim = math.cosh(2.0 * r) + 1e-9
            gens = [(elems.sl[l], elems.words[l]) for l in sorted(set(l for l in labels if l is not None))]
            gens += [(letter_sl[x], (x,)) for x in letters]
            before = len(elems.mats)
            for S, w in gens:
                for S2, w2 in gens:
                    P = S @ S2
                    # cosh of the displacement is half the squared Frobenius norm
                    if 0.5 * float(np.sum(P * P)) <= cosh_lim:
                        elems.add(P, w + w2)
            if len(elems.mats) > budget:
                raise kernels.BudgetExceeded("enumeration budget exceeded")
            if len(elems.mats) == before:
                break
        area = dom.area if dom is not None else float("nan")
        raise DomainError(f"domain area {area:.9g} does not match {target:.9g}: not certified")

    @staticmethod
    def _cut(elems):
        poly = np.array([[-1.5, -1.5], [1.5, -1.5], [1.5, 1.5], [-1.5, 1.5]])
        labels = [None] * 4
        order = np.argsort([M[0, 0] for M in elems.mats], kind="stable")
        cosh_lim = math.inf
        for i in order:
            M = elems.mats[i]
            if M[0, 0] > cosh_lim:
                break
            q = M[:, 0] - P0
            s = np.linalg.norm(q)
            # <(1, k), q> <= 0  <=>  k . q[1:] <= q[0]
            poly, labels = _clip(poly, labels, q[1:] / s, q[0] / s, i)
            if not len(poly):
                raise DomainError("empty fundamental domain")
            if all(l is not None for l in labels):
                # bisectors of points beyond twice the circumradius miss the polygon
                rho = np.max(np.sum(poly**2, axis=1))
                if rho < 1.0:
                    cosh_lim = math.cosh(2.0 * math.atanh(math.sqrt(rho))) + 1e-9
        return poly, labels

    @classmethod
    def _assemble(cls, group, elems, poly, labels, budget):
        if any(l is None for l in labels):
            return None
        # side elements rebuilt from their words in high precision
        accurate = {}
        for l in set(labels):
            accurate[l] = lz.sl2_to_so21(group.holonomy_ld(elems.words[l])).astype(float)
        normals = []
        for l in labels:
            q = accurate[l][:, 0] - P0
            normals.append(-lz.normalize_spacelike(q))
        # drop sides of (numerically) zero length
        keep_labels, keep_normals = list(labels), normals
        changed = True
        while changed and len(keep_labels) >= 3:
            changed = False
            n = len(keep_labels)
            verts = [_meet(keep_normals[i - 1], keep_normals[i]) for i in range(n)]
            for i in range(n):
                a, b = verts[i], verts[(i + 1) % n]
                if a is None or b is None or lz.dist(a, b) < 1e-9:
                    del keep_labels[i]
                    del keep_normals[i]
                    changed = True
                    break
        n = len(keep_labels)
        if n < 3:
            return None
        verts = np.array([_meet(keep_normals[i - 1], keep_normals[i]) for i in range(n)])
        sides = [Side(np.asarray(keep_normals[i]), accurate[l], elems.words[l]) for i, l in enumerate(keep_labels)]
        area = polygon_area(verts)
        return cls(group, sides, verts, area, budget)

    def _pair_sides(self):
        pts = {}
        for i, s in enumerate(self.sides):
            pts[i] = s.element[:, 0]
        for i, s in enumerate(self.sides):
            target = so21_inverse(s.element)[:, 0]
            for j, x in pts.items():
                if np.max(np.abs(x - target)) <= 1e-7 * max(1.0, abs(x[0])):
                    s.partner = j
                    break
            else:
                raise DomainError("unpaired side in fundamental domain")
        for i, s in enumerate(self.sides):
            # gamma^{-1} carries side i onto its partner with reversed orientation
            a, b = self.vertices[i], self.vertices[(i + 1) % len(self.sides)]
            j = s.partner
            c, d = self.vertices[j], self.vertices[(j + 1) % len(self.sides)]
            ga, gb = self.pull(i, a), self.pull(i, b)
            if max(lz.dist(ga, d), lz.dist(gb, c)) > 1e-6:
                raise DomainError("side pairing does not match side lengths")

    @property
    def elements_ld(self) -> np.ndarray:
        """Side elements in extended precision, rebuilt from their words."""
        got = getattr(self, "_elements_ld", None)
        if got is None:
            out = [lz.sl2_to_so21(self.group.holonomy_ld(s.word)) for s in self.sides]
            got = self._elements_ld = np.array(out)
        return got

    @property
    def inverses_ld(self) -> np.ndarray:
        got = getattr(self, "_inverses_ld", None)
        if got is None:
            got = self._inverses_ld = so21_inverse(self.elements_ld)
        return got

    def pull(self, s: int, X) -> np.ndarray:
        """``gamma_s^-1 X`` in extended precision.

        Side elements far from ``p`` have entries ~1e5; applied in doubles
        they move points by ~1e-5.
        """
        return (self.inverses_ld[s] @ np.asarray(X, dtype=np.longdouble)).astype(float)

    # ------------------------------------------------------------ queries

    @property
    def n_sides(self) -> int:
        return len(self.sides)

    def side_values(self, X):
        """``<X, N_s>`` for every side; all nonnegative on the domain."""
        return lz.mdot(np.asarray(X)[..., None, :], self.normals)

    def contains(self, X, tol: float = 1e-10) -> bool:
        return bool(np.all(self.side_values(X) >= -tol))

    def reduce(self, X, tol: float = 1e-12, max_steps: int = 10_000):
        """Move ``X`` into the domain: returns ``(Y, h, word)`` with ``X = h Y``."""
        X = np.asarray(X, dtype=float)
        h = np.eye(3)
        word: list = []
        for step in range(max_steps):
            vals = self.normals @ (lz.J @ X)
            s = int(np.argmin(vals))
            if vals[s] >= -tol * max(1.0, X[0]):
                return X, h, free_reduce(word)
            X = self.pull(s, X)
            h = h @ self.elements[s]
            word.extend(self.sides[s].word)
            if step % 16 == 15:
                X = lz.normalize_timelike(X)
        raise DomainError("point reduction did not terminate")

    def clip_line(self, N, F=None):
        """Intersection of the line with normal ``N`` and the domain.

        The line is parametrised by arclength ``X(t) = cosh t F + sinh t T``
        from the foot ``F`` (default: the point nearest ``p``) along its
        orientation.  Returns ``(t_in, t_out, side_in, side_out)`` or ``None``.
        """
        N = np.asarray(N, dtype=float)
        if F is None:
            F = lz.normalize_timelike(P0 - lz.mdot(P0, N) * N)
        T = lz.line_tangent_at(N, F)
        a = self.normals @ (lz.J @ F)
        b = self.normals @ (lz.J @ T)
        # a + b u >= 0 with u = tanh t
        lo, hi, s_lo, s_hi = -1.0, 1.0, -1, -1
        for s in range(self.n_sides):
            if b[s] > 0:
                u = -a[s] / b[s]
                if u > lo:
                    lo, s_lo = u, s
            elif b[s] < 0:
                u = -a[s] / b[s]
                if u < hi:
                    hi, s_hi = u, s
            elif a[s] < 0:
                return None
        if not lo < hi or s_lo < 0 or s_hi < 0:
            return None
        return math.atanh(lo), math.atanh(hi), s_lo, s_hi

    def tiles(self, radius: float, center=None, budget: int | None = None) -> "TileSet":
        """Every tile ``delta D`` with ``d(center, delta p) <= radius`` (the identity first)."""
        c = P0 if center is None else np.asarray(center, dtype=float)
        budget = self.budget if budget is None else budget
        mats, parent, via = kernels.ball_bfs(self.elements, c, math.cosh(radius), self.cell, budget)
        return TileSet(self, mats, parent, via)

    def covering_tiles(self, radius: float, center=None, budget: int | None = None) -> "TileSet":
        """Tiles meeting the closed ball of ``radius`` about ``center`` (a point of the domain)."""
        return self.tiles(radius + self.radius, center, budget)


def _meet(n1, n2):
    X = lz.mcross(n1, n2)
    q = -lz.mdot(X, X)
    if not q > 0:
        return None
    X = X / math.sqrt(q)
    return X if X[0] > 0 else -X


class TileSet:
    """Group elements found by :meth:`DirichletDomain.tiles`, with words on demand."""

    def __init__(self, domain, mats, parent, via):
        self.domain = domain
        self.mats = mats
        self.parent = parent
        self.via = via
        self._words = {0: ()}

    def __len__(self):
        return len(self.mats)

    def word(self, i: int) -> tuple:
        chain = []
        j = i
        while j not in self._words:
            chain.append(j)
            j = int(self.parent[j])
        w = self._words[j]
        for j in reversed(chain):
            w = free_reduce(w + self.domain.sides[int(self.via[j])].word)
            self._words[j] = w
        return self._words[i]

    def points(self):
        return self.mats[:, :, 0]

    def accurate_mats(self) -> np.ndarray:
        """Tile matrices recomputed in extended precision.

        Products of long side pairings cancel heavily; in double precision
        a tile far from ``p`` loses about as many digits as its entries grow.
        """
        got = getattr(self, "_accurate", None)
        if got is not None:
            return got
        E = self.domain.elements_ld
        n = len(self.mats)
        out = np.empty((n, 3, 3), dtype=np.longdouble)
        out[0] = np.eye(3, dtype=np.longdouble)
        depth = np.zeros(n, dtype=np.intp)
        for i in range(1, n):  # parents come first
            depth[i] = depth[self.parent[i]] + 1
        for d in range(1, int(depth.max(initial=0)) + 1):
            idx = np.nonzero(depth == d)[0]
            out[idx] = np.matmul(out[self.parent[idx]], E[self.via[idx]])
        self._accurate = out
        return out


def word_so21(group: FuchsianGroup, word) -> np.ndarray:
    return lz.sl2_to_so21(group.holonomy(word).matrix)


def conjugate_word(h_word, word):
    """Word of ``h w h^{-1}``."""
    return free_reduce(tuple(h_word) + tuple(word) + inverse_word(h_word))
