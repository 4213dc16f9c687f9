"""Searches over a Fuchsian group and the topology of a cut surface.

All work happens in one certified Dirichlet domain ``D`` (see
:mod:`pantsdecomp.domain`), built around a fixed generic point so that no
curve of the built-in examples runs along a side.

* A closed geodesic is stored as its *chords*: the pieces of its lifts that
  cross ``D``, found by walking one period of an axis through the tiling.
  Two closed geodesics meet iff two of their chord lines cross anywhere in
  the plane (every line through a chord is a full lift), so disjointness and
  simplicity are decided exactly, without a conjugator search.
* Cutting ``D`` along all chords of a cut set and gluing the pieces across
  side pairings gives the components of the cut surface; areas give Euler
  characteristics through Gauss-Bonnet.
* Distances to the cut curves use every lift meeting a ball around ``D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import mpmath as mp
import numpy as np
from scipy.stats import qmc

from . import kernels
from . import lorentz as lz
from .bounds import SHORT_CURVE_LENGTH, r_g
from .domain import DEFAULT_BUDGET, P0, DirichletDomain, polygon_area, so21_inverse
from .hypcore import TOL, GeometryError, HPoint, Isometry, axis_normal, translation_length
from .surface import FuchsianGroup, cyclic_reduce, free_reduce, inverse_word

# generic centre of the domain: off the symmetry axes of the built-in surfaces
FRAME_CENTER = (0.0137, 1.0291)
WALK_STEP = 1e-7
GLUE_OVERLAP = 1e-7
RECENTER_ROUNDS = 2


class UndecidedError(GeometryError):
    """A search could not settle its question within its budget."""


def _acosh(x):
    return float(np.arccosh(max(1.0, float(x))))


# ---------------------------------------------------------------- curves


@dataclass(frozen=True)
class Chord:
    normal: np.ndarray  # oriented along the curve; left side positive
    start: np.ndarray
    end: np.ndarray
    length: float


@dataclass(eq=False)
class CurveClass:
    """Free homotopy class of a closed curve with its geodesic data.

    ``transitions[j]`` is the word of the group element carrying the tile of
    chord ``j + 1`` back to that of chord ``j``; their cyclic product is
    conjugate to ``word``.
    """

    word: tuple
    length: float
    holonomy: Isometry
    chords: tuple = field(repr=False)
    transitions: tuple = field(repr=False)
    primitive: bool = True

    def local_word(self, j: int) -> tuple:
        """Word of the holonomy whose axis is the line of chord ``j``, in the curve's direction."""
        seq = self.transitions[j:] + self.transitions[:j]
        out: list = []
        for t in seq:
            out.extend(t)
        return free_reduce(out)

    def cutting_word(self) -> tuple:
        return cyclic_reduce(self.local_word(0))

    @property
    def normals(self) -> np.ndarray:
        return np.array([c.normal for c in self.chords])


@dataclass(frozen=True)
class CutSet:
    curves: tuple = ()

    def __len__(self):
        return len(self.curves)

    def add(self, *curves) -> "CutSet":
        return CutSet(self.curves + tuple(curves))

    def without(self, index: int) -> "CutSet":
        return CutSet(self.curves[:index] + self.curves[index + 1 :])

    @property
    def total_length(self) -> float:
        return float(sum(c.length for c in self.curves))


@dataclass(frozen=True)
class SubsurfaceHandle:
    """One component of the surface cut along a :class:`CutSet`.

    ``sides`` lists the boundary components as ``(curve index, side)`` where
    side ``+1`` is the left of the curve's orientation.
    """

    index: int
    base_point: HPoint
    sides: tuple
    area: float
    euler_characteristic: int
    genus: int
    curves: tuple = field(repr=False)
    pieces: tuple = field(repr=False, default=())

    @property
    def boundary(self):
        mult: dict = {}
        for c, _ in self.sides:
            mult[c] = mult.get(c, 0) + 1
        return [(self.curves[c], m) for c, m in sorted(mult.items())]

    @property
    def is_pants(self) -> bool:
        return self.euler_characteristic == -1 and len(self.sides) == 3

    @property
    def is_one_holed_torus_candidate(self) -> bool:
        return self.euler_characteristic == -1 and len(self.sides) == 1

    @property
    def boundary_length(self) -> float:
        return float(sum(self.curves[c].length for c, _ in self.sides))


@dataclass(frozen=True)
class OrthoArc:
    """Shortest arc between boundary lifts, perpendicular at both ends.

    ``witness`` carries the lift of ``from_curve`` through the arc's start to
    the lift of ``to_curve`` through its end (same curve: a deck transformation;
    different curves: the conjugator of the far lift's holonomy).
    """

    from_curve: CurveClass
    to_curve: CurveClass
    length: float
    witness: Isometry
    from_side: tuple  # (curve index, side)
    to_side: tuple
    near_holonomy: tuple  # word, axis = near lift, oriented with the arc's region on the left
    far_holonomy: tuple  # word, same for the far lift
    near_foot: HPoint
    far_foot: HPoint
    translation_word: tuple = ()  # same-curve case: maps the near lift onto the far lift
    loop_words: tuple = ()  # same side of one curve: the two other boundary words of the pants


# ---------------------------------------------------------------- geometry context


class SurfaceGeometry:
    """Dirichlet domain plus caches for one group.

    Coordinates: the group is conjugated by ``z -> (z - x)/y`` so that
    ``FRAME_CENTER = x + iy`` becomes ``i``; all internal points and lines
    live in that frame.
    """

    def __init__(self, group: FuchsianGroup, budget: int = DEFAULT_BUDGET, center=FRAME_CENTER):
        self.group = group
        self.genus = group.genus
        self.budget = budget
        x, y = center
        s = math.sqrt(y)
        self.K = Isometry(1.0 / s, -x / s, 0.0, s)
        Kinv = self.K.inverse()
        with mp.workdps(40):
            ys = mp.sqrt(mp.mpf(y))
            K_mp = (1 / ys, -mp.mpf(x) / ys, mp.mpf(0), ys)
            Kinv_mp = (ys, mp.mpf(x) / ys, mp.mpf(0), 1 / ys)
            precise = [_mul_mp(_mul_mp(K_mp, group.letter_matrix_mp(k)), Kinv_mp) for k in range(1, len(group.generators) + 1)]
        self.frame = FuchsianGroup(
            genus=group.genus,
            generators=[self.K @ g @ Kinv for g in group.generators],
            relator=group.relator,
            edge_words=list(group.edge_words),
            base_point=(0.0, 1.0),
            name=group.name,
            precise=precise,
        )
        self.K_so = lz.sl2_to_so21(self.K.matrix)
        self.Kinv_so = so21_inverse(self.K_so)
        self.domain = DirichletDomain.build(self.frame, budget)
        self._curves: dict = {}

    # coordinates
    def to_frame(self, p: HPoint) -> np.ndarray:
        return self.K_so @ p.hyperboloid()

    def from_frame(self, X) -> HPoint:
        return HPoint.from_hyperboloid(self.Kinv_so @ np.asarray(X))

    def hol(self, word) -> Isometry:
        return self.frame.holonomy(word)

    def so21(self, word) -> np.ndarray:
        return lz.sl2_to_so21(self.frame.holonomy_ld(word)).astype(float)

    def _conjugate_axis(self, A_ld, hw) -> np.ndarray:
        # axis of hw^-1 A hw, i.e. hw^-1 applied to the axis of A, from SL(2) entries
        h = self.frame.holonomy_ld(hw)
        hi = np.array([[h[1, 1], -h[0, 1]], [-h[1, 0], h[0, 0]]])
        m = hi @ A_ld @ h
        a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        t = a + d
        N = np.array([b - c, b + c, d - a]) * (np.sign(t) / np.sqrt(t * t - 4))
        return lz.normalize_spacelike(N.astype(float))

    def centroid(self) -> np.ndarray:
        """Hyperboloid centre of mass of the domain's vertices (a frame point)."""
        return lz.normalize_timelike(np.mean(self.domain.vertices, axis=0))

    # curves
    def curve(self, word: Sequence[int]) -> CurveClass:
        w = cyclic_reduce(word)
        if not w:
            raise GeometryError("no closed geodesic in class: trivial word")
        got = self._curves.get(w)
        if got is None:
            got = self._walk(w)
            self._curves[w] = got
        return got

    def _walk(self, word) -> CurveClass:
        A = self.hol(word)
        try:
            ell = translation_length(A)
        except GeometryError:
            raise GeometryError("no closed geodesic in class: holonomy is not hyperbolic")
        D = self.domain
        NA = axis_normal(A)
        A_ld = self.frame.holonomy_ld(word)
        F = lz.normalize_timelike(P0 - lz.mdot(P0, NA) * NA)
        TA = lz.line_tangent_at(NA, F)
        # one period, centred on the foot, keeps ambient coordinates near e^(l/2)
        s = -ell / 2.0
        Xs = lz.point_along(F, TA, s)
        Y, _, hw = D.reduce(Xs)
        Nl = self._conjugate_axis(A_ld, hw)
        chords, words, cum = [], [], 0.0
        max_chords = 100_000
        near_end = ell - 1e-6 * max(1.0, ell)
        while True:
            Y = lz.normalize_timelike(Y - lz.mdot(Y, Nl) * Nl)
            clip = D.clip_line(Nl, F=Y)
            if clip is None:
                raise GeometryError("axis walk left the fundamental domain")
            a, b, _, s_out = clip
            if not chords:
                cum = -a  # period measured from the first chord's start
            elif cum >= near_end and _same_line(Nl, chords[0].normal, 1e-6, oriented=True):
                break  # first chord again, one period later
            elif cum > ell + 1e-6 * max(1.0, ell):
                raise GeometryError("axis walk did not close up after one period")
            T = lz.line_tangent_at(Nl, Y)
            start, end = lz.point_along(Y, T, a), lz.point_along(Y, T, b)
            chords.append(Chord(Nl, start, end, b - a))
            words.append(hw)
            cum += b
            if len(chords) > max_chords:
                raise kernels.BudgetExceeded("enumeration budget exceeded")
            # cross the exit side into the neighbouring tile
            hw2 = free_reduce(hw + D.sides[s_out].word)
            N2 = self._conjugate_axis(A_ld, hw2)
            Y2 = lz.normalize_timelike(D.pull(s_out, end))
            Y2 = lz.normalize_timelike(Y2 - lz.mdot(Y2, N2) * N2)
            nxt = D.clip_line(N2, F=Y2)
            if nxt is not None and abs(nxt[0]) < 1e-7 and nxt[1] > 1e-12:
                Y, hw, Nl = Y2, hw2, N2
                continue
            # the exit is at a vertex: step past it and reduce
            Z = D.pull(s_out, lz.point_along(Y, T, b + WALK_STEP))
            Y, _, w2 = D.reduce(Z)
            hw = free_reduce(hw2 + w2)
            Nl = self._conjugate_axis(A_ld, hw)
            cum += WALK_STEP
        words.append(hw)
        trans = tuple(free_reduce(inverse_word(words[i]) + words[i + 1]) for i in range(len(chords)))
        primitive = True
        n0 = chords[0].normal
        for c in chords[1:]:
            if _same_line(n0, c.normal, 1e-7, oriented=True):
                primitive = False
                break
        K_inv = self.K.inverse()
        return CurveClass(
            word=tuple(word),
            length=ell,
            holonomy=K_inv @ A @ self.K,
            chords=tuple(chords),
            transitions=trans,
            primitive=primitive,
        )

    def shortest_word(self, curve: CurveClass) -> CurveClass:
        """The same class under the shorter of its given and cutting-sequence words."""
        w = curve.cutting_word()
        if len(w) < len(curve.word):
            c = self.curve(w)
            if abs(c.length - curve.length) > 1e-7 * max(1.0, curve.length):
                raise GeometryError("cutting sequence disagrees with the curve's holonomy")
            return c
        return curve


def geometry(group: FuchsianGroup, budget: int | None = None) -> SurfaceGeometry:
    """The (cached) geometry context of ``group``."""
    geo = getattr(group, "_geometry", None)
    if geo is None or (budget is not None and geo.budget != budget):
        budget = DEFAULT_BUDGET if budget is None else budget
        geo = SurfaceGeometry(group, budget)
        # a Dirichlet domain centred in a thin part of the surface has a large
        # radius and every ball search grows like e^radius; recentre twice
        for _ in range(RECENTER_ROUNDS):
            c = geo.from_frame(geo.centroid())
            try:
                other = SurfaceGeometry(group, budget, center=(c.x, c.y))
            except (GeometryError, kernels.BudgetExceeded):
                break
            if other.domain.radius >= geo.domain.radius - 1e-3:
                break
            geo = other
        group._geometry = geo
    return geo


# ---------------------------------------------------------------- class relations


def _same_line(N1, N2, tol=1e-7, oriented=False) -> bool:
    # relative: normals of lines far from p are large
    tol = tol * max(1.0, float(np.max(np.abs(N1))))
    if np.max(np.abs(N1 - N2)) <= tol:
        return True
    return not oriented and bool(np.max(np.abs(N1 + N2)) <= tol)


def same_class(c1: CurveClass, c2: CurveClass) -> bool:
    """Same unoriented closed geodesic."""
    if abs(c1.length - c2.length) > 1e-7 * max(1.0, c1.length):
        return False
    n0 = c1.chords[0].normal
    return any(_same_line(n0, c.normal) for c in c2.chords)


def crossing_count(c1: CurveClass, c2: CurveClass) -> int:
    """Number of chord-line pairs that cross (each crossing counted once per witnessing pair)."""
    G = np.abs(lz.mdot(c1.normals[:, None, :], c2.normals[None, :, :]))
    if c1 is c2:
        G = G[np.triu_indices(len(c1.chords), 1)]
    return int(np.count_nonzero(G < 1.0 - TOL.cross))


def is_simple(c: CurveClass) -> bool:
    return c.primitive and crossing_count(c, c) == 0


def disjoint(group: FuchsianGroup, c1: CurveClass, c2: CurveClass) -> bool:
    """True iff the closed geodesics do not cross (a simple curve is disjoint from itself)."""
    if c1 is c2 or same_class(c1, c2):
        return is_simple(c1)
    return crossing_count(c1, c2) == 0


# ---------------------------------------------------------------- enumeration


def enumerate_ball(group: FuchsianGroup, center: HPoint, radius: float, budget: int | None = None) -> Iterator:
    """Every nontrivial element moving ``center`` by at most ``radius``, as ``(word, Isometry)``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    geo = geometry(group)
    D = geo.domain
    Y, h, hw = D.reduce(geo.to_frame(center))
    tiles = D.tiles(radius + D.radius, center=Y, budget=budget)
    disp = np.arccosh(np.maximum(1.0, -lz.mdot(Y, tiles.mats @ Y)))
    order = np.argsort(disp, kind="stable")
    for i in order:
        if i == 0 or disp[i] > radius:
            continue
        w = free_reduce(hw + tiles.word(int(i)) + inverse_word(hw))
        yield w, group.holonomy(w)


def systole(group: FuchsianGroup):
    """Shortest closed geodesic: ``(CurveClass, length)``.

    A closed geodesic of length ``l`` has a lift meeting ``D``, so its holonomy
    moves the domain centre by at most ``l + 2 r_D``; the search radius is the
    shortest side-pairing translation length plus ``2 r_D``.
    """
    geo = geometry(group)
    D = geo.domain
    best = min(2.0 * _acosh(abs(np.trace(_sl(geo, s.word))) / 2.0) for s in D.sides)
    tiles = D.tiles(best + 2.0 * D.radius + 1e-9)
    mats = tiles.mats
    tr = mats[:, 0, 0] + mats[:, 1, 1] + mats[:, 2, 2]
    # SO(2,1) trace = 1 + 2 cosh(l)
    lengths = np.arccosh(np.maximum(1.0, (tr - 1.0) / 2.0))
    lengths[0] = np.inf
    i = int(np.argmin(lengths))
    c = geo.curve(tiles.word(i))
    return geo.shortest_word(c), c.length


def _sl(geo, word):
    return geo.hol(word).matrix


def short_classes(group: FuchsianGroup, bound: float = SHORT_CURVE_LENGTH, tol: float = 1e-9):
    """All primitive closed geodesics of length at most ``bound``, shortest first."""
    geo = geometry(group)
    D = geo.domain
    tiles = D.tiles(bound + 2.0 * D.radius + 1e-9)
    mats = tiles.mats
    tr = mats[:, 0, 0] + mats[:, 1, 1] + mats[:, 2, 2]
    lengths = np.arccosh(np.maximum(1.0, (tr - 1.0) / 2.0))
    lengths[0] = np.inf
    found: list = []
    for i in np.argsort(lengths, kind="stable"):
        if lengths[i] > bound + tol:
            break
        c = geo.curve(tiles.word(int(i)))
        if not c.primitive or any(same_class(c, f) for f in found):
            continue
        found.append(geo.shortest_word(c))
    return found


def shortest_loop_at(group: FuchsianGroup, x: HPoint, radius: float | None = None):
    """Shortest geodesic loop based at ``x``: ``(CurveClass of its free homotopy class, loop length)``."""
    geo = geometry(group)
    word, length = _shortest_loop_frame(geo, geo.to_frame(x), radius)
    return geo.shortest_word(geo.curve(word)), length


def _shortest_loop_frame(geo, X, radius=None):
    from .bounds import bavard_bound

    D = geo.domain
    Y, h, hw = D.reduce(X)
    R = bavard_bound(geo.genus) + 1e-6 if radius is None else radius
    while True:
        tiles = D.tiles(R + D.radius, center=Y)
        disp = np.arccosh(np.maximum(1.0, -lz.mdot(Y, tiles.mats @ Y)))
        disp[0] = np.inf
        i = int(np.argmin(disp))
        if disp[i] <= R:
            break
        R *= 2.0
    word = free_reduce(hw + tiles.word(i) + inverse_word(hw))
    return word, float(disp[i])


def dist_to_curve(group: FuchsianGroup, x: HPoint, c: CurveClass) -> float:
    """Distance from ``x`` to the closed geodesic of ``c``."""
    geo = geometry(group)
    D = geo.domain
    Y, _, _ = D.reduce(geo.to_frame(x))
    N = c.normals
    cap = 1.0
    while True:
        tiles = D.tiles(cap + 2.0 * D.radius)
        lines = _lift_lines(tiles, N).reshape(-1, 3)
        v, _ = kernels.min_abs_dot(Y[None, :], lines)
        d = float(np.arcsinh(v[0]))
        if d <= cap:
            return d
        cap *= 2.0


def _lift_lines(tiles, N) -> np.ndarray:
    """Normals ``tile @ N`` for every tile and row of ``N``: shape ``(tiles, rows, 3)``."""
    L = np.einsum("tij,cj->tci", tiles.accurate_mats(), np.asarray(N, dtype=np.longdouble))
    return L.astype(float)


# ---------------------------------------------------------------- cut surfaces


@dataclass
class _Piece:
    verts: np.ndarray
    labels: list  # ("side", s) or ("cut", curve, sign)
    area: float = 0.0
    normals: np.ndarray | None = None
    component: int = -1


def _hclip(verts, labels, N, new_label, eps):
    """Keep the part of a convex polygon with ``<X, N> >= 0``."""
    f = lz.mdot(verts, N)
    inside = f >= -eps
    if inside.all():
        return verts, list(labels)
    if not inside.any():
        return verts[:0], []
    out, out_labels = [], []
    n = len(verts)
    for i in range(n):
        j = (i + 1) % n
        if inside[i]:
            out.append(verts[i])
            out_labels.append(labels[i])
            if not inside[j]:
                t = f[i] / (f[i] - f[j])
                out.append(lz.normalize_timelike(verts[i] + t * (verts[j] - verts[i])))
                out_labels.append(new_label)
        elif inside[j]:
            t = f[i] / (f[i] - f[j])
            out.append(lz.normalize_timelike(verts[i] + t * (verts[j] - verts[i])))
            out_labels.append(labels[i])
    # a vertex on the cut line yields a zero-length edge; drop it
    keep_v, keep_l = [], []
    for X, lab in zip(out, out_labels):
        if keep_v and lz.dist(keep_v[-1], X) < 1e-12:
            keep_l[-1] = lab
            continue
        keep_v.append(X)
        keep_l.append(lab)
    if len(keep_v) > 1 and lz.dist(keep_v[-1], keep_v[0]) < 1e-12:
        keep_v.pop()
        keep_l.pop()
    if len(keep_v) < 3:
        return verts[:0], []
    return np.array(keep_v), keep_l


class CutGeometry:
    """Pieces of ``D`` cut along a cut set, its components, and nearby lifts."""

    def __init__(self, geo: SurfaceGeometry, cut: CutSet):
        self.geo = geo
        self.cut = cut
        D = geo.domain
        rows, owner, chord_idx = [], [], []
        for ci, c in enumerate(cut.curves):
            for j, ch in enumerate(c.chords):
                rows.append(ch.normal)
                owner.append(ci)
                chord_idx.append(j)
        self.chord_normals = np.array(rows).reshape(-1, 3)
        self.chord_owner = np.array(owner, dtype=np.intp)
        self.chord_index = np.array(chord_idx, dtype=np.intp)
        self._lifts: dict = {}
        self.pieces = self._cut_pieces(D)
        self.handles = self._components(D)

    # pieces and components
    def _cut_pieces(self, D):
        pieces = [_Piece(D.vertices.copy(), [("side", s) for s in range(D.n_sides)])]
        for ci, c in enumerate(self.cut.curves):
            for ch in c.chords:
                if ch.length < 1e-9:
                    continue
                N = ch.normal
                hit = False
                for k in range(len(pieces)):
                    P = pieces[k]
                    f = lz.mdot(P.verts, N)
                    eps = 1e-11 * max(1.0, float(np.max(P.verts[:, 0])))
                    if f.max() > eps and f.min() < -eps:
                        v1, l1 = _hclip(P.verts, P.labels, N, ("cut", ci, 1), eps)
                        v2, l2 = _hclip(P.verts, P.labels, -N, ("cut", ci, -1), eps)
                        pieces[k] = _Piece(v1, l1)
                        pieces.append(_Piece(v2, l2))
                        hit = True
                        break
                if not hit:
                    raise GeometryError("cut curve runs along a side of the fundamental domain")
        total = 0.0
        for P in pieces:
            P.area = polygon_area(P.verts)
            total += P.area
            c = lz.normalize_timelike(np.mean(P.verts, axis=0))
            n = len(P.verts)
            normals = []
            for i in range(n):
                N = lz.line_through_points(P.verts[i], P.verts[(i + 1) % n])
                normals.append(N if lz.mdot(c, N) > 0 else -N)
            P.normals = np.array(normals)
        if abs(total - D.area) > 1e-6 * D.area:
            raise GeometryError(f"cut pieces cover area {total:.9g}, domain has {D.area:.9g}")
        return pieces

    def _components(self, D):
        pieces = self.pieces
        parent = list(range(len(pieces)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        on_side: dict = {s: [] for s in range(D.n_sides)}
        for k, P in enumerate(pieces):
            n = len(P.verts)
            for i, lab in enumerate(P.labels):
                if lab[0] == "side":
                    on_side[lab[1]].append((k, P.verts[i], P.verts[(i + 1) % n]))

        def pos(X, s):
            return _acosh(-lz.mdot(X, D.vertices[s]))

        for s in range(D.n_sides):
            t = D.sides[s].partner
            if t < s:
                continue
            theirs = [(k, *sorted((pos(a, t), pos(b, t)))) for k, a, b in on_side[t]]
            for k, a, b in on_side[s]:
                lo, hi = sorted((pos(D.pull(s, a), t), pos(D.pull(s, b), t)))
                for k2, lo2, hi2 in theirs:
                    # endpoints of glued chords agree to ~1e-9; real overlaps are edge-sized
                    if min(hi, hi2) - max(lo, lo2) > GLUE_OVERLAP:
                        parent[find(k)] = find(k2)

        roots = sorted({find(k) for k in range(len(pieces))})
        comp_of = {r: i for i, r in enumerate(roots)}
        for k, P in enumerate(pieces):
            P.component = comp_of[find(k)]
        handles = []
        seen_sides: dict = {}
        for ci in range(len(roots)):
            members = [k for k, P in enumerate(pieces) if P.component == ci]
            area = sum(pieces[k].area for k in members)
            chi_f = -area / (2.0 * math.pi)
            chi = int(round(chi_f))
            if abs(chi - chi_f) > 1e-6:
                raise GeometryError(f"component area {area:.9g} is not a multiple of 2 pi")
            sides = sorted({lab[1:] for k in members for lab in pieces[k].labels if lab[0] == "cut"})
            for sd in sides:
                if sd in seen_sides:
                    raise GeometryError("a curve side borders two components")
                seen_sides[sd] = ci
            b = len(sides)
            twice_genus = 2 - chi - b
            if twice_genus < 0 or twice_genus % 2:
                raise GeometryError("inconsistent Euler characteristic for a component")
            big = max(members, key=lambda k: pieces[k].area)
            base = lz.normalize_timelike(np.mean(pieces[big].verts, axis=0))
            handles.append(
                SubsurfaceHandle(
                    index=ci,
                    base_point=self.geo.from_frame(base),
                    sides=tuple(sides),
                    area=area,
                    euler_characteristic=chi,
                    genus=twice_genus // 2,
                    curves=self.cut.curves,
                    pieces=tuple(members),
                )
            )
        return handles

    def locate(self, X) -> int:
        """Component index of a frame point (any lift)."""
        Y, _, _ = self.geo.domain.reduce(X)
        for P in self.pieces:
            if np.all(lz.mdot(Y, P.normals) >= -1e-12):
                return P.component
        raise GeometryError("point not located in any piece")

    def component_of_points(self, Y) -> np.ndarray:
        """Component index of each frame point of ``Y`` (points of ``D``); -1 if none."""
        out = np.full(len(Y), -1, dtype=np.intp)
        for P in self.pieces:
            inside = np.all(lz.mdot(Y[:, None, :], P.normals[None, :, :]) >= 0.0, axis=1)
            out[(out < 0) & inside] = P.component
        return out

    # lifts
    def lifts(self, cap: float):
        """All cut-curve lifts within ``cap`` of some point of ``D``.

        Returns ``(normals, owner, chord, tile)`` arrays and the tile set.
        """
        key = round(cap, 9)
        if key in self._lifts:
            return self._lifts[key]
        D = self.geo.domain
        tiles = D.tiles(cap + 2.0 * D.radius)
        if len(self.chord_normals) == 0:
            out = (np.zeros((0, 3)), np.zeros(0, np.intp), np.zeros(0, np.intp), np.zeros(0, np.intp), tiles)
            self._lifts[key] = out
            return out
        lines = _lift_lines(tiles, self.chord_normals)
        nt, nc = lines.shape[:2]
        lines = lines.reshape(-1, 3)
        tile_of = np.repeat(np.arange(nt), nc)
        chord_of = np.tile(np.arange(nc), nt)
        near = np.arcsinh(np.abs(lz.mdot(P0, lines))) <= cap + D.radius + 1e-9
        lines, tile_of, chord_of = lines[near], tile_of[near], chord_of[near]
        # the same lift appears once per tile it crosses; keep one copy
        scale = np.maximum(1.0, np.abs(lines[:, :1]))
        keys = np.round(lines / scale * 1e7).astype(np.int64)
        _, first = np.unique(keys, axis=0, return_index=True)
        first.sort()
        lines, tile_of, chord_of = lines[first], tile_of[first], chord_of[first]
        out = (lines, self.chord_owner[chord_of], chord_of, tile_of, tiles)
        self._lifts[key] = out
        return out

    def distance_to_cut(self, Y, cap: float) -> np.ndarray:
        """Distance from frame points of ``D`` to the cut curves, exact up to ``cap`` and clamped there."""
        lines = self.lifts(cap)[0]
        if len(lines) == 0:
            return np.full(len(Y), np.inf)
        v, _ = kernels.min_abs_dot(np.ascontiguousarray(Y), lines)
        return np.minimum(np.arcsinh(v), cap)


def cut_geometry(group: FuchsianGroup, cut: CutSet) -> CutGeometry:
    geo = geometry(group)
    cache = getattr(geo, "_cut_cache", None)
    if cache is None:
        cache = geo._cut_cache = {}
    key = tuple(c.word for c in cut.curves)
    cg = cache.get(key)
    if cg is None:
        cg = CutGeometry(geo, cut)
        if len(cache) > 64:
            cache.clear()
        cache[key] = cg
    return cg


def components(group: FuchsianGroup, cut: CutSet):
    """Components of the surface cut along ``cut`` as :class:`SubsurfaceHandle` records."""
    return cut_geometry(group, cut).handles


def same_component(group: FuchsianGroup, x: HPoint, y: HPoint, cut: CutSet) -> bool:
    cg = cut_geometry(group, cut)
    geo = cg.geo
    X, Yp = geo.to_frame(x), geo.to_frame(y)
    if len(cut.curves):
        d = cg.distance_to_cut(np.array([geo.domain.reduce(X)[0], geo.domain.reduce(Yp)[0]]), 1.0)
        if np.any(d <= 1e-9):
            raise UndecidedError("point lies on a cut curve")
    return cg.locate(X) == cg.locate(Yp)


def _samples(geo, n: int, seed: int) -> np.ndarray:
    """Nested low-discrepancy sample of ``D`` (frame points); prefixes agree across ``n``."""
    D = geo.domain
    K = lz.to_klein(D.vertices)
    lo, hi = K.min(axis=0), K.max(axis=0)
    u = qmc.Halton(d=2, scramble=True, seed=seed).random(n)
    k = lo + u * (hi - lo)
    k = k[np.sum(k * k, axis=1) < 1.0 - 1e-12]
    X = lz.from_klein(k)
    inside = np.all(lz.mdot(X[:, None, :], D.normals[None, :, :]) >= 0.0, axis=1)
    return X[inside]


def farthest_point(
    group: FuchsianGroup,
    cut: CutSet,
    handle: SubsurfaceHandle,
    samples: int = 4000,
    seed: int = 0,
    cap: float | None = None,
):
    """Sample point of the handle farthest from the cut curves: ``(HPoint, distance)``.

    Distances are exact below ``cap`` (default ``r_g + 1``) and clamped at it.
    With no cut curves the distance is ``inf``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    cg = cut_geometry(group, cut)
    geo = cg.geo
    cap = r_g(geo.genus) + 1.0 if cap is None else cap
    X = _samples(geo, samples, seed)
    comp = cg.component_of_points(X)
    X = X[comp == handle.index]
    if len(X) == 0:
        raise GeometryError("component too thin to sample")
    d = cg.distance_to_cut(X, cap)
    i = int(np.argmax(d))  # first maximum in sample order
    return geo.from_frame(X[i]), float(d[i])


def shortest_orthogeodesic(group: FuchsianGroup, cut: CutSet, handle: SubsurfaceHandle, cap: float | None = None):
    """Shortest arc in the handle from its boundary to its boundary, perpendicular at both ends."""
    if not handle.sides:
        raise GeometryError("handle has no boundary")
    cg = cut_geometry(group, cut)
    geo = cg.geo
    cap = 2.0 * r_g(geo.genus) if cap is None else cap
    while True:
        arc = _orthogeodesic_within(cg, handle, cap)
        if arc is not None:
            return arc
        if cap > 64.0:
            raise UndecidedError("no orthogeodesic found within the search radius")
        cap *= 2.0


def _orthogeodesic_within(cg: CutGeometry, handle, cap):
    geo = cg.geo
    lines, owner, chord_of, tile_of, tiles = cg.lifts(cap)
    best = None
    for ci, sign in handle.sides:
        curve = cg.cut.curves[ci]
        for j, ch in enumerate(curve.chords):
            NL = ch.normal
            G = lz.mdot(lines, NL)
            same_L = _line_mask(lines, NL)
            # ultraparallel lines lying on the handle's side of L
            ok = (np.abs(G) > 1.0 + 1e-12) & ~same_L
            if not ok.any():
                continue
            idx = np.nonzero(ok)[0]
            dist = np.arccosh(np.abs(G[idx]))
            order = np.argsort(dist, kind="stable")
            T = lz.line_tangent_at(NL, ch.start)
            for o in order:
                m = int(idx[o])
                d = float(dist[o])
                if d > cap or (best is not None and d >= best[0] - 1e-12):
                    break
                NM = lines[m]
                feet = _feet(NL, NM, G[m])
                if feet is None:
                    continue
                fL, fM = feet
                if sign * lz.mdot(fM, NL) <= 0:
                    continue
                # the foot on L must lie on this chord (half-open, to count each lift once)
                t = math.asinh(float(lz.mdot(fL, T)))
                if not (-1e-12 <= t < ch.length - 1e-12):
                    continue
                # no other lift may separate the feet
                vL = lz.mdot(lines, fL)
                vM = lz.mdot(lines, fM)
                tolL = 1e-9 * max(1.0, fL[0])
                tolM = 1e-9 * max(1.0, fM[0])
                blocked = ((vL > tolL) & (vM < -tolM)) | ((vL < -tolL) & (vM > tolM))
                blocked &= ~(same_L | _line_mask(lines, NM))
                if blocked.any():
                    continue
                best = (d, ci, sign, j, m, fL, fM)
                break
    if best is None:
        return None
    d, ci, sign, j, m, fL, fM = best
    cm = int(owner[m])
    NM = lines[m]
    sign_m = 1 if lz.mdot(fL, NM) > 0 else -1
    curve = cg.cut.curves[ci]
    other = cg.cut.curves[cm]
    near_word = curve.local_word(j)
    if sign < 0:
        near_word = inverse_word(near_word)
    tile_word = tiles.word(int(tile_of[m]))
    jm = int(cg.chord_index[chord_of[m]])
    far_word = free_reduce(tile_word + other.local_word(jm) + inverse_word(tile_word))
    if sign_m < 0:
        far_word = inverse_word(far_word)
    # near lift = chord j line; far lift = tile * (chord jm line)
    translation = ()
    if cm == ci:
        # element carrying chord j's line onto chord jm's line, then into the far tile
        translation = free_reduce(tile_word + _chord_to_chord(curve, j, jm))
    d = _refined_distance(geo.frame, near_word, far_word, d)
    loops = ()
    if cm == ci and sign_m == sign:
        loops = _same_side_loops(geo, curve, j, translation, fL, fM)
    Kinv = geo.K.inverse()
    witness_word = translation if cm == ci else tile_word
    witness = Kinv @ geo.hol(witness_word) @ geo.K
    return OrthoArc(
        from_curve=curve,
        to_curve=other,
        length=d,
        witness=witness,
        from_side=(ci, sign),
        to_side=(cm, sign_m),
        near_holonomy=near_word,
        far_holonomy=far_word,
        near_foot=geo.from_frame(fL),
        far_foot=geo.from_frame(fM),
        translation_word=translation,
        loop_words=loops,
    )


def _same_side_loops(geo, curve, j, t_word, fL, fM):
    """Words of the two loops 'arc, then along the curve back to the start' (both directions).

    With ``A`` the holonomy along the near lift and ``T`` the deck
    transformation onto the far lift, the lift of the loop that continues
    forward along the far lift ends at ``T A^k p``, where ``k`` is the first
    power putting ``A^k p`` past the arc's far foot (pulled back by ``T``).
    """
    a_word = curve.local_word(j)
    ch = curve.chords[j]
    tang = lz.line_tangent_at(ch.normal, ch.start)
    fq = so21_inverse(geo.so21(t_word)) @ fM
    s_p = math.asinh(float(lz.mdot(fL, tang)))
    s_q = math.asinh(float(lz.mdot(fq, tang)))
    k = math.floor((s_q - s_p) / curve.length) + 1
    power = a_word * k if k >= 0 else inverse_word(a_word) * (-k)
    t1 = free_reduce(tuple(t_word) + tuple(power))
    return t1, free_reduce(t1 + inverse_word(a_word))


def _mul_mp(x, y):
    return (
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    )


def _axis_normal_mp(group, word):
    a, b, c, d = group.holonomy_mp(word)
    t = a + d
    s = mp.sign(t) / mp.sqrt(t * t - 4 * (a * d - b * c))
    return [(b - c) * s, (b + c) * s, (d - a) * s]


def _refined_distance(group, w1, w2, approx):
    """Distance between the axes of two words, from extended-precision holonomies."""
    with mp.workdps(40):
        n1 = _axis_normal_mp(group, w1)
        n2 = _axis_normal_mp(group, w2)
        g = abs(-n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2])
        d = float(mp.acosh(g)) if g > 1 else 0.0
    # the float estimate only has to identify the arc; lifts far out carry ~1e-6 error
    if abs(d - approx) > 1e-4 * max(1.0, approx):
        raise GeometryError(f"orthogeodesic length {approx!r} disagrees with its holonomy words ({d!r})")
    return d


def _feet(NL, NM, g):
    # feet of the common perpendicular: project each normal off the other
    a, b = NM - g * NL, NL - g * NM
    if not (lz.mdot(a, a) < 0 and lz.mdot(b, b) < 0):
        return None  # asymptotic within rounding
    return lz.normalize_timelike(a), lz.normalize_timelike(b)


def _line_mask(lines, N, tol=1e-6):
    """Rows of ``lines`` equal to the line ``N`` (either orientation), relative tolerance."""
    scale = tol * max(1.0, float(np.max(np.abs(N))))
    return (np.max(np.abs(lines - N), axis=1) <= scale) | (np.max(np.abs(lines + N), axis=1) <= scale)


def _chord_to_chord(curve: CurveClass, j: int, k: int) -> tuple:
    """Word of the element carrying chord ``j``'s line onto chord ``k``'s line (orientation kept)."""
    # tile_k = tile_j t_j ... t_{k-1}; the element is tile_k^{-1} tile_j
    n = len(curve.chords)
    out: list = []
    i = j
    while i != k:
        out.extend(curve.transitions[i])
        i = (i + 1) % n
    return inverse_word(free_reduce(out))
