"""Closed hyperbolic surfaces as Fuchsian groups.

Surfaces are built from Fenchel-Nielsen data on a trivalent pants graph, or
taken from the built-in Bolza surface.  Curves are words in the generators:
a word is a tuple of nonzero ints, ``k`` for generator ``k`` (1-based) and
``-k`` for its inverse.

Fenchel-Nielsen conventions
---------------------------
Each pair of pants is the double of a right-angled hexagon walked with left
turns, so every cuff is oriented with its pants on the left.  The marked
point of cuff ``i`` is the foot of the seam coming from cuff ``i - 1``.  Two
cuffs are glued by an orientation-reversing identification of their axes
which carries one marked point to the other shifted by the twist ``tau``
along the cuff orientation of the first pants.  The rule is symmetric in the
two pants, and ``tau -> tau + length`` is a full Dehn twist.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import numpy as np

from .hypcore import TOL, GeometryError, Isometry, translation_length

Word = tuple


class SurfaceError(ValueError):
    pass


class HolonomyError(SurfaceError):
    """The holonomy construction did not close up within tolerance."""


# ---------------------------------------------------------------- words


def free_reduce(word: Sequence[int]) -> Word:
    out: list[int] = []
    for x in word:
        if x == 0:
            raise SurfaceError("generator index 0 is not allowed")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return tuple(out)


def cyclic_reduce(word: Sequence[int]) -> Word:
    w = list(free_reduce(word))
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return tuple(w[i : j + 1])


def inverse_word(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def concat(*words: Sequence[int]) -> Word:
    out: list[int] = []
    for w in words:
        out.extend(w)
    return free_reduce(out)


# ---------------------------------------------------------------- pants graph


@dataclass(frozen=True)
class PantsGraph:
    """Trivalent gluing pattern: ``edges[k] = (pants_a, slot_a, pants_b, slot_b)``."""

    genus: int
    edges: tuple

    def __post_init__(self):
        g = self.genus
        if not isinstance(g, int) or g < 2:
            raise SurfaceError("genus must be an integer >= 2")
        n = 2 * g - 2
        if len(self.edges) != 3 * g - 3:
            raise SurfaceError(f"genus {g} needs {3 * g - 3} edges, got {len(self.edges)}")
        seen = set()
        for e in self.edges:
            if len(e) != 4:
                raise SurfaceError(f"edge {e!r} is not [pants, slot, pants, slot]")
            for v, s in ((e[0], e[1]), (e[2], e[3])):
                if not (0 <= v < n) or s not in (0, 1, 2):
                    raise SurfaceError(f"bad slot ({v}, {s})")
                if (v, s) in seen:
                    raise SurfaceError(f"slot ({v}, {s}) used twice")
                seen.add((v, s))
        if len(seen) != 3 * n:
            raise SurfaceError("graph is not trivalent")
        adj = {v: set() for v in range(n)}
        for a, _, b, _ in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        reached, todo = {0}, [0]
        while todo:
            v = todo.pop()
            for w in adj[v] - reached:
                reached.add(w)
                todo.append(w)
        if len(reached) != n:
            raise SurfaceError("pants graph is disconnected")

    @property
    def n_pants(self) -> int:
        return 2 * self.genus - 2

    def slot_edge(self):
        """Map ``(pants, slot) -> edge index``."""
        out = {}
        for k, (a, sa, b, sb) in enumerate(self.edges):
            out[(a, sa)] = k
            out[(b, sb)] = k
        return out


def build_pants_graph(g: int, shape="linear") -> PantsGraph:
    """Standard pants graphs; ``shape`` may also be an explicit edge list."""
    if not isinstance(shape, str):
        return PantsGraph(g, tuple(tuple(int(x) for x in e) for e in shape))
    if not isinstance(g, int) or g < 2:
        raise SurfaceError("genus must be an integer >= 2")
    n = 2 * g - 2
    free = {v: [0, 1, 2] for v in range(n)}
    edges = []

    def link(a, b):
        edges.append((a, free[a].pop(0), b, free[b].pop(0)))

    if shape == "linear":
        if g == 2:
            for _ in range(3):
                link(0, 1)
        else:
            link(0, 0)
            for v in range(n - 1):
                link(v, v + 1)
            for j in range((n - 2) // 2):
                link(2 * j + 1, 2 * j + 2)
            link(n - 1, n - 1)
    elif shape == "ring":
        for v in range(n):
            link(v, (v + 1) % n)
        for v in range(n // 2):
            link(v, v + n // 2)
    else:
        raise SurfaceError(f"unknown pants graph shape {shape!r}")
    return PantsGraph(g, tuple(edges))


@dataclass(frozen=True)
class FNCoordinates:
    lengths: tuple
    twists: tuple

    def __post_init__(self):
        if len(self.lengths) != len(self.twists):
            raise SurfaceError("lengths and twists differ in count")
        for x in self.lengths + self.twists:
            if not math.isfinite(x):
                raise SurfaceError("coordinates must be finite")
        if any(not l > 0 for l in self.lengths):
            raise SurfaceError("lengths must be positive")


# ---------------------------------------------------------------- groups


@dataclass
class FuchsianGroup:
    """Generators plus one defining relator word."""

    genus: int
    generators: list
    relator: Word
    edge_words: list = field(default_factory=list)
    base_point: tuple = (0.0, 1.0)
    name: str = ""
    # optional 40-digit generator entries (a, b, c, d) as mpmath numbers
    precise: list | None = None

    def __post_init__(self):
        self.relator = tuple(self.relator)
        self._mats = {}
        self._mp = {}
        self._ld = {}
        with mp.workdps(_DPS):
            for k, m in enumerate(self.generators, 1):
                self._mats[k] = m.matrix
                self._mats[-k] = m.inverse().matrix
                p = self.precise[k - 1] if self.precise else (m.a, m.b, m.c, m.d)
                p = [mp.mpf(v) for v in p]
                r = mp.sqrt(p[0] * p[3] - p[1] * p[2])
                # the long-double entries are the group; the 40-digit copy holds them exactly
                ld = _mp_to_ld(tuple(v / r for v in p))
                p = tuple(mp.mpf(str(v)) for v in ld.ravel())
                self._mp[k] = p
                self._mp[-k] = (p[3], -p[1], -p[2], p[0])
                self._ld[k] = ld
                self._ld[-k] = np.array([[ld[1, 1], -ld[0, 1]], [-ld[1, 0], ld[0, 0]]])

    @property
    def relation_residual(self) -> float:
        return relation_residual(self)

    def letter_matrix(self, x: int) -> np.ndarray:
        return self._mats[x]

    def letter_matrix_ld(self, x: int) -> np.ndarray:
        """``letter_matrix`` in ``np.longdouble``."""
        return self._ld[x]

    def letter_matrix_mp(self, x: int) -> tuple:
        return self._mp[x]

    def holonomy(self, word: Sequence[int]) -> Isometry:
        if not word:
            return Isometry.identity()
        m = self.holonomy_mp(word)
        return Isometry(float(m[0]), float(m[1]), float(m[2]), float(m[3]))

    def holonomy_mp(self, word: Sequence[int]) -> tuple:
        """Holonomy entries ``(a, b, c, d)`` of ``word`` in 40-digit arithmetic.

        Generators far from the base point make words cancel heavily, so
        doubles (and even long doubles) lose digits on long words.
        """
        with mp.workdps(_DPS):
            m = (mp.mpf(1), mp.mpf(0), mp.mpf(0), mp.mpf(1))
            for x in word:
                m = _mmul(m, self._mp[x])
            return m

    def holonomy_ld(self, word: Sequence[int]) -> np.ndarray:
        return _mp_to_ld(self.holonomy_mp(word))

    def check(self, tol: float | None = None) -> "FuchsianGroup":
        tol = TOL.rel if tol is None else tol
        res = relation_residual(self)
        if not res <= tol:
            raise HolonomyError(f"holonomy construction failed: relation residual {res:.3e} > {tol:.1e}")
        for k, m in enumerate(self.generators, 1):
            try:
                translation_length(m)
            except GeometryError:
                raise HolonomyError(f"holonomy construction failed: generator {k} is not hyperbolic")
        return self


def relation_residual(group: FuchsianGroup) -> float:
    """Distance of the relator from +-1, multiplied out exactly.

    This measures the (long-double) generators themselves rather than the
    rounding of the multiplication.
    """
    m = group.holonomy_mp(group.relator)
    with mp.workdps(_DPS):
        return float(_mdist_to_pm_identity(m))


def curve_length(group: FuchsianGroup, word: Sequence[int]) -> float:
    w = cyclic_reduce(word)
    if not w:
        raise GeometryError("no closed geodesic in class: trivial word")
    # the trace is summed before rounding: a and d can cancel heavily
    m = group.holonomy_mp(w)
    with mp.workdps(_DPS):
        t = abs(m[0] + m[3])
        if not t > 2.0 + TOL.classify:
            raise GeometryError("no closed geodesic in class: holonomy is not hyperbolic")
        return float(2 * mp.acosh(t / 2))


# ---------------------------------------------------------------- constructions
#
# Holonomies are assembled in 40-digit arithmetic: gluing along a tree
# compounds large matrices, and only the final, Nielsen-reduced generators
# are rounded to doubles.

_DPS = 40


def _mT(d):
    e = mp.exp(d / 2)
    return (e, mp.mpf(0), mp.mpf(0), 1 / e)


def _mR(theta):
    # counterclockwise rotation by theta about i
    c, s = mp.cos(theta / 2), mp.sin(theta / 2)
    return (c, s, -s, c)


def _mmul(x, y):
    return (
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    )


def _minv(x):
    det = x[0] * x[3] - x[1] * x[2]
    return (x[3] / det, -x[1] / det, -x[2] / det, x[0] / det)


def _mprod(*xs):
    out = (mp.mpf(1), mp.mpf(0), mp.mpf(0), mp.mpf(1))
    for x in xs:
        out = _mmul(out, x)
    return out


def _mdist_to_pm_identity(x):
    plus = max(abs(x[0] - 1), abs(x[1]), abs(x[2]), abs(x[3] - 1))
    minus = max(abs(x[0] + 1), abs(x[1]), abs(x[2]), abs(x[3] + 1))
    return min(plus, minus)


def _mfrob(x):
    return x[0] ** 2 + x[1] ** 2 + x[2] ** 2 + x[3] ** 2


def _to_isometry(x):
    return Isometry(float(x[0]), float(x[1]), float(x[2]), float(x[3]))


def _mp_to_ld(x):
    return np.array([[np.longdouble(mp.nstr(v, 22)) for v in x[:2]], [np.longdouble(mp.nstr(v, 22)) for v in x[2:]]])


def _mreflection(frame):
    # anti-Moebius reflection in frame(imaginary axis), as a det -1 matrix
    return _mprod(frame, (mp.mpf(-1), mp.mpf(0), mp.mpf(0), mp.mpf(1)), _minv(frame))


def _frame_point(f):
    z = (f[0] * 1j + f[1]) / (f[2] * 1j + f[3])
    return mp.re(z), mp.im(z)


@dataclass
class _PantsModel:
    cuff_frames: list  # frame at each cuff's marked point, pointing along the cuff
    cuffs: list  # holonomy of each cuff, pants on the left; C2 C1 C0 = +-1
    corners: list  # frames at the six hexagon corners


def pants_model(l0, l1, l2) -> _PantsModel:
    """Doubled right-angled hexagon with cuff lengths ``l0, l1, l2``."""
    lengths = [mp.mpf(l0), mp.mpf(l1), mp.mpf(l2)]
    quarter = mp.pi / 2
    frame = _mR(0)
    cuff_frames, seam_frames, corners = [], [], []
    for i in range(3):
        h = [x / 2 for x in lengths]
        a, b, c = h[i], h[(i + 1) % 3], h[(i + 2) % 3]
        seam = mp.acosh((mp.cosh(c) + mp.cosh(a) * mp.cosh(b)) / (mp.sinh(a) * mp.sinh(b)))
        cuff_frames.append(frame)
        corners.append(frame)
        frame = _mprod(frame, _mT(lengths[i] / 2), _mR(quarter))
        seam_frames.append(frame)
        corners.append(frame)
        frame = _mprod(frame, _mT(seam), _mR(quarter))
    if _mdist_to_pm_identity(frame) > mp.mpf(10) ** (-25):
        raise HolonomyError("holonomy construction failed: hexagon does not close")
    refl = [_mreflection(f) for f in seam_frames]
    # seam i joins cuff i to cuff i+1; cuff i translates from its incoming to its outgoing seam
    cuffs = [_mmul(refl[i], refl[(i - 1) % 3]) for i in range(3)]
    return _PantsModel(cuff_frames, cuffs, corners)


def _glue(frame_p, frame_q, tau):
    return _mprod(frame_p, _mT(tau), _mR(mp.pi), _minv(frame_q))


def _graph_center(graph: PantsGraph) -> int:
    n = graph.n_pants
    adj = {v: set() for v in range(n)}
    for a, _, b, _ in graph.edges:
        adj[a].add(b)
        adj[b].add(a)

    def eccentricity(v):
        depth, frontier, seen = 0, {v}, {v}
        while len(seen) < n:
            frontier = {w for u in frontier for w in adj[u]} - seen
            seen |= frontier
            depth += 1
        return depth

    return min(range(n), key=lambda v: (eccentricity(v), v))


def _substitute(word, table):
    out = []
    for x in word:
        out.extend(table[x] if x > 0 else inverse_word(table[-x]))
    return free_reduce(out)


def _nielsen_reduce(gens, protected=(0,)):
    """Greedy Nielsen moves shrinking each generator's displacement at ``i``.

    Returns the new generators and, for every old generator, its word in
    the new ones.
    """
    gens = list(gens)
    n = len(gens)
    old_in_new = {k + 1: (k + 1,) for k in range(n)}
    for _ in range(10000):
        improved = False
        for i in range(n):
            if i in protected:
                continue
            for j in range(n):
                if j == i:
                    continue
                for e in (1, -1):
                    gj = gens[j] if e == 1 else _minv(gens[j])
                    for left in (False, True):
                        cand = _mmul(gj, gens[i]) if left else _mmul(gens[i], gj)
                        if _mfrob(cand) < _mfrob(gens[i]) * (1 - mp.mpf(10) ** -12):
                            gens[i] = cand
                            # old x_i = x_j^-e x_i' (left) or x_i' x_j^-e (right)
                            rep = ((-e * (j + 1), i + 1) if left else (i + 1, -e * (j + 1)))
                            table = {k: (k,) for k in range(1, n + 1)}
                            table[i + 1] = rep
                            old_in_new = {k: _substitute(w, table) for k, w in old_in_new.items()}
                            improved = True
        if not improved:
            break
    return gens, old_in_new


def fn_to_group(graph: PantsGraph, fn: FNCoordinates, tol: float | None = None) -> FuchsianGroup:
    """Fuchsian group of the surface glued from pants along ``graph`` with ``fn`` coordinates."""
    with mp.workdps(_DPS):
        return _fn_to_group(graph, fn, tol)


def _fn_to_group(graph, fn, tol):
    g = graph.genus
    if len(fn.lengths) != len(graph.edges):
        raise SurfaceError("one length and twist per edge required")
    slot_edge = graph.slot_edge()
    n = graph.n_pants
    models = [pants_model(*[fn.lengths[slot_edge[(v, s)]] for s in range(3)]) for v in range(n)]
    # a full turn is a Dehn twist about the cuff: same surface, same pants curves
    twists = [mp.mpf(t) - L * mp.floor(mp.mpf(t) / L) for t, L in zip(fn.twists, map(mp.mpf, fn.lengths))]

    root = _graph_center(graph)
    placement = {root: _mR(0)}
    parent_edge = {}
    tree_edges = set()
    children = {v: [] for v in range(n)}  # (slot in v, child, slot in child)
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for s in range(3):
            k = slot_edge[(v, s)]
            a, sa, b, sb = graph.edges[k]
            w, sw = (b, sb) if (a, sa) == (v, s) else (a, sa)
            if w in placement:
                continue
            placement[w] = _mmul(placement[v], _glue(models[v].cuff_frames[s], models[w].cuff_frames[sw], twists[k]))
            parent_edge[w] = k
            tree_edges.add(k)
            children[v].append((s, w, sw))
            queue.append(w)

    def cuff_global(v, s):
        G = placement[v]
        return _mprod(G, models[v].cuffs[s], _minv(G))

    # each non-tree edge yields a pair (d_k, t_k): d_k the cuff on the b-side,
    # t_k the gluing carrying pants b next to pants a
    # base point: the root hexagon's center, moved to i
    bx, by = _hexagon_center(models[root])
    sq = mp.sqrt(by)
    center = (1 / sq, -bx / sq, mp.mpf(0), sq)

    def centered(x):
        return _mprod(center, x, _minv(center))

    free_word = {}
    gens = []
    non_tree = [k for k in range(len(graph.edges)) if k not in tree_edges]
    # generator 1 stays a single edge curve: take the one closest to the base point
    non_tree.sort(key=lambda k: (_mfrob(centered(cuff_global(graph.edges[k][2], graph.edges[k][3]))), k))
    for k in non_tree:
        a, sa, b, sb = graph.edges[k]
        glue = _glue(models[a].cuff_frames[sa], models[b].cuff_frames[sb], twists[k])
        t = _mprod(placement[a], glue, _minv(placement[b]))
        idx_d = len(gens) + 1
        gens.append(cuff_global(b, sb))
        gens.append(t)
        free_word[(b, sb)] = (idx_d,)
        free_word[(a, sa)] = (idx_d + 1, -idx_d, -(idx_d + 1))

    # in each pants C2 C1 C0 = 1, so a cuff's inverse is the product of the other two
    inverse_by_others = {0: (2, 1), 1: (0, 2), 2: (1, 0)}

    def cuff_word(v, s):
        if (v, s) in free_word:
            return free_word[(v, s)]
        for sv, w, sw in children[v]:
            if sv == s:
                i, j = inverse_by_others[sw]
                return concat(cuff_word(w, i), cuff_word(w, j))
        raise SurfaceError("internal: cuff is neither free nor a tree edge to a child")

    relator = concat(cuff_word(root, 2), cuff_word(root, 1), cuff_word(root, 0))
    edge_words = []
    for k, (a, sa, b, sb) in enumerate(graph.edges):
        if k in tree_edges:
            v, s = (a, sa) if parent_edge.get(b) == k else (b, sb)
            edge_words.append(cuff_word(v, s))
        else:
            edge_words.append(free_word[(b, sb)])

    gens = [centered(x) for x in gens]
    gens, old_in_new = _nielsen_reduce(gens)
    relator = cyclic_reduce(_substitute(relator, old_in_new))
    edge_words = [cyclic_reduce(_substitute(w, old_in_new)) for w in edge_words]

    group = FuchsianGroup(
        genus=g,
        generators=[_to_isometry(x) for x in gens],
        relator=relator,
        edge_words=edge_words,
        base_point=(0.0, 1.0),
        name="fenchel-nielsen",
        precise=list(gens),
    )
    return group.check(tol)


def _hexagon_center(model: _PantsModel):
    # average of the corners in the Klein model
    ks = []
    for f in model.corners:
        x, y = _frame_point(f)
        r2 = x * x + y * y
        X0, X1, X2 = (r2 + 1) / (2 * y), (r2 - 1) / (2 * y), x / y
        ks.append((X1 / X0, X2 / X0))
    k1 = sum(k[0] for k in ks) / len(ks)
    k2 = sum(k[1] for k in ks) / len(ks)
    w = 1 / mp.sqrt(1 - k1 * k1 - k2 * k2)
    X0, X1, X2 = w, k1 * w, k2 * w
    y = 1 / (X0 - X1)
    return X2 * y, y


def _T(d):
    return np.array([[math.exp(d / 2), 0.0], [0.0, math.exp(-d / 2)]])


def _R(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, s], [-s, c]])


BOLZA_RELATOR = (1, -2, 3, -4, -1, 2, -3, 4)


def bolza_group() -> FuchsianGroup:
    """Regular octagon of angle pi/4 with opposite sides paired."""
    d = 2.0 * math.acosh(1.0 + math.sqrt(2.0))
    gens = [_R(k * math.pi / 4) @ _T(d) @ _R(-k * math.pi / 4) for k in range(4)]
    group = FuchsianGroup(
        genus=2,
        generators=[Isometry.from_matrix(m) for m in gens],
        relator=BOLZA_RELATOR,
        base_point=(0.0, 1.0),
        name="bolza",
    )
    return group.check()


# ---------------------------------------------------------------- surface files


@dataclass(frozen=True)
class SurfaceSpec:
    graph: PantsGraph
    fn: FNCoordinates

    @property
    def genus(self) -> int:
        return self.graph.genus

    def group(self, tol: float | None = None) -> FuchsianGroup:
        return fn_to_group(self.graph, self.fn, tol)

    def to_json(self) -> str:
        doc = {
            "genus": self.graph.genus,
            "graph": [list(e) for e in self.graph.edges],
            "lengths": [_num(x) for x in self.fn.lengths],
            "twists": [_num(x) for x in self.fn.twists],
        }
        return json.dumps(doc, indent=2) + "\n"


def _num(x: float) -> float:
    return float(f"{x:.9g}")


def _reject_constant(name):
    raise SurfaceError(f"non-finite number {name} in surface file")


def parse_surface(text: str) -> SurfaceSpec:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SurfaceError(f"surface file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SurfaceError("surface file must hold an object")
    for key in ("genus", "graph", "lengths", "twists"):
        if key not in doc:
            raise SurfaceError(f"surface file lacks {key!r}")
    genus = doc["genus"]
    if not isinstance(genus, int) or isinstance(genus, bool):
        raise SurfaceError("genus must be an integer")
    try:
        graph = PantsGraph(genus, tuple(tuple(int(x) for x in e) for e in doc["graph"]))
        lengths = tuple(float(x) for x in doc["lengths"])
        twists = tuple(float(x) for x in doc["twists"])
    except (TypeError, ValueError) as exc:
        raise SurfaceError(f"malformed surface file: {exc}") from None
    if len(lengths) != len(graph.edges) or len(twists) != len(graph.edges):
        raise SurfaceError("lengths and twists must have one entry per edge")
    return SurfaceSpec(graph, FNCoordinates(lengths, twists))


def random_surface(genus: int, lo: float, hi: float, seed: int, shape: str = "linear") -> SurfaceSpec:
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise SurfaceError("length range must satisfy 0 < min <= max")
    graph = build_pants_graph(genus, shape)
    rng = np.random.default_rng(seed)
    lengths = rng.uniform(lo, hi, size=len(graph.edges))
    twists = rng.uniform(0.0, 1.0, size=len(graph.edges)) * lengths
    return SurfaceSpec(graph, FNCoordinates(tuple(map(_num, lengths)), tuple(map(_num, twists))))
