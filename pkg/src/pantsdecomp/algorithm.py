"""Construction of a short pants decomposition and its verification.

The loop keeps a set of cut curves.  Components of the cut surface that are
pairs of pants are retired at once; the rest are the *handles*.  Each step
adds one or two curves:

* ``MS1``: some handle point is farther than ``r_g`` from the boundary; cut
  along the geodesic of the shortest loop at that point.
* ``MS2``: otherwise take the shortest orthogeodesic of the handles and cut
  along the new boundary curve(s) of the pants around it and the boundary.
* fail-safe: the same construction, used while the handles' total boundary
  length is at least ``4 pi (g - 1)``; the arc is then short enough that the
  boundary length drops.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

from . import geodesy as gd
from .bounds import SHORT_CURVE_LENGTH, bavard_bound, bers_bound, hexagon_third_side, r_g, surface_area
from .domain import DEFAULT_BUDGET
from .hypcore import TOL, GeometryError, HPoint
from .surface import FuchsianGroup, free_reduce

log = logging.getLogger(__name__)


class AlgorithmError(RuntimeError):
    """A step broke one of its guarantees; ``trace`` holds the steps so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class StepBudgetExceeded(AlgorithmError):
    pass


class StepKind(str, Enum):
    INIT = "INIT"
    MS1 = "MS1"
    MS2_CASE1 = "MS2_CASE1"
    MS2_CASE2_SPLIT = "MS2_CASE2_SPLIT"
    MS2_CASE2_TORUS = "MS2_CASE2_TORUS"
    FAILSAFE_CASE1 = "FAILSAFE_CASE1"
    FAILSAFE_CASE2 = "FAILSAFE_CASE2"


@dataclass
class AlgoConfig:
    base_point: HPoint | None = None
    samples: int = 4000
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    max_steps: int | None = None  # default 10 (3g - 3)

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.budget < 10_000:
            raise ValueError("budget must be >= 10000")


@dataclass
class StepRecord:
    kind: StepKind
    new_curves: list
    boundary_len_before: float
    boundary_len_after: float
    point: tuple | None = None  # (x, y) of the chosen point
    distance: float | None = None  # its distance to the boundary
    loop_length: float | None = None
    arc_length: float | None = None
    hexagon_length: float | None = None  # predicted third side (case 1)
    note: str = ""

    def to_json(self) -> dict:
        out = {
            "kind": self.kind.value,
            "new_curves": [{"word": list(c.word), "length": c.length} for c in self.new_curves],
            "boundary_len_before": self.boundary_len_before,
            "boundary_len_after": self.boundary_len_after,
        }
        for key in ("point", "distance", "loop_length", "arc_length", "hexagon_length"):
            v = getattr(self, key)
            if v is not None:
                out[key] = list(v) if isinstance(v, tuple) else v
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class AlgoState:
    group: FuchsianGroup
    cut: gd.CutSet
    handles: list
    retired_pants: list
    trace: list = field(default_factory=list)
    conditional: bool = False

    @property
    def genus(self) -> int:
        return self.group.genus

    @property
    def boundary_length(self) -> float:
        return float(sum(h.boundary_length for h in self.handles))

    @property
    def done(self) -> bool:
        return len(self.cut) >= 3 * self.genus - 3


@dataclass
class PantsDecomposition:
    genus: int
    curves: list  # CurveClass
    pants: list  # triples of curve indices
    bers_bound: float
    conditional: bool = False

    @property
    def lengths(self) -> list:
        return [c.length for c in self.curves]

    @property
    def max_length(self) -> float:
        return max(self.lengths) if self.curves else 0.0


@dataclass
class VerificationReport:
    curve_count_ok: bool
    disjoint_ok: bool
    euler_ok: bool
    bound_ok: bool
    admissible_ok: bool
    lengths_ok: bool
    max_length: float
    bers_bound: float
    messages: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all((self.curve_count_ok, self.disjoint_ok, self.euler_ok, self.bound_ok, self.admissible_ok, self.lengths_ok))


# ---------------------------------------------------------------- helpers


def _in_cut(c, cut) -> bool:
    return any(gd.same_class(c, x) for x in cut.curves)


def _refresh(state: AlgoState):
    handles = gd.components(state.group, state.cut)
    chi = sum(h.euler_characteristic for h in handles)
    if chi != 2 - 2 * state.genus:
        raise AlgorithmError(f"Euler characteristic of the cut surface is {chi}", state.trace)
    state.handles = [h for h in handles if not h.is_pants]
    state.retired_pants = [h for h in handles if h.is_pants]


def _add(state: AlgoState, curves, record_kwargs) -> StepRecord:
    before = state.boundary_length
    for c in curves:
        if not gd.is_simple(c):
            raise AlgorithmError(f"new curve {c.word} is not simple", state.trace)
        if _in_cut(c, state.cut):
            raise AlgorithmError(f"new curve {c.word} is already cut", state.trace)
        for x in state.cut.curves:
            if not gd.disjoint(state.group, c, x):
                raise AlgorithmError(f"new curve {c.word} crosses cut curve {x.word}", state.trace)
    state.cut = state.cut.add(*curves)
    _refresh(state)
    rec = StepRecord(new_curves=list(curves), boundary_len_before=before, boundary_len_after=state.boundary_length, **record_kwargs)
    state.trace.append(rec)
    log.info("%s: +%s  boundary %.6f -> %.6f", rec.kind.value, [round(c.length, 6) for c in curves], before, rec.boundary_len_after)
    return rec


def _point_xy(p: HPoint) -> tuple:
    return (float(p.x), float(p.y))


# ---------------------------------------------------------------- steps


def preprocess_admissible(group: FuchsianGroup) -> gd.CutSet:
    """Every closed geodesic of length at most ``2 asinh 1``; they must be simple and disjoint."""
    short = gd.short_classes(group, SHORT_CURVE_LENGTH)
    for i, a in enumerate(short):
        if not gd.is_simple(a):
            raise AlgorithmError(f"short geodesic {a.word} is not simple")
        for b in short[:i]:
            if not gd.disjoint(group, a, b):
                raise AlgorithmError(f"short geodesics {a.word} and {b.word} cross")
    return gd.CutSet(tuple(short))


def default_base_point(group: FuchsianGroup) -> HPoint:
    geo = gd.geometry(group)
    return geo.from_frame(geo.centroid())


def initialize(group: FuchsianGroup, config: AlgoConfig | None = None) -> AlgoState:
    config = config or AlgoConfig()
    gd.geometry(group, config.budget)
    cut = preprocess_admissible(group)
    conditional = len(cut) > 0
    state = AlgoState(group, gd.CutSet(), [], [], conditional=conditional)
    state.handles = gd.components(group, state.cut)
    x1 = config.base_point or default_base_point(group)
    loop, loop_len = gd.shortest_loop_at(group, x1)
    curves = list(cut.curves)
    note = ""
    if not any(gd.same_class(loop, c) for c in curves):
        if gd.is_simple(loop) and all(gd.disjoint(group, loop, c) for c in curves):
            curves.append(loop)
        else:
            note = "loop geodesic at the base point crosses a short curve; skipped"
    elif curves:
        note = "loop geodesic at the base point is a short curve"
    _add(state, curves, dict(kind=StepKind.INIT, point=_point_xy(x1), loop_length=loop_len, note=note))
    return state


def main_step_1(state: AlgoState, config: AlgoConfig | None = None):
    """Returns the new :class:`StepRecord`, or ``None`` when no point is farther than ``r_g``."""
    config = config or AlgoConfig()
    g = state.genus
    R = r_g(g)
    best = None
    for h in state.handles:
        try:
            p, d = gd.farthest_point(state.group, state.cut, h, samples=config.samples, seed=config.seed)
        except GeometryError as exc:
            if "too thin" not in str(exc):
                raise
            continue
        if d > R and (best is None or d > best[1]):
            best = (p, d)
    if best is None:
        return None
    p, d = best
    loop, loop_len = gd.shortest_loop_at(state.group, p)
    if _in_cut(loop, state.cut):
        if state.conditional:
            # without a systole bound the loop may be peripheral
            log.info("MS1 loop at distance %.6f is a boundary curve; falling through", d)
            return None
        raise AlgorithmError("shortest loop at a far point is freely homotopic to a boundary curve", state.trace)
    if not loop.length < 2.0 * R:
        raise AlgorithmError(f"MS1 curve of length {loop.length:.9g} is not shorter than 2 r_g", state.trace)
    return _add(state, [loop], dict(kind=StepKind.MS1, point=_point_xy(p), distance=d, loop_length=loop_len))


def _shortest_arc(state: AlgoState):
    best = None
    for h in state.handles:
        arc = gd.shortest_orthogeodesic(state.group, state.cut, h)
        if best is None or arc.length < best.length - 1e-12:
            best = arc
    if best is None:
        raise AlgorithmError("no handle left to cut", state.trace)
    return best


def _arc_step(state: AlgoState, failsafe: bool) -> StepRecord:
    geo = gd.geometry(state.group)
    arc = _shortest_arc(state)
    g = state.genus
    if failsafe and not arc.length < SHORT_CURVE_LENGTH:
        raise AlgorithmError(f"fail-safe arc of length {arc.length:.9g} is not shorter than 2 asinh 1", state.trace)
    common = dict(arc_length=arc.length, point=_point_xy(arc.near_foot))
    if arc.from_side != arc.to_side:
        c = geo.curve(free_reduce(arc.near_holonomy + arc.far_holonomy))
        c = geo.shortest_word(c)
        hx = hexagon_third_side(arc.from_curve.length, arc.to_curve.length, arc.length)
        if abs(c.length - hx) > TOL.length * max(1.0, hx):
            raise AlgorithmError(f"new curve length {c.length:.12g} disagrees with the hexagon value {hx:.12g}", state.trace)
        bound = arc.from_curve.length + arc.to_curve.length + 4.0 * r_g(g)
        if not c.length <= bound:
            raise AlgorithmError("new curve longer than both boundary curves plus 4 r_g", state.trace)
        kind = StepKind.FAILSAFE_CASE1 if failsafe else StepKind.MS2_CASE1
        rec = _add(state, [c], dict(kind=kind, hexagon_length=hx, **common))
    else:
        w1, w2 = arc.loop_words
        c1 = geo.shortest_word(geo.curve(w1))
        c2 = geo.shortest_word(geo.curve(w2))
        if gd.same_class(c1, c2):
            kind = StepKind.FAILSAFE_CASE2 if failsafe else StepKind.MS2_CASE2_TORUS
            new = [c1]
        else:
            kind = StepKind.FAILSAFE_CASE2 if failsafe else StepKind.MS2_CASE2_SPLIT
            new = [c for c in (c1, c2) if not _in_cut(c, state.cut)]
            if not new:
                raise AlgorithmError("both pants curves around the arc are already cut", state.trace)
        rec = _add(state, new, dict(kind=kind, **common))
    if failsafe and not rec.boundary_len_after < rec.boundary_len_before:
        raise AlgorithmError("fail-safe step did not shorten the boundary", state.trace)
    return rec


def main_step_2(state: AlgoState) -> StepRecord:
    return _arc_step(state, failsafe=False)


def fail_safe_step(state: AlgoState) -> StepRecord:
    g = state.genus
    L = state.boundary_length
    if not L < surface_area(g) + 4.0 * r_g(g):
        raise AlgorithmError(f"boundary length {L:.9g} exceeds 4 pi (g - 1) + 4 r_g", state.trace)
    return _arc_step(state, failsafe=True)


def decompose(group: FuchsianGroup, config: AlgoConfig | None = None):
    """Run the construction: returns ``(PantsDecomposition, trace)``."""
    config = config or AlgoConfig()
    g = group.genus
    n = 3 * g - 3
    max_steps = config.max_steps if config.max_steps is not None else 10 * n
    state = initialize(group, config)
    steps = 0
    while not state.done:
        steps += 1
        if steps > max_steps:
            raise StepBudgetExceeded(f"step budget {max_steps} exhausted with {len(state.cut)} curves", state.trace)
        if state.boundary_length >= surface_area(g):
            fail_safe_step(state)
            continue
        if main_step_1(state, config) is None:
            main_step_2(state)
    if len(state.cut) != n or state.handles:
        raise AlgorithmError(f"construction ended with {len(state.cut)} curves and {len(state.handles)} handles", state.trace)
    limit = surface_area(g) + 4.0 * r_g(g)
    for c in state.cut.curves:
        if not c.length < limit:
            raise AlgorithmError(f"curve {c.word} of length {c.length:.9g} exceeds 4 pi (g - 1) + 4 r_g", state.trace)
    pd = PantsDecomposition(
        genus=g,
        curves=list(state.cut.curves),
        pants=[sorted(c for c, _ in p.sides) for p in state.retired_pants],
        bers_bound=bers_bound(g),
        conditional=state.conditional,
    )
    return pd, state.trace


def decomposition_from_words(group: FuchsianGroup, words, pants=None, conditional=False) -> PantsDecomposition:
    """Rebuild a decomposition from curve words; lengths are recomputed."""
    geo = gd.geometry(group)
    curves = [geo.curve(w) for w in words]
    return PantsDecomposition(group.genus, curves, list(pants or []), bers_bound(group.genus), conditional)


def verify(group: FuchsianGroup, pd: PantsDecomposition, stored_lengths=None, tol: float | None = None) -> VerificationReport:
    tol = TOL.length if tol is None else tol
    g = group.genus
    geo = gd.geometry(group)
    msgs = []
    curves = []
    ok_build = True
    for c in pd.curves:
        try:
            curves.append(geo.curve(c.word))
        except GeometryError as exc:
            ok_build = False
            msgs.append(f"curve {list(c.word)}: {exc}")
    count_ok = ok_build and len(curves) == 3 * g - 3
    if not count_ok:
        msgs.append(f"{len(curves)} curves, expected {3 * g - 3}")

    lengths = stored_lengths if stored_lengths is not None else [c.length for c in pd.curves]
    lengths_ok = ok_build and len(lengths) == len(curves) and all(
        abs(a - c.length) <= tol * max(1.0, c.length) for a, c in zip(lengths, curves)
    )
    if not lengths_ok:
        msgs.append("stored lengths disagree with the holonomy traces")

    disjoint_ok = ok_build
    for i, a in enumerate(curves):
        if not gd.is_simple(a):
            disjoint_ok = False
            msgs.append(f"curve {i} is not simple")
        for j in range(i):
            b = curves[j]
            if gd.same_class(a, b) or not gd.disjoint(group, a, b):
                disjoint_ok = False
                msgs.append(f"curves {j} and {i} are not disjoint")

    euler_ok = False
    if disjoint_ok:
        try:
            comps = gd.components(group, gd.CutSet(tuple(curves)))
            chi = sum(h.euler_characteristic for h in comps)
            all_pants = all(h.is_pants for h in comps)
            euler_ok = all_pants and len(comps) == 2 * g - 2 and chi == 2 - 2 * g
            if euler_ok and pd.pants:
                found = sorted(sorted(c for c, _ in h.sides) for h in comps)
                euler_ok = found == sorted(sorted(p) for p in pd.pants)
            if not euler_ok:
                msgs.append(f"cut surface: {len(comps)} components, chi {chi}, all pants {all_pants}")
        except GeometryError as exc:
            msgs.append(f"components: {exc}")
    else:
        msgs.append("component accounting skipped: curves not disjoint")

    max_len = max((c.length for c in curves), default=0.0)
    bound = bers_bound(g)
    bound_ok = bool(curves) and max_len <= bound

    short = gd.short_classes(group, SHORT_CURVE_LENGTH)
    admissible_ok = all(any(gd.same_class(s, c) for c in curves) for s in short)
    if not admissible_ok:
        msgs.append("a geodesic of length <= 2 asinh 1 is missing")
    return VerificationReport(count_ok, disjoint_ok, euler_ok, bound_ok, admissible_ok, lengths_ok, max_len, bound, msgs)


def bavard_check(loop_length: float, g: int) -> bool:
    return loop_length <= bavard_bound(g) + 1e-9
