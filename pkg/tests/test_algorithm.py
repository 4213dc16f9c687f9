import dataclasses

import pytest

from helpers import SHORT, fn_group
from pantsdecomp import algorithm as al
from pantsdecomp import geodesy as gd
from pantsdecomp.bounds import bavard_bound, bers_bound, r_g, surface_area
from pantsdecomp.hypcore import HPoint
from pantsdecomp.surface import random_surface


@pytest.fixture(scope="module")
def bolza_run(bolza):
    return al.decompose(bolza)


def test_config_validation():
    with pytest.raises(ValueError):
        al.AlgoConfig(samples=0)
    with pytest.raises(ValueError):
        al.AlgoConfig(budget=9_999)


def test_preprocess_examples(bolza):
    assert len(al.preprocess_admissible(bolza)) == 0
    one = fn_group((1.5, 3.0, 3.5), (1.0, 0.5, 2.0))
    cut = al.preprocess_admissible(one)
    assert [round(c.length, 6) for c in cut.curves] == [1.5]
    two = fn_group((1.0, 1.2, 3.5), (0.3, 0.2, 0.1))
    cut = al.preprocess_admissible(two)
    assert [round(c.length, 6) for c in cut.curves] == [1.0, 1.2]


def test_initialize_bolza(bolza):
    state = al.initialize(bolza)
    assert len(state.cut) == 1
    rec = state.trace[0]
    assert rec.kind is al.StepKind.INIT
    assert rec.loop_length <= bavard_bound(2)
    assert rec.boundary_len_before == 0.0
    assert rec.boundary_len_after == pytest.approx(2 * sum(c.length for c in rec.new_curves), abs=1e-12)
    assert not state.conditional


def test_initialize_with_short_curves():
    grp = fn_group((1.0, 1.2, 3.5), (0.3, 0.2, 0.1))
    state = al.initialize(grp)
    assert len(state.cut) >= 2
    assert state.conditional


def test_initialize_respects_base_point(bolza):
    x = HPoint(0.05, 0.9)
    state = al.initialize(bolza, al.AlgoConfig(base_point=x))
    assert state.trace[0].point == (0.05, 0.9)


def test_main_step_1_guard(theta3):
    # inside the pants of an edge cut nothing is farther than r_g
    geo = gd.geometry(theta3)
    state = al.initialize(theta3)
    cut = gd.CutSet(tuple(geo.curve(w) for w in theta3.edge_words[:2]))
    state.cut = cut
    state.handles = [h for h in gd.components(theta3, cut) if not h.is_pants]
    assert all(gd.farthest_point(theta3, cut, h, samples=500)[1] <= r_g(2) for h in state.handles)
    assert al.main_step_1(state, al.AlgoConfig(samples=500)) is None


def test_decompose_bolza(bolza, bolza_run):
    pd, trace = bolza_run
    assert len(pd.curves) == 3
    assert len(pd.pants) == 2
    assert pd.max_length <= bers_bound(2)
    report = al.verify(bolza, pd)
    assert report.passed, report.messages
    assert trace[0].kind is al.StepKind.INIT


def test_trace_bookkeeping(bolza_run):
    _, trace = bolza_run
    R = r_g(2)
    for rec in trace:
        if rec.kind.value.startswith("FAILSAFE"):
            assert rec.boundary_len_after < rec.boundary_len_before
            assert rec.arc_length < SHORT
        else:
            assert rec.boundary_len_after < rec.boundary_len_before + 4 * R
        if rec.kind is al.StepKind.MS1:
            assert all(c.length < 2 * R for c in rec.new_curves)
        if rec.hexagon_length is not None:
            assert rec.new_curves[0].length == pytest.approx(rec.hexagon_length, abs=1e-6)
        assert set(rec.to_json()) >= {"kind", "new_curves", "boundary_len_before", "boundary_len_after"}


def test_verify_detects_deleted_curve(bolza, bolza_run):
    pd, _ = bolza_run
    for k in range(len(pd.curves)):
        short = dataclasses.replace(pd, curves=pd.curves[:k] + pd.curves[k + 1 :], pants=[])
        report = al.verify(bolza, short)
        assert not report.curve_count_ok
        assert not report.passed


def test_verify_detects_crossing_curve(bolza, bolza_run):
    pd, _ = bolza_run
    geo = gd.geometry(bolza)
    first = pd.curves[0]
    crossing = next(c for c in (geo.curve((k,)) for k in (1, 2, 3, 4)) if not gd.disjoint(bolza, c, first))
    bad = dataclasses.replace(pd, curves=[first, crossing, pd.curves[2]], pants=[])
    report = al.verify(bolza, bad)
    assert not report.disjoint_ok
    assert not report.passed


def test_verify_detects_bad_stored_length(bolza, bolza_run):
    pd, _ = bolza_run
    lengths = [c.length for c in pd.curves]
    lengths[0] += 1e-3
    report = al.verify(bolza, pd, stored_lengths=lengths)
    assert not report.lengths_ok


def test_verify_detects_missing_short_curve():
    grp = fn_group((1.0, 3.0, 3.5), (1.0, 0.5, 2.0))
    pd = al.decomposition_from_words(grp, grp.edge_words[1:])
    report = al.verify(grp, pd)
    assert not report.admissible_ok
    assert not report.curve_count_ok


def test_conditional_certificate():
    grp = fn_group((1.5, 3.0, 3.5), (1.0, 0.5, 2.0))
    pd, _ = al.decompose(grp)
    assert pd.conditional
    assert al.verify(grp, pd).passed


def test_genus_three_ring():
    grp = random_surface(3, 1.8, 4.0, 1, "ring").group()
    pd, trace = al.decompose(grp)
    assert len(pd.curves) == 6
    assert len(pd.pants) == 4
    report = al.verify(grp, pd)
    assert report.passed, report.messages
    handles = gd.components(grp, gd.CutSet(tuple(pd.curves)))
    assert sum(h.euler_characteristic for h in handles) == -4
    for rec in trace:
        if rec.hexagon_length is not None:
            assert rec.new_curves[0].length == pytest.approx(rec.hexagon_length, abs=1e-6)
    assert all(c.length < surface_area(3) + 4 * r_g(3) for c in pd.curves)


def test_step_budget(bolza):
    with pytest.raises(al.StepBudgetExceeded):
        al.decompose(bolza, al.AlgoConfig(max_steps=0))


def test_decomposition_from_words_recomputes_lengths(bolza, bolza_run):
    pd, _ = bolza_run
    again = al.decomposition_from_words(bolza, [c.word for c in pd.curves], pd.pants)
    assert again.lengths == pytest.approx(pd.lengths, abs=1e-12)


def test_bavard_check():
    assert al.bavard_check(bavard_bound(3), 3)
    assert not al.bavard_check(bavard_bound(3) + 1e-6, 3)
