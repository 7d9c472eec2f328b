import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from uelpick.evalqc import (
    EmptyRecognizedSet,
    aggregate_metrics,
    mean_deviation,
    nmo_correct,
    picking_rate,
    stack_section,
    vmae,
    vmre,
)
from uelpick.model import CmpGather, SurveyIndex, TimeAxis, VelocityFunction
from uelpick.synth import synthesize_gather

PROPS = settings(max_examples=100)
AUTO = VelocityFunction.from_pairs([(0, 2000), (2000, 2000)])
REF = VelocityFunction.from_pairs([(0, 2000), (2000, 2400)])
AX3 = TimeAxis(0.0, 1000.0, 3)


def test_vmae_hand_mean():
    assert vmae(AUTO, REF, AX3) == pytest.approx((0 + 200 + 400) / 3, rel=1e-12)


def test_vmre_hand_mean():
    want = (0 + 200 / 2200 + 400 / 2400) / 3
    assert want == pytest.approx(0.0859, abs=1e-4)
    assert vmre(AUTO, REF, AX3) == pytest.approx(want, rel=1e-12)


def test_picking_rate_and_md_hand():
    auto = VelocityFunction.from_pairs([(0, 2000), (3000, 2000)])
    real = [(500.0, 2050.0), (1000.0, 1850.0), (1500.0, 2250.0)]
    pr, rec = picking_rate(auto, real)
    assert pr == pytest.approx(2 / 3, rel=1e-12)
    assert rec == real[:2]
    assert mean_deviation(auto, rec) == pytest.approx(100.0, rel=1e-12)


def test_md_empty():
    with pytest.raises(EmptyRecognizedSet):
        mean_deviation(AUTO, [])


def test_aggregate_excludes_seeds():
    locs = [SurveyIndex(0, j) for j in range(4)]
    ref = {l: REF for l in locs}
    auto = {l: AUTO for l in locs}
    auto[locs[0]] = REF
    rep = aggregate_metrics(auto, ref, AX3, exclude=[locs[0]])
    assert rep.n_locations == 3
    assert rep.vmae == pytest.approx(200.0)
    full = aggregate_metrics(auto, ref, AX3)
    assert full.n_locations == 4 and full.vmae == pytest.approx(150.0)


def single_event_gather(t0=1000.0, v=2200.0):
    ta = TimeAxis(0.0, 4.0, 501)
    offs = np.arange(0.0, 2001.0, 200.0)
    return synthesize_gather(None, [(t0, v)], offs, ta, noise_amplitude=1.0, amplitude_decay=0.0,
                             ambient_noise=0.0), t0, v


def test_nmo_flattens_event():
    g, t0, v = single_event_gather()
    out = nmo_correct(g, VelocityFunction((0.0,), (v,)))
    for k in range(len(g.offsets)):
        if out.live[:, k].any():
            assert abs(g.taxis.times[np.argmax(out.traces[:, k])] - t0) <= g.taxis.dt


def test_nmo_too_fast_leaves_residual_moveout():
    g, t0, v = single_event_gather()
    out = nmo_correct(g, VelocityFunction((0.0,), (1.2 * v,)), stretch_limit=10.0)
    far = g.taxis.times[np.argmax(out.traces[:, -1])]
    assert far > t0 + g.taxis.dt


def test_true_velocity_maximises_stack():
    g, t0, v = single_event_gather()
    i0 = int(t0 / g.taxis.dt)
    peaks = {}
    for scale in np.linspace(0.8, 1.2, 21):
        out = nmo_correct(g, VelocityFunction((0.0,), (scale * v,)))
        peaks[round(scale, 2)] = stack_section([out])[i0, 0]
    assert max(peaks, key=peaks.get) == 1.0


def test_stack_section_stripe():
    ta = TimeAxis(0.0, 4.0, 501)
    tr = np.zeros((ta.n, 3))
    tr[250] = 1.0
    section = stack_section([CmpGather(ta, [0.0, 100.0, 200.0], tr), CmpGather(ta, [0.0, 100.0, 200.0], -tr * 0 + tr)])
    assert section.shape == (501, 2)
    assert np.all(np.argmax(section, axis=0) == 250)
    assert ta.times[250] == 1000.0


curves = st.lists(st.tuples(st.floats(0, 3000), st.floats(1000, 6000)), min_size=1, max_size=6,
                  unique_by=lambda p: p[0]).map(lambda ps: VelocityFunction.from_pairs(sorted(ps)))


@PROPS
@given(curves)
def test_self_error_zero(f):
    ax = TimeAxis(0.0, 8.0, 376)
    assert vmae(f, f, ax) == 0.0
    assert vmre(f, f, ax) == 0.0
    pr, rec = picking_rate(f, f.picks)
    assert pr == 1.0 and mean_deviation(f, rec) == 0.0


@PROPS
@given(curves, st.floats(10, 900))
def test_vmae_symmetric_vmre_not(f, d):
    ax = TimeAxis(0.0, 8.0, 376)
    g = VelocityFunction(f.times, tuple(v + d for v in f.velocities))
    assert vmae(f, g, ax) == pytest.approx(vmae(g, f, ax), rel=1e-12)
    assert vmae(f, g, ax) == pytest.approx(d, rel=1e-9)
    assert vmre(f, g, ax) < vmre(g, f, ax)


@PROPS
@given(curves, st.lists(st.tuples(st.floats(0, 3000), st.floats(1000, 6000)), min_size=1, max_size=20))
def test_pr_range_md_bound(f, real):
    pr, rec = picking_rate(f, real)
    assert 0.0 <= pr <= 1.0
    if rec:
        assert mean_deviation(f, rec) < 200.0


@PROPS
@given(arrays(np.float64, st.tuples(st.integers(3, 40), st.integers(2, 5)),
              elements=st.floats(-5, 5, allow_nan=False)),
       st.floats(1000, 6000), st.floats(0.01, 2.0))
def test_nmo_zero_offset_identity(traces, v, limit):
    offs = np.concatenate([[0.0], 100.0 * np.arange(1, traces.shape[1])])
    g = CmpGather(TimeAxis(0.0, 4.0, traces.shape[0]), offs, traces)
    out = nmo_correct(g, VelocityFunction((0.0,), (v,)), limit)
    assert np.all(out.live[:, 0])
    np.testing.assert_array_equal(out.traces[:, 0], traces[:, 0])
