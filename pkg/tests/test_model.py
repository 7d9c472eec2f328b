import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uelpick.model import (
    CmpGather,
    DegenerateInterval,
    NonPositiveRadicand,
    SpectrumGrid,
    TimeAxis,
    VelocityAxis,
    VelocityFunction,
    dix_interval,
    eval_velocity,
)

PROPS = settings(max_examples=100)


def curves(min_size=1, max_size=8):
    """Strictly increasing times with positive velocities."""
    return st.lists(
        st.tuples(st.floats(0, 5000, allow_nan=False), st.floats(500, 8000, allow_nan=False)),
        min_size=min_size,
        max_size=max_size,
        unique_by=lambda p: round(p[0], 3),
    ).map(lambda ps: sorted((round(t, 3), v) for t, v in ps)).filter(
        lambda ps: all(b[0] > a[0] for a, b in zip(ps, ps[1:]))
    ).map(VelocityFunction.from_pairs)


def test_linear_interpolation_hand_value():
    f = VelocityFunction.from_pairs([(1000, 2000), (2000, 3000)])
    assert eval_velocity(f, 1500) == 2500.0


def test_constant_extrapolation():
    f = VelocityFunction.from_pairs([(1000, 2000), (2000, 3000)])
    assert eval_velocity(f, 0.0) == 2000.0
    assert eval_velocity(f, 9000.0) == 3000.0
    np.testing.assert_array_equal(f(np.array([500.0, 1500.0])), [2000.0, 2500.0])


def test_dix_hand_value():
    expected = math.sqrt((2200.0**2 * 2000 - 2000.0**2 * 1000) / 1000)
    assert expected == pytest.approx(2383.275, abs=1e-3)
    assert dix_interval(2000, 1000, 2200, 2000) == pytest.approx(expected, rel=1e-12)


def test_dix_negative_radicand():
    # (2000^2 * 2000 - 3000^2 * 1000) / 1000 < 0
    with pytest.raises(NonPositiveRadicand):
        dix_interval(3000, 1000, 2000, 2000)


def test_dix_degenerate_interval():
    with pytest.raises(DegenerateInterval):
        dix_interval(2000, 1000, 2100, 1000)


@pytest.mark.parametrize(
    "times, vels",
    [((), ()), ((1.0, 2.0), (1.0,)), ((2.0, 1.0), (1.0, 1.0)), ((1.0, 1.0), (1.0, 2.0)),
     ((1.0,), (0.0,)), ((1.0,), (math.inf,))],
)
def test_velocity_function_rejects(times, vels):
    with pytest.raises(ValueError):
        VelocityFunction(times, vels)


def test_low_confidence_not_in_equality():
    a = VelocityFunction((1.0,), (2.0,), low_confidence=True)
    assert a == VelocityFunction((1.0,), (2.0,))


def test_axes_validate():
    with pytest.raises(ValueError):
        TimeAxis(0, 0, 10)
    with pytest.raises(ValueError):
        VelocityAxis(0, 10, 10)
    with pytest.raises(ValueError):
        VelocityAxis(1000, 10, 1)
    ax = TimeAxis(10.0, 4.0, 3)
    np.testing.assert_array_equal(ax.times, [10.0, 14.0, 18.0])
    assert ax.t_max == 18.0


def test_grid_and_gather_shape_checks():
    ta, va = TimeAxis(0, 4, 5), VelocityAxis(1000, 10, 3)
    with pytest.raises(Exception):
        SpectrumGrid(ta, va, np.zeros((5, 4)))
    with pytest.raises(ValueError):
        SpectrumGrid(ta, va, -np.ones((5, 3)))
    with pytest.raises(ValueError):
        CmpGather(ta, [100.0, 50.0], np.zeros((5, 2)))
    with pytest.raises(Exception):
        CmpGather(ta, [0.0, 50.0], np.zeros((4, 2)))


@PROPS
@given(curves(), st.lists(st.floats(-1000, 7000, allow_nan=False), min_size=2, max_size=20))
def test_monotone_preserving(f, ts):
    vs = sorted(f.velocities)
    g = VelocityFunction(f.times, tuple(vs))
    ts = np.sort(np.asarray(ts))
    assert np.all(np.diff(g(ts)) >= 0)


@PROPS
@given(curves())
def test_exact_at_pick_times(f):
    for t, v in f.picks:
        assert eval_velocity(f, t) == v


@PROPS
@given(st.floats(100, 10000), st.floats(0, 5000), st.floats(1, 5000))
def test_dix_constant_field(v, t1, gap):
    t2 = t1 + gap
    assert dix_interval(v, t1, v, t2) == pytest.approx(v, rel=1e-9)
