import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uelpick.fileio import (
    IoError,
    format_picks,
    gather_image,
    parse_picks,
    read_gather,
    read_pgm,
    read_picks,
    read_spectrum,
    to_gray,
    write_gather,
    write_pgm,
    write_picks,
    write_spectrum,
)
from uelpick.model import CmpGather, SpectrumGrid, SurveyIndex, TimeAxis, VelocityAxis, VelocityFunction

PROPS = settings(max_examples=100)


def test_gather_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    g = CmpGather(TimeAxis(4.0, 2.0, 50), np.arange(0.0, 700.0, 100.0), rng.normal(size=(50, 7)),
                  SurveyIndex(3, 9))
    write_gather(tmp_path / "a.gth", g)
    h = read_gather(tmp_path / "a.gth")
    assert h.location == g.location and h.taxis == g.taxis
    assert h.traces.tobytes() == g.traces.tobytes()
    assert h.offsets.tobytes() == g.offsets.tobytes()


def test_spectrum_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    s = SpectrumGrid(TimeAxis(0.0, 8.0, 20), VelocityAxis(1500.0, 25.0, 11), rng.uniform(size=(20, 11)),
                     SurveyIndex(1, 2))
    write_spectrum(tmp_path / "a.spc", s)
    r = read_spectrum(tmp_path / "a.spc")
    assert r.values.tobytes() == s.values.tobytes() and r.same_axes(s) and r.location == s.location


def test_truncated_and_foreign_files(tmp_path):
    g = CmpGather(TimeAxis(0.0, 4.0, 10), [0.0, 100.0], np.ones((10, 2)))
    write_gather(tmp_path / "a.gth", g)
    raw = (tmp_path / "a.gth").read_bytes()
    (tmp_path / "b.gth").write_bytes(raw[:-8])
    with pytest.raises(IoError, match="truncated"):
        read_gather(tmp_path / "b.gth")
    with pytest.raises(IoError, match="expected"):
        read_spectrum(tmp_path / "a.gth")
    with pytest.raises(IoError, match="cannot read"):
        read_gather(tmp_path / "missing.gth")


def test_picks_flags_and_errors():
    curves = {SurveyIndex(0, 1): VelocityFunction((0.0, 200.0), (1500.0, 1600.0), low_confidence=True),
              SurveyIndex(0, 0): VelocityFunction((100.0,), (2000.0,))}
    text = format_picks(curves, seeds=[SurveyIndex(0, 0)], comment="x")
    back, seeds = parse_picks(text)
    assert back == curves and seeds == {SurveyIndex(0, 0)}
    assert back[SurveyIndex(0, 1)].low_confidence
    for bad, msg in (("location 0 0\n", "no picks"), ("1 2\n", "expected"),
                     ("location 0 0 odd\n1 2\n", "unknown flag"), ("location 0 0\n1 x\n", "non-numeric"),
                     ("location 0 0\n1 2\nlocation 0 0\n1 2\n", "twice")):
        with pytest.raises(IoError, match=msg):
            parse_picks(bad)


def test_pgm_round_trip(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    write_pgm(tmp_path / "a.pgm", img)
    np.testing.assert_array_equal(read_pgm(tmp_path / "a.pgm"), img)
    assert to_gray(np.array([0.0, 0.5, 1.0])).tolist() == [0, 128, 255]
    assert gather_image(np.zeros((2, 2))).tolist() == [[128, 128], [128, 128]]


pairs = st.lists(st.tuples(st.floats(0, 1e4, allow_subnormal=False), st.floats(1, 1e4)),
                 min_size=1, max_size=8, unique_by=lambda p: p[0])


@PROPS
@given(st.dictionaries(st.builds(SurveyIndex, st.integers(0, 99), st.integers(0, 99)), pairs, min_size=1,
                       max_size=5), st.booleans())
def test_picks_round_trip_exact(data, low):
    curves = {loc: VelocityFunction.from_pairs(sorted(p), low) for loc, p in data.items()}
    seeds = set(list(curves)[:1])
    back, bseeds = parse_picks(format_picks(curves, seeds))
    assert bseeds == seeds
    for loc, f in curves.items():
        assert back[loc].times == f.times and back[loc].velocities == f.velocities
        assert back[loc].low_confidence == low
