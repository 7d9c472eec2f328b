"""Domain types shared by every stage of the picker.

Units are fixed throughout the package: time in milliseconds, velocity in
metres per second, offsets in metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class UelError(Exception):
    """Base class for all package errors."""


class NonPositiveRadicand(UelError):
    """Dix radicand is not positive: the pick pair is physically impossible."""


class DegenerateInterval(UelError):
    """Two picks do not bound a positive time interval."""


class AxisMismatch(UelError):
    """Grids or gathers that must share axes do not."""


@dataclass(frozen=True, order=True)
class SurveyIndex:
    line: int
    cdp: int

    def __str__(self) -> str:
        return f"{self.line}:{self.cdp}"


@dataclass(frozen=True)
class TimeAxis:
    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) * self.dt

    @property
    def t_max(self) -> float:
        return self.t0 + (self.n - 1) * self.dt


@dataclass(frozen=True)
class VelocityAxis:
    v0: float
    dv: float
    m: int

    def __post_init__(self):
        if not self.dv > 0:
            raise ValueError(f"dv must be positive, got {self.dv}")
        if not self.v0 > 0:
            raise ValueError(f"v0 must be positive, got {self.v0}")
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m}")

    @property
    def velocities(self) -> np.ndarray:
        return self.v0 + np.arange(self.m) * self.dv

    @property
    def v_max(self) -> float:
        return self.v0 + (self.m - 1) * self.dv


@dataclass(frozen=True, eq=False)
class SpectrumGrid:
    """Coherence on a (time, velocity) grid; ``values`` has shape ``(n, m)``."""

    taxis: TimeAxis
    vaxis: VelocityAxis
    values: np.ndarray
    location: SurveyIndex = SurveyIndex(0, 0)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.taxis.n, self.vaxis.m):
            raise AxisMismatch(
                f"values shape {values.shape} does not match axes ({self.taxis.n}, {self.vaxis.m})"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("spectrum values must be finite and nonnegative")
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray) -> "SpectrumGrid":
        return SpectrumGrid(self.taxis, self.vaxis, values, self.location)

    def same_axes(self, other: "SpectrumGrid") -> bool:
        return self.taxis == other.taxis and self.vaxis == other.vaxis


@dataclass(frozen=True, eq=False)
class CmpGather:
    """Traces of one common midpoint; ``traces`` has shape ``(n, N)``.

    ``live`` is an optional boolean mask of the same shape, set by NMO
    correction to mark samples that survived the stretch mute.
    """

    taxis: TimeAxis
    offsets: np.ndarray
    traces: np.ndarray
    location: SurveyIndex = SurveyIndex(0, 0)
    live: np.ndarray | None = None

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=np.float64)
        traces = np.asarray(self.traces, dtype=np.float64)
        if offsets.ndim != 1 or len(offsets) < 2:
            raise ValueError("a gather needs at least two offsets")
        if np.any(np.diff(offsets) <= 0) or offsets[0] < 0:
            raise ValueError("offsets must be nonnegative and strictly increasing")
        if traces.shape != (self.taxis.n, len(offsets)):
            raise AxisMismatch(
                f"traces shape {traces.shape} does not match ({self.taxis.n}, {len(offsets)})"
            )
        if not np.all(np.isfinite(traces)):
            raise ValueError("trace amplitudes must be finite")
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "traces", traces)
        if self.live is not None:
            live = np.asarray(self.live, dtype=bool)
            if live.shape != traces.shape:
                raise AxisMismatch("live mask shape does not match traces")
            object.__setattr__(self, "live", live)


@dataclass(frozen=True)
class WeightedPoint:
    t: float
    v: float
    c: float


def points_to_array(points: Sequence[WeightedPoint]) -> np.ndarray:
    """Stack points into a ``(P, 3)`` array of ``t, v, c`` columns."""
    if len(points) == 0:
        return np.empty((0, 3))
    return np.array([(p.t, p.v, p.c) for p in points], dtype=np.float64)


def array_to_points(arr: np.ndarray) -> list[WeightedPoint]:
    return [WeightedPoint(float(t), float(v), float(c)) for t, v, c in np.asarray(arr)]


@dataclass(frozen=True)
class VelocityFunction:
    """Ordered (time, velocity) picks, linearly interpolated between knots.

    ``low_confidence`` marks curves produced by the pipeline's fallback path;
    it is metadata and does not take part in equality.
    """

    times: tuple[float, ...]
    velocities: tuple[float, ...]
    low_confidence: bool = field(default=False, compare=False)

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        vels = tuple(float(v) for v in self.velocities)
        if len(times) == 0 or len(times) != len(vels):
            raise ValueError("a velocity function needs matching, nonempty times and velocities")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("pick times must be strictly increasing")
        if any(not (v > 0 and math.isfinite(v)) for v in vels):
            raise ValueError("pick velocities must be positive and finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "velocities", vels)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]], low_confidence: bool = False):
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), low_confidence)

    @property
    def picks(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.velocities))

    def __len__(self) -> int:
        return len(self.times)

    def __call__(self, t):
        return eval_velocity(self, t)


def eval_velocity(f: VelocityFunction, t):
    """Evaluate ``f`` at time(s) ``t``.

    Piecewise linear between picks, constant beyond the first and last pick.
    Scalars in, float out; arrays in, array out.
    """
    out = np.interp(np.asarray(t, dtype=np.float64), f.times, f.velocities)
    if np.ndim(out) == 0:
        return float(out)
    return out


def dix_interval(vn_prev: float, tn_prev: float, vn: float, tn: float) -> float:
    """Interval velocity between two stack-velocity picks (Dix)."""
    if not tn > tn_prev:
        raise DegenerateInterval(f"interval [{tn_prev}, {tn}] is not positive")
    radicand = (vn * vn * tn - vn_prev * vn_prev * tn_prev) / (tn - tn_prev)
    if not radicand > 0:
        raise NonPositiveRadicand(
            f"Dix radicand {radicand:g} <= 0 for picks ({tn_prev}, {vn_prev}) -> ({tn}, {vn})"
        )
    return math.sqrt(radicand)
