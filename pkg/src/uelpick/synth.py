"""Ground-truthed synthetic surveys with a controlled picking SNR.

The SNR here is a count ratio: real velocity events per spurious event at
each location. Spurious events scatter around the true curve and become
extra blobs in the velocity spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import (
    CmpGather,
    SurveyIndex,
    TimeAxis,
    UelError,
    VelocityAxis,
    VelocityFunction,
    eval_velocity,
)

REAL_AMPLITUDE = 1.0


class EventOutOfRange(UelError):
    """An event apex lies outside the time axis."""


def default_offsets() -> tuple[float, ...]:
    return tuple(float(x) for x in range(0, 3001, 100))


@dataclass(frozen=True)
class SyntheticSurveyConfig:
    """Survey geometry and noise level.

    ``snr = math.inf`` means no spurious events at all. ``ambient_noise`` is
    the standard deviation of white noise added to every trace sample and
    ``amplitude_decay`` scales each event by ``exp(-decay * t0 / 1000)``.
    Setting both to 0 leaves pure unit-amplitude events on silent traces.
    """

    lines: int = 10
    cdps: int = 10
    taxis: TimeAxis = TimeAxis(0.0, 8.0, 376)
    vaxis: VelocityAxis = VelocityAxis(1300.0, 20.0, 211)
    n_real_points: int = 10
    snr: float = 10.0
    offsets: tuple[float, ...] = field(default_factory=default_offsets)
    wavelet_freq: float = 30.0
    rng_seed: int = 0
    lateral_drift: float = 60.0
    noise_sigma: float = 400.0
    noise_amplitude: float = 0.5
    ambient_noise: float = 0.1
    amplitude_decay: float = 0.8

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError("snr must be positive")
        if self.n_real_points < 2:
            raise ValueError("n_real_points must be >= 2")
        if self.lines < 1 or self.cdps < 1:
            raise ValueError("survey extents must be positive")
        offs = tuple(float(x) for x in self.offsets)
        if len(offs) < 2 or any(b <= a for a, b in zip(offs, offs[1:])):
            raise ValueError("offsets must be strictly increasing")
        if self.lateral_drift < 0:
            raise ValueError("lateral_drift must be nonnegative")
        if self.ambient_noise < 0 or self.amplitude_decay < 0:
            raise ValueError("ambient_noise and amplitude_decay must be nonnegative")
        object.__setattr__(self, "offsets", offs)

    @property
    def locations(self) -> list[SurveyIndex]:
        return [SurveyIndex(i, j) for i in range(self.lines) for j in range(self.cdps)]


@dataclass
class SyntheticSurvey:
    config: SyntheticSurveyConfig
    gathers: dict[SurveyIndex, CmpGather]
    truth: dict[SurveyIndex, VelocityFunction]
    noise_points: dict[SurveyIndex, list[tuple[float, float]]]

    @property
    def locations(self) -> list[SurveyIndex]:
        return sorted(self.truth)


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, *stream])


def _base_curve(cfg: SyntheticSurveyConfig):
    rng = _rng(cfg.rng_seed, 0)
    tax, vax = cfg.taxis, cfg.vaxis
    span_t = tax.t_max - tax.t0
    k = cfg.n_real_points
    # the deep margin leaves room for far-offset moveout inside the trace
    lo, hi = tax.t0 + 0.07 * span_t, tax.t_max - 0.15 * span_t
    spacing = (hi - lo) / (k - 1)
    jitter = rng.uniform(-0.05, 0.05, k) * spacing
    jitter[0] = jitter[-1] = 0.0
    times = lo + spacing * np.arange(k) + jitter
    times = np.round(times, 3)

    span_v = vax.v_max - vax.v0
    v_start = vax.v0 + span_v * rng.uniform(0.04, 0.08)
    v_end = vax.v0 + span_v * rng.uniform(0.45, 0.55)
    power = rng.uniform(0.75, 1.0)
    u = ((times - times[0]) / (times[-1] - times[0])) ** power
    vels = v_start + (v_end - v_start) * u
    return times, vels


def _lateral_offsets(cfg: SyntheticSurveyConfig) -> dict[SurveyIndex, float]:
    """Smooth field ``g`` with ``|g(a) - g(b)| <= 0.9`` for grid neighbours."""
    rng = _rng(cfg.rng_seed, 1)
    w1, w2 = rng.uniform(0.25, 0.5, 2)
    p1, p2 = rng.uniform(0, 2 * math.pi, 2)
    amp = 1.8 / max(w1, w2)
    return {
        loc: amp * 0.5 * (math.sin(w1 * loc.line + p1) + math.sin(w2 * loc.cdp + p2))
        for loc in cfg.locations
    }


def make_velocity_field(cfg: SyntheticSurveyConfig) -> dict[SurveyIndex, VelocityFunction]:
    """True stack-velocity curve for every location.

    All locations share pick times. Velocities are a common increasing curve
    plus a laterally smooth shift whose step between grid neighbours never
    exceeds ``lateral_drift``; the shift grows from half to full size with time.
    """
    times, base = _base_curve(cfg)
    ramp = 0.5 + 0.5 * (times - times[0]) / (times[-1] - times[0])
    field_ = {}
    for loc, g in _lateral_offsets(cfg).items():
        v = base + cfg.lateral_drift * g * ramp
        v = np.clip(v, cfg.vaxis.v0, cfg.vaxis.v_max)
        field_[loc] = VelocityFunction(tuple(times), tuple(np.round(v, 6)))
    return field_


def noise_count(n_real: int, snr: float) -> int:
    if math.isinf(snr):
        return 0
    return int(math.floor(n_real / snr + 0.5))


def add_noise_points(
    truth: dict[SurveyIndex, VelocityFunction],
    snr: float,
    bounds: tuple[TimeAxis, VelocityAxis],
    rng_seed: int,
    sigma: float = 400.0,
) -> dict[SurveyIndex, list[tuple[float, float]]]:
    """Spurious (t, v) events around each true curve.

    Each location gets ``round(#real / snr)`` events with uniform times and
    velocities drawn from a Gaussian of width ``sigma`` around the true curve,
    clipped to the velocity axis.
    """
    if not snr > 0:
        raise ValueError("snr must be positive")
    taxis, vaxis = bounds
    out = {}
    for loc in sorted(truth):
        f = truth[loc]
        count = noise_count(len(f), snr)
        rng = _rng(rng_seed, 2, loc.line, loc.cdp)
        t = rng.uniform(taxis.t0, taxis.t_max, count)
        v = eval_velocity(f, t) + rng.normal(0.0, sigma, count) if count else np.empty(0)
        v = np.clip(v, vaxis.v0, vaxis.v_max)
        order = np.argsort(t, kind="stable")
        out[loc] = [(float(t[i]), float(v[i])) for i in order]
    return out


def ricker(tau_ms: np.ndarray, freq: float) -> np.ndarray:
    a = (math.pi * freq * tau_ms / 1000.0) ** 2
    return (1.0 - 2.0 * a) * np.exp(-a)


def synthesize_gather(
    truth: VelocityFunction | None,
    noise: Sequence[tuple[float, float]],
    offsets: Sequence[float],
    taxis: TimeAxis,
    wavelet_freq: float = 30.0,
    location: SurveyIndex = SurveyIndex(0, 0),
    noise_amplitude: float = 0.5,
    amplitude_decay: float = 0.0,
    ambient_noise: float = 0.0,
    rng_seed: int = 0,
) -> CmpGather:
    """Sum of Ricker events along hyperbolic moveout curves.

    Real picks are unit-amplitude events, spurious points get
    ``noise_amplitude``. The optional decay and ambient noise are described
    on :class:`SyntheticSurveyConfig`; the noise stream is seeded from
    ``rng_seed`` and the location.
    """
    offsets = np.asarray(offsets, dtype=np.float64)
    times = taxis.times
    traces = np.zeros((taxis.n, len(offsets)))
    events = []
    if truth is not None:
        events += [(t, v, REAL_AMPLITUDE) for t, v in truth.picks]
    events += [(t, v, noise_amplitude) for t, v in noise]
    for t0, v, amp in events:
        if not taxis.t0 <= t0 <= taxis.t_max:
            raise EventOutOfRange(f"event apex {t0} ms outside [{taxis.t0}, {taxis.t_max}]")
        tx = np.sqrt(t0 * t0 + (1000.0 * offsets / v) ** 2)
        if amplitude_decay:
            amp = amp * math.exp(-amplitude_decay * t0 / 1000.0)
        traces += amp * ricker(times[:, None] - tx[None, :], wavelet_freq)
    if ambient_noise > 0:
        rng = _rng(rng_seed, 3, location.line, location.cdp)
        traces += rng.normal(0.0, ambient_noise, traces.shape)
    return CmpGather(taxis, offsets, traces, location)


def build_survey(cfg: SyntheticSurveyConfig) -> SyntheticSurvey:
    truth = make_velocity_field(cfg)
    noise = add_noise_points(truth, cfg.snr, (cfg.taxis, cfg.vaxis), cfg.rng_seed, cfg.noise_sigma)
    gathers = {
        loc: synthesize_gather(
            truth[loc], noise[loc], cfg.offsets, cfg.taxis, cfg.wavelet_freq, loc,
            cfg.noise_amplitude, cfg.amplitude_decay, cfg.ambient_noise, cfg.rng_seed,
        )
        for loc in sorted(truth)
    }
    return SyntheticSurvey(cfg, gathers, dict(sorted(truth.items())), noise)
