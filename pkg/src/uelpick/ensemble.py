"""Fusion of the current spectrum, its neighbours and the nearest seed picks.

The picker clusters the gained spectrum into candidate picks, keeps those
inside the band around both reference curves, and removes picks that are too
close in time or imply impossible interval velocities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .cluster import AssfConfig, assf_cluster, dbscan_pick, kmeans_pick
from .model import (
    NonPositiveRadicand,
    SpectrumGrid,
    SurveyIndex,
    UelError,
    VelocityFunction,
    WeightedPoint,
    dix_interval,
)
from .regress import AlwlrConfig, alwlr_values
from .spectrum import GainConfig, average_blur, ln_gain, stack_maps, threshold_array

SeedSet = Mapping[SurveyIndex, VelocityFunction]

FALLBACK_STEP = 200.0  # ms


class EmptyPointSet(UelError):
    """Thresholding left no points to fit."""


class AllPicksRemoved(UelError):
    """The interval constraint removed every candidate."""


@dataclass(frozen=True)
class EnsembleConfig:
    neighbor_radius: int = 2
    w_conf: float = 250.0
    t_min_gap: float = 200.0
    int_v_range: tuple[float, float] = (1000.0, 7000.0)
    seed_stride: int = 5

    def __post_init__(self):
        if self.neighbor_radius < 0 or self.seed_stride < 1:
            raise ValueError("neighbor_radius must be >= 0 and seed_stride >= 1")
        if not (self.w_conf >= 0 and self.t_min_gap > 0):
            raise ValueError("w_conf must be >= 0 and t_min_gap > 0")
        lo, hi = self.int_v_range
        if not 0 < lo < hi:
            raise ValueError("int_v_range must satisfy 0 < low < high")


@dataclass(frozen=True)
class UelConfig:
    """Everything ``uel_pick`` needs. The ``use_*`` switches drive ablations.

    ``tau`` thresholds the gained spectrum being picked; ``near_tau`` thresholds
    the blurred neighbour stack, whose peaks are flattened by the blur.
    """

    gain: GainConfig = GainConfig()
    blur_w: int = 5
    tau: float = 0.4
    near_tau: float = 0.22
    alwlr: AlwlrConfig = AlwlrConfig()
    assf: AssfConfig = AssfConfig()
    ensemble: EnsembleConfig = EnsembleConfig()
    use_gain: bool = True
    use_near: bool = True
    use_seed: bool = True
    use_interval: bool = True

    def ablate(self, part: str) -> "UelConfig":
        """Copy with one of ``gain``, ``near``, ``seed``, ``interval`` switched off."""
        key = f"use_{part}"
        if not hasattr(self, key):
            raise ValueError(f"unknown pipeline part {part!r}")
        return replace(self, **{key: False})


@dataclass
class UelResult:
    curve: VelocityFunction
    candidates: list[WeightedPoint] = field(default_factory=list)
    accepted: list[WeightedPoint] = field(default_factory=list)
    v_rs: VelocityFunction | None = None
    v_rn: VelocityFunction | None = None

    @property
    def low_confidence(self) -> bool:
        return self.curve.low_confidence


def select_near(loc: SurveyIndex, all_locs, radius: int) -> list[SurveyIndex]:
    """Neighbours on the same line within ``radius`` CDPs, or the same CDP within ``radius`` lines."""
    out = [
        other
        for other in all_locs
        if other != loc
        and (
            (other.line == loc.line and abs(other.cdp - loc.cdp) <= radius)
            or (other.cdp == loc.cdp and abs(other.line - loc.line) <= radius)
        )
    ]
    return sorted(out)


def near_reference(
    near_spectra: Sequence[SpectrumGrid],
    gain_cfg: GainConfig,
    blur_w: int,
    tau: float,
    alwlr_cfg: AlwlrConfig = AlwlrConfig(),
    use_gain: bool = True,
) -> VelocityFunction:
    """Reference curve from the neighbours' common low-frequency energy.

    Each neighbour is gained and box-blurred, the maps are averaged, the
    average is thresholded at ``tau`` and ALWLR fits a curve through the
    surviving cells at ``alwlr_cfg.eval_times`` (the spectrum's time samples
    when empty). Predictions are clipped to the velocity axis.
    """
    if not near_spectra:
        raise ValueError("need at least one near spectrum")
    maps = [average_blur(ln_gain(s, gain_cfg) if use_gain else s, blur_w) for s in near_spectra]
    stacked = stack_maps(maps)
    pts = threshold_array(stacked, tau)
    if len(pts) == 0:
        raise EmptyPointSet(f"no stacked cell exceeds tau = {tau}")
    if len(np.unique(pts[:, 0])) < 2:
        raise EmptyPointSet("thresholded cells span a single time sample")
    times = np.asarray(alwlr_cfg.eval_times or stacked.taxis.times, dtype=float)
    v = alwlr_values(pts, times, alwlr_cfg.h, alwlr_cfg.lam, alwlr_cfg.ridge)
    v = np.clip(v, stacked.vaxis.v0, stacked.vaxis.v_max)
    return VelocityFunction(tuple(times), tuple(v))


def seed_locations(all_locs, stride: int) -> list[SurveyIndex]:
    """Regular seed sub-grid: indices congruent to ``stride // 2`` modulo ``stride``."""
    off = stride // 2
    return sorted(l for l in all_locs if l.line % stride == off and l.cdp % stride == off)


def seed_reference(loc: SurveyIndex, seeds: SeedSet) -> VelocityFunction:
    """Curve of the seed closest to ``loc`` on the grid; ties go to the lower (line, cdp)."""
    if not seeds:
        raise ValueError("seed set is empty")
    best = min(seeds, key=lambda s: ((s.line - loc.line) ** 2 + (s.cdp - loc.cdp) ** 2, s.line, s.cdp))
    return seeds[best]


def _deviation(p: WeightedPoint, refs) -> float:
    return max((abs(p.v - r(p.t)) for r in refs), default=0.0)


def confidence_filter(
    candidates: Sequence[WeightedPoint],
    v_rs: VelocityFunction | None,
    v_rn: VelocityFunction | None,
    w_conf: float,
) -> list[WeightedPoint]:
    """Keep candidates strictly within ``w_conf`` m/s of every given reference curve.

    A reference passed as ``None`` imposes no condition.
    """
    refs = [r for r in (v_rs, v_rn) if r is not None]
    if math.isinf(w_conf):
        return list(candidates)
    return [p for p in candidates if all(abs(p.v - r(p.t)) < w_conf for r in refs)]


def _violates(a: WeightedPoint, b: WeightedPoint, cfg: EnsembleConfig) -> bool:
    if b.t - a.t < cfg.t_min_gap:
        return True
    try:
        vint = dix_interval(a.v, a.t, b.v, b.t)
    except NonPositiveRadicand:
        return True
    lo, hi = cfg.int_v_range
    return not lo < vint < hi


def interval_constraint(
    picks: Sequence[WeightedPoint],
    v_rs: VelocityFunction | None,
    v_rn: VelocityFunction | None,
    cfg: EnsembleConfig,
) -> VelocityFunction:
    """Drop picks until neighbours are far enough apart in time and Dix-consistent.

    Scans adjacent pairs in time order; at the first violation it removes
    whichever of the two points deviates more from the references (the later
    one on a tie) and rescans from the start.
    """
    refs = [r for r in (v_rs, v_rn) if r is not None]
    pts = sorted(picks, key=lambda p: (p.t, p.v))
    while True:
        for i in range(len(pts) - 1):
            a, b = pts[i], pts[i + 1]
            if _violates(a, b, cfg):
                drop = i if _deviation(a, refs) > _deviation(b, refs) else i + 1
                del pts[drop]
                break
        else:
            break
    if not pts:
        raise AllPicksRemoved("interval constraint removed every pick")
    return VelocityFunction.from_pairs((p.t, p.v) for p in pts)


def curve_from_points(points: Sequence[WeightedPoint]) -> VelocityFunction:
    """Curve through points in time order; equal times are averaged."""
    if not points:
        raise ValueError("no points")
    arr = np.array(sorted((p.t, p.v) for p in points))
    times, inv = np.unique(arr[:, 0], return_inverse=True)
    vels = np.bincount(inv, weights=arr[:, 1]) / np.bincount(inv)
    return VelocityFunction(tuple(times), tuple(vels))


def fallback_curve(taxis, v_rs, v_rn) -> VelocityFunction:
    """Mean of the available references every 200 ms, flagged low-confidence."""
    refs = [r for r in (v_rs, v_rn) if r is not None]
    if not refs:
        raise UelError("no reference curve available for the fallback")
    times = np.arange(taxis.t0, taxis.t_max + 1e-9, FALLBACK_STEP)
    v = np.mean([r(times) for r in refs], axis=0)
    return VelocityFunction(tuple(times), tuple(v), low_confidence=True)


def uel_pick_detailed(
    spectrum: SpectrumGrid,
    near: Sequence[SpectrumGrid],
    seeds: SeedSet | None,
    cfg: UelConfig = UelConfig(),
) -> UelResult:
    gained = ln_gain(spectrum, cfg.gain) if cfg.use_gain else spectrum
    pts = threshold_array(gained, cfg.tau)
    candidates = assf_cluster(pts, cfg.assf)[0] if len(pts) else []

    v_rn = None
    if cfg.use_near and near:
        try:
            v_rn = near_reference(
                near, cfg.gain, cfg.blur_w, cfg.near_tau, cfg.alwlr, cfg.use_gain
            )
        except EmptyPointSet:
            v_rn = None
    v_rs = seed_reference(spectrum.location, seeds) if cfg.use_seed and seeds else None

    accepted = confidence_filter(candidates, v_rs, v_rn, cfg.ensemble.w_conf)
    result = UelResult(curve=None, candidates=candidates, accepted=accepted, v_rs=v_rs, v_rn=v_rn)
    try:
        if not accepted:
            raise AllPicksRemoved("no candidate inside the confidence area")
        if cfg.use_interval:
            result.curve = interval_constraint(accepted, v_rs, v_rn, cfg.ensemble)
        else:
            result.curve = curve_from_points(accepted)
    except AllPicksRemoved:
        result.curve = fallback_curve(spectrum.taxis, v_rs, v_rn)
    return result


def uel_pick(
    spectrum: SpectrumGrid,
    near: Sequence[SpectrumGrid],
    seeds: SeedSet | None,
    cfg: UelConfig = UelConfig(),
) -> VelocityFunction:
    """Pick the stack-velocity curve of ``spectrum``.

    ``spectrum`` and ``near`` are raw semblance spectra. When no candidate
    survives, the result is the reference fallback with ``low_confidence`` set.
    """
    return uel_pick_detailed(spectrum, near, seeds, cfg).curve


def cluster_only_pick(spectrum: SpectrumGrid, method: str, cfg: UelConfig = UelConfig(),
                      k: int = 15, eps: float = 50.0, min_samples: int = 3,
                      seed: int = 0) -> VelocityFunction:
    """Baseline picker: gain, threshold, cluster, connect the centers."""
    gained = ln_gain(spectrum, cfg.gain) if cfg.use_gain else spectrum
    pts = threshold_array(gained, cfg.tau)
    if len(pts) == 0:
        raise EmptyPointSet("no cell above threshold")
    if method == "kmeans":
        centers = kmeans_pick(pts, min(k, len(pts)), seed=seed)
    elif method == "dbscan":
        centers = dbscan_pick(pts, eps, min_samples)
    else:
        raise ValueError(f"unknown baseline {method!r}")
    if not centers:
        raise EmptyPointSet("clustering found no centers")
    return curve_from_points(centers)
