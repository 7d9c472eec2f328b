"""Semblance velocity spectra and the image operations applied to them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from . import _kernels
from .model import AxisMismatch, CmpGather, SpectrumGrid, VelocityAxis, WeightedPoint


@dataclass(frozen=True)
class SemblanceConfig:
    """Scan setup.

    Parameters
    ----------
    M : int
        Half-width of the semblance summation window, in time samples.
    velocities : VelocityAxis
        Constant NMO velocities to scan.
    """

    M: int
    velocities: VelocityAxis

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")


@dataclass(frozen=True)
class GainConfig:
    L: int = 62
    rescale: bool = True

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")


def semblance_spectrum(g: CmpGather, cfg: SemblanceConfig) -> SpectrumGrid:
    """Semblance of ``g`` over every (time sample, scan velocity) cell.

    Each column is the coherence of the gather after a constant-velocity NMO
    correction. Moved-out samples are read by linear interpolation; samples
    that map outside the trace contribute zero. Near the ends of the trace the
    summation window shrinks symmetrically. A window with no energy has zero
    coherence.
    """
    n = g.taxis.n
    if 2 * cfg.M + 1 > n:
        raise ValueError(f"window 2M+1={2 * cfg.M + 1} exceeds trace length {n}")
    values = _kernels.semblance(
        g.traces,
        float(g.taxis.t0),
        float(g.taxis.dt),
        g.offsets,
        cfg.velocities.velocities,
        int(cfg.M),
    )
    return SpectrumGrid(g.taxis, cfg.velocities, values, g.location)


def ln_gain(s: SpectrumGrid, cfg: GainConfig = GainConfig()) -> SpectrumGrid:
    """Local-normalisation gain along time, column by column.

    Every value is divided by the mean of its column over the window
    ``[i - L, i + L]`` clipped to the trace. With ``rescale`` the result is
    then divided by its global maximum so it lies in [0, 1].
    """
    c = s.values
    n = c.shape[0]
    if 2 * cfg.L + 1 > n:
        raise ValueError(f"gain window 2L+1={2 * cfg.L + 1} exceeds {n} time samples")
    # direct window sums: prefix-sum differences lose small values next to large ones
    padded = np.pad(c, ((cfg.L, cfg.L), (0, 0)))
    window_sum = sliding_window_view(padded, 2 * cfg.L + 1, axis=0).sum(axis=-1)
    idx = np.arange(n)
    count = (np.minimum(idx + cfg.L, n - 1) - np.maximum(idx - cfg.L, 0) + 1)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(window_sum > 0, c * count / window_sum, 0.0)
    if cfg.rescale:
        peak = out.max()
        if peak > 0:
            out = out / peak
    return s.with_values(out)


def average_blur(s: SpectrumGrid, w: int = 5) -> SpectrumGrid:
    """Mean filter with a ``w x w`` box and edge replication."""
    if w < 3 or w % 2 == 0:
        raise ValueError(f"blur width must be odd and >= 3, got {w}")
    out = ndimage.uniform_filter(s.values, size=w, mode="nearest")
    # running sums leave round-off residue of either sign next to exact zeros
    return s.with_values(np.maximum(out, 0.0))


def stack_maps(maps: Sequence[SpectrumGrid]) -> SpectrumGrid:
    """Elementwise mean of spectra sharing the same axes.

    The location of the first map is kept.
    """
    if len(maps) == 0:
        raise ValueError("need at least one map to stack")
    first = maps[0]
    for other in maps[1:]:
        if not first.same_axes(other):
            raise AxisMismatch("spectra to stack do not share axes")
    # sort before summing so the result does not depend on argument order
    stacked = np.sort(np.stack([m.values for m in maps]), axis=0).sum(axis=0) / len(maps)
    return first.with_values(stacked)


def threshold_points(s: SpectrumGrid, tau: float) -> list[WeightedPoint]:
    """All cells with coherence strictly above ``tau``, ordered by (t, v)."""
    return [WeightedPoint(*row) for row in threshold_array(s, tau)]


def threshold_array(s: SpectrumGrid, tau: float) -> np.ndarray:
    """Array form of :func:`threshold_points`: ``(P, 3)`` rows of ``t, v, c``."""
    it, iv = np.nonzero(s.values > tau)
    t = s.taxis.t0 + it * s.taxis.dt
    v = s.vaxis.v0 + iv * s.vaxis.dv
    return np.column_stack([t, v, s.values[it, iv]]).astype(np.float64)
