"""Locally weighted linear regression of velocity on time.

``alwlr_predict`` multiplies the Gaussian time kernel by ``c ** lambda`` so
that high-coherence points dominate each local fit; with ``lambda = 0`` it is
plain LWLR.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import UelError, VelocityFunction, WeightedPoint, points_to_array

WEIGHT_FLOOR = 1e-12
RIDGE_EPS = 1e-8


class SingularNormalMatrix(UelError):
    """All regression weight sits on a single time value."""


@dataclass(frozen=True)
class AlwlrConfig:
    """ALWLR settings.

    ``h`` enters the kernel as ``exp(-(t - t0)**2 / (2 h))`` so it is a
    variance in ms**2; the default is a 150 ms kernel standard deviation.
    """

    h: float = 150.0**2
    lam: float = 5.0
    eval_times: tuple[float, ...] = field(default=())
    ridge: bool = True

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")
        object.__setattr__(self, "eval_times", tuple(float(t) for t in self.eval_times))


def alwlr_values(tvc: np.ndarray, eval_times, h: float, lam: float, ridge: bool = True) -> np.ndarray:
    """Predicted velocities at ``eval_times`` from ``(P, 3)`` rows of ``t, v, c``.

    Each local fit is solved in coordinates centred on the weighted mean time,
    which is the same least-squares solution as the raw normal equations but
    well conditioned. With ``ridge`` a degenerate fit gets ``1e-8 * trace``
    added to the slope term instead of raising.
    """
    tvc = np.asarray(tvc, dtype=np.float64)
    t, v, c = tvc[:, 0], tvc[:, 1], tvc[:, 2]
    if len(t) < 2 or len(np.unique(t)) < 2:
        raise ValueError("ALWLR needs at least two points with distinct times")
    if np.any(c < 0) or not np.any(c > 0):
        raise ValueError("coherences must be nonnegative with at least one positive")
    te = np.atleast_1d(np.asarray(eval_times, dtype=np.float64))

    logw = -((t[None, :] - te[:, None]) ** 2) / (2.0 * h)
    if lam > 0:
        with np.errstate(divide="ignore"):
            logw = logw + lam * np.log(c)[None, :]
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    w[w < WEIGHT_FLOOR] = 0.0

    s0 = w.sum(axis=1)
    tbar = (w @ t) / s0
    vbar = (w @ v) / s0
    dt = t[None, :] - tbar[:, None]
    s2 = (w * dt * dt).sum(axis=1)
    t1 = (w * dt * (v[None, :] - vbar[:, None])).sum(axis=1)

    degenerate = s2 <= 1e-12 * s0 * (1.0 + tbar**2)
    if np.any(degenerate):
        if not ridge:
            bad = te[np.flatnonzero(degenerate)[0]]
            raise SingularNormalMatrix(f"normal matrix is singular at t = {bad:g} ms")
        s2 = np.where(degenerate, s2 + RIDGE_EPS * (s0 + s2), s2)
    slope = t1 / s2
    return vbar + slope * (te - tbar)


def alwlr_predict(points: Sequence[WeightedPoint], cfg: AlwlrConfig) -> VelocityFunction:
    values = alwlr_values(points_to_array(points), cfg.eval_times, cfg.h, cfg.lam, cfg.ridge)
    return VelocityFunction(cfg.eval_times, tuple(values))


def lwlr_predict(points: Sequence[WeightedPoint], cfg: AlwlrConfig) -> VelocityFunction:
    """Plain LWLR: ``alwlr_predict`` with the coherence exponent forced to 0."""
    values = alwlr_values(points_to_array(points), cfg.eval_times, cfg.h, 0.0, cfg.ridge)
    return VelocityFunction(cfg.eval_times, tuple(values))
