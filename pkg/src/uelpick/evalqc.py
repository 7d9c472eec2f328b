"""Pick-quality metrics, NMO correction and stack sections."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .model import AxisMismatch, CmpGather, TimeAxis, UelError, VelocityFunction, eval_velocity

PICK_GATE = 200.0  # m/s


class EmptyRecognizedSet(UelError):
    """Mean deviation requested over zero recognised points."""


@dataclass(frozen=True)
class MetricReport:
    vmae: float
    vmre: float
    pr: float | None
    md: float | None
    n_locations: int

    def as_dict(self) -> dict:
        return {
            "vmae": self.vmae,
            "vmre": self.vmre,
            "pr": self.pr,
            "md": self.md,
            "n_locations": self.n_locations,
        }


def _curves_on_axis(auto: VelocityFunction, ref: VelocityFunction, taxis: TimeAxis):
    t = taxis.times
    return eval_velocity(auto, t), eval_velocity(ref, t)


def vmae(auto: VelocityFunction, ref: VelocityFunction, taxis: TimeAxis) -> float:
    """Mean absolute velocity error over every sample of ``taxis``."""
    va, vm = _curves_on_axis(auto, ref, taxis)
    return float(np.mean(np.abs(vm - va)))


def vmre(auto: VelocityFunction, ref: VelocityFunction, taxis: TimeAxis) -> float:
    """Mean of ``|ref - auto| / ref`` over ``taxis`` (a fraction, not percent)."""
    va, vm = _curves_on_axis(auto, ref, taxis)
    return float(np.mean(np.abs(vm - va) / vm))


def picking_rate(auto: VelocityFunction, real_points: Sequence[tuple[float, float]],
                 gate: float = PICK_GATE):
    """Fraction of true points the picked curve passes within ``gate`` m/s of.

    Returns
    -------
    pr : float
    recognized : list of (t, v)
        The true points counted as hits, in input order.
    """
    if len(real_points) == 0:
        raise ValueError("picking rate needs at least one real point")
    pts = np.asarray(real_points, dtype=np.float64)
    hit = np.abs(eval_velocity(auto, pts[:, 0]) - pts[:, 1]) < gate
    recognized = [tuple(map(float, p)) for p in pts[hit]]
    return float(hit.mean()), recognized


def mean_deviation(auto: VelocityFunction, recognized: Sequence[tuple[float, float]]) -> float:
    if len(recognized) == 0:
        raise EmptyRecognizedSet("no recognised points to average")
    pts = np.asarray(recognized, dtype=np.float64)
    return float(np.mean(np.abs(eval_velocity(auto, pts[:, 0]) - pts[:, 1])))


def aggregate_metrics(auto: dict, ref: dict, taxis: TimeAxis, exclude=()) -> MetricReport:
    """Pool the four metrics over all locations present in both maps.

    VMAE and VMRE average the per-location values; PR is pooled over every
    true point and MD over every recognised point. Locations in ``exclude``
    are skipped.
    """
    locs = sorted(set(auto) & set(ref) - set(exclude))
    if not locs:
        raise ValueError("no locations to evaluate")
    maes, mres, hits, devs = [], [], 0, []
    total = 0
    for loc in locs:
        maes.append(vmae(auto[loc], ref[loc], taxis))
        mres.append(vmre(auto[loc], ref[loc], taxis))
        pr, rec = picking_rate(auto[loc], ref[loc].picks)
        total += len(ref[loc])
        hits += len(rec)
        if rec:
            pts = np.asarray(rec)
            devs.extend(np.abs(eval_velocity(auto[loc], pts[:, 0]) - pts[:, 1]))
    return MetricReport(
        vmae=float(np.mean(maes)),
        vmre=float(np.mean(mres)),
        pr=hits / total,
        md=float(np.mean(devs)) if devs else None,
        n_locations=len(locs),
    )


def nmo_correct(g: CmpGather, v: VelocityFunction, stretch_limit: float = 0.5) -> CmpGather:
    """Flatten ``g`` with the time-variant velocity ``v``.

    Samples whose stretch ``t(x) / t0 - 1`` exceeds ``stretch_limit`` or that
    read outside the trace are zeroed and marked dead in ``live``.
    """
    vel = np.asarray(eval_velocity(v, g.taxis.times), dtype=np.float64)
    out, live = _kernels.nmo(
        g.traces, float(g.taxis.t0), float(g.taxis.dt), g.offsets, vel, float(stretch_limit)
    )
    return CmpGather(g.taxis, g.offsets, out, g.location, live)


def stack_section(gathers: Sequence[CmpGather]) -> np.ndarray:
    """Mean of live samples per time, one column per gather, in input order."""
    if not gathers:
        raise ValueError("no gathers to stack")
    taxis = gathers[0].taxis
    cols = []
    for g in gathers:
        if g.taxis != taxis:
            raise AxisMismatch("gathers in a section must share a time axis")
        live = g.live if g.live is not None else np.ones(g.traces.shape, dtype=bool)
        count = live.sum(axis=1)
        total = np.where(live, g.traces, 0.0).sum(axis=1)
        cols.append(np.where(count > 0, total / np.maximum(count, 1), 0.0))
    return np.column_stack(cols)
