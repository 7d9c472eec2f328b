"""Survey-wide drivers: spectra for every gather and picks for every location.

Per-location work can be spread over a process pool; results are always
collected into maps ordered by location, so the output does not depend on
the number of workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .ensemble import UelConfig, cluster_only_pick, select_near, uel_pick_detailed
from .model import CmpGather, SpectrumGrid, SurveyIndex, UelError, VelocityFunction
from .spectrum import SemblanceConfig, semblance_spectrum

log = logging.getLogger(__name__)

METHODS = ("uel", "kmeans", "dbscan")


@dataclass
class PickRun:
    method: str
    curves: dict[SurveyIndex, VelocityFunction] = field(default_factory=dict)
    errors: dict[SurveyIndex, str] = field(default_factory=dict)
    seeds: tuple[SurveyIndex, ...] = ()


def _map(fn: Callable, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _spectrum_task(args):
    gather, cfg = args
    return semblance_spectrum(gather, cfg)


def compute_spectra(gathers: Mapping[SurveyIndex, CmpGather], cfg: SemblanceConfig,
                    workers: int = 1) -> dict[SurveyIndex, SpectrumGrid]:
    locs = sorted(gathers)
    spectra = _map(_spectrum_task, [(gathers[l], cfg) for l in locs], workers)
    return dict(zip(locs, spectra))


def _pick_task(args):
    method, spectrum, near, seeds, cfg, baseline = args
    try:
        if method == "uel":
            return uel_pick_detailed(spectrum, near, seeds, cfg).curve, None
        return cluster_only_pick(spectrum, method, cfg, **baseline), None
    except (UelError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def pick_survey(
    spectra: Mapping[SurveyIndex, SpectrumGrid],
    seeds: Mapping[SurveyIndex, VelocityFunction] | None,
    cfg: UelConfig = UelConfig(),
    method: str = "uel",
    workers: int = 1,
    baseline: dict | None = None,
) -> PickRun:
    """Pick every location of a survey.

    Failures are recorded per location in ``PickRun.errors`` rather than
    raised.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    locs = sorted(spectra)
    radius = cfg.ensemble.neighbor_radius
    seeds = dict(seeds or {})
    tasks = []
    for loc in locs:
        near = [spectra[n] for n in select_near(loc, locs, radius)] if method == "uel" else []
        tasks.append((method, spectra[loc], near, seeds, cfg, baseline or {}))
    run = PickRun(method=method, seeds=tuple(sorted(seeds)))
    for loc, (curve, err) in zip(locs, _map(_pick_task, tasks, workers)):
        if curve is None:
            log.warning("picking failed at %s: %s", loc, err)
            run.errors[loc] = err
        else:
            run.curves[loc] = curve
    return run
