#!/usr/bin/env python3
"""Time the numba and numpy variants of every hot kernel on survey-sized inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--points 800]

Each kernel is run once untimed (JIT compilation, cache warm-up), then
``--repeat`` times; the best wall time is reported together with the largest
absolute difference between the two outputs.
"""

import argparse
import time

import numpy as np

from uelpick import _kernels as K
from uelpick.model import SurveyIndex
from uelpick.synth import SyntheticSurveyConfig, build_survey


def best_of(fn, args, repeat):
    fn(*args)
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def first(x):
    return x[0] if isinstance(x, tuple) else x


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=800, help="scale-space point count")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not K.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    cfg = SyntheticSurveyConfig(lines=1, cdps=1, snr=1.0, ambient_noise=0.1, rng_seed=args.seed)
    g = build_survey(cfg).gathers[SurveyIndex(0, 0)]
    tr, offs = g.traces, g.offsets
    t0, dt = float(g.taxis.t0), float(g.taxis.dt)
    vels = cfg.vaxis.velocities
    vel_fn = np.linspace(1500.0, 3500.0, g.taxis.n)

    rng = np.random.default_rng(args.seed)
    p = args.points
    xy = np.column_stack([rng.uniform(0, 3000, p), rng.uniform(1300, 5500, p)])
    w = rng.uniform(0.3, 1.0, p)
    centers = xy.copy()
    masses = w.copy()

    cases = [
        ("semblance", K.semblance_jit, K.semblance_numpy, (tr, t0, dt, offs, vels, 2)),
        ("nmo", K.nmo_jit, K.nmo_numpy, (tr, t0, dt, offs, vel_fn, 0.5)),
        ("assf_shift", K.assf_shift_jit, K.assf_shift_numpy, (xy, w, centers, 80.0)),
        ("merge", K.merge_jit, K.merge_numpy, (centers, masses, 150.0)),
    ]
    print(f"active path: {'numba' if K.USE_JIT else 'numpy'}")
    print(f"{'kernel':<12} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8} {'max |diff|':>11}")
    for name, fj, fn, a in cases:
        tj, oj = best_of(fj, a, args.repeat)
        tn, on = best_of(fn, a, args.repeat)
        oj, on = first(oj), first(on)
        diff = float(np.max(np.abs(oj - on))) if oj.shape == on.shape else float("nan")
        print(f"{name:<12} {1e3 * tj:11.2f} {1e3 * tn:11.2f} {tn / tj:8.1f} {diff:11.3g}")


if __name__ == "__main__":
    main()
