"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` loop version and a vectorised
numpy version. The numba path is used unless numba is missing or the
environment variable ``UELPICK_DISABLE_JIT`` is set to a non-empty value other
than ``0``. Both paths are importable directly (``*_jit`` / ``*_numpy``) so
tests and benchmarks can compare them.
"""

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

JIT_DISABLED = os.environ.get("UELPICK_DISABLE_JIT", "") not in ("", "0")
USE_JIT = HAS_NUMBA and not JIT_DISABLED


# ---------------------------------------------------------------- semblance


def semblance_numpy(traces, t0, dt, offsets, velocities, half_window):
    n, ntr = traces.shape
    times = t0 + np.arange(n) * dt
    cols = np.arange(ntr)
    out = np.zeros((n, len(velocities)))
    for j, v in enumerate(velocities):
        tx = np.sqrt(times[:, None] ** 2 + (1000.0 * offsets[None, :] / v) ** 2)
        f = (tx - t0) / dt
        inside = (f >= 0) & (f <= n - 1)
        i0 = np.clip(np.floor(f).astype(np.int64), 0, n - 2)
        w = np.clip(f - i0, 0.0, 1.0)
        a = (1 - w) * traces[i0, cols] + w * traces[i0 + 1, cols]
        a = np.where(inside, a, 0.0)
        num = a.sum(axis=1) ** 2
        den = (a * a).sum(axis=1)
        cnum = np.concatenate(([0.0], np.cumsum(num)))
        cden = np.concatenate(([0.0], np.cumsum(den)))
        idx = np.arange(n)
        hw = np.minimum(np.minimum(idx, n - 1 - idx), half_window)
        snum = cnum[idx + hw + 1] - cnum[idx - hw]
        sden = cden[idx + hw + 1] - cden[idx - hw]
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(sden > 0, snum / (ntr * sden), 0.0)
        out[:, j] = np.clip(s, 0.0, 1.0)
    return out


def _semblance_loops(traces, t0, dt, offsets, velocities, half_window):
    n, ntr = traces.shape
    m = velocities.shape[0]
    out = np.zeros((n, m))
    num = np.empty(n)
    den = np.empty(n)
    for j in range(m):
        v = velocities[j]
        for i in range(n):
            t = t0 + i * dt
            s1 = 0.0
            s2 = 0.0
            for k in range(ntr):
                xv = 1000.0 * offsets[k] / v
                f = (np.sqrt(t * t + xv * xv) - t0) / dt
                if f < 0.0 or f > n - 1:
                    continue
                i0 = int(np.floor(f))
                if i0 > n - 2:
                    i0 = n - 2
                w = f - i0
                a = (1.0 - w) * traces[i0, k] + w * traces[i0 + 1, k]
                s1 += a
                s2 += a * a
            num[i] = s1 * s1
            den[i] = s2
        for i in range(n):
            hw = min(half_window, i, n - 1 - i)
            sn = 0.0
            sd = 0.0
            for q in range(i - hw, i + hw + 1):
                sn += num[q]
                sd += den[q]
            if sd > 0.0:
                s = sn / (ntr * sd)
                out[i, j] = min(max(s, 0.0), 1.0)
    return out


# ---------------------------------------------------------------------- NMO


def nmo_numpy(traces, t0, dt, offsets, vel, stretch_limit):
    n, ntr = traces.shape
    times = t0 + np.arange(n) * dt
    cols = np.arange(ntr)
    xv = 1000.0 * offsets[None, :] / vel[:, None]
    tx = np.sqrt(times[:, None] ** 2 + xv**2)
    with np.errstate(invalid="ignore", divide="ignore"):
        stretch = np.where(tx == times[:, None], 0.0, tx / times[:, None] - 1.0)
    f = (tx - t0) / dt
    inside = (f >= 0) & (f <= n - 1)
    i0 = np.clip(np.floor(f).astype(np.int64), 0, n - 2)
    w = np.clip(f - i0, 0.0, 1.0)
    a = (1 - w) * traces[i0, cols] + w * traces[i0 + 1, cols]
    live = inside & (stretch <= stretch_limit)
    return np.where(live, a, 0.0), live


def _nmo_loops(traces, t0, dt, offsets, vel, stretch_limit):
    n, ntr = traces.shape
    out = np.zeros((n, ntr))
    live = np.zeros((n, ntr), dtype=np.bool_)
    for i in range(n):
        t = t0 + i * dt
        for k in range(ntr):
            xv = 1000.0 * offsets[k] / vel[i]
            tx = np.sqrt(t * t + xv * xv)
            if tx == t:
                stretch = 0.0
            elif t == 0.0:
                continue
            else:
                stretch = tx / t - 1.0
            if stretch > stretch_limit:
                continue
            f = (tx - t0) / dt
            if f < 0.0 or f > n - 1:
                continue
            i0 = int(np.floor(f))
            if i0 > n - 2:
                i0 = n - 2
            w = f - i0
            out[i, k] = (1.0 - w) * traces[i0, k] + w * traces[i0 + 1, k]
            live[i, k] = True
    return out, live


# ------------------------------------------------------- scale-space shift
# Returns the shifted centers and a flag that is True when some center had
# zero total weight (caller raises).


def assf_shift_numpy(xy, weights, centers, sigma, chunk=256):
    out = np.empty_like(centers)
    for lo in range(0, len(centers), chunk):
        c = centers[lo : lo + chunk]
        d2 = ((c[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
        d2 -= d2.min(axis=1, keepdims=True)
        k = np.exp(-d2 / (2.0 * sigma * sigma)) * weights[None, :]
        tot = k.sum(axis=1)
        if np.any(~(tot > 0)):
            return centers.copy(), True
        out[lo : lo + chunk] = (k @ xy) / tot[:, None]
    return out, False


def _assf_shift_loops(xy, weights, centers, sigma):
    q = centers.shape[0]
    p = xy.shape[0]
    out = np.empty_like(centers)
    d2 = np.empty(p)
    inv = 1.0 / (2.0 * sigma * sigma)
    bad = False
    for j in range(q):
        cx = centers[j, 0]
        cy = centers[j, 1]
        dmin = np.inf
        for i in range(p):
            a = cx - xy[i, 0]
            b = cy - xy[i, 1]
            d2[i] = a * a + b * b
            if d2[i] < dmin:
                dmin = d2[i]
        sw = 0.0
        sx = 0.0
        sy = 0.0
        for i in range(p):
            w = weights[i] * np.exp(-(d2[i] - dmin) * inv)
            sw += w
            sx += w * xy[i, 0]
            sy += w * xy[i, 1]
        if sw > 0.0:
            out[j, 0] = sx / sw
            out[j, 1] = sy / sw
        else:
            out[j, 0] = cx
            out[j, 1] = cy
            bad = True
    return out, bad


# ---------------------------------------------------- closest-pair merging
# Repeatedly merges the globally closest pair of centers whose distance is
# below the threshold into their mass-weighted midpoint. Ties resolve to the
# lowest (i, j) index pair, so the result depends only on the input order,
# which callers keep canonical.


def merge_numpy(centers, masses, threshold):
    pts = centers.copy()
    mass = masses.copy()
    q = len(pts)
    active = np.ones(q, dtype=bool)
    thr2 = threshold * threshold

    def row(i):
        d = ((pts - pts[i]) ** 2).sum(axis=1)
        d[~active] = np.inf
        d[i] = np.inf
        j = int(np.argmin(d))
        return d[j], j

    nn_d = np.full(q, np.inf)
    nn_j = np.full(q, -1)
    for i in range(q):
        nn_d[i], nn_j[i] = row(i)
    while active.sum() > 1:
        cand = np.flatnonzero(active)
        lo = np.minimum(cand, nn_j[cand])
        hi = np.maximum(cand, nn_j[cand])
        order = np.lexsort((hi, lo, nn_d[cand]))
        k = order[0]
        if not nn_d[cand[k]] < thr2:
            break
        i, j = int(lo[k]), int(hi[k])
        tot = mass[i] + mass[j]
        if tot > 0:
            pts[i] = (mass[i] * pts[i] + mass[j] * pts[j]) / tot
        else:
            pts[i] = 0.5 * (pts[i] + pts[j])
        mass[i] = tot
        active[j] = False
        nn_d[j], nn_j[j] = np.inf, -1
        d_new = ((pts - pts[i]) ** 2).sum(axis=1)
        for r in np.flatnonzero(active):
            if r == i or nn_j[r] == i or nn_j[r] == j:
                nn_d[r], nn_j[r] = row(r)
            elif d_new[r] < nn_d[r] or (d_new[r] == nn_d[r] and i < nn_j[r]):
                nn_d[r], nn_j[r] = d_new[r], i
    return pts[active], mass[active]


def _nearest(pts, active, i):
    best = np.inf
    arg = -1
    for j in range(pts.shape[0]):
        if j == i or not active[j]:
            continue
        a = pts[i, 0] - pts[j, 0]
        b = pts[i, 1] - pts[j, 1]
        d = a * a + b * b
        if d < best:
            best = d
            arg = j
    return best, arg


def _merge_loops(centers, masses, threshold):
    q = centers.shape[0]
    pts = centers.copy()
    mass = masses.copy()
    active = np.ones(q, dtype=np.bool_)
    nn_d = np.full(q, np.inf)
    nn_j = np.full(q, -1, dtype=np.int64)
    for i in range(q):
        nn_d[i], nn_j[i] = _nearest(pts, active, i)
    thr2 = threshold * threshold
    while True:
        # global closest pair, lowest (i, j) on ties
        best = np.inf
        bi = -1
        bj = -1
        for i in range(q):
            if not active[i]:
                continue
            j = nn_j[i]
            if j < 0:
                continue
            a, b = (i, j) if i < j else (j, i)
            d = nn_d[i]
            if d < best or (d == best and (a < bi or (a == bi and b < bj))):
                best = d
                bi = a
                bj = b
        if bi < 0 or not best < thr2:
            break
        tot = mass[bi] + mass[bj]
        if tot > 0:
            pts[bi, 0] = (mass[bi] * pts[bi, 0] + mass[bj] * pts[bj, 0]) / tot
            pts[bi, 1] = (mass[bi] * pts[bi, 1] + mass[bj] * pts[bj, 1]) / tot
        else:
            pts[bi, 0] = 0.5 * (pts[bi, 0] + pts[bj, 0])
            pts[bi, 1] = 0.5 * (pts[bi, 1] + pts[bj, 1])
        mass[bi] = tot
        active[bj] = False
        nn_d[bj] = np.inf
        nn_j[bj] = -1
        for i in range(q):
            if not active[i]:
                continue
            if i == bi or nn_j[i] == bi or nn_j[i] == bj:
                nn_d[i], nn_j[i] = _nearest(pts, active, i)
            else:
                a = pts[i, 0] - pts[bi, 0]
                b = pts[i, 1] - pts[bi, 1]
                d = a * a + b * b
                if d < nn_d[i] or (d == nn_d[i] and bi < nn_j[i]):
                    nn_d[i] = d
                    nn_j[i] = bi
    keep = np.flatnonzero(active)
    return pts[keep], mass[keep]


if HAS_NUMBA:
    semblance_jit = njit(cache=True)(_semblance_loops)
    nmo_jit = njit(cache=True)(_nmo_loops)
    assf_shift_jit = njit(cache=True)(_assf_shift_loops)
    _nearest = njit(cache=True)(_nearest)
    merge_jit = njit(cache=True)(_merge_loops)
else:  # pragma: no cover
    semblance_jit = _semblance_loops
    nmo_jit = _nmo_loops
    assf_shift_jit = _assf_shift_loops
    merge_jit = _merge_loops

if USE_JIT:
    semblance = semblance_jit
    nmo = nmo_jit
    assf_shift = assf_shift_jit
    merge = merge_jit
else:
    semblance = semblance_numpy
    nmo = nmo_numpy
    assf_shift = assf_shift_numpy
    merge = merge_numpy
