"""Scale-space clustering of spectrum points, plus two baseline clusterers.

Points live in raw (t [ms], v [m/s]) coordinates; no standardisation is
applied, so the distance thresholds are in those mixed units.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .model import UelError, WeightedPoint, points_to_array

MAX_SHIFTS = 500
MAX_SCALES = 5000


class ZeroTotalWeight(UelError):
    """Every attention-weighted kernel value vanished for some center."""


@dataclass(frozen=True)
class AssfConfig:
    sigma0: float = 50.0
    growth: float = 1.029
    alpha: float = 1.0
    k_min: int = 12
    t_merge: float = 150.0
    t_conv: float = 30.0

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not self.growth > 1:
            raise ValueError("growth must exceed 1")
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")
        if self.k_min < 1:
            raise ValueError("k_min must be >= 1")
        if not (self.t_merge > 0 and self.t_conv > 0):
            raise ValueError("t_merge and t_conv must be positive")


@dataclass
class ScaleTrace:
    """Centers after merging at every scanned scale, and count lifetimes.

    ``lifetimes[k]`` is the longest run of consecutive scales over which the
    center count stayed at ``k``.
    """

    sigmas: list[float] = field(default_factory=list)
    centers: list[np.ndarray] = field(default_factory=list)
    selected: int = -1

    @property
    def counts(self) -> list[int]:
        return [len(c) for c in self.centers]

    @property
    def lifetimes(self) -> dict[int, int]:
        return {k: run for k, _, run in _runs(self.counts)}


def _runs(counts):
    """(count, start, length) of the longest run of each distinct count."""
    best = {}
    i = 0
    while i < len(counts):
        j = i
        while j + 1 < len(counts) and counts[j + 1] == counts[i]:
            j += 1
        k, length = counts[i], j - i + 1
        if k not in best or length > best[k][1]:
            best[k] = (i, length)
        i = j + 1
    return [(k, s, n) for k, (s, n) in best.items()]


def attention_weights(c: np.ndarray, alpha: float) -> np.ndarray:
    if alpha == 0:
        return np.ones_like(c)
    return np.power(c, alpha)


def assf_iterate(
    points: Sequence[WeightedPoint] | np.ndarray,
    centers: np.ndarray,
    sigma: float,
    alpha: float,
    t_conv: float,
) -> np.ndarray:
    """Shift ``centers`` with the attention-weighted scale-space update.

    All centers move synchronously from the previous center set. Iteration
    stops as soon as the smallest squared displacement of any center drops to
    ``t_conv`` or below.

    Parameters
    ----------
    points : sequence of WeightedPoint or (P, 3) array
    centers : (Q, 2) array of (t, v)
    sigma : float
        Kernel scale in the same mixed units as the points.

    Returns
    -------
    (Q, 2) array of shifted centers.
    """
    tvc = points if isinstance(points, np.ndarray) else points_to_array(points)
    xy = np.ascontiguousarray(tvc[:, :2], dtype=np.float64)
    w = attention_weights(tvc[:, 2].astype(np.float64), alpha)
    return _converge(xy, w, np.array(centers, dtype=np.float64), sigma, t_conv)


def _converge(xy, w, centers, sigma, t_conv):
    cur = centers
    for _ in range(MAX_SHIFTS):
        nxt, bad = _kernels.assf_shift(xy, w, cur, float(sigma))
        if bad:
            raise ZeroTotalWeight(f"all weights vanished for a center at sigma = {sigma:g}")
        disp = ((nxt - cur) ** 2).sum(axis=1).min()
        cur = nxt
        if not disp > t_conv:
            break
    return cur


def merge_centers(centers: np.ndarray, masses: np.ndarray, t_merge: float):
    """Closest-pair-first merging until no two centers are within ``t_merge``.

    Returns the surviving centers sorted by (t, v) and their accumulated masses.
    """
    pts, mass = _kernels.merge(
        np.ascontiguousarray(centers, dtype=np.float64),
        np.ascontiguousarray(masses, dtype=np.float64),
        float(t_merge),
    )
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return pts[order], mass[order]


def assf_cluster(points: Sequence[WeightedPoint] | np.ndarray, cfg: AssfConfig = AssfConfig()):
    """Cluster points by scanning the scale upward; keep the longest-lived count.

    Every point starts as a center. At each scale the centers are converged,
    merged, and recorded, then the scale grows by ``cfg.growth``. Scanning
    stops once at most ``cfg.k_min`` centers remain. Only counts of at least
    ``k_min`` compete for the longest lifetime unless none were recorded;
    ties prefer the larger count.

    Returns
    -------
    centers : list of WeightedPoint
        ``c`` holds the summed coherence of the merged members.
    trace : ScaleTrace
    """
    tvc = points if isinstance(points, np.ndarray) else points_to_array(points)
    if len(tvc) == 0:
        raise ValueError("cannot cluster an empty point set")
    tvc = tvc[np.lexsort((tvc[:, 1], tvc[:, 0]))]
    xy = np.ascontiguousarray(tvc[:, :2], dtype=np.float64)
    c = tvc[:, 2].astype(np.float64)
    w = attention_weights(c, cfg.alpha)

    trace = ScaleTrace()
    centers, masses = xy.copy(), c.copy()
    all_masses = []
    sigma = cfg.sigma0
    for _ in range(MAX_SCALES):
        if len(centers) <= cfg.k_min:
            break
        centers = _converge(xy, w, centers, sigma, cfg.t_conv)
        centers, masses = merge_centers(centers, masses, cfg.t_merge)
        trace.sigmas.append(sigma)
        trace.centers.append(centers)
        all_masses.append(masses)
        sigma *= cfg.growth

    if not trace.centers:
        trace.sigmas.append(cfg.sigma0)
        trace.centers.append(centers)
        all_masses.append(masses)

    runs = _runs(trace.counts)
    eligible = [r for r in runs if r[0] >= cfg.k_min] or runs
    _, start, _ = max(eligible, key=lambda r: (r[2], r[0]))
    trace.selected = start
    sel, mass = trace.centers[start], all_masses[start]
    return [WeightedPoint(float(t), float(v), float(m)) for (t, v), m in zip(sel, mass)], trace


def kmeans_pick(points: Sequence[WeightedPoint] | np.ndarray, k: int = 15, seed: int = 0,
                max_iter: int = 300) -> list[WeightedPoint]:
    """Lloyd's K-means on (t, v) with k-means++ seeding from a fixed seed."""
    tvc = points if isinstance(points, np.ndarray) else points_to_array(points)
    xy = tvc[:, :2].astype(np.float64)
    n = len(xy)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centers = np.empty((k, 2))
    centers[0] = xy[rng.integers(n)]
    d2 = ((xy - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            j = rng.choice(n, p=d2 / total)
        else:
            j = rng.integers(n)
        centers[i] = xy[j]
        d2 = np.minimum(d2, ((xy - centers[i]) ** 2).sum(axis=1))

    labels = np.full(n, -1)
    for _ in range(max_iter):
        dist = ((xy[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = dist.argmin(axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        for i in range(k):
            members = xy[labels == i]
            if len(members):
                centers[i] = members.mean(axis=0)
    order = np.lexsort((centers[:, 1], centers[:, 0]))
    counts = np.bincount(labels, minlength=k)
    return [WeightedPoint(float(t), float(v), float(counts[i])) for i, (t, v) in
            zip(order, centers[order])]


def dbscan_labels(xy: np.ndarray, eps: float, min_samples: int) -> np.ndarray:
    """Cluster labels (``-1`` for noise); a point's neighborhood includes itself."""
    if not eps > 0 or min_samples < 1:
        raise ValueError("eps must be positive and min_samples >= 1")
    tree = cKDTree(xy)
    hoods = tree.query_ball_point(xy, r=eps)
    core = np.array([len(h) >= min_samples for h in hoods])
    labels = np.full(len(xy), -1)
    cluster = 0
    for i in range(len(xy)):
        if labels[i] != -1 or not core[i]:
            continue
        labels[i] = cluster
        stack = [i]
        while stack:
            p = stack.pop()
            if not core[p]:
                continue
            for q in hoods[p]:
                if labels[q] == -1:
                    labels[q] = cluster
                    stack.append(q)
        cluster += 1
    return labels


def dbscan_pick(points: Sequence[WeightedPoint] | np.ndarray, eps: float = 50.0,
                min_samples: int = 3) -> list[WeightedPoint]:
    """DBSCAN on (t, v); one coherence-weighted centroid per cluster, noise dropped."""
    tvc = points if isinstance(points, np.ndarray) else points_to_array(points)
    if len(tvc) == 0:
        return []
    labels = dbscan_labels(tvc[:, :2].astype(np.float64), eps, min_samples)
    out = []
    for lab in range(labels.max() + 1):
        m = tvc[labels == lab]
        w = m[:, 2] if m[:, 2].sum() > 0 else np.ones(len(m))
        t, v = (w[:, None] * m[:, :2]).sum(axis=0) / w.sum()
        out.append(WeightedPoint(float(t), float(v), float(m[:, 2].sum())))
    return sorted(out, key=lambda p: (p.t, p.v))

