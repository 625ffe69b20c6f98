"""Kernel-density mean-shift clustering with grid acceleration.

Locations are clustered in 2-D (latitude, longitude degrees) under plain
Euclidean distance. Times are clustered in 1-D; with the ``day`` or ``week``
mapping they live on a circle, and every displacement, step update, and merge
mean is wrap-aware.

The expensive O(N^2) mode seeking is avoided by binning points into a uniform
grid that stores, per occupied cell, the member count and coordinate sum. Mode
seeking then runs over cell centroids weighted by their counts, with one seed
per occupied cell.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import EmptyDataError

logger = logging.getLogger(__name__)

DAY_SECONDS = 86400.0
WEEK_SECONDS = 604800.0

#: epoch-seconds -> cluster-space mappings; the value is the wrap period
#: (None means the data lives on the real line).
TIME_MAPPINGS: dict[str, float | None] = {
    "absolute": None,
    "day": DAY_SECONDS,
    "week": WEEK_SECONDS,
}


def map_time(seconds, mapping: str) -> np.ndarray:
    """Map epoch seconds into the clustering space of the given mapping."""
    if mapping not in TIME_MAPPINGS:
        raise ValueError(f"unknown time mapping {mapping!r}")
    t = np.asarray(seconds, dtype=float)
    period = TIME_MAPPINGS[mapping]
    return t if period is None else np.mod(t, period)


def mapping_period(mapping: str | None) -> float | None:
    if mapping is None:
        return None
    if mapping not in TIME_MAPPINGS:
        raise ValueError(f"unknown time mapping {mapping!r}")
    return TIME_MAPPINGS[mapping]


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian radial-basis profile; h is the bandwidth in data units."""

    h: float
    d: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("bandwidth h must be positive")
        if self.d not in (1, 2):
            raise ValueError("dimension d must be 1 or 2")


def _as_points(points, d: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError("points must be a 1-D or 2-D array")
    if pts.shape[0] == 0:
        return pts.reshape(0, d)
    if pts.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got {pts.shape[1]}")
    return pts


def _as_point(x, d: int) -> np.ndarray:
    xx = np.asarray(x, dtype=float).reshape(-1)
    if xx.size != d:
        raise ValueError(f"expected a point of dimension {d}, got {xx.size}")
    return xx


def _wrap_delta(delta: np.ndarray, period: float | None) -> np.ndarray:
    """Shortest signed displacement, wrap-aware when a period is set."""
    if period is None:
        return delta
    return np.mod(delta + 0.5 * period, period) - 0.5 * period


def _distances(a: np.ndarray, b: np.ndarray, period: float | None) -> np.ndarray:
    delta = _wrap_delta(a - b, period)
    return np.sqrt(np.einsum("...d,...d->...", delta, delta))


def _dist(a: np.ndarray, b: np.ndarray, period: float | None) -> float:
    return float(_distances(a[None, :], b[None, :], period)[0])


def kernel_eval(u, cfg: KernelConfig) -> float:
    """Gaussian profile exp(-|u|^2 / 2) of an h-scaled displacement."""
    uu = _as_point(u, cfg.d)
    return float(np.exp(-0.5 * float(uu @ uu)))


@dataclass
class Grid:
    """Uniform binning: per occupied cell, the member count and coordinate sum."""

    cell_size: float
    cells: np.ndarray  # (m, d) integer cell indices
    counts: np.ndarray  # (m,) points per cell
    sums: np.ndarray  # (m, d) per-cell coordinate sums
    index: dict[tuple[int, ...], int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {tuple(int(c) for c in cell): i for i, cell in enumerate(self.cells)}
        self._centroids: np.ndarray | None = None

    @property
    def d(self) -> int:
        return self.cells.shape[1]

    @property
    def n_points(self) -> int:
        return int(self.counts.sum())

    @property
    def n_cells(self) -> int:
        return len(self.counts)

    @property
    def centroids(self) -> np.ndarray:
        if self._centroids is None:
            self._centroids = self.sums / self.counts[:, None]
        return self._centroids

    def cell_of(self, point) -> tuple[int, ...]:
        xx = _as_point(point, self.d)
        return tuple(int(i) for i in np.floor(xx / self.cell_size))


def _grid_and_inverse(pts: np.ndarray, cell_size: float) -> tuple[Grid, np.ndarray]:
    idx = np.floor(pts / cell_size).astype(np.int64)
    cells, inverse = np.unique(idx, axis=0, return_inverse=True)
    inverse = np.ravel(inverse)
    counts = np.bincount(inverse, minlength=len(cells)).astype(np.int64)
    sums = np.zeros(cells.shape, dtype=float)
    np.add.at(sums, inverse, pts)
    return Grid(cell_size, cells, counts, sums), inverse


def build_grid(points, cell_size: float, d: int | None = None) -> Grid:
    """Bin points by floor(coordinate / cell_size) per dimension, O(N)."""
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.size == 0:
        dim = d if d is not None else (pts.shape[1] if pts.ndim == 2 and pts.shape[1] else 1)
        return Grid(
            cell_size,
            np.zeros((0, dim), dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            np.zeros((0, dim)),
        )
    grid, _ = _grid_and_inverse(pts, cell_size)
    return grid


def kde(
    x,
    grid: Grid,
    cfg: KernelConfig,
    n: int | None = None,
    period: float | None = None,
) -> float:
    """Grid-accelerated density estimate f(x) = sum of cell-weighted kernels / (n h^d)."""
    total = grid.n_points if n is None else int(n)
    if total <= 0:
        raise EmptyDataError("kde over empty data")
    xx = _as_point(x, cfg.d)
    delta = _wrap_delta(grid.centroids - xx[None, :], period) / cfg.h
    w = grid.counts * np.exp(-0.5 * np.einsum("ij,ij->i", delta, delta))
    return float(w.sum() / (total * cfg.h**cfg.d))


def kde_points(x, points, cfg: KernelConfig, period: float | None = None) -> float:
    """Exact-point density estimate, summing one kernel per raw data point."""
    pts = _as_points(points, cfg.d)
    if len(pts) == 0:
        raise EmptyDataError("kde over empty data")
    xx = _as_point(x, cfg.d)
    delta = _wrap_delta(pts - xx[None, :], period) / cfg.h
    w = np.exp(-0.5 * np.einsum("ij,ij->i", delta, delta))
    return float(w.sum() / (len(pts) * cfg.h**cfg.d))


def _shift_batch(
    x: np.ndarray,
    centroids: np.ndarray,
    counts: np.ndarray,
    h: float,
    period: float | None,
) -> tuple[np.ndarray, np.ndarray]:
    """One mean-shift step for a batch of centers; returns (next, total weight)."""
    delta = _wrap_delta(centroids[None, :, :] - x[:, None, :], period)
    scaled = delta / h
    w = counts[None, :] * np.exp(-0.5 * np.einsum("amd,amd->am", scaled, scaled))
    wsum = w.sum(axis=1)
    safe = np.where(wsum > 0, wsum, 1.0)
    shift = np.einsum("am,amd->ad", w, delta) / safe[:, None]
    shift[wsum <= 0] = 0.0
    nxt = x + shift
    if period is not None:
        nxt = np.mod(nxt, period)
    return nxt, wsum


def mean_shift_step(x_c, grid: Grid, cfg: KernelConfig, period: float | None = None) -> np.ndarray:
    """Kernel-weighted mean of grid centroids around x_c.

    If every weight underflows to zero the center is returned unchanged;
    callers treat that seed as non-convergent.
    """
    if grid.n_cells == 0:
        raise EmptyDataError("mean_shift_step over empty grid")
    x = _as_point(x_c, cfg.d)[None, :]
    nxt, _ = _shift_batch(x, grid.centroids, grid.counts.astype(float), cfg.h, period)
    return nxt[0]


def mean_shift_step_points(x_c, points, cfg: KernelConfig, period: float | None = None) -> np.ndarray:
    """Exact-point variant of :func:`mean_shift_step` (one weight per raw point)."""
    pts = _as_points(points, cfg.d)
    if len(pts) == 0:
        raise EmptyDataError("mean_shift_step over empty data")
    x = _as_point(x_c, cfg.d)[None, :]
    nxt, _ = _shift_batch(x, pts, np.ones(len(pts)), cfg.h, period)
    return nxt[0]


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Converged mean-shift modes plus the nearest-mode assignment rule."""

    modality: str  # "time" | "space"
    modes: np.ndarray  # (k, d) mode centers, ordered by descending population
    populations: np.ndarray  # (k,) points in each mode's basin
    h: float
    merge_radius: float
    time_mapping: str | None = None  # "absolute" | "day" | "week" for time models
    assignments: np.ndarray | None = None  # per training point mode index (in memory only)
    stray_seeds: int = 0  # seeds that hit max_iter or zero weight

    @property
    def period(self) -> float | None:
        return mapping_period(self.time_mapping)

    @property
    def d(self) -> int:
        return self.modes.shape[1]

    def __len__(self) -> int:
        return len(self.modes)


class _ModeAcc:
    """Weighted running mean; circular (angle-embedded) when a period is set."""

    def __init__(self, period: float | None, d: int):
        self.period = period
        self.weight = 0.0
        self.vec = np.zeros(d)
        self.cos = 0.0
        self.sin = 0.0

    def add(self, x: np.ndarray, w: float) -> None:
        self.weight += w
        if self.period is None:
            self.vec += w * x
        else:
            theta = 2.0 * math.pi * float(x[0]) / self.period
            self.cos += w * math.cos(theta)
            self.sin += w * math.sin(theta)

    def absorb(self, other: "_ModeAcc") -> None:
        self.weight += other.weight
        self.vec += other.vec
        self.cos += other.cos
        self.sin += other.sin

    def mean(self) -> np.ndarray:
        if self.period is None:
            return self.vec / self.weight
        theta = math.atan2(self.sin, self.cos) % (2.0 * math.pi)
        return np.array([theta * self.period / (2.0 * math.pi)])


def _polish(
    x: np.ndarray,
    centroids: np.ndarray,
    counts: np.ndarray,
    h: float,
    period: float | None,
    tol: float,
    max_iter: int,
) -> np.ndarray:
    cur = x[None, :].copy()
    for _ in range(max_iter):
        nxt, wsum = _shift_batch(cur, centroids, counts, h, period)
        if wsum[0] <= 0:
            break
        step = _dist(nxt[0], cur[0], period)
        cur = nxt
        if step < tol:
            break
    return cur[0]


def find_modes(
    points,
    cfg: KernelConfig,
    *,
    tol: float | None = None,
    max_iter: int = 200,
    merge_radius: float | None = None,
    cell_size: float | None = None,
    modality: str = "space",
    time_mapping: str | None = None,
) -> ClusterModel:
    """Run mean shift from every occupied-cell centroid and merge the results.

    Converged iterates within merge_radius collapse into one mode, positioned
    at the basin-population-weighted mean of the merged iterates and then
    polished back to stationarity. Every input point is assigned to the mode
    its cell's seed converged into.
    """
    pts = _as_points(points, cfg.d)
    if len(pts) == 0:
        raise EmptyDataError("find_modes needs at least one point")
    period = mapping_period(time_mapping)
    if period is not None:
        pts = np.mod(pts, period)
    h = cfg.h
    tol = 1e-4 * h if tol is None else tol
    merge_radius = 0.5 * h if merge_radius is None else merge_radius
    cell_size = 0.5 * h if cell_size is None else cell_size

    grid, inverse = _grid_and_inverse(pts, cell_size)
    centroids = grid.centroids
    counts = grid.counts.astype(float)
    m = grid.n_cells

    iterates = centroids.copy()
    active = np.ones(m, dtype=bool)
    underflow = np.zeros(m, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        cur = iterates[active]
        nxt, wsum = _shift_batch(cur, centroids, counts, h, period)
        step = _distances(nxt, cur, period)
        iterates[active] = nxt
        stuck = wsum <= 0
        done = (step < tol) | stuck
        rows = np.flatnonzero(active)
        underflow[rows[stuck]] = True
        active[rows[done]] = False
    stray = int((active | underflow).sum())

    # Greedy merge of iterates, heaviest basins first for determinism.
    order = sorted(range(m), key=lambda i: (-counts[i], tuple(iterates[i])))
    accs: list[_ModeAcc] = []
    owner = np.empty(m, dtype=np.int64)
    for i in order:
        best = -1
        best_dist = math.inf
        xi = iterates[i]
        for j, acc in enumerate(accs):
            dist = _dist(acc.mean(), xi, period)
            if dist <= merge_radius and dist < best_dist:
                best, best_dist = j, dist
        if best < 0:
            accs.append(_ModeAcc(period, cfg.d))
            best = len(accs) - 1
        accs[best].add(xi, counts[i])
        owner[i] = best

    # Polish merged means to stationarity; re-merge if polishing narrowed gaps.
    parent = list(range(len(accs)))

    def root(a: int) -> int:
        while parent[a] != a:
            a = parent[a]
        return a

    centers: dict[int, np.ndarray] = {}
    for _ in range(len(accs) + 1):
        roots = [a for a in range(len(accs)) if parent[a] == a]
        centers = {
            a: _polish(accs[a].mean(), centroids, counts, h, period, tol, max_iter)
            for a in roots
        }
        merged = False
        for ii in range(len(roots)):
            a = roots[ii]
            if parent[a] != a:
                continue
            for jj in range(ii + 1, len(roots)):
                b = roots[jj]
                if parent[b] != b:
                    continue
                if _dist(centers[a], centers[b], period) <= merge_radius:
                    accs[a].absorb(accs[b])
                    parent[b] = a
                    merged = True
        if not merged:
            break

    roots = [a for a in range(len(accs)) if parent[a] == a]
    roots.sort(key=lambda a: (-accs[a].weight, tuple(centers[a])))
    final_index = {a: i for i, a in enumerate(roots)}
    modes = np.array([centers[a] for a in roots])
    populations = np.array([accs[a].weight for a in roots]).round().astype(np.int64)
    seed_mode = np.fromiter((final_index[root(owner[i])] for i in range(m)), np.int64, m)
    assignments = seed_mode[inverse]

    if stray:
        logger.info("find_modes: %d of %d seeds did not converge within max_iter", stray, m)
    return ClusterModel(
        modality=modality,
        modes=modes,
        populations=populations,
        h=h,
        merge_radius=merge_radius,
        time_mapping=time_mapping,
        assignments=assignments,
        stray_seeds=stray,
    )


def assign(x, model: ClusterModel) -> int:
    """Index of the nearest mode; ties break to the lowest index."""
    if len(model) == 0:
        raise EmptyDataError("cluster model has no modes")
    xx = _as_point(x, model.d)
    if model.period is not None:
        xx = np.mod(xx, model.period)
    delta = _wrap_delta(model.modes - xx[None, :], model.period)
    return int(np.argmin(np.einsum("ij,ij->i", delta, delta)))


def assign_points(points, model: ClusterModel) -> np.ndarray:
    """Vectorized :func:`assign` over an array of points."""
    if len(model) == 0:
        raise EmptyDataError("cluster model has no modes")
    pts = _as_points(points, model.d)
    if model.period is not None:
        pts = np.mod(pts, model.period)
    delta = _wrap_delta(model.modes[None, :, :] - pts[:, None, :], model.period)
    return np.argmin(np.einsum("nkd,nkd->nk", delta, delta), axis=1)
