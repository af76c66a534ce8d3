"""Stabilization sweeps at theta = 0 and their annotation.

Produces root-tracked real eigenvalue curves E_n(alpha), detects avoided
crossings (interior local minima of adjacent-level gaps), and proposes
stable windows: flat, crossing-free, contiguous curve segments suitable as
continued-fraction input.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import eigensolver
from .config import DEFAULT, Config
from .errors import TrackingAmbiguityError, ValidationError
from .hamiltonian import BasisSet, ModelSpec, scaled_matrices

SOURCE_COMPUTED = "computed"
SOURCE_IMPORTED = "imported"


@dataclass(frozen=True)
class StabilizationData:
    alpha_grid: np.ndarray
    curves: np.ndarray  # shape (n_roots, n_alpha), tracked real energies
    tracking_quality: np.ndarray  # per-step weakest overlap, shape (n_alpha - 1,)
    source: str = SOURCE_COMPUTED
    metadata: tuple[str, ...] = ()

    def __post_init__(self):
        grid = np.asarray(self.alpha_grid, dtype=float)
        curves = np.asarray(self.curves, dtype=float)
        if grid.ndim != 1 or len(grid) < 2:
            raise ValidationError("alpha_grid needs at least 2 points")
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("alpha_grid must be strictly increasing")
        if curves.ndim != 2 or curves.shape[1] != len(grid):
            raise ValidationError("curves must be (n_roots, n_alpha) matching the grid")
        if not np.all(np.isfinite(curves)):
            raise ValidationError("curves must be finite")
        quality = np.asarray(self.tracking_quality, dtype=float)
        if quality.size and (np.any(quality <= 0) or np.any(quality > 1 + 1e-12)):
            raise ValidationError("tracking_quality must lie in (0, 1]")
        object.__setattr__(self, "alpha_grid", grid)
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "tracking_quality", quality)

    @property
    def n_roots(self) -> int:
        return self.curves.shape[0]


@dataclass(frozen=True)
class StableWindow:
    root_index: int
    alpha_range: tuple[float, float]
    point_indices: tuple[int, ...]  # contiguous grid indices
    flatness: float  # max |dE/dalpha| over the window

    def __post_init__(self):
        idx = tuple(int(i) for i in self.point_indices)
        if list(idx) != list(range(idx[0], idx[-1] + 1)):
            raise ValidationError("point_indices must be contiguous")
        object.__setattr__(self, "point_indices", idx)


@dataclass(frozen=True)
class AvoidedCrossing:
    root_pair: tuple[int, int]  # energy-sorted adjacent levels (n, n+1)
    alpha_at_min_gap: float
    min_gap: float
    grid_index: int = field(default=-1)
    participants: tuple[int, int] = field(default=(-1, -1))  # tracked curve ids

    def __post_init__(self):
        if self.min_gap <= 0:
            raise ValidationError("min_gap must be > 0")


def sweep(
    model: ModelSpec,
    basis: BasisSet,
    alpha_grid,
    threads: int = 1,
) -> StabilizationData:
    """Eigenvalue curves over real alpha, matched step-to-step by c-overlap."""
    grid = np.asarray(alpha_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 10:
        raise ValidationError("sweep needs an alpha grid of at least 10 points")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("alpha_grid must be strictly increasing")

    def solve_at(a: float) -> eigensolver.EigenSet:
        pair = scaled_matrices(model, basis, complex(a, 0.0))
        return eigensolver.eig(pair.H, pair.S)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sets = list(pool.map(solve_at, grid))
    else:
        sets = [solve_at(a) for a in grid]

    s_mat = basis.overlap
    n = basis.size
    curves = np.empty((n, len(grid)))
    # perm[r] = column in the current EigenSet holding tracked curve r
    perm = np.arange(n)
    curves[:, 0] = sets[0].values.real
    quality = np.empty(len(grid) - 1)
    for k in range(1, len(grid)):
        step_perm, q = eigensolver.match_order(sets[k - 1].vectors, sets[k].vectors, s_mat)
        if q < 0.5:
            raise TrackingAmbiguityError(
                f"root tracking ambiguous near alpha={grid[k]:.6g} "
                f"(overlap {q:.3f} < 0.5); use a denser alpha grid",
                at_value=float(grid[k]),
            )
        quality[k - 1] = q
        perm = step_perm[perm]
        curves[:, k] = sets[k].values.real[perm]
    return StabilizationData(
        alpha_grid=grid, curves=curves, tracking_quality=quality, source=SOURCE_COMPUTED
    )


def detect_windows(
    data: StabilizationData,
    flatness_tol: float | None = None,
    min_points: int | None = None,
    gap_tol: float | None = None,
    guard_steps: int | None = None,
    config: Config = DEFAULT,
) -> tuple[list[StableWindow], list[AvoidedCrossing]]:
    """Annotate a sweep: avoided crossings, then flat windows that avoid them.

    Crossings are interior local minima of energy-sorted adjacent gaps below
    gap_tol; the default gap_tol blends a step-noise floor (catching sharp
    dips) with a fraction of the typical level spacing (catching broad ones).
    Windows are maximal flat runs on one tracked curve, trimmed by a guard
    margin around every crossing that curve participates in.
    """
    if len(data.alpha_grid) < 10:
        raise ValidationError("window detection needs at least 10 grid points")
    flatness_tol = config.flatness_tol if flatness_tol is None else flatness_tol
    min_points = config.min_points if min_points is None else min_points
    guard = config.guard_steps if guard_steps is None else guard_steps

    grid = data.alpha_grid
    curves = data.curves
    n_roots, n_alpha = curves.shape

    order = np.argsort(curves, axis=0)
    ranks = np.argsort(order, axis=0)
    level_sorted = np.take_along_axis(curves, order, axis=0)
    gaps = np.diff(level_sorted, axis=0)  # (n_roots - 1, n_alpha)

    if gap_tol is None and gaps.size:
        step_noise = float(np.median(np.abs(np.diff(gaps, axis=1)))) if n_alpha > 1 else 0.0
        level_scale = float(np.median(gaps))
        gap_tol = max(
            config.gap_noise_factor * step_noise,
            config.gap_level_fraction * level_scale,
        )
    crossings: list[AvoidedCrossing] = []
    for n in range(max(n_roots - 1, 0)):
        g = gaps[n]
        for k in range(1, n_alpha - 1):
            if g[k] < g[k - 1] and g[k] <= g[k + 1] and g[k] < gap_tol:
                curve_lo = int(order[n, k])
                curve_hi = int(order[n + 1, k])
                crossings.append(
                    AvoidedCrossing(
                        root_pair=(n, n + 1),
                        alpha_at_min_gap=float(grid[k]),
                        min_gap=float(g[k]),
                        grid_index=k,
                        participants=(curve_lo, curve_hi),
                    )
                )

    slopes = np.abs(np.diff(curves, axis=1)) / np.diff(grid)[None, :]
    windows: list[StableWindow] = []
    for r in range(n_roots):
        blocked = np.zeros(n_alpha, dtype=bool)
        for c in crossings:
            if r in c.participants:
                lo = max(c.grid_index - guard, 0)
                hi = min(c.grid_index + guard, n_alpha - 1)
                blocked[lo : hi + 1] = True
        flat_seg = slopes[r] <= flatness_tol
        ok_seg = flat_seg & ~blocked[:-1] & ~blocked[1:]
        start = None
        for k in range(n_alpha):
            seg_ok = k < n_alpha - 1 and ok_seg[k]
            if seg_ok and start is None:
                start = k
            if not seg_ok and start is not None:
                stop = k  # inclusive point index
                if stop - start + 1 >= min_points:
                    idx = tuple(range(start, stop + 1))
                    windows.append(
                        StableWindow(
                            root_index=r,
                            alpha_range=(float(grid[start]), float(grid[stop])),
                            point_indices=idx,
                            flatness=float(slopes[r, start:stop].max()),
                        )
                    )
                start = None
    windows.sort(key=lambda w: (w.flatness, w.root_index, w.point_indices[0]))
    return windows, crossings


def window_points(data: StabilizationData, window: StableWindow) -> tuple[np.ndarray, np.ndarray]:
    """The (alpha, energy) samples a window contributes to a fit."""
    idx = np.asarray(window.point_indices)
    return data.alpha_grid[idx], data.curves[window.root_index, idx]
