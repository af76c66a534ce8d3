"""Direct complex-scaling reference: repeated diagonalization of H(eta).

Everything here treats the problem as a black-box matrix family
eta -> (H, S) so that synthetic 2x2 fixtures exercise the same machinery
as full Hamiltonians. Energies are followed across parameter changes by
c-product overlap with a reference vector (the overlap matrix does not
depend on eta under the scale-the-operator convention).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT, Config
from .errors import NonConvergenceError, ValidationError
from .hamiltonian import THETA_MAX, BasisSet, ModelSpec, ScalingParameter, scaled_matrices
from .eigensolver import eig, track_nearest

MatrixFn = Callable[[complex], tuple[np.ndarray, np.ndarray | None]]

_LANDSCAPE_MAX_POINTS = 10_000
_TRACK_QUALITY_FLOOR = 0.3


def model_matrix_fn(model: ModelSpec, basis: BasisSet) -> MatrixFn:
    """Wrap a model + built basis as the eta -> (H, S) callable."""

    def fn(eta: complex):
        pair = scaled_matrices(model, basis, eta)
        return pair.H, pair.S

    return fn


@dataclass(frozen=True)
class UcsSweep:
    alpha: float
    thetas: tuple[float, ...]
    energies: tuple[complex, ...]  # the tracked state
    quality: tuple[float, ...]
    spectra: tuple[tuple[complex, ...], ...] = field(default=(), repr=False)


def ucs_sweep(
    matrix_fn: MatrixFn,
    theta_grid,
    alpha: float = 1.0,
    track_energy: complex | None = None,
    keep_spectra: bool = False,
    config: Config = DEFAULT,
) -> UcsSweep:
    """Diagonalize along a theta ray, following one state by overlap."""
    thetas = np.asarray(theta_grid, dtype=float)
    if len(thetas) < 2 or np.any(np.diff(thetas) <= 0):
        raise ValidationError("theta grid must be strictly increasing with >= 2 points")
    if np.any(thetas < 0) or np.any(thetas > THETA_MAX + 1e-12):
        raise ValidationError("theta grid must lie within [0, pi/4]")
    if not alpha > 0:
        raise ValidationError("alpha must be > 0")

    energies: list[complex] = []
    quality: list[float] = []
    spectra: list[tuple[complex, ...]] = []
    ref = None
    S_fixed = None
    for t in thetas:
        H, S = matrix_fn(alpha * cmath.exp(1j * t))
        S_fixed = S
        es = eig(H, S)
        if keep_spectra:
            spectra.append(tuple(complex(v) for v in es.values))
        if ref is None:
            vals = np.asarray(es.values)
            k = (
                int(np.argmin(np.abs(vals - track_energy)))
                if track_energy is not None
                else int(np.argmin(vals.real))
            )
            energies.append(complex(vals[k]))
            quality.append(1.0)
            ref = es.vectors[:, k]
        else:
            value, vec, ov = track_nearest(es.values, es.vectors, ref, S_fixed)
            energies.append(value)
            quality.append(ov)
            ref = vec
    return UcsSweep(
        alpha=float(alpha),
        thetas=tuple(float(t) for t in thetas),
        energies=tuple(energies),
        quality=tuple(quality),
        spectra=tuple(spectra),
    )


@dataclass(frozen=True)
class RotationFit:
    slope: float
    thetas: tuple[float, ...]
    angles: tuple[float, ...]  # median string-tangent angle per theta


def rotation_slope(
    sweep_result: UcsSweep,
    threshold: float,
    exclude: tuple[complex, ...] = (),
    exclude_radius: float = 0.02,
    shoulder: float = 0.05,
    config: Config = DEFAULT,
) -> RotationFit:
    """Rotation rate of the pseudo-continuum string above a threshold.

    Individual roots pick up extra torque from the potential shoulder, so
    the estimator uses the direction of the string itself: sort the
    selected eigenvalues by real part, take the angles of consecutive
    differences, and keep the median per theta. A least-squares line
    through the origin of angle vs theta gives the slope (exact rotation
    law would give -2).
    """
    if not sweep_result.spectra:
        raise ValidationError("rotation_slope needs a sweep run with keep_spectra=True")
    lo, hi = config.rotation_band_lo, config.rotation_band_hi
    ths: list[float] = []
    phis: list[float] = []
    for theta, spectrum in zip(sweep_result.thetas, sweep_result.spectra):
        if theta <= 0:
            continue
        vals = np.asarray(spectrum)
        shifted = vals - threshold
        keep = (vals.real > threshold + shoulder) & (np.abs(shifted) < hi)
        for x in exclude:
            keep &= np.abs(vals - x) > exclude_radius
        sel = shifted[keep]
        if len(sel) < 4:
            continue
        sel = sel[np.argsort(sel.real)]
        tangents = np.angle(np.diff(sel))
        mask = np.abs(sel[:-1]) > lo
        if not np.any(mask):
            continue
        ths.append(float(theta))
        phis.append(float(np.median(tangents[mask])))
    if len(ths) < 3:
        raise ValidationError("too few usable theta samples for a rotation fit")
    t = np.asarray(ths)
    p = np.asarray(phis)
    slope = float(np.sum(p * t) / np.sum(t * t))
    return RotationFit(slope=slope, thetas=tuple(ths), angles=tuple(phis))


@dataclass(frozen=True)
class UcsStationaryPoint:
    eta_star: ScalingParameter
    energy: complex
    derivative_theta: float
    derivative_alpha: float
    rounds: int
    evaluations: int
    trace: tuple[tuple[int, float, float, float, complex], ...] = field(repr=False)


class _TrackedState:
    """One followed eigenstate of a matrix family, with an eval counter."""

    def __init__(self, matrix_fn: MatrixFn, eta0: complex, seed_energy, ref_vector):
        self.matrix_fn = matrix_fn
        self.evaluations = 0
        H, S = matrix_fn(eta0)
        self.S = S
        es = eig(H, S)
        self.evaluations += 1
        if ref_vector is not None:
            value, vec, _ = track_nearest(es.values, es.vectors, np.asarray(ref_vector), S)
        elif seed_energy is not None:
            vals = np.asarray(es.values)
            k = int(np.argmin(np.abs(vals - seed_energy)))
            value, vec = complex(vals[k]), es.vectors[:, k]
        else:
            raise ValidationError("need seed_energy or ref_vector to pick a state")
        self.ref = vec
        self.energy = value

    def energy_at(self, eta: complex, anchor: np.ndarray | None = None) -> complex:
        H, S = self.matrix_fn(eta)
        es = eig(H, S)
        self.evaluations += 1
        value, _, _ = track_nearest(es.values, es.vectors, anchor if anchor is not None else self.ref, S)
        return value

    def move_to(self, eta: complex) -> complex:
        H, S = self.matrix_fn(eta)
        es = eig(H, S)
        self.evaluations += 1
        value, vec, _ = track_nearest(es.values, es.vectors, self.ref, S)
        self.ref = vec
        self.energy = value
        return value

    def derivative_norms(self, alpha: float, theta: float, h: float) -> tuple[float, float]:
        """|dE/dtheta| and |dE/dalpha| by central differences (forward at theta=0)."""
        if theta >= h:
            et_p = self.energy_at(alpha * cmath.exp(1j * (theta + h)))
            et_m = self.energy_at(alpha * cmath.exp(1j * (theta - h)))
            d_t = abs(et_p - et_m) / (2 * h)
        else:
            e0 = self.energy_at(alpha * cmath.exp(1j * theta))
            et_p = self.energy_at(alpha * cmath.exp(1j * (theta + h)))
            d_t = abs(et_p - e0) / h
        ea_p = self.energy_at((alpha + h) * cmath.exp(1j * theta))
        ea_m = self.energy_at((alpha - h) * cmath.exp(1j * theta))
        d_a = abs(ea_p - ea_m) / (2 * h)
        return d_t, d_a


def ucs_stationary(
    matrix_fn: MatrixFn,
    seed: ScalingParameter | complex,
    seed_energy: complex | None = None,
    ref_vector: np.ndarray | None = None,
    config: Config = DEFAULT,
) -> UcsStationaryPoint:
    """Alternating golden-section cusp search on the diagonalized family.

    Minimizes |dE/dtheta| at fixed alpha, then |dE/dalpha| at fixed theta
    (central differences, step config.fd_step), shrinking the search width
    geometrically, until eta moves less than config.scan_round_tol between
    rounds or the energy is numerically pinned. Raises NonConvergenceError
    with the round trace if the budget runs out or the final derivatives
    violate the stationarity tolerance.
    """
    eta0 = seed.eta if isinstance(seed, ScalingParameter) else complex(seed)
    a, t = abs(eta0), math.atan2(eta0.imag, eta0.real)
    if not 0.0 <= t <= THETA_MAX + 1e-12:
        raise ValidationError("seed theta must lie within [0, pi/4]")
    state = _TrackedState(matrix_fn, eta0, seed_energy, ref_vector)
    h = config.fd_step
    trace: list[tuple[int, float, float, float, complex]] = []

    def finish(rounds: int) -> UcsStationaryPoint:
        d_t, d_a = state.derivative_norms(a, t, h)
        if max(d_t, d_a) > config.ucs_derivative_tol * max(1.0, abs(state.energy)):
            raise NonConvergenceError(
                f"derivatives ({d_t:.2e}, {d_a:.2e}) above stationarity tolerance",
                trace=tuple(trace),
            )
        return UcsStationaryPoint(
            eta_star=ScalingParameter(alpha=a, theta=max(t, 0.0)),
            energy=state.energy,
            derivative_theta=d_t,
            derivative_alpha=d_a,
            rounds=rounds,
            evaluations=state.evaluations,
            trace=tuple(trace),
        )

    d_t, d_a = state.derivative_norms(a, t, h)
    if max(d_t, d_a) <= config.ucs_derivative_tol * max(1.0, abs(state.energy)):
        return finish(0)  # already stationary (e.g. a bound state)

    width = config.scan_width
    anchor = state.ref

    def obj_theta(tt: float, aa: float) -> float:
        if tt >= h:
            ep = state.energy_at(aa * cmath.exp(1j * (tt + h)), anchor)
            em = state.energy_at(aa * cmath.exp(1j * (tt - h)), anchor)
            return abs(ep - em) / (2 * h)
        e0 = state.energy_at(aa * cmath.exp(1j * tt), anchor)
        ep = state.energy_at(aa * cmath.exp(1j * (tt + h)), anchor)
        return abs(ep - e0) / h

    def obj_alpha(aa: float, tt: float) -> float:
        ep = state.energy_at((aa + h) * cmath.exp(1j * tt), anchor)
        em = state.energy_at((aa - h) * cmath.exp(1j * tt), anchor)
        return abs(ep - em) / (2 * h)

    for rnd in range(1, config.scan_max_rounds + 1):
        xat = max(1e-12, 1e-2 * width)
        res_t = minimize_scalar(
            obj_theta,
            bounds=(max(t - width, 0.0), min(t + width, THETA_MAX)),
            args=(a,),
            method="bounded",
            options={"xatol": xat},
        )
        t_new = float(res_t.x)
        res_a = minimize_scalar(
            obj_alpha,
            bounds=(max(a - width, 10 * h), a + width),
            args=(t_new,),
            method="bounded",
            options={"xatol": xat},
        )
        a_new = float(res_a.x)
        moved = abs(a_new * cmath.exp(1j * t_new) - a * cmath.exp(1j * t))
        prev_energy = state.energy
        a, t = a_new, t_new
        energy = state.move_to(a * cmath.exp(1j * t))
        anchor = state.ref
        trace.append((rnd, a, t, moved, energy))
        if moved < config.scan_round_tol:
            return finish(rnd)
        if abs(energy - prev_energy) < 1e-13 * max(1.0, abs(energy)):
            return finish(rnd)
        width = min(max(2.0 * moved, 2e-7), 0.7 * width)
    raise NonConvergenceError(
        f"no convergence after {config.scan_max_rounds} alternating rounds",
        trace=tuple(trace),
    )


@dataclass(frozen=True)
class DerivativeLandscape:
    alphas: tuple[float, ...]
    thetas: tuple[float, ...]
    energies: tuple[tuple[complex, ...], ...] = field(repr=False)  # [i_alpha][i_theta]
    d_theta: tuple[tuple[float, ...], ...] = field(repr=False)
    d_alpha: tuple[tuple[float, ...], ...] = field(repr=False)
    quality: tuple[tuple[float, ...], ...] = field(repr=False)

    def argmin_d_theta(self) -> tuple[int, int]:
        return _argmin2d(self.d_theta)

    def argmin_d_alpha(self) -> tuple[int, int]:
        return _argmin2d(self.d_alpha)


def _argmin2d(rows) -> tuple[int, int]:
    arr = np.asarray(rows, dtype=float)
    masked = np.where(np.isfinite(arr), arr, np.inf)
    k = int(np.argmin(masked))
    return k // arr.shape[1], k % arr.shape[1]


def derivative_landscape(
    matrix_fn: MatrixFn,
    alpha_grid,
    theta_grid,
    seed_energy: complex,
    config: Config = DEFAULT,
) -> DerivativeLandscape:
    """|dE/dtheta| and |dE/dalpha| of one tracked state over a grid.

    The state is seeded by energy at the grid corner and chained by
    overlap along theta rows (row anchors chained down alpha). Tracking
    dropouts leave NaN gaps. Derivatives are np.gradient on the grid:
    central differences inside, one-sided at the edges (theta=0 included).
    """
    alphas = np.asarray(alpha_grid, dtype=float)
    thetas = np.asarray(theta_grid, dtype=float)
    if len(alphas) < 2 or np.any(np.diff(alphas) <= 0) or np.any(alphas <= 0):
        raise ValidationError("alpha grid must be positive and strictly increasing")
    if len(thetas) < 2 or np.any(np.diff(thetas) <= 0):
        raise ValidationError("theta grid must be strictly increasing")
    if np.any(thetas < 0) or np.any(thetas > THETA_MAX + 1e-12):
        raise ValidationError("theta grid must lie within [0, pi/4]")
    if len(alphas) * len(thetas) > _LANDSCAPE_MAX_POINTS:
        raise ValidationError(
            f"landscape budget is {_LANDSCAPE_MAX_POINTS} points, "
            f"got {len(alphas) * len(thetas)}"
        )

    n_a, n_t = len(alphas), len(thetas)
    energies = np.full((n_a, n_t), np.nan + 0j, dtype=complex)
    quality = np.zeros((n_a, n_t))
    row_anchor = None
    for i, a in enumerate(alphas):
        ref = None
        for j, t in enumerate(thetas):
            H, S = matrix_fn(a * cmath.exp(1j * t))
            es = eig(H, S)
            if ref is None:
                if row_anchor is None:
                    vals = np.asarray(es.values)
                    k = int(np.argmin(np.abs(vals - seed_energy)))
                    value, vec, ov = complex(vals[k]), es.vectors[:, k], 1.0
                else:
                    value, vec, ov = track_nearest(es.values, es.vectors, row_anchor, S)
                row_anchor = vec
            else:
                value, vec, ov = track_nearest(es.values, es.vectors, ref, S)
            ref = vec
            quality[i, j] = ov
            energies[i, j] = value if ov >= _TRACK_QUALITY_FLOOR else np.nan + 0j
    d_theta = np.abs(np.gradient(energies, thetas, axis=1))
    d_alpha = np.abs(np.gradient(energies, alphas, axis=0))
    return DerivativeLandscape(
        alphas=tuple(float(a) for a in alphas),
        thetas=tuple(float(t) for t in thetas),
        energies=tuple(tuple(complex(v) for v in row) for row in energies),
        d_theta=tuple(tuple(float(v) for v in row) for row in d_theta),
        d_alpha=tuple(tuple(float(v) for v in row) for row in d_alpha),
        quality=tuple(tuple(float(v) for v in row) for row in quality),
    )


def _pair_at(matrix_fn: MatrixFn, eta: complex, center: complex) -> tuple[complex, complex]:
    """The two eigenvalues nearest a chained pair midpoint."""
    H, S = matrix_fn(eta)
    es = eig(H, S)
    vals = np.asarray(es.values)
    idx = np.argsort(np.abs(vals - center))[:2]
    return complex(vals[idx[0]]), complex(vals[idx[1]])


def refine_branch_point(
    matrix_fn: MatrixFn,
    eta0: complex,
    pair_center: complex,
    fd_step: float = 1e-6,
    max_iter: int = 50,
) -> tuple[complex, complex]:
    """Newton on the squared pair gap: (E1-E2)^2 is analytic and vanishes
    linearly at the square-root branch point, so Newton converges
    quadratically. Returns (eta_bp, pair midpoint there).
    """
    eta = complex(eta0)
    center = complex(pair_center)
    for _ in range(max_iter):
        e1, e2 = _pair_at(matrix_fn, eta, center)
        center = (e1 + e2) / 2.0
        f = (e1 - e2) ** 2
        p1, p2 = _pair_at(matrix_fn, eta + fd_step, center)
        m1, m2 = _pair_at(matrix_fn, eta - fd_step, center)
        fp = ((p1 - p2) ** 2 - (m1 - m2) ** 2) / (2 * fd_step)
        if abs(fp) < 1e-300:
            break
        step = f / fp
        eta = eta - step
        if abs(step) <= 1e-14 * max(1.0, abs(eta)):
            break
    else:
        raise NonConvergenceError(f"branch-point refinement: {max_iter} Newton steps exhausted")
    e1, e2 = _pair_at(matrix_fn, eta, center)
    return eta, (e1 + e2) / 2.0


def pair_samples(
    matrix_fn: MatrixFn, eta_bp: complex, pair_center: complex, offsets
) -> list[tuple[complex, complex, complex]]:
    """(eta, E1, E2) at eta_bp + offset for each offset, pair chained by midpoint.

    Offsets are visited largest-magnitude first so the chain walks inward.
    """
    offsets = sorted((complex(o) for o in offsets), key=abs, reverse=True)
    center = complex(pair_center)
    out = []
    for off in offsets:
        eta = eta_bp + off
        e1, e2 = _pair_at(matrix_fn, eta, center)
        center = (e1 + e2) / 2.0
        out.append((eta, e1, e2))
    return out


def exponent_estimate(
    matrix_fn: MatrixFn,
    eta_bp: complex,
    pair_center: complex,
    radii=None,
    direction: complex = 1.0 + 0.0j,
) -> float:
    """Log-log slope of the pair gap vs distance from the branch point.

    A square-root branch point gives slope 1/2; radii must stay in the
    near field (default 1e-5..1e-3) where the leading Puiseux term
    dominates.
    """
    if radii is None:
        radii = np.geomspace(1e-5, 1e-3, 7)
    radii = np.asarray(sorted(float(r) for r in radii))
    if np.any(radii <= 0):
        raise ValidationError("radii must be positive")
    u = direction / abs(direction)
    samples = pair_samples(matrix_fn, eta_bp, pair_center, [r * u for r in radii])
    gaps = np.array([abs(e1 - e2) for _, e1, e2 in samples])
    dists = np.array([abs(eta - eta_bp) for eta, _, _ in samples])
    if np.any(gaps <= 0):
        raise ValidationError("pair gap vanished at a sample; radii too small")
    slope, _ = np.polyfit(np.log(dists), np.log(gaps), 1)
    return float(slope)
