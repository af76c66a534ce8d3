"""Complex continuation of a fitted fraction: trajectories, stationary
points, and the square-root (Puiseux) branch-point fit.

Because the fraction is rational in the single variable eta = alpha*e^{i
theta}, stationarity in alpha and theta jointly reduces to C'(eta) = 0:
dE/dalpha = e^{i theta} C' and dE/dtheta = i eta C' share their root set.
Newton on C' is therefore the primary search; the alternating alpha/theta
cusp scan is kept as a fallback strategy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT, Config
from .errors import TrajectoryDegenerateError, ValidationError
from .hamiltonian import THETA_MAX, ScalingParameter
from .schlessinger import ContinuedFraction, PadeValue, PoleMarker, evaluate, second_derivative

THETA_TRAJECTORY = "theta_trajectory"
ALPHA_TRAJECTORY = "alpha_trajectory"


@dataclass(frozen=True)
class Trajectory:
    kind: str
    fixed_value: float
    grid: tuple[float, ...]  # swept-parameter values that produced energies
    energies: tuple[complex, ...]
    pade_errors: tuple[float, ...]
    pole_at: tuple[float, ...] = ()  # swept values that landed on poles

    def __post_init__(self):
        if self.kind not in (THETA_TRAJECTORY, ALPHA_TRAJECTORY):
            raise ValidationError(f"unknown trajectory kind '{self.kind}'")
        g = np.asarray(self.grid)
        if len(g) and np.any(np.diff(g) <= 0):
            raise ValidationError("trajectory grid must be strictly monotone")


@dataclass(frozen=True)
class StationaryPoint:
    eta_star: ScalingParameter
    energy: complex
    width: float
    derivative_norm: float
    pade_error: float
    window_id: str | None = None
    theta_cross_section: Trajectory | None = field(default=None, repr=False)
    alpha_cross_section: Trajectory | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.energy.imag > 0:
            raise ValidationError("stationary energy must lie in the closed lower half plane")
        if self.width < 0:
            raise ValidationError("width must be >= 0")


@dataclass(frozen=True)
class BranchPointEstimate:
    eta_bp: complex
    energy_bp: complex
    coefficient_b: complex
    residual: float
    poor_fit: bool = False

    @property
    def alpha_bp(self) -> float:
        return abs(self.eta_bp)

    @property
    def theta_bp(self) -> float:
        return math.atan2(self.eta_bp.imag, self.eta_bp.real)


@dataclass(frozen=True)
class NotFoundResult:
    """No stationary point survived the filters; carries the |C'| landscape."""

    alphas: tuple[float, ...]
    thetas: tuple[float, ...]
    derivative_magnitude: tuple[tuple[float, ...], ...]  # [i_alpha][i_theta]


def _sweep(cf: ContinuedFraction, kind: str, fixed: float, grid, config: Config) -> Trajectory:
    grid = [float(g) for g in grid]
    energies, errors, kept, poles = [], [], [], []
    for g in grid:
        eta = fixed * cmath.exp(1j * g) if kind == THETA_TRAJECTORY else g * cmath.exp(1j * fixed)
        res = evaluate(cf, eta, config)
        if isinstance(res, PoleMarker):
            poles.append(g)
            continue
        kept.append(g)
        energies.append(res.value)
        errors.append(res.pade_error)
    if len(poles) > 0.2 * len(grid):
        raise TrajectoryDegenerateError(
            f"{len(poles)} of {len(grid)} trajectory points are poles"
        )
    return Trajectory(
        kind=kind,
        fixed_value=float(fixed),
        grid=tuple(kept),
        energies=tuple(energies),
        pade_errors=tuple(errors),
        pole_at=tuple(poles),
    )


def theta_trajectory(
    cf: ContinuedFraction, alpha: float, theta_grid, config: Config = DEFAULT
) -> Trajectory:
    thetas = np.asarray(theta_grid, dtype=float)
    if np.any(thetas < 0) or np.any(thetas > THETA_MAX + 1e-12):
        raise ValidationError("theta grid must lie within [0, pi/4]")
    return _sweep(cf, THETA_TRAJECTORY, alpha, thetas, config)


def alpha_trajectory(
    cf: ContinuedFraction, theta: float, alpha_grid, config: Config = DEFAULT
) -> Trajectory:
    alphas = np.asarray(alpha_grid, dtype=float)
    if np.any(alphas <= 0):
        raise ValidationError("alpha grid must be positive")
    if not 0.0 <= theta <= THETA_MAX + 1e-12:
        raise ValidationError("theta must lie within [0, pi/4]")
    return _sweep(cf, ALPHA_TRAJECTORY, theta, alphas, config)


def _derivs(cf: ContinuedFraction, eta: complex, config: Config):
    res = evaluate(cf, eta, config)
    if isinstance(res, PoleMarker):
        return None
    second = second_derivative(cf, eta, config)
    return res.value, res.derivative, second, res.pade_error


def _newton_root(cf: ContinuedFraction, eta0: complex, config: Config) -> complex | None:
    eta = eta0
    for _ in range(config.newton_max_iter):
        d = _derivs(cf, eta, config)
        if d is None:
            return None
        _, c1, c2, _ = d
        if c2 is None or abs(c2) < 1e-300:
            return None
        step = c1 / c2
        eta = eta - step
        if abs(step) <= 1e-13 * max(1.0, abs(eta)):
            return eta
    return None


def _alternating_scan(cf: ContinuedFraction, eta0: complex, config: Config) -> complex | None:
    """The manual cusp search: minimize |dE/dtheta| and |dE/dalpha| in turn."""
    a, t = abs(eta0), math.atan2(eta0.imag, eta0.real)
    width = config.scan_width

    def dtheta(tt: float, aa: float) -> float:
        d = _derivs(cf, aa * cmath.exp(1j * tt), config)
        return abs(aa * d[1]) if d else np.inf

    def dalpha(aa: float, tt: float) -> float:
        d = _derivs(cf, aa * cmath.exp(1j * tt), config)
        return abs(d[1]) if d else np.inf

    for _ in range(config.scan_max_rounds):
        xat = max(1e-12, 1e-2 * width)
        r1 = minimize_scalar(
            dtheta,
            bounds=(max(t - width, 0.0), min(t + width, THETA_MAX)),
            args=(a,),
            method="bounded",
            options={"xatol": xat},
        )
        tn = float(r1.x)
        r2 = minimize_scalar(
            dalpha,
            bounds=(max(a - width, 1e-6), a + width),
            args=(tn,),
            method="bounded",
            options={"xatol": xat},
        )
        an = float(r2.x)
        moved = abs(an * cmath.exp(1j * tn) - a * cmath.exp(1j * t))
        a, t = an, tn
        if moved < config.scan_round_tol:
            eta = a * cmath.exp(1j * t)
            d = _derivs(cf, eta, config)
            if d is not None and abs(d[1]) <= config.derivative_tol * max(1.0, abs(d[0])):
                return eta
            # settled but not yet stationary to tolerance: tighten the scan
            width = max(0.5 * width, 2e-8)
            continue
        width = min(max(2.0 * moved, 2e-8), 0.7 * width)
    return None


def find_stationary(
    cf: ContinuedFraction,
    seed_region: tuple[tuple[float, float], tuple[float, float]],
    window_id: str | None = None,
    strategy: str = "newton",
    config: Config = DEFAULT,
) -> list[StationaryPoint] | NotFoundResult:
    """All dC/deta = 0 roots in the region that look like resonances.

    Filters: derivative norm, lower-half-plane energy, Pade error, region
    membership; duplicates within config.dedup_tol are merged. When nothing
    survives, the coarse-grid |C'| landscape is returned for display.
    """
    (a_lo, a_hi), (t_lo, t_hi) = seed_region
    if not (0 < a_lo < a_hi):
        raise ValidationError("seed region alpha interval must be positive and increasing")
    if not (0 <= t_lo < t_hi <= THETA_MAX + 1e-12):
        raise ValidationError("seed region theta interval must lie within [0, pi/4]")
    if strategy not in ("newton", "alternating"):
        raise ValidationError(f"unknown search strategy '{strategy}'")

    alphas = np.linspace(a_lo, a_hi, config.seed_grid_alpha)
    thetas = np.linspace(t_lo, t_hi, config.seed_grid_theta)
    grid_mag = np.full((len(alphas), len(thetas)), np.inf)
    seeds: list[tuple[float, complex]] = []
    for i, a in enumerate(alphas):
        for j, t in enumerate(thetas):
            eta = a * cmath.exp(1j * t)
            d = _derivs(cf, eta, config)
            if d is None:
                continue
            grid_mag[i, j] = abs(d[1])
            seeds.append((abs(d[1]), eta))

    if strategy == "alternating":
        seeds = sorted(seeds, key=lambda s: s[0])[:5]
        candidates = [_alternating_scan(cf, eta, config) for _, eta in seeds]
    else:
        candidates = [_newton_root(cf, eta, config) for _, eta in seeds]

    roots: list[complex] = []
    for eta in candidates:
        if eta is None:
            continue
        if any(abs(eta - r) < config.dedup_tol for r in roots):
            continue
        roots.append(eta)

    kept: list[tuple[complex, complex, complex, float]] = []
    for eta in sorted(roots, key=abs):
        a, t = abs(eta), math.atan2(eta.imag, eta.real)
        if not (a_lo - 1e-9 <= a <= a_hi + 1e-9 and t_lo - 1e-9 <= t <= t_hi + 1e-9):
            continue
        d = _derivs(cf, eta, config)
        if d is None:
            continue
        value, c1, _, pade_err = d
        if abs(c1) > config.derivative_tol * max(1.0, abs(value)):
            continue
        if value.imag > 1e-12 * max(1.0, abs(value)) or pade_err > config.pade_error_tol:
            continue
        if value.imag > 0.0:
            # within rounding noise of the real axis: clamp so the energy
            # keeps the closed-lower-half-plane invariant
            value = complex(value.real, 0.0)
        kept.append((eta, value, c1, pade_err))

    # distinct roots sharing one energy are the same spectral feature seen at
    # different scaling parameters; keep the best-converged representative
    merged: list[tuple[complex, complex, complex, float]] = []
    for cand in kept:
        dup = None
        for i, other in enumerate(merged):
            if abs(cand[1] - other[1]) <= 1e-5 * max(1.0, abs(cand[1])):
                dup = i
                break
        if dup is None:
            merged.append(cand)
        elif (cand[3], abs(cand[0])) < (merged[dup][3], abs(merged[dup][0])):
            merged[dup] = cand

    points: list[StationaryPoint] = []
    half_a, half_t = 0.1 * (a_hi - a_lo), 0.1 * (t_hi - t_lo)
    for eta, value, c1, pade_err in sorted(merged, key=lambda c: abs(c[0])):
        a, t = abs(eta), max(math.atan2(eta.imag, eta.real), 0.0)
        theta_grid = np.linspace(max(t_lo, t - half_t), min(t_hi, t + half_t), 61)
        alpha_grid = np.linspace(max(a_lo, a - half_a), min(a_hi, a + half_a), 61)
        points.append(
            StationaryPoint(
                eta_star=ScalingParameter(alpha=a, theta=t),
                energy=value,
                width=config.width_factor * max(0.0, -value.imag),
                derivative_norm=abs(c1),
                pade_error=pade_err,
                window_id=window_id,
                theta_cross_section=_sweep(cf, THETA_TRAJECTORY, a, theta_grid, config),
                alpha_cross_section=_sweep(cf, ALPHA_TRAJECTORY, t, alpha_grid, config),
            )
        )
    if not points:
        return NotFoundResult(
            alphas=tuple(float(a) for a in alphas),
            thetas=tuple(float(t) for t in thetas),
            derivative_magnitude=tuple(
                tuple(float(v) for v in row) for row in grid_mag
            ),
        )
    return points


def puiseux_fit(samples, config: Config = DEFAULT) -> BranchPointEstimate:
    """Fit E_pm = E_BP pm b sqrt(eta - eta_BP) to coalescing-pair samples.

    Two linear least-squares solves: (E+ - E-)^2 is linear in eta and gives
    b and eta_BP; the pair mean, linear in eta near the branch point, gives
    E_BP evaluated at eta_BP.
    """
    samples = [(complex(e), complex(p), complex(m)) for e, p, m in samples]
    if len(samples) < 4:
        raise ValidationError("puiseux_fit needs at least 4 samples")
    etas = np.array([s[0] for s in samples])
    gap2 = np.array([(s[1] - s[2]) ** 2 for s in samples])
    mean = np.array([(s[1] + s[2]) / 2.0 for s in samples])

    design = np.vstack([etas, np.ones_like(etas)]).T
    (c0, c1), *_ = np.linalg.lstsq(design, gap2, rcond=None)
    # slope x eta-spread must be visible against the gap scale, otherwise the
    # square-root model has nothing to anchor eta_BP on
    eta_spread = float(np.max(np.abs(etas - etas.mean())))
    gap_scale = float(np.max(np.abs(gap2)))
    if abs(c0) * eta_spread <= 1e-10 * max(gap_scale, 1e-300):
        raise ValidationError("samples show no eta dependence in the squared gap")
    eta_bp = -c1 / c0
    b = np.sqrt(c0 / 4.0)

    design_m = np.vstack([etas - eta_bp, np.ones_like(etas)]).T
    (_, e_bp), *_ = np.linalg.lstsq(design_m, mean, rcond=None)

    sq = 0.0
    for eta, ep, em in samples:
        root = b * np.sqrt(eta - eta_bp)
        direct = abs(ep - (e_bp + root)) ** 2 + abs(em - (e_bp - root)) ** 2
        swapped = abs(ep - (e_bp - root)) ** 2 + abs(em - (e_bp + root)) ** 2
        sq += min(direct, swapped)
    residual = math.sqrt(sq / (2 * len(samples)))
    span = float(np.max(np.abs(etas - eta_bp)))
    poor = residual >= 1e-2 * abs(b) * math.sqrt(max(span, 1e-300))
    return BranchPointEstimate(
        eta_bp=complex(eta_bp),
        energy_bp=complex(e_bp),
        coefficient_b=complex(b),
        residual=residual,
        poor_fit=bool(poor),
    )


def delta_gap(alpha_sp: float, eta_bp: complex, theta: float) -> complex:
    """The coalescence-gap factor along the alpha_sp circle.

    (eta - eta_BP) on eta = alpha_sp e^{i theta} equals eta_BP * delta with
    delta = (alpha_sp/alpha_BP) e^{i(theta - theta_BP)} - 1; the pair gap is
    2 b sqrt(eta_BP * delta).
    """
    alpha_bp = abs(eta_bp)
    theta_bp = math.atan2(eta_bp.imag, eta_bp.real)
    return (alpha_sp / alpha_bp) * cmath.exp(1j * (theta - theta_bp)) - 1.0


def cusp_spacing(trajectory: Trajectory) -> tuple[np.ndarray, int]:
    """Consecutive complex-plane spacings and the index of their minimum."""
    e = np.asarray(trajectory.energies)
    spacing = np.abs(np.diff(e))
    return spacing, int(np.argmin(spacing)) if len(spacing) else -1
