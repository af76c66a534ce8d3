"""Truncated continued-fraction interpolation (the Schlessinger point method).

A fit through M points (alpha_i, E_i) is stored as the leading value E_1
plus coefficients z_1..z_{M-1}:

    C(eta) = E_1 / (1 + z_1(eta - alpha_1) / (1 + z_2(eta - alpha_2) / ...)),

built by the inverse-difference tableau so that C interpolates every input
point. The fraction is rational in eta, so it evaluates anywhere in the
complex plane; the order-sensitivity estimate |C_M - C_{M-1}| (the fraction
with its last coefficient dropped) is reported as the Pade error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Config
from .errors import DegenerateDataError, ValidationError

_INTERP_TOL = 1e-10
_ZERO_COEFF_TOL = 1e-14


@dataclass(frozen=True)
class ContinuedFraction:
    abscissae: tuple[float, ...]
    values: tuple[float, ...]
    coefficients: tuple[complex, ...]

    def __post_init__(self):
        xs = np.asarray(self.abscissae, dtype=float)
        if len(xs) < 1 or len(self.values) != len(xs):
            raise ValidationError("abscissae and values must be equal-length and nonempty")
        if len(self.coefficients) != len(xs) - 1:
            raise ValidationError("need exactly M-1 coefficients for M points")
        if len(xs) > 1:
            span = float(xs.max() - xs.min())
            diffs = np.abs(xs[:, None] - xs[None, :])
            np.fill_diagonal(diffs, np.inf)
            if diffs.min() <= 1e-12 * max(span, 1e-300):
                raise ValidationError("duplicate abscissae in fit input")

    @property
    def order(self) -> int:
        return len(self.abscissae)


@dataclass(frozen=True)
class PadeValue:
    value: complex
    derivative: complex
    pade_error: float


@dataclass(frozen=True)
class PoleMarker:
    eta: complex


@dataclass(frozen=True)
class FitDiagnostics:
    interpolation_max: float
    off_sample_max: float
    leave_one_out_max: float
    coefficient_max: float
    density_warning: bool
    warnings: tuple[str, ...]


def _tableau(xs: np.ndarray, fs: np.ndarray) -> tuple[np.ndarray, int | None]:
    """Inverse-difference coefficients; returns (z, offending_index or None)."""
    m = len(xs)
    cur = fs.astype(complex).copy()
    z = np.zeros(m - 1, dtype=complex)
    for j in range(1, m):
        col_scale = float(np.max(np.abs(cur[j - 1 :])))
        if col_scale == 0.0:
            break  # constant tail: remaining coefficients stay zero
        if float(np.max(np.abs(cur[j - 1] - cur[j:]))) <= 1e-13 * col_scale:
            # numerically constant column: the depth-(j-1) fraction already
            # interpolates every remaining point (e.g. the data are exactly
            # rational of lower degree), so deeper coefficients vanish;
            # dividing the residual noise would poison the tableau
            break
        tiny = np.abs(cur[j:]) < _ZERO_COEFF_TOL * col_scale
        if np.any(tiny & (np.abs(cur[j - 1] - cur[j:]) > _ZERO_COEFF_TOL * col_scale)):
            return z, j + int(np.nonzero(tiny)[0][0])
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = (cur[j - 1] - cur[j:]) / ((xs[j:] - xs[j - 1]) * cur[j:])
        nxt = np.where(np.isfinite(nxt), nxt, 0.0)
        z[j - 1] = nxt[0]
        cur[j:] = nxt
        if j < m - 1 and abs(z[j - 1]) < _ZERO_COEFF_TOL and np.max(np.abs(cur[j + 1 :])) > 0:
            # a zero coefficient cuts off every deeper rung: the Moebius solve
            # for the next point has an exactly-zero denominator
            return z, j
    return z, None


def fit(points) -> ContinuedFraction:
    """Fit the fraction through the points in the order given.

    Near-breakdown triggers one retry with the offending point moved to the
    end; a second failure raises.
    """
    pts = [(float(a), float(e)) for a, e in points]
    if len(pts) < 1:
        raise ValidationError("fit needs at least one point")
    xs = np.array([p[0] for p in pts])
    if len(pts) > 1:
        span = float(xs.max() - xs.min())
        diffs = np.abs(xs[:, None] - xs[None, :])
        np.fill_diagonal(diffs, np.inf)
        if diffs.min() <= 1e-12 * max(span, 1e-300):
            raise ValidationError("duplicate abscissae in fit input")
    return _fit_ordered(pts, allow_reorder=True)


def _fit_ordered(pts: list[tuple[float, float]], allow_reorder: bool) -> ContinuedFraction:
    xs = np.array([p[0] for p in pts])
    fs = np.array([p[1] for p in pts])
    z, offending = _tableau(xs, fs)
    if offending is None:
        cf = ContinuedFraction(
            abscissae=tuple(xs.tolist()),
            values=tuple(fs.tolist()),
            coefficients=tuple(complex(v) for v in z),
        )
        bad = _interpolation_failure(cf)
        if bad is None:
            return cf
        offending = bad
    if not allow_reorder:
        raise DegenerateDataError(
            f"continued-fraction breakdown at point (alpha={pts[offending][0]!r}) after reordering"
        )
    reordered = [p for i, p in enumerate(pts) if i != offending] + [pts[offending]]
    return _fit_ordered(reordered, allow_reorder=False)


def _interpolation_failure(cf: ContinuedFraction) -> int | None:
    scale = max(abs(v) for v in cf.values) or 1.0
    worst, worst_i = 0.0, None
    for i, (a, e) in enumerate(zip(cf.abscissae, cf.values)):
        res = evaluate(cf, a)
        miss = abs(res.value - e) if isinstance(res, PadeValue) else np.inf
        if miss > worst:
            worst, worst_i = miss, i
    if worst > _INTERP_TOL * scale:
        return worst_i
    return None


def _eval_raw(
    abscissae, values, coefficients, eta: complex, pole_tol: float
) -> tuple[complex, complex, complex] | None:
    """Bottom-up value and first two derivatives; None signals a pole."""
    xs = abscissae
    z = coefficients
    m = len(xs)
    f0 = complex(values[0])
    if m == 1:
        return f0, 0.0 + 0.0j, 0.0 + 0.0j
    k = m - 2
    d = 1.0 + z[k] * (eta - xs[k])
    d1 = z[k]
    d2 = 0.0 + 0.0j
    for k in range(m - 3, -1, -1):
        if abs(d) < pole_tol:
            return None
        u = z[k] * (eta - xs[k])
        up = z[k]
        inv = 1.0 / d
        new_d = 1.0 + u * inv
        new_d1 = up * inv - u * d1 * inv * inv
        new_d2 = -2.0 * up * d1 * inv * inv + (2.0 * u * d1 * d1 * inv - u * d2) * inv * inv
        d, d1, d2 = new_d, new_d1, new_d2
    if abs(d) < pole_tol:
        return None
    inv = 1.0 / d
    value = f0 * inv
    deriv = -f0 * d1 * inv * inv
    second = (-f0 * d2 + 2.0 * f0 * d1 * d1 * inv) * inv * inv
    return value, deriv, second


def evaluate(cf: ContinuedFraction, eta: complex, config: Config = DEFAULT) -> PadeValue | PoleMarker:
    """Value, analytic derivative, and Pade error at one complex point."""
    eta = complex(eta)
    full = _eval_raw(cf.abscissae, cf.values, cf.coefficients, eta, config.pole_tol)
    if full is None:
        return PoleMarker(eta=eta)
    if cf.order > 1:
        prev = _eval_raw(
            cf.abscissae[:-1], cf.values[:-1], cf.coefficients[:-1], eta, config.pole_tol
        )
        pade_error = abs(full[0] - prev[0]) if prev is not None else np.inf
    else:
        pade_error = 0.0
    return PadeValue(value=full[0], derivative=full[1], pade_error=float(pade_error))


def second_derivative(cf: ContinuedFraction, eta: complex, config: Config = DEFAULT) -> complex | None:
    full = _eval_raw(cf.abscissae, cf.values, cf.coefficients, complex(eta), config.pole_tol)
    return None if full is None else full[2]


def fit_window(alphas, energies, order: int | None = None, config: Config = DEFAULT):
    """Fit a window's samples, evenly subsampled down to the working order.

    Returns (fraction, indices of the samples used).
    """
    alphas = np.asarray(alphas, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if len(alphas) < 3:
        raise ValidationError("a window fit needs at least 3 points")
    m = min(len(alphas), config.max_fit_order if order is None else order)
    if m < 2:
        raise ValidationError("fit order must be at least 2")
    idx = np.unique(np.round(np.linspace(0, len(alphas) - 1, m)).astype(int))
    cf = fit(list(zip(alphas[idx], energies[idx])))
    return cf, idx


def diagnose(
    cf: ContinuedFraction,
    window_alphas,
    window_energies,
    window_span: float | None = None,
    config: Config = DEFAULT,
) -> FitDiagnostics:
    """Fit-quality report: residuals, coefficient growth, density warnings."""
    window_alphas = np.asarray(window_alphas, dtype=float)
    window_energies = np.asarray(window_energies, dtype=float)
    scale = float(np.max(np.abs(window_energies))) or 1.0
    span = window_span
    if span is None:
        span = float(window_alphas.max() - window_alphas.min()) if len(window_alphas) > 1 else 0.0

    interp_max = 0.0
    for a, e in zip(cf.abscissae, cf.values):
        res = evaluate(cf, a, config)
        if isinstance(res, PadeValue):
            interp_max = max(interp_max, abs(res.value - e))

    fitted = set(cf.abscissae)
    off_max = 0.0
    for a, e in zip(window_alphas, window_energies):
        if float(a) in fitted:
            continue
        res = evaluate(cf, float(a), config)
        if isinstance(res, PadeValue):
            off_max = max(off_max, abs(res.value - e))

    loo_max = 0.0
    pts = list(zip(cf.abscissae, cf.values))
    if len(pts) > 3:
        for i in range(len(pts)):
            rest = pts[:i] + pts[i + 1 :]
            try:
                sub = fit(rest)
            except DegenerateDataError:
                continue
            res = evaluate(sub, pts[i][0], config)
            if isinstance(res, PadeValue):
                loo_max = max(loo_max, abs(res.value - pts[i][1]))

    coeff_max = max((abs(z) for z in cf.coefficients), default=0.0)
    warnings: list[str] = []
    xs = np.asarray(cf.abscissae)
    if len(xs) > 1 and span > 0:
        min_spacing = float(np.min(np.abs(np.diff(np.sort(xs)))))
        if min_spacing < config.density_spacing_fraction * span:
            warnings.append(
                f"input points too dense: min spacing {min_spacing:.3e} "
                f"< {config.density_spacing_fraction:g} of window span {span:.3e}"
            )
    loo_floor = max(interp_max, _INTERP_TOL * scale)
    if loo_max > config.loo_ratio * loo_floor:
        warnings.append(
            f"leave-one-out residual {loo_max:.3e} exceeds "
            f"{config.loo_ratio:g} x interpolation residual floor {loo_floor:.3e}"
        )
    return FitDiagnostics(
        interpolation_max=interp_max,
        off_sample_max=off_max,
        leave_one_out_max=loo_max,
        coefficient_max=coeff_max,
        density_warning=bool(warnings),
        warnings=tuple(warnings),
    )
