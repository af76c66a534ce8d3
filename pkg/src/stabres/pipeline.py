"""Shared orchestration used by both the CLI and the HTTP service.

Keeping the full resonance chain (sweep -> windows -> fit -> stationary
points) in one place guarantees the two front ends produce byte-identical
derived objects.
"""

from __future__ import annotations

import numpy as np

from . import schlessinger
from .config import DEFAULT, Config
from .continuation import NotFoundResult, StationaryPoint, find_stationary
from .errors import CrossingGuardError, ValidationError
from .hamiltonian import (
    EVEN_TEMPERED_GAUSSIAN,
    HARMONIC_OSCILLATOR,
    BasisSet,
    BasisSpec,
    ModelSpec,
    build_basis,
)
from .session import Session
from .stabilization import (
    AvoidedCrossing,
    StabilizationData,
    StableWindow,
    detect_windows,
    sweep,
    window_points,
)
from .ucs import (
    DerivativeLandscape,
    UcsStationaryPoint,
    derivative_landscape,
    model_matrix_fn,
    ucs_stationary,
)

MODEL_NAMES = ("benchmark", "harmonic", "kinetic")


def parse_model(text: str) -> ModelSpec:
    name = text.strip().lower()
    if name == "benchmark":
        return ModelSpec.benchmark()
    if name == "harmonic":
        return ModelSpec.pure_harmonic()
    if name == "kinetic":
        return ModelSpec.kinetic_only()
    raise ValidationError(f"unknown model '{text}' (expected one of {', '.join(MODEL_NAMES)})")


def parse_basis(text: str) -> BasisSpec:
    """ho:N[:omega[:quadrature_order]] or et:N:beta0:ratio[:quadrature_order]."""
    parts = text.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "ho":
            if len(parts) < 2 or len(parts) > 4:
                raise ValidationError(f"bad basis '{text}': expected ho:N[:omega[:order]]")
            size = int(parts[1])
            width = float(parts[2]) if len(parts) > 2 else 1.0
            order = int(parts[3]) if len(parts) > 3 else None
            return (
                BasisSpec(kind=HARMONIC_OSCILLATOR, size=size, width=width)
                if order is None
                else BasisSpec(kind=HARMONIC_OSCILLATOR, size=size, width=width, quadrature_order=order)
            )
        if kind == "et":
            if len(parts) < 4 or len(parts) > 5:
                raise ValidationError(f"bad basis '{text}': expected et:N:beta0:ratio[:order]")
            size = int(parts[1])
            base = float(parts[2])
            ratio = float(parts[3])
            order = int(parts[4]) if len(parts) > 4 else None
            return (
                BasisSpec(kind=EVEN_TEMPERED_GAUSSIAN, size=size, base_exponent=base, ratio=ratio)
                if order is None
                else BasisSpec(
                    kind="et", size=size, base_exponent=base, ratio=ratio, quadrature_order=order
                )
            )
    except ValueError as exc:
        raise ValidationError(f"bad basis '{text}': {exc}") from exc
    raise ValidationError(f"unknown basis kind '{parts[0]}' (expected ho or et)")


def parse_grid(text: str) -> np.ndarray:
    """'start:stop:count' -> linspace."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValidationError(f"bad grid '{text}': expected start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"bad grid '{text}': {exc}") from exc
    if count < 2 or stop <= start:
        raise ValidationError(f"bad grid '{text}': need stop > start and count >= 2")
    return np.linspace(start, stop, count)


def run_stabilization(
    model: ModelSpec,
    basis_spec: BasisSpec,
    alpha_grid,
    threads: int = 1,
    config: Config = DEFAULT,
) -> tuple[StabilizationData, list[StableWindow], list[AvoidedCrossing], BasisSet]:
    basis = build_basis(basis_spec)
    data = sweep(model, basis, alpha_grid, threads=threads)
    windows, crossings = detect_windows(data, config=config)
    return data, windows, crossings, basis


def guard_fit_range(
    root_index: int,
    indices,
    crossings,
    force: bool = False,
) -> AvoidedCrossing | None:
    """Refuse (unless forced) a fit whose grid range spans an avoided
    crossing the fitted curve participates in. Returns the crossing when
    the fit proceeds under force, so callers can mark the result."""
    if not indices:
        raise ValidationError("empty point selection")
    lo, hi = min(indices), max(indices)
    for c in crossings:
        if root_index in c.participants and lo <= c.grid_index <= hi:
            if force:
                return c
            raise CrossingGuardError(
                f"selected points [{lo}, {hi}] span an avoided crossing at "
                f"alpha={c.alpha_at_min_gap:.6g} (grid index {c.grid_index}); "
                f"a fraction fitted across the crossing mixes two branches. "
                f"Re-submit with force=true to fit anyway.",
                crossing=c,
            )
    return None


def make_fit(
    data: StabilizationData,
    window: StableWindow,
    crossings,
    point_indices=None,
    order: int | None = None,
    force: bool = False,
    config: Config = DEFAULT,
):
    """Fit one window (or an explicit brush selection on its curve).

    Returns (fraction, absolute_indices, diagnostics, forced_crossing).
    """
    if point_indices is not None:
        idx = sorted(int(i) for i in point_indices)
        if not idx:
            raise ValidationError("empty point selection")
        if idx[0] < 0 or idx[-1] >= len(data.alpha_grid):
            raise ValidationError("point index out of range")
    else:
        idx = list(window.point_indices)
    hit = guard_fit_range(window.root_index, idx, crossings, force=force)
    alphas = data.alpha_grid[idx]
    energies = data.curves[window.root_index, idx]
    cf, rel = schlessinger.fit_window(alphas, energies, order=order, config=config)
    abs_idx = tuple(idx[r] for r in rel)
    w_alphas, w_energies = window_points(data, window)
    span = float(w_alphas[-1] - w_alphas[0]) if len(w_alphas) > 1 else 0.0
    diagnostics = schlessinger.diagnose(cf, w_alphas, w_energies, span, config=config)
    return cf, abs_idx, diagnostics, hit


def default_region(window: StableWindow) -> tuple[tuple[float, float], tuple[float, float]]:
    """Search region for stationary points seeded from one window's fit.

    The plateau's analytic continuation usually turns stationary below the
    window in alpha and at moderate theta, so the alpha interval is the
    window widened by 30% each way and theta spans (0, 0.7].
    """
    lo, hi = window.alpha_range
    return ((max(0.2, 0.7 * lo), 1.3 * hi), (0.0, 0.7))


def resonance_pipeline(
    session: Session,
    model: ModelSpec,
    basis_spec: BasisSpec,
    alpha_grid,
    threads: int = 1,
    config: Config = DEFAULT,
) -> Session:
    """The full chain: sweep, windows, per-window fits, stationary points."""
    data, windows, crossings, _ = run_stabilization(
        model, basis_spec, alpha_grid, threads=threads, config=config
    )
    session.set_stabilization(data, windows, crossings)
    for wid, window in session.windows.items():
        if len(window.point_indices) < 3:
            continue
        cf, abs_idx, diag, _ = make_fit(data, window, crossings, config=config)
        fit_rec = session.add_fit(cf, abs_idx, window_id=wid, diagnostics=diag)
        found = find_stationary(cf, default_region(window), window_id=wid, config=config)
        if isinstance(found, NotFoundResult):
            continue
        for point in found:
            session.add_stationary(point, fit_id=fit_rec.id)
    return session


def crosscheck_point(
    model: ModelSpec,
    basis_spec: BasisSpec,
    point: StationaryPoint,
    config: Config = DEFAULT,
) -> tuple[UcsStationaryPoint, float]:
    """Re-derive one stationary point by direct diagonalization."""
    fn = model_matrix_fn(model, build_basis(basis_spec))
    ucs_pt = ucs_stationary(fn, seed=point.eta_star, seed_energy=point.energy, config=config)
    return ucs_pt, abs(ucs_pt.energy - point.energy)


def run_landscape(
    model: ModelSpec,
    basis_spec: BasisSpec,
    seed_energy: complex,
    alpha_grid=None,
    theta_grid=None,
    config: Config = DEFAULT,
) -> DerivativeLandscape:
    if alpha_grid is None:
        alpha_grid = np.linspace(config.alpha_start, config.alpha_stop, config.landscape_alpha_count)
    if theta_grid is None:
        theta_grid = np.linspace(0.0, config.landscape_theta_stop, config.landscape_theta_count)
    fn = model_matrix_fn(model, build_basis(basis_spec))
    return derivative_landscape(fn, alpha_grid, theta_grid, seed_energy, config=config)


def ucs_point_to_dict(p: UcsStationaryPoint) -> dict:
    return {
        "eta_star": {"alpha": float(p.eta_star.alpha), "theta": float(p.eta_star.theta)},
        "energy": [float(p.energy.real), float(p.energy.imag)],
        "derivative_theta": float(p.derivative_theta),
        "derivative_alpha": float(p.derivative_alpha),
        "rounds": int(p.rounds),
        "evaluations": int(p.evaluations),
    }


def crosscheck_doc(
    stationary_id: str, point: StationaryPoint, ucs_pt: UcsStationaryPoint, difference: float
) -> dict:
    from .session import stationary_to_dict

    rational = stationary_to_dict(point)
    rational["theta_cross_section"] = None
    rational["alpha_cross_section"] = None
    return {
        "stationary_id": stationary_id,
        "rational": rational,
        "diagonalized": ucs_point_to_dict(ucs_pt),
        "difference": float(difference),
    }


def landscape_doc(ls: DerivativeLandscape, include_grids: bool = False) -> dict:
    it, jt = ls.argmin_d_theta()
    ia, ja = ls.argmin_d_alpha()
    doc = {
        "alphas": [float(a) for a in ls.alphas],
        "thetas": [float(t) for t in ls.thetas],
        "min_d_theta": {
            "alpha": float(ls.alphas[it]),
            "theta": float(ls.thetas[jt]),
            "value": float(ls.d_theta[it][jt]),
        },
        "min_d_alpha": {
            "alpha": float(ls.alphas[ia]),
            "theta": float(ls.thetas[ja]),
            "value": float(ls.d_alpha[ia][ja]),
        },
    }
    if include_grids:
        doc["d_theta"] = [[float(v) for v in row] for row in ls.d_theta]
        doc["d_alpha"] = [[float(v) for v in row] for row in ls.d_alpha]
    return doc


def not_found_doc(nf: NotFoundResult) -> dict:
    return {
        "alphas": [float(a) for a in nf.alphas],
        "thetas": [float(t) for t in nf.thetas],
        "derivative_magnitude": [[float(v) for v in row] for row in nf.derivative_magnitude],
    }
