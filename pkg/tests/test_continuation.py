"""Analytic continuation: trajectories, stationary points, branch points."""

import cmath
import math
from dataclasses import replace

import numpy as np
import pytest

from stabres.config import DEFAULT
from stabres.errors import TrajectoryDegenerateError, ValidationError
from stabres.continuation import (
    ALPHA_TRAJECTORY,
    THETA_TRAJECTORY,
    BranchPointEstimate,
    NotFoundResult,
    StationaryPoint,
    Trajectory,
    alpha_trajectory,
    cusp_spacing,
    delta_gap,
    find_stationary,
    puiseux_fit,
    theta_trajectory,
)
from stabres.hamiltonian import ScalingParameter
from stabres.schlessinger import fit

# C(x) = ((x-1.1)^2 + 0.04)/(x - 0.5): its derivative vanishes at
# x = 1.1 + (-1.2 + sqrt(1.6))/2, with value C(x*) real and positive.
STAT_ALPHA = 1.1 + (-1.2 + math.sqrt(1.6)) / 2.0
STAT_ENERGY = ((STAT_ALPHA - 1.1) ** 2 + 0.04) / (STAT_ALPHA - 0.5)


def rational_cf():
    xs = np.linspace(0.6, 2.4, 9)
    return fit([(x, ((x - 1.1) ** 2 + 0.04) / (x - 0.5)) for x in xs])


def reciprocal_cf():
    return fit([(x, 1.0 / x) for x in (0.5, 1.0, 2.0, 4.0)])


def test_theta_trajectory_closed_form():
    cf = reciprocal_cf()
    thetas = np.linspace(0.0, 0.5, 11)
    traj = theta_trajectory(cf, 2.0, thetas)
    assert traj.kind == THETA_TRAJECTORY
    assert traj.fixed_value == 2.0
    assert traj.pole_at == ()
    for t, e in zip(traj.grid, traj.energies):
        assert abs(e - 0.5 * cmath.exp(-1j * t)) < 1e-10


def test_alpha_trajectory_closed_form():
    cf = reciprocal_cf()
    alphas = np.linspace(0.8, 3.0, 12)
    traj = alpha_trajectory(cf, 0.3, alphas)
    assert traj.kind == ALPHA_TRAJECTORY
    for a, e in zip(traj.grid, traj.energies):
        assert abs(e - 1.0 / (a * cmath.exp(0.3j))) < 1e-10


def test_trajectory_records_pole_hits():
    cf = fit([(1.0, 1.0), (2.0, -1.0)])  # simple pole at eta = 1.5
    traj = alpha_trajectory(cf, 0.0, np.linspace(1.0, 2.0, 11))
    assert traj.pole_at == (1.5,)
    assert len(traj.grid) == 10
    assert 1.5 not in traj.grid


def test_trajectory_degenerate_when_poles_dominate():
    cf = rational_cf()
    loose = replace(DEFAULT, pole_tol=1e6)
    with pytest.raises(TrajectoryDegenerateError):
        theta_trajectory(cf, 1.2, np.linspace(0.0, 0.5, 11), config=loose)


def test_trajectory_grid_validation():
    cf = reciprocal_cf()
    with pytest.raises(ValidationError):
        theta_trajectory(cf, 1.0, [-0.1, 0.0, 0.1])
    with pytest.raises(ValidationError):
        theta_trajectory(cf, 1.0, [0.0, 0.5, 1.0])  # beyond pi/4
    with pytest.raises(ValidationError):
        alpha_trajectory(cf, 0.1, [-1.0, 1.0, 2.0])
    with pytest.raises(ValidationError):
        alpha_trajectory(cf, 0.9, [1.0, 1.1, 1.2])  # theta beyond pi/4
    with pytest.raises(ValidationError):
        Trajectory(
            kind=THETA_TRAJECTORY,
            fixed_value=1.0,
            grid=(0.2, 0.1),
            energies=(1.0 + 0j, 1.0 + 0j),
            pade_errors=(0.0, 0.0),
        )
    with pytest.raises(ValidationError):
        Trajectory(kind="radial", fixed_value=1.0, grid=(), energies=(), pade_errors=())


def test_find_stationary_newton_locates_real_axis_minimum():
    points = find_stationary(rational_cf(), ((0.9, 1.4), (0.0, 0.2)))
    assert isinstance(points, list) and len(points) == 1
    p = points[0]
    assert p.eta_star.alpha == pytest.approx(STAT_ALPHA, abs=1e-8)
    assert p.eta_star.theta == pytest.approx(0.0, abs=1e-8)
    assert p.energy.real == pytest.approx(STAT_ENERGY, abs=1e-8)
    assert p.energy.imag == 0.0
    assert p.width == 0.0
    assert p.derivative_norm <= DEFAULT.derivative_tol
    assert p.pade_error <= DEFAULT.pade_error_tol


def test_find_stationary_cross_sections_are_local():
    points = find_stationary(rational_cf(), ((0.9, 1.4), (0.0, 0.2)), window_id="w0")
    p = points[0]
    assert p.window_id == "w0"
    ts = p.theta_cross_section
    assert ts is not None and ts.kind == THETA_TRAJECTORY
    assert ts.fixed_value == pytest.approx(p.eta_star.alpha)
    assert max(ts.grid) - min(ts.grid) <= 0.2 * (0.2 - 0.0) + 1e-12
    assert min(ts.grid) <= p.eta_star.theta <= max(ts.grid)
    asec = p.alpha_cross_section
    assert asec is not None and asec.kind == ALPHA_TRAJECTORY
    assert asec.fixed_value == pytest.approx(p.eta_star.theta)
    assert max(asec.grid) - min(asec.grid) <= 0.2 * (1.4 - 0.9) + 1e-12
    assert min(asec.grid) <= p.eta_star.alpha <= max(asec.grid)


def test_find_stationary_alternating_strategy_agrees():
    points = find_stationary(rational_cf(), ((0.9, 1.4), (0.0, 0.2)), strategy="alternating")
    assert isinstance(points, list) and len(points) >= 1
    best = min(points, key=lambda p: abs(p.eta_star.alpha - STAT_ALPHA))
    assert best.eta_star.alpha == pytest.approx(STAT_ALPHA, abs=1e-5)
    assert best.energy.real == pytest.approx(STAT_ENERGY, abs=1e-5)


def test_find_stationary_returns_landscape_when_region_is_empty():
    result = find_stationary(rational_cf(), ((3.0, 4.0), (0.0, 0.2)))
    assert isinstance(result, NotFoundResult)
    assert len(result.alphas) == DEFAULT.seed_grid_alpha
    assert len(result.thetas) == DEFAULT.seed_grid_theta
    assert len(result.derivative_magnitude) == DEFAULT.seed_grid_alpha
    assert all(len(row) == DEFAULT.seed_grid_theta for row in result.derivative_magnitude)
    flat = [v for row in result.derivative_magnitude for v in row]
    assert all(v > 0 for v in flat)


def test_find_stationary_region_and_strategy_validation():
    cf = rational_cf()
    with pytest.raises(ValidationError):
        find_stationary(cf, ((1.4, 0.9), (0.0, 0.2)))
    with pytest.raises(ValidationError):
        find_stationary(cf, ((-0.5, 1.0), (0.0, 0.2)))
    with pytest.raises(ValidationError):
        find_stationary(cf, ((0.9, 1.4), (0.3, 0.2)))
    with pytest.raises(ValidationError):
        find_stationary(cf, ((0.9, 1.4), (0.0, 1.0)))  # beyond pi/4
    with pytest.raises(ValidationError):
        find_stationary(cf, ((0.9, 1.4), (0.0, 0.2)), strategy="gradient")


def test_chain_rule_between_parameter_and_eta_derivatives():
    cf = fit([(x, math.exp(x) / (x + 2.0)) for x in np.linspace(0.8, 1.8, 9)])
    from stabres.schlessinger import evaluate

    a, t = 1.2, 0.1
    eta = a * cmath.exp(1j * t)
    c1 = evaluate(cf, eta).derivative
    h = 1e-6
    de_da = (
        evaluate(cf, (a + h) * cmath.exp(1j * t)).value
        - evaluate(cf, (a - h) * cmath.exp(1j * t)).value
    ) / (2 * h)
    de_dt = (
        evaluate(cf, a * cmath.exp(1j * (t + h))).value
        - evaluate(cf, a * cmath.exp(1j * (t - h))).value
    ) / (2 * h)
    assert abs(de_da - cmath.exp(1j * t) * c1) < 1e-6 * max(1.0, abs(de_da))
    assert abs(de_dt - 1j * eta * c1) < 1e-6 * max(1.0, abs(de_dt))


def _pair_samples(eta_bp, e_bp, b, radii, noise=None):
    rng = np.random.default_rng(5)
    samples = []
    for k, r in enumerate(radii):
        eta = eta_bp + r * cmath.exp(1j * (0.3 + 0.7 * k))
        root = b * cmath.sqrt(eta - eta_bp)
        ep, em = e_bp + root, e_bp - root
        if noise:
            ep += noise * (rng.standard_normal() + 1j * rng.standard_normal())
            em += noise * (rng.standard_normal() + 1j * rng.standard_normal())
        samples.append((eta, ep, em))
    return samples


def test_puiseux_fit_recovers_exact_square_root_pair():
    eta_bp = 0.9 + 0.05j
    samples = _pair_samples(eta_bp, 1.0, 2.0, (0.01, 0.02, 0.03, 0.04, 0.05))
    est = puiseux_fit(samples)
    assert isinstance(est, BranchPointEstimate)
    assert abs(est.eta_bp - eta_bp) < 1e-10
    assert abs(est.energy_bp - 1.0) < 1e-10
    assert abs(est.coefficient_b) == pytest.approx(2.0, abs=1e-8)
    assert est.residual < 1e-10
    assert not est.poor_fit
    assert est.alpha_bp == pytest.approx(abs(eta_bp))
    assert est.theta_bp == pytest.approx(math.atan2(0.05, 0.9))


def test_puiseux_fit_flags_noisy_samples():
    samples = _pair_samples(0.9 + 0.05j, 1.0, 2.0, (0.01, 0.02, 0.03, 0.04, 0.05), noise=0.05)
    est = puiseux_fit(samples)
    assert est.poor_fit
    assert est.residual > 1e-3


def test_puiseux_fit_input_validation():
    samples = _pair_samples(0.9 + 0.05j, 1.0, 2.0, (0.01, 0.02, 0.03))
    with pytest.raises(ValidationError):
        puiseux_fit(samples)
    flat = [(0.9 + 0.01 * k, 1.5 + 0j, 0.5 + 0j) for k in range(5)]
    with pytest.raises(ValidationError, match="no eta dependence"):
        puiseux_fit(flat)


def test_delta_gap_reproduces_eta_displacement():
    for alpha_sp, eta_bp, theta in (
        (1.0, 1.0134 + 0.0032j, 0.05),
        (1.3, 0.9 + 0.05j, 0.3),
        (0.7, 0.8 - 0.1j, 0.0),
    ):
        delta = delta_gap(alpha_sp, eta_bp, theta)
        lhs = eta_bp * delta
        rhs = alpha_sp * cmath.exp(1j * theta) - eta_bp
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_cusp_spacing_finds_tightest_step():
    gaps = [1.0, 0.5, 0.2, 0.05, 0.01, 0.05, 0.2, 0.5, 1.0]
    energies = [0.0 + 0.0j]
    for g in gaps:
        energies.append(energies[-1] + g * cmath.exp(0.4j))
    traj = Trajectory(
        kind=THETA_TRAJECTORY,
        fixed_value=1.0,
        grid=tuple(np.linspace(0.0, 0.5, len(energies))),
        energies=tuple(energies),
        pade_errors=tuple(0.0 for _ in energies),
    )
    spacing, idx = cusp_spacing(traj)
    assert idx == 4
    assert spacing[idx] == pytest.approx(0.01)
    assert len(spacing) == len(energies) - 1

    empty = Trajectory(
        kind=THETA_TRAJECTORY, fixed_value=1.0, grid=(), energies=(), pade_errors=()
    )
    spacing, idx = cusp_spacing(empty)
    assert len(spacing) == 0
    assert idx == -1


def test_stationary_point_invariants():
    eta = ScalingParameter(alpha=1.0, theta=0.1)
    with pytest.raises(ValidationError):
        StationaryPoint(
            eta_star=eta, energy=1.0 + 1e-6j, width=0.0, derivative_norm=0.0, pade_error=0.0
        )
    with pytest.raises(ValidationError):
        StationaryPoint(
            eta_star=eta, energy=1.0 - 1e-6j, width=-0.1, derivative_norm=0.0, pade_error=0.0
        )
    ok = StationaryPoint(
        eta_star=eta, energy=1.0 - 1e-6j, width=2e-6, derivative_norm=0.0, pade_error=0.0
    )
    assert ok.width == 2e-6
