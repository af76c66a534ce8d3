"""Stabilization sweeps, window proposal, and avoided-crossing detection."""

import numpy as np
import pytest

from stabres.config import DEFAULT
from stabres.errors import ValidationError
from stabres.hamiltonian import HARMONIC_OSCILLATOR, BasisSpec, ModelSpec, build_basis
from stabres.session import import_stabilization, stabilization_csv
from stabres.stabilization import (
    StabilizationData,
    StableWindow,
    detect_windows,
    sweep,
    window_points,
)


def _data(alphas, curves, quality=None, source="computed"):
    alphas = np.asarray(alphas, dtype=float)
    curves = np.asarray(curves, dtype=float)
    if quality is None:
        quality = np.ones(len(alphas) - 1)
    return StabilizationData(
        alpha_grid=alphas, curves=curves, tracking_quality=quality, source=source
    )


def hyperbolic_pair(n=21, lo=0.9, hi=1.1, center=1.0, gap=1e-2):
    """Two levels repelling around `center` with minimum separation 2*gap."""
    alphas = np.linspace(lo, hi, n)
    half = np.sqrt((alphas - center) ** 2 + gap**2)
    return _data(alphas, [-half, half])


def flat_crossing(n=41, k=0.008, g=1e-4):
    """Two flat levels with one sharp interior avoided crossing at alpha = 1."""
    alphas = np.linspace(0.0, 2.0, n)
    half = np.sqrt((k * (alphas - 1.0)) ** 2 + g**2)
    return _data(alphas, [1.5 - half, 1.5 + half])


def test_hyperbolic_crossing_position_and_gap():
    data = hyperbolic_pair()
    windows, crossings = detect_windows(data)
    assert len(crossings) == 1
    c = crossings[0]
    step = data.alpha_grid[1] - data.alpha_grid[0]
    assert c.root_pair == (0, 1)
    assert abs(c.alpha_at_min_gap - 1.0) <= step + 1e-12
    assert c.min_gap == pytest.approx(2e-2, abs=1e-6)
    assert data.alpha_grid[c.grid_index] == pytest.approx(c.alpha_at_min_gap)
    assert c.participants == (0, 1)


def test_constant_curve_gives_full_zero_flatness_window():
    alphas = np.linspace(0.5, 1.5, 15)
    data = _data(alphas, [np.full(15, 2.0), 5.0 + 3.0 * alphas])
    windows, crossings = detect_windows(data)
    assert crossings == []
    assert len(windows) == 1
    w = windows[0]
    assert w.root_index == 0
    assert w.point_indices == tuple(range(15))
    assert w.flatness == 0.0
    assert w.alpha_range == (0.5, 1.5)


def test_kinetic_sweep_follows_inverse_square_law():
    model = ModelSpec.kinetic_only()
    basis = build_basis(BasisSpec(kind=HARMONIC_OSCILLATOR, size=8))
    alphas = np.linspace(0.8, 1.2, 11)
    data = sweep(model, basis, alphas)
    assert data.curves.shape == (8, 11)
    ref = data.curves[:, 5] * alphas[5] ** 2  # E_n(alpha) * alpha^2 is constant
    for j, a in enumerate(alphas):
        assert np.allclose(data.curves[:, j] * a**2, ref, rtol=1e-10)
    assert np.all(data.tracking_quality > 0.99)


def test_harmonic_sweep_curves_are_stationary_at_matched_width():
    model = ModelSpec.pure_harmonic()
    basis = build_basis(BasisSpec(kind=HARMONIC_OSCILLATOR, size=40))
    alphas = np.linspace(0.95, 1.05, 21)
    data = sweep(model, basis, alphas)
    # the variational ground-state curve is minimal where the basis width
    # matches the oscillator, at alpha = 1
    i = int(np.argmin(data.curves[0]))
    assert abs(alphas[i] - 1.0) <= alphas[1] - alphas[0]
    assert data.curves[0, i] == pytest.approx(0.5, abs=1e-10)


def test_sweep_is_deterministic_and_thread_invariant():
    model = ModelSpec.benchmark()
    basis = build_basis(BasisSpec(kind=HARMONIC_OSCILLATOR, size=16))
    alphas = np.linspace(0.7, 1.3, 13)
    one = sweep(model, basis, alphas, threads=1)
    two = sweep(model, basis, alphas, threads=4)
    assert np.array_equal(one.curves, two.curves)
    assert np.array_equal(one.tracking_quality, two.tracking_quality)


def test_sweep_needs_ten_grid_points():
    model = ModelSpec.kinetic_only()
    basis = build_basis(BasisSpec(kind=HARMONIC_OSCILLATOR, size=4))
    with pytest.raises(ValidationError):
        sweep(model, basis, np.linspace(0.8, 1.2, 9))


def test_detect_windows_needs_ten_grid_points():
    alphas = np.linspace(0.9, 1.1, 9)
    data = _data(alphas, [np.full(9, 1.0)])
    with pytest.raises(ValidationError):
        detect_windows(data)


def test_guard_excludes_neighborhood_of_crossing_for_participants():
    data = flat_crossing()
    windows, crossings = detect_windows(data)
    assert len(crossings) == 1
    c = crossings[0]
    assert c.grid_index == 20
    guard = set(range(c.grid_index - DEFAULT.guard_steps, c.grid_index + DEFAULT.guard_steps + 1))
    assert len(windows) == 4  # both flat levels, both sides of the crossing
    for w in windows:
        if w.root_index in c.participants:
            assert not guard.intersection(w.point_indices)
    sides = {(w.root_index, w.point_indices[0], w.point_indices[-1]) for w in windows}
    assert sides == {(0, 0, 17), (0, 23, 40), (1, 0, 17), (1, 23, 40)}


def test_flatness_tolerance_controls_window_membership():
    alphas = np.linspace(0.0, 1.0, 21)
    slope = 0.02
    data = _data(alphas, [slope * alphas])
    strict_windows, _ = detect_windows(data, flatness_tol=0.01)
    loose_windows, _ = detect_windows(data, flatness_tol=0.05)
    assert strict_windows == []
    assert len(loose_windows) == 1
    assert loose_windows[0].flatness == pytest.approx(slope, rel=1e-9)


def test_min_points_filters_short_segments():
    data = flat_crossing()
    few, _ = detect_windows(data, min_points=12)
    many, _ = detect_windows(data, min_points=19)
    assert len(few) == 4
    assert many == []


def test_windows_sorted_by_flatness():
    alphas = np.linspace(0.0, 2.0, 41)
    flat = np.full(41, 1.0)
    gentle = 2.0 + 0.005 * alphas
    data = _data(alphas, [flat, gentle])
    windows, _ = detect_windows(data)
    assert [w.root_index for w in windows] == [0, 1]
    assert windows[0].flatness <= windows[1].flatness


def test_window_points_match_selection():
    data = flat_crossing()
    windows, _ = detect_windows(data)
    w = windows[0]
    alphas, energies = window_points(data, w)
    assert np.array_equal(alphas, data.alpha_grid[list(w.point_indices)])
    assert np.array_equal(energies, data.curves[w.root_index, list(w.point_indices)])


def test_imported_data_detects_like_computed(tmp_path):
    data = flat_crossing()
    path = tmp_path / "curves.csv"
    path.write_text(stabilization_csv(data), encoding="utf-8")
    loaded = import_stabilization(str(path))
    assert np.array_equal(loaded.alpha_grid, data.alpha_grid)
    assert np.array_equal(loaded.curves, data.curves)
    w1, c1 = detect_windows(data)
    w2, c2 = detect_windows(loaded)
    assert w1 == w2
    assert c1 == c2


def test_stabilization_data_validation():
    with pytest.raises(ValidationError):
        _data([1.0], [[2.0]])
    with pytest.raises(ValidationError):
        _data([1.0, 0.9], [[2.0, 2.0]])
    with pytest.raises(ValidationError):
        _data([1.0, 1.1], [[2.0, np.inf]])
    with pytest.raises(ValidationError):
        StabilizationData(
            alpha_grid=np.array([1.0, 1.1]),
            curves=np.array([[2.0, 2.0]]),
            tracking_quality=np.array([1.5]),
        )
    with pytest.raises(ValidationError):
        StableWindow(root_index=0, alpha_range=(1.0, 1.2), point_indices=(3, 5), flatness=0.0)
