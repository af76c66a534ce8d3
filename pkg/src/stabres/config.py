"""Declared numeric defaults and their file-based overrides.

Every threshold the pipeline uses is named here so `--show-config` can
print it and a `key = value` config file can override it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class Config:
    # stabilization
    flatness_tol: float = 1e-2
    min_points: int = 12
    guard_steps: int = 2
    gap_noise_factor: float = 5.0
    gap_level_fraction: float = 0.25
    # schlessinger
    max_fit_order: int = 25
    breakdown_tol: float = 1e-14
    pole_tol: float = 1e-30
    density_spacing_fraction: float = 1e-3
    loo_ratio: float = 1e3
    # continuation
    derivative_tol: float = 1e-8
    pade_error_tol: float = 1e-3
    dedup_tol: float = 1e-6
    newton_max_iter: int = 50
    seed_grid_alpha: int = 12
    seed_grid_theta: int = 8
    # width reporting: gamma = width_factor * |Im E|
    width_factor: float = 2.0
    # ucs oracle
    fd_step: float = 1e-4
    scan_round_tol: float = 1e-6
    scan_max_rounds: int = 50
    scan_width: float = 0.04
    ucs_derivative_tol: float = 1e-6
    rotation_band_lo: float = 1.0
    rotation_band_hi: float = 12.0
    # grids
    alpha_start: float = 0.6
    alpha_stop: float = 1.6
    alpha_count: int = 101
    landscape_alpha_count: int = 36
    landscape_theta_stop: float = 0.35
    landscape_theta_count: int = 20
    # execution
    threads: int = 1

    def show(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)!r}")
        return "\n".join(lines)

    def replace(self, **kwargs) -> "Config":
        return dataclasses.replace(self, **kwargs)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(Config)}


def load_config(path: str, base: Config | None = None) -> Config:
    """Parse a `key = value` file; unknown keys are rejected."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _FIELD_TYPES:
                raise ValidationError(f"{path}:{lineno}: unknown config key '{key}'")
            kind = _FIELD_TYPES[key]
            try:
                overrides[key] = int(val) if kind == "int" else float(val)
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: bad value for '{key}': {val}") from exc
    return (base or Config()).replace(**overrides)


DEFAULT = Config()
