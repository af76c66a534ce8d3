"""Shared fixtures: the built-in benchmark pipeline run once per session."""

from __future__ import annotations

import time
from pathlib import Path

import pytest

from stabres.hamiltonian import ModelSpec, build_basis
from stabres.pipeline import parse_basis, parse_grid, resonance_pipeline
from stabres.session import Session

FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture(scope="session")
def bench_model() -> ModelSpec:
    return ModelSpec.benchmark()


@pytest.fixture(scope="session")
def bench_basis_spec():
    return parse_basis("ho:60")


@pytest.fixture(scope="session")
def bench_basis(bench_basis_spec):
    return build_basis(bench_basis_spec)


@pytest.fixture(scope="session")
def bench_grid():
    return parse_grid("0.6:1.6:101")


@pytest.fixture(scope="session")
def bench_run(bench_model, bench_basis_spec, bench_grid):
    """Single-threaded end-to-end pipeline on the benchmark; returns
    (session, elapsed_seconds)."""
    session = Session(id="bench")
    t0 = time.perf_counter()
    resonance_pipeline(session, bench_model, bench_basis_spec, bench_grid, threads=1)
    elapsed = time.perf_counter() - t0
    return session, elapsed
