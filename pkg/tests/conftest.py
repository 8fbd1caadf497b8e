"""
Shared pytest fixtures for optosqueeze tests.

This module provides fixtures for:
- The paper2017 preset as config and derived parameters
- Solved steady states and spectral models at landmark operating points
- Seeded random generators for property tests
- Temporary config files and output directories
"""

from pathlib import Path
from typing import Callable, Generator

import numpy as np
import pytest

from src.params import SystemConfig, SystemParams, derive_params, load_preset
from src.spectra import SpectralModel
from src.steady_state import SteadyState, solve_steady_state


# ============================================================================
# Parameter Fixtures
# ============================================================================

@pytest.fixture
def paper_config() -> SystemConfig:
    """The paper2017 preset: 100 uW, g_q/g_l = 1e-2, Delta = omega_m."""
    return load_preset("paper2017")


@pytest.fixture
def paper_params(paper_config: SystemConfig) -> SystemParams:
    return derive_params(paper_config)


@pytest.fixture
def params_at(paper_config: SystemConfig) -> Callable[..., SystemParams]:
    """Factory: derived parameters with some preset fields overridden."""

    def build(**changes) -> SystemParams:
        return derive_params(paper_config.replace(**changes))

    return build


@pytest.fixture
def undriven_params(params_at) -> SystemParams:
    return params_at(input_power=0.0)


# ============================================================================
# Steady State / Spectral Model Fixtures
# ============================================================================

@pytest.fixture
def model_at(params_at) -> Callable[..., SpectralModel]:
    """Factory: spectral model of the lowest branch at overridden parameters."""

    def build(**changes) -> SpectralModel:
        params = params_at(**changes)
        ss = solve_steady_state(params)[0]
        return SpectralModel.from_steady_state(params, ss)

    return build


@pytest.fixture
def undriven_model(model_at) -> SpectralModel:
    return model_at(input_power=0.0)


@pytest.fixture
def paper_model(model_at) -> SpectralModel:
    return model_at()


# ============================================================================
# Randomness
# ============================================================================

@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so property tests are reproducible."""
    return np.random.default_rng(20171109)


@pytest.fixture
def random_steady_state(rng, paper_params) -> Callable[[], SteadyState]:
    """Factory: a steady state with random, not necessarily self-consistent, fields."""

    def draw() -> SteadyState:
        intensity = 10.0 ** rng.uniform(4.0, 8.0)
        amplitude = np.sqrt(intensity) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        return SteadyState(
            a_s=complex(amplitude),
            intensity=intensity,
            x_s=0.0,
            x2_s=1.0,
            p2_s=1.0,
            omega_m_tilde=paper_params.omega_m * rng.uniform(0.2, 2.0),
            Delta_tilde=paper_params.omega_m * rng.uniform(-2.0, 2.0),
            Delta_ss=0.0,
            G_tilde=paper_params.g_l * rng.uniform(0.5, 1.5),
            X_s=float(np.sqrt(2.0) * amplitude.real),
            P_s=float(np.sqrt(2.0) * amplitude.imag),
        )

    return draw


# ============================================================================
# File Fixtures
# ============================================================================

@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture
def write_config(tmp_path: Path) -> Generator[Callable[[str], Path], None, None]:
    """Factory: write config text to a temporary .env file and return its path."""
    counter = {"n": 0}

    def write(text: str) -> Path:
        counter["n"] += 1
        path = tmp_path / f"config_{counter['n']}.env"
        path.write_text(text, encoding="utf-8")
        return path

    yield write
