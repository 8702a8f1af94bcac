import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mfou import ModelParams, SimConfig

# baseline bivariate parameter set used throughout (daily data, 20 years)
PANEL_A = dict(alpha=(1.32, 1.45), nu=(0.78, 0.79), hurst=(0.19, 0.21), rho=0.94, eta=0.0)
DELTA_OBS = 1.0 / 252


@pytest.fixture
def panel_a_params() -> ModelParams:
    return ModelParams.bivariate(**PANEL_A)


@pytest.fixture
def asym_params() -> ModelParams:
    return ModelParams.bivariate(alpha=(1.32, 1.45), nu=(0.78, 0.79), hurst=(0.19, 0.21), rho=0.94, eta=0.2)


@pytest.fixture
def quick_sim() -> SimConfig:
    # coarse mesh / short warmup: enough for wiring tests, not for bias studies
    return SimConfig(delta_fine=DELTA_OBS / 32, delta_obs=DELTA_OBS, horizon=4.0, warmup_horizon=5.0, seed=123)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240101)
