import pytest
import os
import sys

import numpy as np

# Import the package modules from the project root
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from database.schemas import RunConfig, load_run_config
from services.geometry import DomainParams, RoughProfile


@pytest.fixture
def default_config() -> RunConfig:
    """Defaults exactly as a minimal config file yields them"""
    return load_run_config({})


@pytest.fixture
def study_config() -> RunConfig:
    """configs/default_study.yaml as shipped"""
    from commands.options import parse_config
    return parse_config(os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs",
                                     "default_study.yaml"))


@pytest.fixture
def small_config(tmp_path) -> RunConfig:
    """Coarse study that keeps end-to-end runs short"""
    return load_run_config({
        "name": "small",
        "horizon": 0.2,
        "euler": {"nx1": 16, "nx2": 32, "dt": 0.02, "snapshot_stride": 5},
        "cell": {"n_z1": 16, "n_z2": 28},
        "ns": {"ns": 49, "min_x1_points": 32, "points_per_wavelength": 8, "progress_every": 0},
        "diagnostics": {"nodes_per_panel": 12, "x1_points_per_wavelength": 8, "min_x1_points": 32},
        "sweep": {"epsilons": [0.25, 0.125, 0.0625], "workers": 1},
        "output_dir": str(tmp_path),
    })


@pytest.fixture
def default_profile() -> RoughProfile:
    # eta = 2 + cos(2 pi z)
    return RoughProfile.default()


@pytest.fixture
def domain(default_profile) -> DomainParams:
    return DomainParams(epsilon=0.125, n0=2, profile=default_profile)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def output_dir(tmp_path) -> str:
    """Fresh output directory; the run database lands here"""
    return str(tmp_path / "runs")
