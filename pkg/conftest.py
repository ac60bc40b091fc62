"""
Shared fixtures: small synthetic instances with strong reflected links, the
evaluation-setup config and scenario files.
"""

import json

import numpy as np
import pytest

from src.model.channel import complex_normal, make_rng
from src.model.geometry import Geometry
from src.model.network_model import ChannelSet, SystemConfig
from src.utils.scenario_loader import default_config


def _geometry(L):
    return Geometry(
        bs_pos=(0.0, 0.0, 10.0),
        ris_pos=tuple((10.0 * (l + 1), 10.0, 5.0) for l in range(L)),
        user_region=((0.0, 0.0, 0.0), (5.0, 5.0, 0.0)),
    )


def build_config(M=3, K=2, L=2, N=2, gamma=1.0, sigma2=0.1, P_max=1e4, P_RE=1.0, eta=0.5, rho=1.0, P_BS=0.0):
    N = (N,) * L if isinstance(N, int) else tuple(N)
    return SystemConfig(
        M=M, K=K, L=L, N=N, eta=eta, P_max=P_max, P_BS=P_BS, P_RE=P_RE,
        rho=(rho,) * L, sigma2=(sigma2,) * K, gamma=(gamma,) * K, geometry=_geometry(L),
    )


def build_channels(config, seed=0, direct_scale=0.3, reflect_scale=1.0, ris_user_scale=1.0):
    rng = make_rng(seed)
    G = tuple(reflect_scale * complex_normal(rng, (n, config.M)) for n in config.N)
    h = tuple(
        tuple(ris_user_scale * complex_normal(rng, n) for n in config.N)
        for _ in range(config.K)
    )
    g = direct_scale * complex_normal(rng, (config.K, config.M))
    return ChannelSet(G=G, h=h, g=g)


@pytest.fixture
def make_config():
    """Factory for small SystemConfigs (synthetic geometry, linear units)."""
    return build_config


@pytest.fixture
def make_channels():
    """Factory for synthetic channels where the reflected links dominate."""
    return build_channels


@pytest.fixture
def small_config():
    return build_config()


@pytest.fixture
def small_channels(small_config):
    return build_channels(small_config, seed=7)


@pytest.fixture
def evaluation_config():
    """The evaluation-setup scenario (M=10, K=6, L=3, N=12, R=2)."""
    return default_config()


@pytest.fixture
def tiny_scenario():
    """A scenario object that solves in well under a second per method."""
    return {
        "M": 3,
        "K": 2,
        "L": 1,
        "N": 2,
        "rate": 1,
        "P_max": "40 dBm",
        "pathloss_intercept_dB": "0 dB",
    }


@pytest.fixture
def scenario_file(tmp_path, tiny_scenario):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(tiny_scenario), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
