"""
Scenario geometry, path loss and seeded Rayleigh channel generation.

Every random draw goes through numpy's Philox counter-based generator so a
given (config, seed) pair always produces the same channels.
"""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np

from src.errors import StructuralError
from src.model.geometry import Geometry
from src.model.network_model import ChannelSet, SystemConfig
from src.utils.conversion_utils import db_to_linear

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """
    Build a Philox-backed generator.

    Args:
        seed: Unsigned 64-bit integer, SeedSequence, or an existing generator
            (returned unchanged)

    Returns:
        np.random.Generator: Generator seeded deterministically
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    if int(seed) < 0:
        raise StructuralError(f"seed must be an unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Circularly-symmetric complex Gaussian draws with unit variance."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def place_users(config: SystemConfig, seed: SeedLike) -> Geometry:
    """
    Drop K users uniformly inside the configured user region.

    A degenerate box (min == max on some axis) is allowed; every user then
    sits on that coordinate exactly.
    """
    if config.K < 1:
        raise StructuralError("place_users needs at least one user")
    rng = make_rng(seed)
    low, high = (np.asarray(corner, dtype=float) for corner in config.geometry.user_region)
    positions = low + (high - low) * rng.random((config.K, 3))
    # Pin flat axes so float noise cannot move users off the plane
    flat = low == high
    positions[:, flat] = low[flat]
    return config.geometry.with_users(positions.tolist())


def path_loss(distance: float, alpha: float, intercept_dB: float) -> float:
    """
    Distance-dependent power gain.

    Args:
        distance (float): Link length in meters
        alpha (float): Path-loss exponent
        intercept_dB (float): Gain at the 1 m reference distance

    Returns:
        float: Linear gain 10^(intercept/10) * d^-alpha
    """
    if not distance > 0:
        raise StructuralError(f"path loss needs a positive distance, got {distance}")
    return db_to_linear(intercept_dB) * distance ** (-alpha)


def _distance(a: Sequence[float], b: Sequence[float]) -> float:
    return float(np.linalg.norm(np.subtract(a, b)))


def link_gains(config: SystemConfig, geometry: Geometry) -> Tuple[List[float], List[List[float]], List[float]]:
    """
    Path-loss gains of every link.

    Returns:
        (bs_ris, ris_user, bs_user) where ris_user[k][l] is the RIS l -> user k gain
    """
    if geometry.user_pos is None:
        raise StructuralError("geometry has no user positions; call place_users first")
    if len(geometry.user_pos) != config.K:
        raise StructuralError(f"geometry has {len(geometry.user_pos)} users, config has K={config.K}")
    if geometry.num_ris != config.L:
        raise StructuralError(f"geometry has {geometry.num_ris} RIS positions, config has L={config.L}")

    exponents = config.pathloss_exponents
    intercept = config.pathloss_intercept_dB
    bs_ris = [path_loss(_distance(geometry.bs_pos, p), exponents.bs_ris, intercept) for p in geometry.ris_pos]
    ris_user = [
        [path_loss(_distance(p, u), exponents.ris_user, intercept) for p in geometry.ris_pos]
        for u in geometry.user_pos
    ]
    bs_user = [path_loss(_distance(geometry.bs_pos, u), exponents.bs_user, intercept) for u in geometry.user_pos]
    return bs_ris, ris_user, bs_user


def generate_channels(config: SystemConfig, geometry: Geometry, seed: SeedLike) -> ChannelSet:
    """
    Draw one Rayleigh fading realization on top of the path loss.

    Each entry is sqrt(gain) * c with c ~ CN(0, 1). Draw order is fixed
    (G_1..G_L, then h_{l,k} user by user, then g_k) so the realization only
    depends on the seed.
    """
    bs_ris, ris_user, bs_user = link_gains(config, geometry)
    rng = make_rng(seed)

    G = tuple(
        np.sqrt(bs_ris[l]) * complex_normal(rng, (config.N[l], config.M))
        for l in range(config.L)
    )
    h = tuple(
        tuple(np.sqrt(ris_user[k][l]) * complex_normal(rng, config.N[l]) for l in range(config.L))
        for k in range(config.K)
    )
    g = np.sqrt(np.asarray(bs_user))[:, None] * complex_normal(rng, (config.K, config.M))

    logger.debug("Generated channels: mean direct gain %.3e, mean BS-RIS gain %.3e",
                 float(np.mean(bs_user)), float(np.mean(bs_ris)) if bs_ris else 0.0)
    return ChannelSet(G=G, h=h, g=g)
