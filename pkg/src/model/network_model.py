"""
Network model for the multi-RIS assisted downlink.

This module holds the domain value types (scenario constants, channels,
beamformers, RIS states) and the closed-form evaluators for the composite
channel, the per-user SINR, the network power and solution feasibility.
Everything here is immutable and pure, so Monte Carlo workers can share it.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.errors import StructuralError
from src.model.geometry import Geometry
from src.utils.parameters import DEFAULT_FEASIBILITY_TOL, DEFAULT_PATHLOSS_INTERCEPT_DB


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.flags.writeable = False
    return array


def _per_user(values: Sequence[float], count: int, name: str) -> Tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if len(values) != count:
        raise StructuralError(f"{name} needs {count} entries, got {len(values)}")
    return values


@dataclass(frozen=True)
class PathLossExponents:
    """Path-loss exponents of the BS-RIS, RIS-user and BS-user links."""
    bs_ris: float = 2.5
    ris_user: float = 2.4
    bs_user: float = 3.5


@dataclass(frozen=True)
class SystemConfig:
    """
    All scenario constants.

    Powers are linear mW, gamma is linear, positions are meters. Per-user and
    per-RIS lists are stored as tuples of length K and L respectively.
    """
    M: int
    K: int
    L: int
    N: Tuple[int, ...]
    eta: float
    P_max: float
    P_BS: float
    P_RE: float
    rho: Tuple[float, ...]
    sigma2: Tuple[float, ...]
    gamma: Tuple[float, ...]
    geometry: Geometry
    pathloss_exponents: PathLossExponents = field(default_factory=PathLossExponents)
    pathloss_intercept_dB: float = DEFAULT_PATHLOSS_INTERCEPT_DB

    def __post_init__(self):
        if self.M < 1 or self.K < 1 or self.L < 0:
            raise StructuralError(f"need M >= 1, K >= 1, L >= 0; got M={self.M}, K={self.K}, L={self.L}")
        object.__setattr__(self, "N", tuple(int(n) for n in self.N))
        object.__setattr__(self, "rho", _per_user(self.rho, self.L, "rho"))
        object.__setattr__(self, "sigma2", _per_user(self.sigma2, self.K, "sigma2"))
        object.__setattr__(self, "gamma", _per_user(self.gamma, self.K, "gamma"))
        if len(self.N) != self.L:
            raise StructuralError(f"N needs {self.L} entries, got {len(self.N)}")
        if any(n < 1 for n in self.N):
            raise StructuralError(f"every N_l must be >= 1, got {self.N}")
        if not 0.0 < self.eta <= 1.0:
            raise StructuralError(f"eta must lie in (0, 1], got {self.eta}")
        if self.P_max < 0:
            raise StructuralError(f"P_max must be nonnegative, got {self.P_max}")
        if self.P_RE < 0 or self.P_BS < 0:
            raise StructuralError("P_RE and P_BS must be nonnegative")
        if any(not 0.0 < r <= 1.0 for r in self.rho):
            raise StructuralError(f"every rho_l must lie in (0, 1], got {self.rho}")
        if any(s <= 0 for s in self.sigma2):
            raise StructuralError(f"every sigma2_k must be positive, got {self.sigma2}")
        if any(g <= 0 for g in self.gamma):
            raise StructuralError(f"every gamma_k must be positive, got {self.gamma}")
        if self.geometry.num_ris != self.L:
            raise StructuralError(f"geometry has {self.geometry.num_ris} RIS positions, expected {self.L}")

    @property
    def Nhat(self) -> int:
        """Total number of reflecting elements."""
        return int(sum(self.N))

    @property
    def ris_power(self) -> Tuple[float, ...]:
        """Circuit power N_l * P_RE of each RIS."""
        return tuple(n * self.P_RE for n in self.N)

    @property
    def index_sets(self) -> Tuple[np.ndarray, ...]:
        """Positions of each RIS's elements in the stacked element vector."""
        offsets = np.concatenate([[0], np.cumsum(self.N, dtype=int)])
        return tuple(np.arange(offsets[l], offsets[l + 1]) for l in range(self.L))

    def with_users(self, K: int) -> "SystemConfig":
        """Resize the user population; per-user values must be uniform."""
        return replace(
            self,
            K=K,
            sigma2=(_uniform(self.sigma2, "sigma2"),) * K,
            gamma=(_uniform(self.gamma, "gamma"),) * K,
            geometry=replace(self.geometry, user_pos=None),
        )

    def with_gamma(self, gamma: float) -> "SystemConfig":
        return replace(self, gamma=(float(gamma),) * self.K)

    def restrict(self, subset: Sequence[int]) -> "SystemConfig":
        """Keep only the RISs listed in `subset`, in that order."""
        subset = list(subset)
        return replace(
            self,
            L=len(subset),
            N=tuple(self.N[l] for l in subset),
            rho=tuple(self.rho[l] for l in subset),
            geometry=self.geometry.restrict(subset),
        )


def _uniform(values: Tuple[float, ...], name: str) -> float:
    if len(set(values)) != 1:
        raise StructuralError(f"cannot resize users: {name} is not uniform across users")
    return values[0]


@dataclass(frozen=True)
class ChannelSet:
    """
    One fading realization.

    G[l] is the (N_l, M) BS->RIS l matrix, h[k][l] the (N_l,) RIS l->user k
    vector and g the (K, M) array whose row k is the BS->user k vector.
    """
    G: Tuple[np.ndarray, ...]
    h: Tuple[Tuple[np.ndarray, ...], ...]
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "G", tuple(_frozen(G_l) for G_l in self.G))
        object.__setattr__(self, "h", tuple(tuple(_frozen(h_lk) for h_lk in row) for row in self.h))
        object.__setattr__(self, "g", _frozen(np.atleast_2d(self.g)))

        M = self.g.shape[1]
        for l, G_l in enumerate(self.G):
            if G_l.ndim != 2 or G_l.shape[1] != M:
                raise StructuralError(f"G[{l}] has shape {G_l.shape}, expected (N_l, {M})")
        if len(self.h) != self.g.shape[0]:
            raise StructuralError(f"h has {len(self.h)} user rows, g has {self.g.shape[0]}")
        for k, row in enumerate(self.h):
            if len(row) != len(self.G):
                raise StructuralError(f"h[{k}] has {len(row)} RIS entries, expected {len(self.G)}")
            for l, h_lk in enumerate(row):
                if h_lk.shape != (self.G[l].shape[0],):
                    raise StructuralError(f"h[{k}][{l}] has shape {h_lk.shape}, expected ({self.G[l].shape[0]},)")
        arrays = list(self.G) + [h_lk for row in self.h for h_lk in row] + [self.g]
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise StructuralError("channel entries must be finite")

    @property
    def M(self) -> int:
        return self.g.shape[1]

    @property
    def K(self) -> int:
        return self.g.shape[0]

    @property
    def L(self) -> int:
        return len(self.G)

    @property
    def N(self) -> Tuple[int, ...]:
        return tuple(G_l.shape[0] for G_l in self.G)

    def check_matches(self, config: SystemConfig) -> None:
        if (self.M, self.K, self.L, self.N) != (config.M, config.K, config.L, config.N):
            raise StructuralError(
                f"channels (M={self.M}, K={self.K}, N={self.N}) do not match "
                f"config (M={config.M}, K={config.K}, N={config.N})"
            )

    def restrict(self, subset: Sequence[int]) -> "ChannelSet":
        subset = list(subset)
        return ChannelSet(
            G=tuple(self.G[l] for l in subset),
            h=tuple(tuple(row[l] for l in subset) for row in self.h),
            g=self.g,
        )


@dataclass(frozen=True)
class Beamformer:
    """BS beamforming vectors; row k of `w` is omega_k (sqrt-mW per entry)."""
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(np.atleast_2d(self.w)))

    @property
    def transmit_power(self) -> float:
        return float(np.sum(np.abs(self.w) ** 2))

    @classmethod
    def zeros(cls, K: int, M: int) -> "Beamformer":
        return cls(np.zeros((K, M), dtype=complex))


@dataclass(frozen=True)
class ActiveSet:
    """On/off state of every RIS."""
    a: Tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(bool(v) for v in self.a))

    @property
    def L(self) -> int:
        return len(self.a)

    @property
    def indices(self) -> List[int]:
        return [l for l, on in enumerate(self.a) if on]

    @property
    def count(self) -> int:
        return sum(self.a)

    @classmethod
    def all_active(cls, L: int) -> "ActiveSet":
        return cls((True,) * L)

    @classmethod
    def none_active(cls, L: int) -> "ActiveSet":
        return cls((False,) * L)

    @classmethod
    def from_indices(cls, L: int, indices: Sequence[int]) -> "ActiveSet":
        chosen = set(indices)
        return cls(tuple(l in chosen for l in range(L)))


@dataclass(frozen=True)
class PhaseConfig:
    """
    Reflection coefficients theta_l of every RIS.

    theta[l][n] = rho_l * exp(j phi_{l,n}) for an active RIS and 0 otherwise;
    Theta_l is diag(theta[l]).
    """
    theta: Tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(_frozen(np.ravel(t)) for t in self.theta))

    def active_set(self) -> ActiveSet:
        """RIS l is active iff its reflection vector is nonzero."""
        return ActiveSet(tuple(bool(np.linalg.norm(t) > 0) for t in self.theta))

    @classmethod
    def zero_phase(cls, config: SystemConfig, active: ActiveSet) -> "PhaseConfig":
        return cls(tuple(
            np.full(config.N[l], config.rho[l] if active.a[l] else 0.0, dtype=complex)
            for l in range(config.L)
        ))

    @classmethod
    def random_phase(cls, config: SystemConfig, active: ActiveSet, rng: np.random.Generator) -> "PhaseConfig":
        theta = []
        for l in range(config.L):
            phases = rng.uniform(0.0, 2.0 * np.pi, size=config.N[l])
            amplitude = config.rho[l] if active.a[l] else 0.0
            theta.append(amplitude * np.exp(1j * phases))
        return cls(tuple(theta))

    def restricted_to(self, active: ActiveSet) -> "PhaseConfig":
        """Zero the reflection vectors of inactive RISs."""
        return PhaseConfig(tuple(
            t if active.a[l] else np.zeros_like(t) for l, t in enumerate(self.theta)
        ))


@dataclass(frozen=True)
class NetworkSolution:
    """A complete design with its power accounting."""
    active: ActiveSet
    beams: Beamformer
    phases: PhaseConfig
    transmit_power_mW: float
    ris_circuit_power_mW: float
    network_power_mW: float
    total_power_mW: float
    iterations: Tuple[float, ...] = ()
    status: str = "solved"

    @property
    def solved(self) -> bool:
        return self.status == "solved"


@dataclass(frozen=True)
class FeasibilityReport:
    """SINR, power budget and unit-modulus margins of a candidate design."""
    sinr_margin: np.ndarray
    power_margin_mW: float
    modulus_deviation: float
    feasible: bool


def _check_structure(channels: ChannelSet, active: ActiveSet, phases: PhaseConfig) -> None:
    if active.L != channels.L or len(phases.theta) != channels.L:
        raise StructuralError(
            f"active set ({active.L}) and phases ({len(phases.theta)}) must cover {channels.L} RISs"
        )
    for l, t in enumerate(phases.theta):
        if t.shape != (channels.N[l],):
            raise StructuralError(f"theta[{l}] has shape {t.shape}, expected ({channels.N[l]},)")


def composite_channel(channels: ChannelSet, active: ActiveSet, phases: PhaseConfig, k: int) -> np.ndarray:
    """
    Composite BS->user k channel of the direct and active reflected links.

    Returns the column vector h_k such that h_k^H omega is the received
    amplitude, i.e. the conjugate of sum_l h_{l,k}^H Theta_l G_l + g_k^H.
    """
    _check_structure(channels, active, phases)
    if not 0 <= k < channels.K:
        raise StructuralError(f"user index {k} out of range for K={channels.K}")
    row = np.conj(channels.g[k])
    for l in active.indices:
        row = row + (np.conj(channels.h[k][l]) * phases.theta[l]) @ channels.G[l]
    return np.conj(row)


def composite_channels(channels: ChannelSet, active: ActiveSet, phases: PhaseConfig) -> np.ndarray:
    """All composite channels stacked as a (K, M) array."""
    return np.array([composite_channel(channels, active, phases, k) for k in range(channels.K)])


def _sinr_from_composite(h_tilde: np.ndarray, w: np.ndarray, sigma2: Sequence[float]) -> np.ndarray:
    # gains[k, j] = |h_k^H omega_j|^2
    gains = np.abs(np.conj(h_tilde) @ w.T) ** 2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return signal / (interference + np.asarray(sigma2, dtype=float))


def sinr(channels: ChannelSet, active: ActiveSet, phases: PhaseConfig, beams: Beamformer,
         k: int, sigma2: Sequence[float]) -> float:
    """
    SINR of user k.

    Args:
        channels: Channel realization
        active: Active RIS set
        phases: RIS reflection vectors
        beams: BS beamformers
        k: User index
        sigma2: Noise powers of all users (mW)

    Returns:
        float: |h_k^H w_k|^2 / (sum_{j != k} |h_k^H w_j|^2 + sigma2_k)
    """
    h_k = composite_channel(channels, active, phases, k)
    amplitudes = np.conj(h_k) @ beams.w.T
    signal = abs(amplitudes[k]) ** 2
    interference = float(np.sum(np.abs(amplitudes) ** 2) - signal)
    return float(signal / (interference + sigma2[k]))


def sinr_all(channels: ChannelSet, active: ActiveSet, phases: PhaseConfig, beams: Beamformer,
             sigma2: Sequence[float]) -> np.ndarray:
    """SINR of every user (vectorised) with noise powers `sigma2` in mW."""
    return _sinr_from_composite(composite_channels(channels, active, phases), beams.w, sigma2)


def network_power(active: ActiveSet, beams: Beamformer, config: SystemConfig) -> Tuple[float, float]:
    """
    Network power and total power.

    Returns:
        (network_power_mW, total_power_mW) where the network power is
        sum_k ||w_k||^2 / eta + sum_{l active} N_l P_RE and the total adds
        the constant BS circuit power.
    """
    if active.L != config.L:
        raise StructuralError(f"active set covers {active.L} RISs, config has {config.L}")
    ris_power = config.ris_power
    circuit = float(sum(ris_power[l] for l in active.indices))
    network = beams.transmit_power / config.eta + circuit
    return network, network + config.P_BS


def rate_to_sinr(rate: float) -> float:
    """SINR threshold 2^R - 1 for a target rate R in bits per channel use."""
    if rate < 0:
        raise StructuralError(f"target rate must be nonnegative, got {rate}")
    return float(2.0 ** rate - 1.0)


def make_solution(active: ActiveSet, beams: Beamformer, phases: PhaseConfig, config: SystemConfig,
                  trace: Sequence[float] = (), status: str = "solved") -> NetworkSolution:
    """Assemble a NetworkSolution with consistent power accounting."""
    network, total = network_power(active, beams, config)
    circuit = float(sum(config.ris_power[l] for l in active.indices))
    return NetworkSolution(
        active=active,
        beams=beams,
        phases=phases.restricted_to(active),
        transmit_power_mW=beams.transmit_power,
        ris_circuit_power_mW=circuit,
        network_power_mW=network,
        total_power_mW=total,
        iterations=tuple(float(p) for p in trace),
        status=status,
    )


def check_feasible(solution: NetworkSolution, config: SystemConfig, channels: ChannelSet,
                   tol: float = DEFAULT_FEASIBILITY_TOL) -> FeasibilityReport:
    """
    Evaluate the SINR, power budget and constant-modulus constraints.

    The SINR margin is relative (SINR_k / gamma_k - 1), the power margin is
    absolute in mW and the modulus deviation is max ||theta_{l,n}| - rho_l|
    over active RISs.
    """
    channels.check_matches(config)
    rates = sinr_all(channels, solution.active, solution.phases, solution.beams, config.sigma2)
    sinr_margin = rates / np.asarray(config.gamma) - 1.0
    power_margin = config.P_max - solution.beams.transmit_power

    deviations: Dict[int, float] = {
        l: float(np.max(np.abs(np.abs(solution.phases.theta[l]) - config.rho[l])))
        for l in solution.active.indices
    }
    modulus_deviation = max(deviations.values(), default=0.0)

    feasible = bool(
        np.all(sinr_margin >= -tol) and power_margin >= -tol and modulus_deviation <= tol
    )
    return FeasibilityReport(
        sinr_margin=sinr_margin,
        power_margin_mW=float(power_margin),
        modulus_deviation=modulus_deviation,
        feasible=feasible,
    )
