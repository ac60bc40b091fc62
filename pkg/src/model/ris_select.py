"""
Joint RIS selection and phase design for fixed beams.

With the beams fixed, every received amplitude is affine in the stacked
element vector v, where theta = conj(v). Appending a unit-modulus
homogenisation entry t gives q = (v; t) and turns each SINR constraint into a
homogeneous quadratic inequality in q. Lifting Q = q q^H and dropping the
rank constraint yields the SDP solved here; its solution is turned back into a
vector by principal-vector extraction or Gaussian randomization.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.errors import StructuralError
from src.model.channel import SeedLike, complex_normal, make_rng
from src.model.network_model import Beamformer, ChannelSet, PhaseConfig, SystemConfig
from src.solver.conic import ConicBackend, ConicProblem, ConicStatus, Tolerances, solve
from src.solver.embedding import (
    hermitian_embedding_map,
    hermitian_from_parameters,
    hermitian_inner_product,
    hermitian_parameter_count,
)
from src.utils.parameters import (
    DEFAULT_FEASIBILITY_TOL,
    DEFAULT_HOMOGENIZATION_FLOOR,
    DEFAULT_RANDOMIZATION_SAMPLES,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadraticData:
    """
    Quadratic forms of every received amplitude for fixed beams.

    b[k, j] = g_k^H omega_j is the direct amplitude, c[k, j] the stacked
    per-element reflected amplitudes and D[k, j] the (Nhat+1)-square Hermitian
    matrix with q^H D q + |t|^2 |b|^2 = |t|^2 |v^H c + b|^2 for q = t (v; 1).
    """
    b: np.ndarray
    c: np.ndarray
    D: np.ndarray
    Nhat: int
    index_sets: Tuple[np.ndarray, ...]

    @property
    def K(self) -> int:
        return self.b.shape[0]

    @property
    def L(self) -> int:
        return len(self.index_sets)

    @property
    def size(self) -> int:
        """Length of q."""
        return self.Nhat + 1

    def rebuild_error(self) -> float:
        """Largest deviation of D from its block definition."""
        return float(np.max(np.abs(self.D - _build_D(self.b, self.c)), initial=0.0))


def _build_D(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    K, _, Nhat = c.shape
    D = np.zeros((K, K, Nhat + 1, Nhat + 1), dtype=complex)
    D[:, :, :Nhat, :Nhat] = c[..., :, None] * np.conj(c)[..., None, :]
    D[:, :, :Nhat, Nhat] = c * np.conj(b)[..., None]
    D[:, :, Nhat, :Nhat] = b[..., None] * np.conj(c)
    return D


def precompute_quadratics(channels: ChannelSet, beams: Beamformer) -> QuadraticData:
    """
    Build b, c and D for every (user, beam) pair.

    Args:
        channels: Channel realization
        beams: Fixed beamformers

    Returns:
        QuadraticData: Quadratic forms over q = (v; t), theta = conj(v)
    """
    w = beams.w
    if w.shape != (channels.K, channels.M):
        raise StructuralError(f"beams have shape {w.shape}, expected ({channels.K}, {channels.M})")
    offsets = np.concatenate([[0], np.cumsum(channels.N, dtype=int)])
    index_sets = tuple(np.arange(offsets[l], offsets[l + 1]) for l in range(channels.L))
    Nhat = int(offsets[-1])

    b = np.conj(channels.g) @ w.T
    c = np.zeros((channels.K, channels.K, Nhat), dtype=complex)
    for l, idx in enumerate(index_sets):
        reflected = channels.G[l] @ w.T  # (N_l, K): G_l omega_j
        for k in range(channels.K):
            c[k, :, idx] = np.conj(channels.h[k][l])[:, None] * reflected
    return QuadraticData(b=b, c=c, D=_build_D(b, c), Nhat=Nhat, index_sets=index_sets)


# =============================================
# Evaluating the lifted SINR constraints at a vector q
# =============================================

def _amplitude_powers(q: np.ndarray, quad: QuadraticData) -> np.ndarray:
    """|amplitude|^2 of every (user, beam) pair, homogenised: q^H D q + |t|^2 |b|^2."""
    forms = np.einsum("...i,kjil,...l->...kj", np.conj(q), quad.D, q).real
    t2 = np.abs(q[..., -1]) ** 2
    return forms + t2[..., None, None] * np.abs(quad.b) ** 2


def c2_sinr(q: np.ndarray, quad: QuadraticData, sigma2: Sequence[float]) -> np.ndarray:
    """
    Per-user SINR implied by q (invariant to scaling q by any nonzero complex).

    Accepts a single q of length Nhat+1 or a (samples, Nhat+1) stack.
    """
    powers = _amplitude_powers(np.asarray(q, dtype=complex), quad)
    signal = np.diagonal(powers, axis1=-2, axis2=-1)
    t2 = np.abs(np.asarray(q)[..., -1]) ** 2
    interference = powers.sum(axis=-1) - signal + t2[..., None] * np.asarray(sigma2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(interference > 0, signal / interference, 0.0)


def c2_ratios(q: np.ndarray, quad: QuadraticData, gamma: Sequence[float], sigma2: Sequence[float]) -> np.ndarray:
    """SINR_k / gamma_k at q."""
    return c2_sinr(q, quad, sigma2) / np.asarray(gamma, dtype=float)


def c2_feasible(q: np.ndarray, quad: QuadraticData, gamma: Sequence[float], sigma2: Sequence[float],
                tol: float) -> bool:
    """True iff every lifted SINR constraint holds at q within relative tolerance `tol`."""
    return bool(np.all(c2_ratios(q, quad, gamma, sigma2) >= 1.0 - tol))


# =============================================
# Semidefinite relaxation
# =============================================

@dataclass(frozen=True)
class RelaxationResult:
    """Solution of the relaxed selection/phase SDP."""
    a_hat: np.ndarray
    Q: np.ndarray
    objective_mW: float
    status: str

    @property
    def solved(self) -> bool:
        return self.status == ConicStatus.OPTIMAL.value


def _diag_parameter_index(i: int) -> int:
    # Position of Re Q[i, i] in np.tril_indices order
    return i * (i + 1) // 2 + i


def _user_form(quad: QuadraticData, k: int, gamma: float, sigma2: float) -> Tuple[np.ndarray, float]:
    """
    F_k and r_k with SINR_k >= gamma_k  <=>  Re trace(F_k Q) >= r_k when Q = q q^H, |t| = 1.
    """
    others = [j for j in range(quad.K) if j != k]
    F = quad.D[k, k] - gamma * quad.D[k, others].sum(axis=0)
    r = gamma * (float(np.sum(np.abs(quad.b[k, others]) ** 2)) + sigma2) - abs(quad.b[k, k]) ** 2
    return F, float(r)


def build_sdp(quad: QuadraticData, gamma: Sequence[float], sigma2: Sequence[float], rho: Sequence[float],
              ris_power: Sequence[float], pins: Optional[Dict[int, float]] = None) -> ConicProblem:
    """
    Build the relaxed SDP over (a_hat, Q).

    Variables are a_hat (length L) followed by the (Nhat+1)^2 real parameters
    of the Hermitian Q. Q enters through its real embedding, so every trace
    row carries the factor 1/2 of hermitian_inner_product.

    Args:
        quad: Quadratic data for the fixed beams
        gamma: SINR thresholds (linear)
        sigma2: Noise powers (mW); SINR rows are normalised by them
        rho: Reflection amplitudes
        ris_power: Circuit power N_l * P_RE of each RIS (mW)
        pins: Optional {l: value} equality pins on a_hat

    Returns:
        ConicProblem: minimise sum_l a_hat_l P_RIS_l
    """
    L, n = quad.L, quad.size
    if not (len(rho) == len(ris_power) == L):
        raise StructuralError(f"rho and ris_power need {L} entries")
    if len(gamma) != quad.K or len(sigma2) != quad.K:
        raise StructuralError(f"gamma and sigma2 need {quad.K} entries")
    count = hermitian_parameter_count(n)
    width = L + count

    objective = np.zeros(width)
    objective[:L] = ris_power
    problem = ConicProblem(width, objective)

    # Q is PSD through its real embedding
    embedding = hermitian_embedding_map(n)
    A = np.zeros((embedding.shape[0], width))
    A[:, L:] = embedding
    problem.add(A, np.zeros(embedding.shape[0]), "psd", 2 * n)

    # SINR constraints: Re trace(F_k Q) - r_k >= 0, scaled by 1/sigma2_k
    A = np.zeros((quad.K, width))
    b = np.zeros(quad.K)
    for k in range(quad.K):
        F, r = _user_form(quad, k, gamma[k], sigma2[k])
        A[k, L:] = hermitian_inner_product(F, n) / sigma2[k]
        b[k] = -r / sigma2[k]
    problem.add(A, b, "nonneg")

    # Q[i, i] = a_hat_l rho_l^2 on each RIS block, Q[n-1, n-1] = 1
    A = np.zeros((n, width))
    b = np.zeros(n)
    for l, idx in enumerate(quad.index_sets):
        for i in idx:
            A[i, L + _diag_parameter_index(i)] = 1.0
            A[i, l] = -rho[l] ** 2
    A[n - 1, L + _diag_parameter_index(n - 1)] = 1.0
    b[n - 1] = -1.0
    problem.add(A, b, "zero")

    if L:
        # 0 <= a_hat <= 1
        A = np.zeros((2 * L, width))
        A[:L, :L] = np.eye(L)
        A[L:, :L] = -np.eye(L)
        b = np.concatenate([np.zeros(L), np.ones(L)])
        problem.add(A, b, "nonneg")

    if pins:
        A = np.zeros((len(pins), width))
        b = np.zeros(len(pins))
        for row, (l, value) in enumerate(sorted(pins.items())):
            A[row, l] = 1.0
            b[row] = -float(value)
        problem.add(A, b, "zero")
    return problem


def solve_relaxation(quad: QuadraticData, config: SystemConfig, pins: Optional[Dict[int, float]] = None,
                     tolerances: Optional[Tolerances] = None,
                     backend: Optional[ConicBackend] = None) -> RelaxationResult:
    """
    Solve the relaxed SDP and map the embedding back to a complex Q.

    A non-optimal solver status is returned in `status` with NaN arrays.
    """
    problem = build_sdp(quad, config.gamma, config.sigma2, config.rho, config.ris_power, pins)
    solution = solve(problem, tolerances, backend)
    n = quad.size
    if not solution.optimal:
        logger.debug("Relaxation stopped with status %s", solution.status.value)
        return RelaxationResult(
            a_hat=np.full(quad.L, np.nan),
            Q=np.full((n, n), np.nan, dtype=complex),
            objective_mW=float("nan"),
            status=solution.status.value,
        )
    a_hat = np.clip(solution.x[:quad.L], 0.0, 1.0)
    Q = hermitian_from_parameters(solution.x[quad.L:], n)
    logger.debug("Relaxation: a_hat=%s objective=%.6g mW", np.round(a_hat, 4), solution.objective)
    return RelaxationResult(a_hat=a_hat, Q=Q, objective_mW=float(solution.objective), status=solution.status.value)


# =============================================
# Recovering a vector from Q
# =============================================

def target_modulus(Q: np.ndarray) -> np.ndarray:
    """Per-entry moduli sqrt(Q[i, i]) with the homogenisation entry fixed to 1."""
    modulus = np.sqrt(np.clip(np.real(np.diag(Q)), 0.0, None))
    modulus[-1] = 1.0
    return modulus


def project_modulus(xi: np.ndarray, modulus: np.ndarray) -> np.ndarray:
    """Keep the phase of every entry and impose the given modulus; zero targets stay zero."""
    xi = np.asarray(xi, dtype=complex)
    magnitude = np.abs(xi)
    phase = np.where(magnitude > 0, xi / np.where(magnitude > 0, magnitude, 1.0), 1.0)
    return modulus * phase


def gaussian_randomization(Q: np.ndarray, target: np.ndarray, quad: QuadraticData, gamma: Sequence[float],
                           sigma2: Sequence[float], samples: int = DEFAULT_RANDOMIZATION_SAMPLES,
                           seed: SeedLike = 0, tol: float = DEFAULT_FEASIBILITY_TOL,
                           floor: float = DEFAULT_HOMOGENIZATION_FLOOR) -> Optional[np.ndarray]:
    """
    Draw candidate vectors with covariance Q and keep the best feasible one.

    Args:
        Q: Hermitian PSD (Nhat+1)-square matrix
        target: Moduli to project each entry onto; target[-1] must be 1
        quad: Quadratic data used to evaluate the SINR constraints
        gamma: SINR thresholds
        sigma2: Noise powers (mW)
        samples: Number of Gaussian draws
        seed: Seed of the draws
        tol: Relative SINR tolerance for accepting a candidate
        floor: Draws whose homogenisation entry is smaller are skipped

    Returns:
        The feasible candidate maximising min_k SINR_k / gamma_k, or None
    """
    if abs(target[-1] - 1.0) > 1e-12:
        raise StructuralError("the homogenisation entry must have target modulus 1")
    eigenvalues, eigenvectors = linalg.eigh((Q + Q.conj().T) / 2.0)
    root = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))[None, :]

    rng = make_rng(seed)
    draws = complex_normal(rng, (samples, Q.shape[0])) @ root.T
    valid = np.abs(draws[:, -1]) >= floor
    if not np.any(valid):
        logger.debug("Randomization: every draw had a vanishing homogenisation entry")
        return None

    candidates = project_modulus(draws[valid], target[None, :])
    worst = c2_ratios(candidates, quad, gamma, sigma2).min(axis=1)
    feasible = worst >= 1.0 - tol
    logger.debug("Randomization: %d/%d draws feasible", int(feasible.sum()), samples)
    if not np.any(feasible):
        return None
    best = int(np.argmax(np.where(feasible, worst, -np.inf)))
    return candidates[best]


def recover_phases(q: np.ndarray, index_sets: Sequence[np.ndarray],
                   floor: float = DEFAULT_HOMOGENIZATION_FLOOR) -> Tuple[np.ndarray, PhaseConfig]:
    """
    De-homogenise q and split it into per-RIS reflection vectors.

    Args:
        q: Vector (v; t) of length Nhat+1
        index_sets: Element positions of each RIS

    Returns:
        (v_tilde, PhaseConfig) with v_tilde = q[:Nhat] / t and theta_l = conj(v_l)
    """
    q = np.asarray(q, dtype=complex)
    t = q[-1]
    if abs(t) <= floor:
        raise StructuralError("homogenisation entry of q is zero")
    v_tilde = q[:-1] / t
    phases = PhaseConfig(tuple(np.conj(v_tilde[idx]) for idx in index_sets))
    return v_tilde, phases
