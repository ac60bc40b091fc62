"""
Transmit power minimisation for a fixed RIS configuration.

With the composite channels fixed, each SINR constraint is a second-order
cone once the useful amplitude is rotated to be real, so the beamforming
subproblem is an SOCP in the stacked real and imaginary parts of the beams.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.errors import InfeasibleError, NumericalLimitError, StructuralError
from src.model.network_model import (
    ActiveSet,
    Beamformer,
    ChannelSet,
    PhaseConfig,
    SystemConfig,
    composite_channels,
)
from src.solver.conic import ConicBackend, ConicProblem, ConicStatus, Tolerances, solve

logger = logging.getLogger(__name__)

# Relative tightening of gamma and P_max so solver residuals stay on the feasible side
CONSTRAINT_BACKOFF = 1e-7


@dataclass(frozen=True)
class BeamformingResult:
    """Optimal beams for one RIS configuration."""
    beams: Beamformer
    transmit_power_mW: float
    objective_mW: float
    status: str
    solver_iterations: int = 0


def _real_rows(h: np.ndarray, K: int, M: int, j: int):
    """
    Rows giving Re(h^H omega_j) and Im(h^H omega_j) as functions of the stacked variables.

    Stacking per user is [Re omega_j, Im omega_j]; users are concatenated and
    the epigraph variable comes last.
    """
    n = 2 * K * M + 1
    re_row = np.zeros(n)
    im_row = np.zeros(n)
    start = 2 * M * j
    re_row[start:start + M] = h.real
    re_row[start + M:start + 2 * M] = h.imag
    im_row[start:start + M] = -h.imag
    im_row[start + M:start + 2 * M] = h.real
    return re_row, im_row


def build_socp(composite: np.ndarray, gamma: Sequence[float], sigma2: Sequence[float],
               P_max: float, eta: float) -> ConicProblem:
    """
    Build the beamforming SOCP.

    Args:
        composite: (K, M) composite channels, row k is h_k
        gamma: SINR thresholds (linear)
        sigma2: Noise powers (mW)
        P_max: Transmit power budget (mW)
        eta: Drain efficiency

    Returns:
        ConicProblem: minimise t subject to K SINR cones, the power cone and
        the rotated epigraph cone sum ||omega_k||^2 <= eta t
    """
    composite = np.atleast_2d(np.asarray(composite, dtype=complex))
    K, M = composite.shape
    if len(gamma) != K or len(sigma2) != K:
        raise StructuralError(f"gamma and sigma2 need {K} entries")
    if any(g <= 0 for g in gamma) or any(s <= 0 for s in sigma2):
        raise StructuralError("gamma and sigma2 must be positive")

    n = 2 * K * M + 1
    objective = np.zeros(n)
    objective[-1] = 1.0
    problem = ConicProblem(n, objective)

    for k in range(K):
        noise = np.sqrt(sigma2[k])
        A = np.zeros((2 * K, n))
        b = np.zeros(2 * K)
        re_row, _ = _real_rows(composite[k], K, M, k)
        A[0] = re_row / np.sqrt(gamma[k] * sigma2[k])
        row = 1
        for j in range(K):
            if j == k:
                continue
            re_row, im_row = _real_rows(composite[k], K, M, j)
            A[row] = re_row / noise
            A[row + 1] = im_row / noise
            row += 2
        b[-1] = 1.0
        problem.add(A, b, "soc")

    # ||omega|| <= sqrt(P_max)
    A = np.zeros((n, n))
    A[1:, :-1] = np.eye(n - 1)
    b = np.zeros(n)
    b[0] = np.sqrt(max(P_max, 0.0))
    problem.add(A, b, "soc")

    # ||(2 omega, eta t - 1)|| <= eta t + 1
    A = np.zeros((n + 1, n))
    b = np.zeros(n + 1)
    A[0, -1] = eta
    b[0] = 1.0
    A[1:n, :-1] = 2.0 * np.eye(n - 1)
    A[n, -1] = eta
    b[n] = -1.0
    problem.add(A, b, "soc")
    return problem


def beams_from_solution(x: np.ndarray, K: int, M: int) -> Beamformer:
    """Unstack the real solution vector into complex beams."""
    stacked = np.asarray(x[:2 * K * M]).reshape(K, 2, M)
    return Beamformer(stacked[:, 0, :] + 1j * stacked[:, 1, :])


def solve_beamforming(channels: ChannelSet, active: ActiveSet, phases: PhaseConfig, config: SystemConfig,
                      tolerances: Optional[Tolerances] = None,
                      backend: Optional[ConicBackend] = None) -> BeamformingResult:
    """
    Minimum transmit power beams for a fixed active set and phases.

    Raises:
        InfeasibleError: The SINR targets cannot be met within P_max
        NumericalLimitError: The solver did not certify an answer
    """
    channels.check_matches(config)
    composite = composite_channels(channels, active, phases)
    gamma = [g * (1.0 + CONSTRAINT_BACKOFF) for g in config.gamma]
    P_max = config.P_max * (1.0 - CONSTRAINT_BACKOFF)
    problem = build_socp(composite, gamma, config.sigma2, P_max, config.eta)
    solution = solve(problem, tolerances, backend)

    if solution.status is ConicStatus.PRIMAL_INFEASIBLE:
        raise InfeasibleError(f"SINR targets cannot be met with active RISs {active.indices}")
    if solution.status is not ConicStatus.OPTIMAL:
        raise NumericalLimitError(f"beamforming SOCP stopped with status {solution.status.value}")

    beams = beams_from_solution(solution.x, config.K, config.M)
    transmit = beams.transmit_power
    logger.debug("Beamforming: active=%s transmit=%.6g mW (%d solver iterations)",
                 active.indices, transmit, solution.iterations)
    return BeamformingResult(
        beams=beams,
        transmit_power_mW=transmit,
        objective_mW=transmit / config.eta,
        status=solution.status.value,
        solver_iterations=solution.iterations,
    )
