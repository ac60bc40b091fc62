"""
Alternating optimisation of beams, RIS selection and phases, plus baselines.

Each iteration solves the beamforming SOCP for the current configuration,
relaxes the selection/phase problem to an SDP for those beams, rounds the
relaxed selection by bisection over the ascending order of a_hat and re-solves
the beams. A new configuration is adopted only if it lowers the network power.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import InfeasibleError, NumericalLimitError, StructuralError
from src.model.beamform import solve_beamforming
from src.model.network_model import (
    ActiveSet,
    ChannelSet,
    NetworkSolution,
    PhaseConfig,
    SystemConfig,
    make_solution,
)
from src.model.channel import make_rng
from src.model.ris_select import (
    QuadraticData,
    RelaxationResult,
    c2_feasible,
    gaussian_randomization,
    precompute_quadratics,
    project_modulus,
    recover_phases,
    solve_relaxation,
    target_modulus,
)
from src.solver.conic import ConicBackend, Tolerances
from src.solver.embedding import rank_one_extract
from src.utils.parameters import (
    DEFAULT_C2_CHECK_TOL,
    DEFAULT_EPSILON_MW,
    DEFAULT_FEASIBILITY_MODE,
    DEFAULT_FEASIBILITY_TOL,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_RANDOMIZATION_SAMPLES,
    DEFAULT_RANK_ONE_RATIO_TOL,
    MAX_EXHAUSTIVE_RIS,
)

logger = logging.getLogger(__name__)

FEASIBILITY_MODES = ("evaluate", "sdp")


@dataclass(frozen=True)
class AlgorithmOptions:
    """
    Knobs of the alternating algorithm and the baselines.

    feasibility_mode "evaluate" checks a bisection step by evaluating the
    SINR constraints at the pattern vector; "sdp" re-solves the relaxation
    with a_hat pinned to the step pattern.
    """
    epsilon_mW: float = DEFAULT_EPSILON_MW
    max_iter: int = DEFAULT_MAX_ITERATIONS
    samples: int = DEFAULT_RANDOMIZATION_SAMPLES
    feasibility_mode: str = DEFAULT_FEASIBILITY_MODE
    random_init: bool = False
    rank_one_tol: float = DEFAULT_RANK_ONE_RATIO_TOL
    feasibility_tol: float = DEFAULT_FEASIBILITY_TOL
    c2_check_tol: float = DEFAULT_C2_CHECK_TOL
    tolerances: Tolerances = field(default_factory=Tolerances)
    backend: Optional[ConicBackend] = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.feasibility_mode not in FEASIBILITY_MODES:
            raise StructuralError(f"feasibility_mode must be one of {FEASIBILITY_MODES}, got {self.feasibility_mode!r}")
        if self.epsilon_mW < 0:
            raise StructuralError("epsilon_mW must be nonnegative")
        if self.max_iter < 1 or self.samples < 1 or self.n_jobs < 1:
            raise StructuralError("max_iter, samples and n_jobs must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    """One pass of the alternation."""
    iteration: int
    transmit_power_mW: float
    active_count: int
    network_power_mW: float
    relaxation_objective_mW: float
    rounded_circuit_power_mW: float
    steps: Tuple[int, ...]
    flag: int
    recovery: str
    accepted: bool


@dataclass
class AlternationTrace:
    """
    Per-iteration history of alternating_optimize.

    `initial_power_mW` is the network power of the all-active start; every
    accepted record lowers it.
    """
    initial_power_mW: float = float("nan")
    records: List[IterationRecord] = field(default_factory=list)
    status: str = "running"

    @property
    def accepted_powers(self) -> List[float]:
        return [self.initial_power_mW] + [r.network_power_mW for r in self.records if r.accepted]

    @property
    def iterations(self) -> int:
        return len(self.records)

    def to_frame(self) -> pd.DataFrame:
        """Trace as a DataFrame, one row per iteration."""
        rows = [
            {
                "iteration": r.iteration,
                "transmit_power_mW": r.transmit_power_mW,
                "active_count": r.active_count,
                "network_power_mW": r.network_power_mW,
                "relaxation_objective_mW": r.relaxation_objective_mW,
                "rounded_circuit_power_mW": r.rounded_circuit_power_mW,
                "bisection_steps": " ".join(str(p) for p in r.steps),
                "flag": r.flag,
                "recovery": r.recovery,
                "accepted": r.accepted,
            }
            for r in self.records
        ]
        return pd.DataFrame(rows, columns=[
            "iteration", "transmit_power_mW", "active_count", "network_power_mW",
            "relaxation_objective_mW", "rounded_circuit_power_mW", "bisection_steps", "flag",
            "recovery", "accepted"
        ])


@dataclass(frozen=True)
class BisectionResult:
    """Outcome of rounding a_hat: the chosen set, its pattern vector and whether any step passed."""
    active: ActiveSet
    q: np.ndarray
    flag: int
    steps: Tuple[int, ...]


# =============================================
# Building blocks
# =============================================

def _seed_streams(seed: int, count: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(int(seed)).spawn(count)


def _initial_phases(config: SystemConfig, active: ActiveSet, options: AlgorithmOptions,
                    stream: np.random.SeedSequence) -> PhaseConfig:
    if options.random_init:
        return PhaseConfig.random_phase(config, active, make_rng(stream))
    return PhaseConfig.zero_phase(config, active)


def recover_vector(relaxation: RelaxationResult, quad: QuadraticData, config: SystemConfig,
                   options: AlgorithmOptions, seed) -> Tuple[np.ndarray, str]:
    """
    Turn the relaxed Q into a vector q.

    A rank-one Q gives its principal vector directly; otherwise Gaussian
    randomization is tried and, failing that, the projected principal vector
    is used.
    """
    target = target_modulus(relaxation.Q)
    is_rank_one, principal = rank_one_extract(relaxation.Q, options.rank_one_tol)
    projected = project_modulus(principal, target)
    if is_rank_one and c2_feasible(projected, quad, config.gamma, config.sigma2, options.feasibility_tol):
        return projected, "rank_one"
    q = gaussian_randomization(relaxation.Q, target, quad, config.gamma, config.sigma2,
                               samples=options.samples, seed=seed, tol=options.feasibility_tol)
    if q is not None:
        return q, "randomization"
    return projected, "principal"


def pattern_vector(q: np.ndarray, index_sets: Sequence[np.ndarray], rho: Sequence[float],
                   deactivated: Sequence[int]) -> np.ndarray:
    """
    Impose a binary pattern on q.

    Entries of deactivated RISs become 0, the remaining entries keep their
    phase at modulus rho_l and the homogenisation entry gets unit modulus.
    """
    modulus = np.zeros(q.size)
    for l, idx in enumerate(index_sets):
        modulus[idx] = rho[l]
    for l in deactivated:
        modulus[index_sets[l]] = 0.0
    modulus[-1] = 1.0
    return project_modulus(q, modulus)


def feasibility_check(q: np.ndarray, quad: QuadraticData, gamma: Sequence[float], sigma2: Sequence[float],
                      tol: float = DEFAULT_C2_CHECK_TOL) -> bool:
    """Evaluate every lifted SINR constraint at a pattern vector."""
    return c2_feasible(q, quad, gamma, sigma2, tol)


def _pinned_sdp_point(quad: QuadraticData, config: SystemConfig, deactivated: Sequence[int],
                      options: AlgorithmOptions, seed) -> Optional[np.ndarray]:
    off = set(deactivated)
    pins = {l: 0.0 if l in off else 1.0 for l in range(quad.L)}
    relaxation = solve_relaxation(quad, config, pins, options.tolerances, options.backend)
    if not relaxation.solved:
        return None
    q, _ = recover_vector(relaxation, quad, config, options, seed)
    q = pattern_vector(q, quad.index_sets, config.rho, deactivated)
    if feasibility_check(q, quad, config.gamma, config.sigma2, options.c2_check_tol):
        return q
    return None


def bisect_active_set(a_hat: np.ndarray, q: np.ndarray, quad: QuadraticData, gamma: Sequence[float],
                      sigma2: Sequence[float], rho: Sequence[float], mode: str = "evaluate",
                      tol: float = DEFAULT_C2_CHECK_TOL, config: Optional[SystemConfig] = None,
                      options: Optional[AlgorithmOptions] = None, seed=0) -> BisectionResult:
    """
    Round the relaxed selection by bisection over the ascending order of a_hat.

    The J0 RISs with the smallest a_hat are switched off at step J0. Every
    J0 from 0 (all on) to L (all off) is reachable; a feasible step moves the
    search towards more deactivations.

    Args:
        a_hat: Relaxed selection variables
        q: Vector recovered from the relaxation
        quad: Quadratic data of the current beams
        gamma: SINR thresholds
        sigma2: Noise powers (mW)
        rho: Reflection amplitudes
        mode: "evaluate" or "sdp"
        tol: Relative tolerance of the SINR check
        config: Needed for mode "sdp"
        options: Needed for mode "sdp"

    Returns:
        BisectionResult: flag 1 with the configuration switching off the most RISs, or flag 0
    """
    L = quad.L
    if mode not in FEASIBILITY_MODES:
        raise StructuralError(f"unknown feasibility mode {mode!r}")
    if mode == "sdp" and (config is None or options is None):
        raise StructuralError("feasibility mode 'sdp' needs the system config and algorithm options")

    order = np.argsort(np.asarray(a_hat, dtype=float), kind="stable")
    low, high = -1, L + 1
    best: Optional[Tuple[int, np.ndarray]] = None
    steps: List[int] = []
    while high - low > 1:
        j0 = (low + high) // 2
        steps.append(j0)
        deactivated = [int(l) for l in order[:j0]]
        if mode == "evaluate":
            candidate = pattern_vector(q, quad.index_sets, rho, deactivated)
            feasible = feasibility_check(candidate, quad, gamma, sigma2, tol)
        else:
            candidate = _pinned_sdp_point(quad, config, deactivated, options, seed)
            feasible = candidate is not None
        logger.debug("Bisection step J0=%d (off: %s): %s", j0, deactivated, "feasible" if feasible else "infeasible")
        if feasible:
            best = (j0, candidate)
            low = j0
        else:
            high = j0

    if best is None:
        return BisectionResult(active=ActiveSet.all_active(L), q=np.asarray(q), flag=0, steps=tuple(steps))
    j0, q_final = best
    off = set(int(l) for l in order[:j0])
    active = ActiveSet(tuple(l not in off for l in range(L)))
    return BisectionResult(active=active, q=q_final, flag=1, steps=tuple(steps))


# =============================================
# Proposed algorithm
# =============================================

def alternating_optimize(channels: ChannelSet, config: SystemConfig, options: Optional[AlgorithmOptions] = None,
                         seed: int = 0) -> Tuple[NetworkSolution, AlternationTrace]:
    """
    Minimise the network power by alternating beamforming and RIS selection.

    Args:
        channels: Channel realization
        config: Scenario constants
        options: Algorithm options (epsilon, max_iter, randomization samples, ...)
        seed: Seed of the randomization draws (and of random initial phases)

    Returns:
        (best NetworkSolution, AlternationTrace)

    Raises:
        InfeasibleError: The all-active start cannot meet the SINR targets
    """
    options = options or AlgorithmOptions()
    channels.check_matches(config)
    streams = _seed_streams(seed, options.max_iter + 1)
    trace = AlternationTrace()

    active = ActiveSet.all_active(config.L)
    phases = _initial_phases(config, active, options, streams[0])
    beamforming = solve_beamforming(channels, active, phases, config, options.tolerances, options.backend)
    best = make_solution(active, beamforming.beams, phases, config)
    trace.initial_power_mW = best.network_power_mW
    logger.info("Start: all %d RISs active, network power %.4f mW", config.L, best.network_power_mW)

    if config.L == 0:
        trace.status = "no_ris"
        return replace(best, iterations=tuple(trace.accepted_powers)), trace

    trace.status = "max_iter"
    for iteration in range(1, options.max_iter + 1):
        quad = precompute_quadratics(channels, best.beams)
        relaxation = solve_relaxation(quad, config, None, options.tolerances, options.backend)
        if not relaxation.solved:
            logger.warning("Iteration %d: relaxation returned %s, stopping", iteration, relaxation.status)
            trace.status = "subproblem_failed"
            break

        stream = streams[iteration]
        q, recovery = recover_vector(relaxation, quad, config, options, stream)
        rounding = bisect_active_set(relaxation.a_hat, q, quad, config.gamma, config.sigma2, config.rho,
                                     options.feasibility_mode, options.c2_check_tol, config, options, stream)
        if rounding.flag == 0:
            logger.info("Iteration %d: no feasible rounding, keeping the current configuration", iteration)
            trace.records.append(IterationRecord(
                iteration, best.transmit_power_mW, best.active.count, best.network_power_mW,
                relaxation.objective_mW, float("nan"), rounding.steps, 0, recovery, False,
            ))
            trace.status = "flag_zero"
            break

        _, new_phases = recover_phases(rounding.q, quad.index_sets)
        rounded_circuit = float(sum(config.ris_power[l] for l in rounding.active.indices))
        try:
            beamforming = solve_beamforming(channels, rounding.active, new_phases, config,
                                            options.tolerances, options.backend)
        except (InfeasibleError, NumericalLimitError) as exc:
            logger.warning("Iteration %d: beamforming for the rounded set failed (%s)", iteration, exc)
            trace.records.append(IterationRecord(
                iteration, float("nan"), rounding.active.count, float("nan"), relaxation.objective_mW,
                rounded_circuit, rounding.steps, 1, recovery, False,
            ))
            trace.status = "subproblem_failed"
            break

        candidate = make_solution(rounding.active, beamforming.beams, new_phases, config)
        decrease = best.network_power_mW - candidate.network_power_mW
        accepted = decrease > 0
        trace.records.append(IterationRecord(
            iteration, candidate.transmit_power_mW, candidate.active.count, candidate.network_power_mW,
            relaxation.objective_mW, rounded_circuit, rounding.steps, 1, recovery, accepted,
        ))
        if not accepted:
            logger.info("Iteration %d: network power %.4f mW does not improve on %.4f mW, stopping",
                        iteration, candidate.network_power_mW, best.network_power_mW)
            trace.status = "no_decrease"
            break

        logger.info("Iteration %d: accepted %d active RISs, network power %.4f mW (-%.4f mW)",
                    iteration, candidate.active.count, candidate.network_power_mW, decrease)
        best = candidate
        if decrease < options.epsilon_mW:
            trace.status = "converged"
            break

    return replace(best, iterations=tuple(trace.accepted_powers)), trace


# =============================================
# Baselines
# =============================================

def _phase_only_alternation(channels: ChannelSet, config: SystemConfig, options: AlgorithmOptions,
                            seed: int, start: Optional[PhaseConfig] = None) -> NetworkSolution:
    """Alternate beamforming and the phase-only SDP with every RIS on, from `start` if given."""
    streams = _seed_streams(seed, options.max_iter + 1)
    active = ActiveSet.all_active(config.L)
    phases = start if start is not None else _initial_phases(config, active, options, streams[0])
    beamforming = solve_beamforming(channels, active, phases, config, options.tolerances, options.backend)
    best = make_solution(active, beamforming.beams, phases, config)
    powers = [best.network_power_mW]
    if config.L == 0:
        return replace(best, iterations=tuple(powers))

    pins = {l: 1.0 for l in range(config.L)}
    for iteration in range(1, options.max_iter + 1):
        quad = precompute_quadratics(channels, best.beams)
        relaxation = solve_relaxation(quad, config, pins, options.tolerances, options.backend)
        if not relaxation.solved:
            logger.debug("Phase-only SDP returned %s", relaxation.status)
            break
        q, _ = recover_vector(relaxation, quad, config, options, streams[iteration])
        q = pattern_vector(q, quad.index_sets, config.rho, ())
        _, new_phases = recover_phases(q, quad.index_sets)
        try:
            beamforming = solve_beamforming(channels, active, new_phases, config, options.tolerances, options.backend)
        except (InfeasibleError, NumericalLimitError):
            break
        decrease = best.transmit_power_mW - beamforming.transmit_power_mW
        if decrease <= 0:
            break
        best = make_solution(active, beamforming.beams, new_phases, config)
        powers.append(best.network_power_mW)
        if decrease < options.epsilon_mW:
            break
    return replace(best, iterations=tuple(powers))


def all_ris_active_baseline(channels: ChannelSet, config: SystemConfig, options: Optional[AlgorithmOptions] = None,
                            seed: int = 0) -> NetworkSolution:
    """
    Every RIS on; only beams and phases are optimised.

    Raises:
        InfeasibleError: The SINR targets cannot be met with all RISs active
    """
    options = options or AlgorithmOptions()
    channels.check_matches(config)
    return _phase_only_alternation(channels, config, options, seed)


def _expand(solution: NetworkSolution, subset: Sequence[int], config: SystemConfig) -> NetworkSolution:
    """Map a solution of a restricted instance back onto all L RISs."""
    active = ActiveSet.from_indices(config.L, subset)
    theta = [np.zeros(config.N[l], dtype=complex) for l in range(config.L)]
    for position, l in enumerate(subset):
        theta[l] = solution.phases.theta[position]
    expanded = make_solution(active, solution.beams, PhaseConfig(tuple(theta)), config, solution.iterations)
    return expanded


def exhaustive_search_baseline(channels: ChannelSet, config: SystemConfig, options: Optional[AlgorithmOptions] = None,
                               seed: int = 0) -> NetworkSolution:
    """
    Try every subset of RISs with the all-active baseline restricted to it.

    Subsets are enumerated by size, then lexicographically; ties keep the first.
    A subset that cannot meet the targets from its starting phases is tried
    again from phases found by the pinned SDP for the beams of the best subset.

    Raises:
        StructuralError: L exceeds the exhaustive search guard
        InfeasibleError: No subset meets the SINR targets
    """
    options = options or AlgorithmOptions()
    channels.check_matches(config)
    if config.L > MAX_EXHAUSTIVE_RIS:
        raise StructuralError(f"exhaustive search is limited to L <= {MAX_EXHAUSTIVE_RIS}, got L={config.L}")

    subsets = [
        combo for size in range(config.L + 1) for combo in itertools.combinations(range(config.L), size)
    ]

    def evaluate(subset: Tuple[int, ...], start: Optional[PhaseConfig] = None) -> Optional[NetworkSolution]:
        try:
            solution = _phase_only_alternation(
                channels.restrict(subset), config.restrict(subset), options, seed, start
            )
        except InfeasibleError:
            logger.debug("Subset %s infeasible", subset)
            return None
        except NumericalLimitError as exc:
            logger.warning("Subset %s skipped: %s", subset, exc)
            return None
        return _expand(solution, subset, config)

    def pick(results: Sequence[Optional[NetworkSolution]]) -> Optional[NetworkSolution]:
        best: Optional[NetworkSolution] = None
        for solution in results:
            if solution is not None and (best is None or solution.network_power_mW < best.network_power_mW):
                best = solution
        return best

    results = _map_subsets(evaluate, subsets, options.n_jobs)
    best = pick(results)
    if best is None:
        raise InfeasibleError(f"no subset of the {config.L} RISs meets the SINR targets")

    missed = [subset for subset, solution in zip(subsets, results) if solution is None and subset]
    if missed:
        quad = precompute_quadratics(channels, best.beams)

        def restart(subset: Tuple[int, ...]) -> Optional[NetworkSolution]:
            off = [l for l in range(config.L) if l not in subset]
            q = _pinned_sdp_point(quad, config, off, options, seed)
            if q is None:
                logger.debug("Subset %s has no feasible pinned point", subset)
                return None
            _, phases = recover_phases(q, quad.index_sets)
            return evaluate(subset, PhaseConfig(tuple(phases.theta[l] for l in subset)))

        restarted = _map_subsets(restart, missed, options.n_jobs)
        logger.debug("Restarted %d subsets, %d now feasible", len(missed),
                     sum(solution is not None for solution in restarted))
        best = pick([best] + restarted)

    logger.info("Exhaustive search over %d subsets: best set %s, network power %.4f mW",
                len(subsets), best.active.indices, best.network_power_mW)
    return best


def _map_subsets(fn, subsets: Sequence[Tuple[int, ...]], n_jobs: int) -> List[Optional[NetworkSolution]]:
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, subsets))
    return [fn(subset) for subset in subsets]


def run_method(method: str, channels: ChannelSet, config: SystemConfig, options: Optional[AlgorithmOptions] = None,
               seed: int = 0) -> Tuple[NetworkSolution, Dict[str, Any]]:
    """
    Dispatch one of the harness methods by name.

    Returns:
        (solution, extras) where extras holds the iteration count and, for the
        proposed method, the trace
    """
    if method == "proposed":
        solution, trace = alternating_optimize(channels, config, options, seed)
        return solution, {"iterations": trace.iterations, "trace": trace}
    if method == "all_active":
        solution = all_ris_active_baseline(channels, config, options, seed)
    elif method == "exhaustive":
        solution = exhaustive_search_baseline(channels, config, options, seed)
    else:
        raise StructuralError(f"unknown method {method!r}")
    return solution, {"iterations": max(len(solution.iterations) - 1, 0)}
