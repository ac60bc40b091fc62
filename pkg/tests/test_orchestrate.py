from pathlib import Path

import numpy as np
import pytest

from src.errors import InfeasibleError, StructuralError
from src.model import orchestrate
from src.model.beamform import solve_beamforming
from src.model.monte_carlo import draw_realization, trial_seed
from src.model.network_model import ActiveSet, PhaseConfig, check_feasible
from src.model.orchestrate import (
    AlgorithmOptions,
    all_ris_active_baseline,
    alternating_optimize,
    bisect_active_set,
    exhaustive_search_baseline,
    feasibility_check,
    pattern_vector,
    recover_vector,
    run_method,
)
from src.model.ris_select import RelaxationResult, gaussian_randomization, precompute_quadratics, target_modulus
from src.utils.parameters import DEFAULT_MAX_ITERATIONS
from src.utils.scenario_loader import validate_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

STOP_STATUSES = {"max_iter", "subproblem_failed", "flag_zero", "no_decrease", "converged"}


def _start(config, channels, seed=3):
    active = ActiveSet.all_active(config.L)
    phases = PhaseConfig.random_phase(config, active, np.random.default_rng(seed))
    beams = solve_beamforming(channels, active, phases, config).beams
    q = np.concatenate([np.conj(np.concatenate(phases.theta)), [1.0]])
    return precompute_quadratics(channels, beams), q


def test_pattern_vector_zeroes_deactivated_blocks(small_config):
    q = np.array([2.0, 1j, -3.0, 0.5j, 4.0])
    patterned = pattern_vector(q, small_config.index_sets, (0.8, 1.0), deactivated=[0])
    np.testing.assert_allclose(patterned, [0.0, 0.0, -1.0, 1j, 1.0])


def test_rank_one_shortcut_matches_randomization(small_config, small_channels):
    quad, q = _start(small_config, small_channels)
    Q = np.outer(q, q.conj())
    relaxation = RelaxationResult(a_hat=np.ones(small_config.L), Q=Q, objective_mW=0.0, status="optimal")
    shortcut, route = recover_vector(relaxation, quad, small_config, AlgorithmOptions(), seed=0)
    full = gaussian_randomization(Q, target_modulus(Q), quad, small_config.gamma, small_config.sigma2,
                                  samples=20, seed=0)
    assert route == "rank_one"
    assert full is not None
    # both are q up to a common phase
    np.testing.assert_allclose(shortcut / shortcut[-1], q / q[-1], atol=1e-8)
    np.testing.assert_allclose(full / full[-1], q / q[-1], atol=1e-6)


def test_direct_links_alone_pass_the_feasibility_check(make_config, make_channels):
    config = make_config(L=2, N=2)
    channels = make_channels(config, seed=5, direct_scale=1.0)
    none = ActiveSet.none_active(config.L)
    beams = solve_beamforming(channels, none, PhaseConfig.zero_phase(config, none), config).beams
    quad = precompute_quadratics(channels, beams)
    q = np.zeros(config.Nhat + 1, dtype=complex)
    q[-1] = 1.0
    assert feasibility_check(q, quad, config.gamma, config.sigma2, 1e-6)
    assert not feasibility_check(q, quad, [g * 1e6 for g in config.gamma], config.sigma2, 1e-6)


def test_bisection_switches_off_a_prefix_of_the_ascending_order(make_config, make_channels, monkeypatch):
    config = make_config(L=3, N=2)
    channels = make_channels(config, seed=1)
    quad, q = _start(config, channels)

    def at_most_one_ris_off(candidate, *args, **kwargs):
        return np.count_nonzero(candidate[:-1] == 0) <= 2

    monkeypatch.setattr(orchestrate, "feasibility_check", at_most_one_ris_off)
    result = bisect_active_set(np.array([0.9, 0.1, 0.5]), q, quad, config.gamma, config.sigma2, config.rho)
    assert result.flag == 1
    assert result.active.a == (True, False, True)
    assert result.steps == (1, 2)


def test_bisection_without_feasible_step_reports_flag_zero(small_config, small_channels, monkeypatch):
    quad, q = _start(small_config, small_channels)
    monkeypatch.setattr(orchestrate, "feasibility_check", lambda *args, **kwargs: False)
    result = bisect_active_set(np.array([0.3, 0.7]), q, quad, small_config.gamma, small_config.sigma2,
                               small_config.rho)
    assert result.flag == 0
    assert result.active == ActiveSet.all_active(2)
    assert result.steps == (1, 0)


@pytest.mark.parametrize("seed", range(5))
def test_bisection_accepts_a_point_feasible_with_every_ris_on(seed, small_config, small_channels):
    quad, q = _start(small_config, small_channels, seed=seed)
    a_hat = np.random.default_rng(seed).uniform(size=small_config.L)
    result = bisect_active_set(a_hat, q, quad, small_config.gamma, small_config.sigma2, small_config.rho,
                               tol=1e-6)
    assert result.flag == 1
    assert feasibility_check(result.q, quad, small_config.gamma, small_config.sigma2, 1e-6)


def test_sdp_mode_needs_config(small_config, small_channels):
    quad, q = _start(small_config, small_channels)
    with pytest.raises(StructuralError):
        bisect_active_set(np.zeros(2), q, quad, small_config.gamma, small_config.sigma2, small_config.rho,
                          mode="sdp")
    with pytest.raises(StructuralError):
        bisect_active_set(np.zeros(2), q, quad, small_config.gamma, small_config.sigma2, small_config.rho,
                          mode="greedy")


def test_ris_without_reflected_links_are_switched_off(make_config, make_channels):
    config = make_config(P_RE=1.0, eta=0.5)
    channels = make_channels(config, seed=4, direct_scale=1.0, reflect_scale=0.0)
    solution, trace = alternating_optimize(channels, config)
    assert solution.active.count == 0
    assert trace.records[0].accepted
    assert trace.records[0].rounded_circuit_power_mW == 0.0
    assert solution.network_power_mW == pytest.approx(trace.initial_power_mW - sum(config.ris_power), rel=1e-6)
    assert trace.status in {"no_decrease", "converged"}


@pytest.mark.parametrize("seed", range(4))
def test_alternation_only_accepts_decreases(seed, make_config, make_channels):
    config = make_config(K=2, L=2, N=2, P_RE=0.5)
    channels = make_channels(config, seed=seed)
    solution, trace = alternating_optimize(channels, config, AlgorithmOptions(samples=50), seed=seed)

    powers = trace.accepted_powers
    assert all(later < earlier for earlier, later in zip(powers, powers[1:]))
    assert solution.network_power_mW == pytest.approx(powers[-1])
    assert solution.iterations == tuple(powers)
    assert trace.status in STOP_STATUSES
    assert check_feasible(solution, config, channels).feasible


@pytest.mark.parametrize("seed", range(4))
def test_relaxation_bounds_the_rounded_circuit_power(seed, make_config, make_channels):
    config = make_config(K=2, L=3, N=1, P_RE=2.0)
    channels = make_channels(config, seed=seed)
    _, trace = alternating_optimize(channels, config, seed=seed)
    for record in trace.records:
        if record.flag == 1:
            assert record.relaxation_objective_mW <= record.rounded_circuit_power_mW + 1e-6


def test_sdp_feasibility_mode_runs(small_config, small_channels):
    options = AlgorithmOptions(feasibility_mode="sdp", max_iter=3)
    solution, trace = alternating_optimize(small_channels, small_config, options, seed=2)
    assert trace.status in STOP_STATUSES
    assert check_feasible(solution, small_config, small_channels).feasible


def test_random_initial_phases_are_seeded(small_config, small_channels):
    options = AlgorithmOptions(random_init=True, max_iter=2)
    first, _ = alternating_optimize(small_channels, small_config, options, seed=9)
    second, _ = alternating_optimize(small_channels, small_config, options, seed=9)
    assert first.network_power_mW == second.network_power_mW


def test_no_ris_instance_stops_immediately(make_config, make_channels):
    config = make_config(L=0)
    channels = make_channels(config)
    solution, trace = alternating_optimize(channels, config)
    assert trace.status == "no_ris"
    assert trace.records == []
    assert solution.network_power_mW == pytest.approx(trace.initial_power_mW)


def test_unreachable_targets_raise(make_config, make_channels):
    config = make_config(P_max=1e-8)
    channels = make_channels(config, seed=1)
    with pytest.raises(InfeasibleError):
        alternating_optimize(channels, config)


def test_trace_frame_has_one_row_per_iteration(small_config, small_channels):
    _, trace = alternating_optimize(small_channels, small_config, AlgorithmOptions(max_iter=2))
    frame = trace.to_frame()
    assert len(frame) == trace.iterations
    assert list(frame.columns[:4]) == ["iteration", "transmit_power_mW", "active_count", "network_power_mW"]


def test_all_active_baseline_keeps_every_ris(small_config, small_channels):
    solution = all_ris_active_baseline(small_channels, small_config)
    assert solution.active == ActiveSet.all_active(small_config.L)
    assert solution.ris_circuit_power_mW == pytest.approx(sum(small_config.ris_power))
    assert all(later < earlier for earlier, later in zip(solution.iterations, solution.iterations[1:]))
    assert check_feasible(solution, small_config, small_channels).feasible


def test_all_active_baseline_without_ris_is_one_beamforming_solve(make_config, make_channels):
    config = make_config(L=0)
    channels = make_channels(config, seed=2)
    solution = all_ris_active_baseline(channels, config)
    empty = ActiveSet.all_active(0)
    direct = solve_beamforming(channels, empty, PhaseConfig.zero_phase(config, empty), config)
    assert solution.transmit_power_mW == pytest.approx(direct.transmit_power_mW, rel=1e-9)
    assert solution.ris_circuit_power_mW == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_exhaustive_search_is_no_worse_than_all_active(seed, make_config, make_channels):
    config = make_config(K=2, L=2, N=2, P_RE=1.0)
    channels = make_channels(config, seed=seed)
    options = AlgorithmOptions(max_iter=5)
    exhaustive = exhaustive_search_baseline(channels, config, options, seed=seed)
    everything_on = all_ris_active_baseline(channels, config, options, seed=seed)
    assert exhaustive.network_power_mW <= everything_on.network_power_mW * (1.0 + 1e-9)
    assert len(exhaustive.phases.theta) == config.L
    assert check_feasible(exhaustive, config, channels).feasible


def test_exhaustive_search_threads_agree(small_config, small_channels):
    sequential = exhaustive_search_baseline(small_channels, small_config, AlgorithmOptions(max_iter=3))
    threaded = exhaustive_search_baseline(small_channels, small_config, AlgorithmOptions(max_iter=3, n_jobs=2))
    assert threaded.network_power_mW == sequential.network_power_mW
    assert threaded.active == sequential.active


def test_exhaustive_search_restarts_subsets_that_fail_from_zero_phase(make_config, make_channels, monkeypatch):
    config = make_config(K=2, L=2, N=2, P_RE=1.0)
    channels = make_channels(config, seed=1)
    alternation = orchestrate._phase_only_alternation
    pinned = orchestrate._pinned_sdp_point
    switched_off = []

    def fail_single_ris_from_zero_phase(channels, config, options, seed, start=None):
        if config.L == 1 and start is None:
            raise InfeasibleError("zero-phase start misses the targets")
        return alternation(channels, config, options, seed, start)

    def record(quad, config, deactivated, options, seed):
        switched_off.append(list(deactivated))
        return pinned(quad, config, deactivated, options, seed)

    monkeypatch.setattr(orchestrate, "_phase_only_alternation", fail_single_ris_from_zero_phase)
    monkeypatch.setattr(orchestrate, "_pinned_sdp_point", record)
    solution = exhaustive_search_baseline(channels, config, AlgorithmOptions(max_iter=3))
    assert sorted(switched_off) == [[0], [1]]
    assert check_feasible(solution, config, channels).feasible


def test_exhaustive_search_matches_proposed_without_reflected_links(make_config, make_channels):
    config = make_config(P_RE=1.0, eta=0.5)
    channels = make_channels(config, seed=4, direct_scale=1.0, reflect_scale=0.0)
    proposed, _ = alternating_optimize(channels, config)
    exhaustive = exhaustive_search_baseline(channels, config)
    assert exhaustive.active.count == 0
    assert exhaustive.network_power_mW == pytest.approx(proposed.network_power_mW, rel=1e-6)


def test_exhaustive_search_is_no_worse_than_proposed_on_average(make_config, make_channels):
    config = make_config(K=2, L=2, N=2, P_RE=0.5)
    exhaustive, proposed = [], []
    for seed in range(4):
        channels = make_channels(config, seed=seed)
        proposed.append(alternating_optimize(channels, config, seed=seed)[0].network_power_mW)
        exhaustive.append(exhaustive_search_baseline(channels, config, seed=seed).network_power_mW)
    assert np.mean(exhaustive) <= 1.05 * np.mean(proposed)


def test_exhaustive_search_is_guarded(make_config, make_channels):
    config = make_config(L=13, N=1)
    channels = make_channels(config)
    with pytest.raises(StructuralError, match="L <= 12"):
        exhaustive_search_baseline(channels, config)


def test_run_method_dispatch(small_config, small_channels):
    options = AlgorithmOptions(max_iter=2)
    _, extras = run_method("proposed", small_channels, small_config, options)
    assert "trace" in extras
    _, extras = run_method("all_active", small_channels, small_config, options)
    assert extras["iterations"] >= 0
    with pytest.raises(StructuralError, match="unknown method"):
        run_method("random", small_channels, small_config, options)


@pytest.mark.parametrize("kwargs", [
    {"feasibility_mode": "greedy"},
    {"epsilon_mW": -1.0},
    {"max_iter": 0},
    {"samples": 0},
])
def test_algorithm_options_validation(kwargs):
    with pytest.raises(StructuralError):
        AlgorithmOptions(**kwargs)


@pytest.fixture(scope="module")
def desk_runs():
    """Proposed, all-active and exhaustive runs on 20 paired desk realizations."""
    base, _ = validate_config(SCENARIOS / "desk.json")
    runs = []
    for trial in range(20):
        config, channels, algorithm_seed = draw_realization(base, trial_seed(42, trial))
        proposed, trace = alternating_optimize(channels, config, seed=algorithm_seed)
        everything_on = all_ris_active_baseline(channels, config, seed=algorithm_seed)
        exhaustive = exhaustive_search_baseline(channels, config, seed=algorithm_seed)
        runs.append((config, channels, trace, proposed, everything_on, exhaustive))
    return runs


@pytest.mark.slow
def test_desk_scenario_solutions_are_feasible(desk_runs):
    for config, channels, _, proposed, everything_on, exhaustive in desk_runs:
        for solution in (proposed, everything_on, exhaustive):
            assert check_feasible(solution, config, channels).feasible
        assert exhaustive.network_power_mW <= everything_on.network_power_mW * (1.0 + 1e-9)


@pytest.mark.slow
def test_desk_scenario_paired_means(desk_runs):
    proposed = np.mean([run[3].network_power_mW for run in desk_runs])
    everything_on = np.mean([run[4].network_power_mW for run in desk_runs])
    exhaustive = np.mean([run[5].network_power_mW for run in desk_runs])
    assert proposed <= 1.05 * exhaustive
    assert proposed <= everything_on + 1e-3


@pytest.mark.slow
def test_desk_scenario_traces_decrease(desk_runs):
    for _, _, trace, proposed, _, _ in desk_runs:
        assert trace.iterations <= DEFAULT_MAX_ITERATIONS
        powers = trace.accepted_powers
        assert all(later <= earlier for earlier, later in zip(powers, powers[1:]))
        assert proposed.network_power_mW <= trace.initial_power_mW
