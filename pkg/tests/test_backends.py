"""
Cross-check of the built-in interior point solver against cvxpy.
"""

from pathlib import Path

import numpy as np
import pytest

pytest.importorskip("cvxpy")

from src.model.beamform import solve_beamforming  # noqa: E402
from src.model.monte_carlo import draw_realization, trial_seed  # noqa: E402
from src.model.network_model import ActiveSet, PhaseConfig  # noqa: E402
from src.model.ris_select import precompute_quadratics, solve_relaxation  # noqa: E402
from src.solver.backends import CvxpyBackend  # noqa: E402
from src.solver.conic import ConicStatus, solve  # noqa: E402
from src.utils.scenario_loader import validate_config  # noqa: E402
from tests.test_conic import CORPUS  # noqa: E402

CROSS_CHECK_TOL = 1e-3
SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="module")
def backend():
    return CvxpyBackend()


@pytest.mark.parametrize("build", CORPUS, ids=[f.__name__ for f in CORPUS])
def test_corpus_agrees_with_cvxpy(build, backend):
    problem, expected = build()
    reference = solve(problem, backend=backend)
    assert reference.status is ConicStatus.OPTIMAL
    assert reference.objective == pytest.approx(expected, rel=CROSS_CHECK_TOL, abs=CROSS_CHECK_TOL)
    assert solve(problem).objective == pytest.approx(reference.objective, rel=CROSS_CHECK_TOL,
                                                      abs=CROSS_CHECK_TOL)


def test_beamforming_agrees_with_cvxpy(small_config, small_channels, backend):
    active = ActiveSet.all_active(small_config.L)
    phases = PhaseConfig.random_phase(small_config, active, np.random.default_rng(0))
    ours = solve_beamforming(small_channels, active, phases, small_config)
    theirs = solve_beamforming(small_channels, active, phases, small_config, backend=backend)
    assert ours.transmit_power_mW == pytest.approx(theirs.transmit_power_mW, rel=CROSS_CHECK_TOL)


def test_relaxation_agrees_with_cvxpy(small_config, small_channels, backend):
    active = ActiveSet.all_active(small_config.L)
    phases = PhaseConfig.random_phase(small_config, active, np.random.default_rng(1))
    beams = solve_beamforming(small_channels, active, phases, small_config).beams
    quad = precompute_quadratics(small_channels, beams)
    ours = solve_relaxation(quad, small_config)
    theirs = solve_relaxation(quad, small_config, backend=backend)
    assert ours.solved and theirs.solved
    assert ours.objective_mW == pytest.approx(theirs.objective_mW, rel=CROSS_CHECK_TOL, abs=CROSS_CHECK_TOL)


@pytest.mark.parametrize("trial", range(5))
def test_desk_beamforming_agrees_with_cvxpy(trial, backend):
    base, _ = validate_config(SCENARIOS / "desk.json")
    config, channels, _ = draw_realization(base, trial_seed(42, trial))
    active = ActiveSet.all_active(config.L)
    phases = PhaseConfig.zero_phase(config, active)
    theirs = solve_beamforming(channels, active, phases, config, backend=backend)
    ours = solve_beamforming(channels, active, phases, config)
    assert ours.status == "optimal"
    assert ours.objective_mW == pytest.approx(theirs.objective_mW, rel=CROSS_CHECK_TOL)
