"""
Conic kernel corpus: small programs with independently known optima.
"""

import math
import time

import numpy as np
import pytest

from src.errors import StructuralError
from src.solver.cones import SecondOrderCone, svec, svec_size
from src.solver.conic import (
    ConicProblem,
    ConicStatus,
    InteriorPointBackend,
    Tolerances,
    dump_problem,
    parse_problem,
    solve,
    write_problem,
)

REL_TOL = 1e-5


def lp_two_variables():
    # min x1 + x2  s.t.  x >= 0, x1 + x2 >= 1
    problem = ConicProblem(2, [1.0, 1.0])
    problem.add(np.eye(2), np.zeros(2), "nonneg")
    problem.add([[1.0, 1.0]], [-1.0], "nonneg")
    return problem, 1.0


def lp_with_equality():
    # min x1 + 2 x2  s.t.  x1 + x2 = 1, x >= 0
    problem = ConicProblem(2, [1.0, 2.0])
    problem.add([[1.0, 1.0]], [-1.0], "zero")
    problem.add(np.eye(2), np.zeros(2), "nonneg")
    return problem, 1.0


def socp_distance_to_line():
    # min t  s.t.  ||x - (3, 4)|| <= t, x1 + x2 = 0   ->  7 / sqrt(2)
    problem = ConicProblem(3, [1.0, 0.0, 0.0])
    problem.add(np.eye(3), [0.0, -3.0, -4.0], "soc")
    problem.add([[0.0, 1.0, 1.0]], [0.0], "zero")
    return problem, 7.0 / math.sqrt(2.0)


def socp_linear_over_ball():
    # min c^T x  s.t.  ||x|| <= 1   ->  -||c||
    c = np.array([1.0, 2.0, 2.0])
    A = np.vstack([np.zeros(3), np.eye(3)])
    b = np.array([1.0, 0.0, 0.0, 0.0])
    problem = ConicProblem(3, c)
    problem.add(A, b, "soc")
    return problem, -3.0


def socp_square_epigraph():
    # min t  s.t.  x^2 <= t (as ||(2x, t - 1)|| <= t + 1), x >= 1   ->  1
    problem = ConicProblem(2, [0.0, 1.0])
    problem.add([[0.0, 1.0], [2.0, 0.0], [0.0, 1.0]], [1.0, 0.0, -1.0], "soc")
    problem.add([[1.0, 0.0]], [-1.0], "nonneg")
    return problem, 1.0


def socp_sum_of_distances():
    # min ||x - a|| + ||x - b||  ->  ||a - b||
    a, b = np.array([1.0, 2.0]), np.array([4.0, -2.0])
    problem = ConicProblem(4, [1.0, 1.0, 0.0, 0.0])
    for index, point in enumerate((a, b)):
        A = np.zeros((3, 4))
        A[0, index] = 1.0
        A[1:, 2:] = np.eye(2)
        problem.add(A, np.concatenate([[0.0], -point]), "soc")
    return problem, 5.0


def socp_and_lp_mixed():
    # max x1 + x2 over the unit disc  ->  -sqrt(2) as a minimisation
    problem = ConicProblem(2, [-1.0, -1.0])
    problem.add(np.vstack([np.zeros(2), np.eye(2)]), [1.0, 0.0, 0.0], "soc")
    problem.add(np.eye(2), [1.0, 1.0], "nonneg")
    return problem, -math.sqrt(2.0)


def socp_badly_scaled():
    # min 1e3 (x1 + 2 x2 + 2e4 u)  s.t.  1e-4 (1, x1, x2, 1e4 u) in SOC  ->  -3e3
    problem = ConicProblem(3, [1e3, 2e3, 2e7])
    A = 1e-4 * np.vstack([np.zeros(3), np.diag([1.0, 1.0, 1e4])])
    problem.add(A, [1e-4, 0.0, 0.0, 0.0], "soc")
    return problem, -3e3


def _symmetric(seed, side):
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((side, side))
    return (C + C.T) / 2.0


def sdp_min_eigenvalue():
    # min trace(C X)  s.t.  trace(X) = 1, X PSD  ->  lambda_min(C)
    C = _symmetric(5, 3)
    size = svec_size(3)
    problem = ConicProblem(size, svec(C))
    problem.add(np.eye(size), np.zeros(size), "psd", 3)
    problem.add(svec(np.eye(3))[None, :], [-1.0], "zero")
    return problem, float(np.linalg.eigvalsh(C)[0])


def sdp_max_eigenvalue():
    # min t  s.t.  t I - C PSD  ->  lambda_max(C)
    C = _symmetric(8, 4)
    problem = ConicProblem(1, [1.0])
    problem.add(svec(np.eye(4))[:, None], -svec(C), "psd", 4)
    return problem, float(np.linalg.eigvalsh(C)[-1])


def sdp_fixed_off_diagonal():
    # min X11 + X22  s.t.  X12 = 1, X PSD  ->  2
    problem = ConicProblem(3, [1.0, 0.0, 1.0])
    problem.add(np.eye(3), np.zeros(3), "psd", 2)
    problem.add([[0.0, 1.0 / math.sqrt(2.0), 0.0]], [-1.0], "zero")
    return problem, 2.0


def sdp_with_box():
    # min -x  s.t.  [[1, x], [x, 1]] PSD, x <= 0.5  ->  -0.5
    A = np.array([[0.0], [math.sqrt(2.0)], [0.0]])
    problem = ConicProblem(1, [-1.0])
    problem.add(A, [1.0, 0.0, 1.0], "psd", 2)
    problem.add([[-1.0]], [0.5], "nonneg")
    return problem, -0.5


CORPUS = [
    lp_two_variables,
    lp_with_equality,
    socp_distance_to_line,
    socp_linear_over_ball,
    socp_square_epigraph,
    socp_sum_of_distances,
    socp_and_lp_mixed,
    socp_badly_scaled,
    sdp_min_eigenvalue,
    sdp_max_eigenvalue,
    sdp_fixed_off_diagonal,
    sdp_with_box,
]


@pytest.mark.parametrize("build", CORPUS, ids=[f.__name__ for f in CORPUS])
def test_corpus_optimum(build):
    problem, expected = build()
    solution = solve(problem)
    assert solution.status is ConicStatus.OPTIMAL
    assert solution.objective == pytest.approx(expected, rel=REL_TOL, abs=REL_TOL)
    assert solution.dual_objective == pytest.approx(expected, rel=REL_TOL, abs=REL_TOL)
    for constraint, slack in zip(problem.constraints, solution.slacks):
        assert constraint.cone.margin(slack) >= -1e-6


def test_corpus_runs_quickly():
    start = time.perf_counter()
    for build in CORPUS:
        solve(build()[0])
    assert time.perf_counter() - start < 5.0


def test_duals_certify_lp_optimum():
    problem, expected = lp_two_variables()
    solution = solve(problem)
    # c = sum_i A_i^T z_i and the dual objective is -sum_i b_i^T z_i
    stationarity = sum(c.A.T @ z for c, z in zip(problem.constraints, solution.duals))
    np.testing.assert_allclose(stationarity, problem.objective, atol=1e-6)
    assert all(np.all(z >= -1e-8) for z in solution.duals)
    assert -sum(c.b @ z for c, z in zip(problem.constraints, solution.duals)) == pytest.approx(expected, abs=1e-6)


def test_infeasible_lp_is_certified():
    # x >= 1 and x <= -1
    problem = ConicProblem(1, [1.0])
    problem.add([[1.0]], [-1.0], "nonneg")
    problem.add([[-1.0]], [-1.0], "nonneg")
    solution = solve(problem)
    assert solution.status is ConicStatus.PRIMAL_INFEASIBLE
    assert np.all(np.isnan(solution.x))


def test_unbounded_lp_is_dual_infeasible():
    # min x  s.t.  x <= 0
    problem = ConicProblem(1, [1.0])
    problem.add([[-1.0]], [0.0], "nonneg")
    assert solve(problem).status is ConicStatus.DUAL_INFEASIBLE


def test_infeasible_socp_is_certified():
    # ||x|| <= 1 and x1 >= 2
    problem = ConicProblem(2, [0.0, 1.0])
    problem.add(np.vstack([np.zeros(2), np.eye(2)]), [1.0, 0.0, 0.0], "soc")
    problem.add([[1.0, 0.0]], [-2.0], "nonneg")
    assert solve(problem).status is ConicStatus.PRIMAL_INFEASIBLE


def test_presolve_drops_empty_rows():
    problem, expected = lp_two_variables()
    problem.add(np.zeros((2, 2)), [0.0, 3.0], "nonneg")
    problem.add(np.zeros((1, 2)), [0.0], "zero")
    solution = solve(problem)
    assert solution.status is ConicStatus.OPTIMAL
    assert solution.objective == pytest.approx(expected, rel=REL_TOL)
    assert len(solution.duals) == len(problem.constraints)
    assert solution.duals[2].shape == (2,)


def test_presolve_detects_violated_constant_row():
    problem, _ = lp_two_variables()
    problem.add(np.zeros((1, 2)), [-1.0], "nonneg")
    solution = solve(problem)
    assert solution.status is ConicStatus.PRIMAL_INFEASIBLE
    assert solution.iterations == 0


def test_iteration_cap_reports_numerical_limit():
    problem, _ = sdp_min_eigenvalue()
    solution = solve(problem, Tolerances(max_iter=2))
    assert solution.status is ConicStatus.NUMERICAL_LIMIT


def test_block_dimension_is_checked():
    problem = ConicProblem(2, [1.0, 1.0])
    with pytest.raises(StructuralError):
        problem.add(np.eye(2), np.zeros(2), "psd", 2)
    with pytest.raises(StructuralError):
        problem.add(np.eye(3), np.zeros(3), "nonneg")


def test_count_by_kind():
    problem, _ = socp_sum_of_distances()
    assert problem.count("soc") == 2
    assert problem.count("psd") == 0


def test_dump_and_parse(tmp_path):
    problem, expected = sdp_with_box()
    text = dump_problem(problem)
    assert text.startswith("CONIC 1\nVARIABLES 1\nBLOCKS 2\n")
    assert "BLOCK 0 psd 2 3 1" in text
    parsed = parse_problem(text)
    assert [c.cone for c in parsed.constraints] == [c.cone for c in problem.constraints]
    np.testing.assert_array_equal(parsed.constraints[0].A, problem.constraints[0].A)
    assert solve(parsed).objective == pytest.approx(expected, rel=REL_TOL)

    path = tmp_path / "problem.txt"
    write_problem(problem, path)
    assert path.read_text(encoding="utf-8") == text


@pytest.mark.parametrize("build", CORPUS, ids=[f.__name__ for f in CORPUS])
def test_equilibration_keeps_the_optimum(build):
    problem, expected = build()
    plain = solve(problem, backend=InteriorPointBackend(equilibrate=False))
    scaled = solve(problem, backend=InteriorPointBackend(equilibrate=True))
    assert scaled.objective == pytest.approx(expected, rel=REL_TOL, abs=REL_TOL)
    if plain.status is ConicStatus.OPTIMAL:
        assert scaled.objective == pytest.approx(plain.objective, rel=REL_TOL, abs=REL_TOL)


def test_badly_scaled_infeasible_socp_is_certified():
    # 1e-4 ||x|| <= 1e-4 and 1e3 x1 >= 2e3
    problem = ConicProblem(2, [0.0, 1.0])
    problem.add(1e-4 * np.vstack([np.zeros(2), np.eye(2)]), [1e-4, 0.0, 0.0], "soc")
    problem.add([[1e3, 0.0]], [-2e3], "nonneg")
    solution = solve(problem)
    assert solution.status is ConicStatus.PRIMAL_INFEASIBLE
    # A^T z = 0 and b^T z < 0 on the original data
    stationarity = sum(c.A.T @ z for c, z in zip(problem.constraints, solution.duals))
    np.testing.assert_allclose(stationarity, 0.0, atol=1e-5)
    assert sum(c.b @ z for c, z in zip(problem.constraints, solution.duals)) == pytest.approx(-1.0, rel=1e-6)


def test_arithmetic_failure_reports_numerical_limit(monkeypatch):
    def divide_by_zero(self, s, z):
        raise ZeroDivisionError("float division by zero")

    monkeypatch.setattr(SecondOrderCone, "scaling", divide_by_zero)
    problem, _ = socp_linear_over_ball()
    solution = solve(problem)
    assert solution.status is ConicStatus.NUMERICAL_LIMIT
    assert np.all(np.isnan(solution.x))
