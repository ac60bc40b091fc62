"""
Optional cvxpy backend, used to cross-check the built-in interior point solver.
"""

import logging
import math
from typing import List, Optional

import numpy as np

from src.solver.cones import svec, svec_size
from src.solver.conic import ConicProblem, ConicSolution, ConicStatus, Tolerances

logger = logging.getLogger(__name__)


def _svec_selector(side: int) -> np.ndarray:
    # Maps cvxpy's column-major vec(S) to the isometric svec(S)
    rows, cols = np.tril_indices(side)
    selector = np.zeros((svec_size(side), side * side))
    scale = np.where(rows == cols, 1.0, math.sqrt(2.0))
    selector[np.arange(rows.size), cols * side + rows] = scale
    return selector


class CvxpyBackend:
    """Hands a ConicProblem to cvxpy and maps the result back."""
    name = "cvxpy"

    def __init__(self, solver: Optional[str] = None, verbose: bool = False):
        import cvxpy  # noqa: F401  (fail early when cvxpy is missing)
        self.solver = solver
        self.verbose = verbose

    def solve(self, problem: ConicProblem, tolerances: Tolerances) -> ConicSolution:
        import cvxpy as cp

        x = cp.Variable(problem.n)
        constraints: List = []
        dual_handles = []
        for block in problem.constraints:
            expr = block.A @ x + block.b
            kind = block.cone.kind
            if kind == "zero":
                con = expr == 0
            elif kind == "nonneg":
                con = expr >= 0
            elif kind == "soc":
                con = cp.SOC(expr[0], expr[1:])
            else:
                side = block.cone.size
                S = cp.Variable((side, side), symmetric=True)
                constraints.append(_svec_selector(side) @ cp.vec(S) == expr)
                con = S >> 0
            constraints.append(con)
            dual_handles.append(con)

        program = cp.Problem(cp.Minimize(problem.objective @ x), constraints)
        try:
            program.solve(solver=self.solver, verbose=self.verbose)
        except cp.error.SolverError as exc:
            logger.warning("cvxpy solver failed: %s", exc)
            return self._result(problem, ConicStatus.NUMERICAL_LIMIT, np.full(problem.n, np.nan), [], math.nan)

        status = {
            cp.OPTIMAL: ConicStatus.OPTIMAL,
            cp.OPTIMAL_INACCURATE: ConicStatus.OPTIMAL,
            cp.INFEASIBLE: ConicStatus.PRIMAL_INFEASIBLE,
            cp.INFEASIBLE_INACCURATE: ConicStatus.PRIMAL_INFEASIBLE,
            cp.UNBOUNDED: ConicStatus.DUAL_INFEASIBLE,
            cp.UNBOUNDED_INACCURATE: ConicStatus.DUAL_INFEASIBLE,
        }.get(program.status, ConicStatus.NUMERICAL_LIMIT)

        if status is not ConicStatus.OPTIMAL or x.value is None:
            return self._result(problem, status, np.full(problem.n, np.nan), [], math.nan)

        duals = []
        for block, con in zip(problem.constraints, dual_handles):
            value = con.dual_value
            if value is None:
                duals.append(np.zeros(block.cone.dim))
            elif block.cone.kind == "psd":
                duals.append(svec(np.asarray(value)))
            elif block.cone.kind == "soc":
                duals.append(np.concatenate([np.ravel(part) for part in value]))
            else:
                duals.append(np.ravel(value).astype(float))
        return self._result(problem, status, np.asarray(x.value, dtype=float), duals, float(program.value))

    @staticmethod
    def _result(problem: ConicProblem, status: ConicStatus, x: np.ndarray, duals: List[np.ndarray],
                objective: float) -> ConicSolution:
        if not duals:
            duals = [np.zeros(block.cone.dim) for block in problem.constraints]
        return ConicSolution(
            status=status,
            x=x,
            duals=tuple(duals),
            slacks=tuple(block.A @ x + block.b for block in problem.constraints),
            objective=objective,
            dual_objective=objective,
            gap=0.0 if status is ConicStatus.OPTIMAL else math.nan,
            primal_residual=math.nan,
            dual_residual=math.nan,
            iterations=0,
        )
