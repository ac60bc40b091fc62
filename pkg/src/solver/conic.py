"""
Real conic programs and the homogeneous self-dual interior point backend.

A ConicProblem is

    minimise    c^T x
    subject to  A_i x + b_i in K_i    for every constraint block i

with K_i the zero cone, the nonnegative orthant, a second-order cone or a PSD
cone (svec-packed). Internally the zero-cone rows become equalities
A_eq x = b_eq and every other block goes to G x + s = h with s in the product
cone, and the embedding of that pair is solved with a Mehrotra
predictor-corrector method using Nesterov-Todd scaling.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.errors import StructuralError
from src.solver.cones import Cone, ConeProduct, NonnegCone, make_cone
from src.utils.parameters import DEFAULT_FEAS_TOL, DEFAULT_GAP_TOL, DEFAULT_SOLVER_MAX_ITER, DEFAULT_STEP_FRACTION

logger = logging.getLogger(__name__)

# Certificates accepted when the iteration stalls before the strict tolerances
STALL_CERTIFICATE_TOL = 1e-5
MIN_STEP = 1e-10
REFINEMENT_STEPS = 3
EQUILIBRATION_ITERATIONS = 5
EQUILIBRATION_EPS = 1e-12
MIN_EQUILIBRATION = 1e-6
MAX_EQUILIBRATION = 1e6


class ConicStatus(str, Enum):
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    NUMERICAL_LIMIT = "numerical_limit"


@dataclass(frozen=True)
class Tolerances:
    """Stopping tolerances of the conic solver."""
    feas_tol: float = DEFAULT_FEAS_TOL
    gap_tol: float = DEFAULT_GAP_TOL
    max_iter: int = DEFAULT_SOLVER_MAX_ITER
    step_fraction: float = DEFAULT_STEP_FRACTION


@dataclass
class Constraint:
    """One block A x + b in cone."""
    A: np.ndarray
    b: np.ndarray
    cone: Cone

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.ravel(np.asarray(self.b, dtype=float))
        if self.A.shape[0] != self.cone.dim or self.b.shape != (self.cone.dim,):
            raise StructuralError(
                f"{self.cone!r} needs {self.cone.dim} rows, got A {self.A.shape} and b {self.b.shape}"
            )


@dataclass
class ConicProblem:
    """A real conic program over n variables."""
    n: int
    objective: np.ndarray
    constraints: List[Constraint] = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.ravel(np.asarray(self.objective, dtype=float))
        if self.objective.shape != (self.n,):
            raise StructuralError(f"objective has shape {self.objective.shape}, expected ({self.n},)")
        for constraint in self.constraints:
            self._check_width(constraint)

    def _check_width(self, constraint: Constraint) -> None:
        if constraint.A.shape[1] != self.n:
            raise StructuralError(f"constraint map has {constraint.A.shape[1]} columns, expected {self.n}")

    def add(self, A: np.ndarray, b: np.ndarray, kind: str, size: Optional[int] = None) -> int:
        """
        Append the block A x + b in cone(kind, size).

        Args:
            A: (m, n) map
            b: (m,) offset
            kind: "zero", "nonneg", "soc" or "psd"
            size: Cone size (side length for psd); defaults to the row count

        Returns:
            int: Index of the new constraint block
        """
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if size is None:
            size = A.shape[0]
        constraint = Constraint(A, b, make_cone(kind, size))
        self._check_width(constraint)
        self.constraints.append(constraint)
        return len(self.constraints) - 1

    def count(self, kind: str) -> int:
        """Number of constraint blocks of the given cone kind."""
        return sum(1 for c in self.constraints if c.cone.kind == kind)


@dataclass(frozen=True)
class ConicSolution:
    """
    Solver output.

    On OPTIMAL, x is the primal point, `duals[i]` the multiplier of block i
    and `slacks[i]` = A_i x + b_i. On PRIMAL_INFEASIBLE the duals hold the
    normalised infeasibility certificate and x is NaN.
    """
    status: ConicStatus
    x: np.ndarray
    duals: Tuple[np.ndarray, ...]
    slacks: Tuple[np.ndarray, ...]
    objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is ConicStatus.OPTIMAL

    @property
    def y(self) -> np.ndarray:
        """All multipliers stacked in constraint order."""
        if not self.duals:
            return np.zeros(0)
        return np.concatenate(self.duals)


class ConicBackend(Protocol):
    name: str

    def solve(self, problem: ConicProblem, tolerances: Tolerances) -> ConicSolution:
        ...


# =============================================
# Standard form with empty-row presolve
# =============================================

@dataclass
class _StandardForm:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray
    cones: ConeProduct
    # per constraint: ("eq" | "cone", kept local rows, position of those rows in A/G)
    layout: List[Tuple[str, np.ndarray, np.ndarray]]
    infeasible_block: Optional[int] = None


def _standard_form(problem: ConicProblem, tol: float) -> _StandardForm:
    eq_rows: List[np.ndarray] = []
    eq_rhs: List[np.ndarray] = []
    g_rows: List[np.ndarray] = []
    g_rhs: List[np.ndarray] = []
    cones: List[Cone] = []
    layout = []
    infeasible_block = None
    eq_count = 0
    g_count = 0

    for index, constraint in enumerate(problem.constraints):
        A, b, cone = constraint.A, constraint.b, constraint.cone
        keep = np.arange(A.shape[0])
        if cone.kind in ("zero", "nonneg"):
            empty = ~np.any(A != 0.0, axis=1)
            violated = np.abs(b[empty]) > tol if cone.kind == "zero" else b[empty] < -tol
            if np.any(violated) and infeasible_block is None:
                infeasible_block = index
            keep = np.flatnonzero(~empty)

        if cone.kind == "zero":
            eq_rows.append(A[keep])
            eq_rhs.append(-b[keep])
            layout.append(("eq", keep, eq_count + np.arange(keep.size)))
            eq_count += keep.size
        else:
            if keep.size == 0:
                layout.append(("cone", keep, keep))
                continue
            if cone.kind == "nonneg" and keep.size != cone.size:
                cone = NonnegCone(keep.size)
            g_rows.append(-A[keep])
            g_rhs.append(b[keep])
            cones.append(cone)
            layout.append(("cone", keep, g_count + np.arange(keep.size)))
            g_count += keep.size

    n = problem.n
    return _StandardForm(
        c=problem.objective.copy(),
        A=np.vstack(eq_rows) if eq_rows else np.zeros((0, n)),
        b=np.concatenate(eq_rhs) if eq_rhs else np.zeros(0),
        G=np.vstack(g_rows) if g_rows else np.zeros((0, n)),
        h=np.concatenate(g_rhs) if g_rhs else np.zeros(0),
        cones=ConeProduct(cones),
        layout=layout,
        infeasible_block=infeasible_block,
    )


def _assemble(problem: ConicProblem, form: _StandardForm, status: ConicStatus, x: np.ndarray,
              y: np.ndarray, z: np.ndarray, stats: Tuple[float, float, float, float, float], iterations: int
              ) -> ConicSolution:
    duals = []
    slacks = []
    for constraint, (kind, local, rows) in zip(problem.constraints, form.layout):
        dual = np.zeros(constraint.cone.dim)
        dual[local] = y[rows] if kind == "eq" else z[rows]
        duals.append(dual)
        slacks.append(constraint.A @ x + constraint.b)
    pcost, dcost, gap, pres, dres = stats
    return ConicSolution(
        status=status,
        x=x,
        duals=tuple(duals),
        slacks=tuple(slacks),
        objective=pcost,
        dual_objective=dcost,
        gap=gap,
        primal_residual=pres,
        dual_residual=dres,
        iterations=iterations,
    )


# =============================================
# Ruiz equilibration
# =============================================

@dataclass
class _Equilibration:
    """
    Positive rescaling of a standard form.

    The scaled data are A' = E_eq A D, G' = E_g G D, b' = beta E_eq b,
    h' = beta E_g h and c' = gamma D c. E_g is constant on every second-order
    and PSD block so that the scaled slack stays in the same cone.
    """
    d: np.ndarray
    e_eq: np.ndarray
    e_g: np.ndarray
    beta: float = 1.0
    gamma: float = 1.0

    @classmethod
    def identity(cls, form: _StandardForm) -> "_Equilibration":
        return cls(np.ones(form.c.size), np.ones(form.A.shape[0]), np.ones(form.G.shape[0]))

    @classmethod
    def fit(cls, form: _StandardForm, iterations: int = EQUILIBRATION_ITERATIONS) -> "_Equilibration":
        p = form.A.shape[0]
        stacked = np.vstack([form.A, form.G])
        groups = [(sl.start + p, sl.stop + p) for cone, sl in form.cones.blocks() if cone.kind in ("soc", "psd")]
        d = np.ones(stacked.shape[1])
        e = np.ones(stacked.shape[0])

        for _ in range(iterations):
            rows = np.max(np.abs(e[:, None] * stacked * d[None, :]), axis=1, initial=0.0)
            for start, stop in groups:
                rows[start:stop] = np.max(rows[start:stop], initial=0.0)
            e = e / np.sqrt(np.where(rows > EQUILIBRATION_EPS, rows, 1.0))
            cols = np.max(np.abs(e[:, None] * stacked * d[None, :]), axis=0, initial=0.0)
            d = d / np.sqrt(np.where(cols > EQUILIBRATION_EPS, cols, 1.0))

        d = np.clip(d, MIN_EQUILIBRATION, MAX_EQUILIBRATION)
        e = np.clip(e, MIN_EQUILIBRATION, MAX_EQUILIBRATION)
        rhs = np.concatenate([e[:p] * form.b, e[p:] * form.h])
        equilibration = cls(d, e[:p], e[p:])
        equilibration.beta = _unit_factor(rhs)
        equilibration.gamma = _unit_factor(d * form.c)
        return equilibration

    def apply(self, form: _StandardForm) -> _StandardForm:
        return _StandardForm(
            c=self.gamma * self.d * form.c,
            A=self.e_eq[:, None] * form.A * self.d[None, :],
            b=self.beta * self.e_eq * form.b,
            G=self.e_g[:, None] * form.G * self.d[None, :],
            h=self.beta * self.e_g * form.h,
            cones=form.cones,
            layout=form.layout,
            infeasible_block=form.infeasible_block,
        )

    def recover(self, form: _StandardForm, status: ConicStatus, x: np.ndarray, y: np.ndarray, z: np.ndarray,
                stats: Tuple[float, float, float, float, float]):
        """Map a point of the scaled problem back; certificates are renormalised on the original data."""
        pcost, dcost, gap, pres, dres = stats
        factor = self.beta * self.gamma
        stats = (pcost / factor, dcost / factor, gap, pres, dres)
        if status is ConicStatus.PRIMAL_INFEASIBLE:
            y = self.e_eq * y
            z = self.e_g * z
            scale = -float(form.h @ z + form.b @ y)
            if scale > 0:
                y, z = y / scale, z / scale
            return x, y, z, stats
        if status is ConicStatus.DUAL_INFEASIBLE:
            x = self.d * x
            scale = -float(form.c @ x)
            if scale > 0:
                x = x / scale
            return x, y, z, stats
        return self.d * x / self.beta, self.e_eq * y / self.gamma, self.e_g * z / self.gamma, stats


def _unit_factor(v: np.ndarray) -> float:
    peak = float(np.max(np.abs(v), initial=0.0))
    if peak <= EQUILIBRATION_EPS:
        return 1.0
    return float(np.clip(1.0 / peak, MIN_EQUILIBRATION, MAX_EQUILIBRATION))


# =============================================
# Interior point backend
# =============================================

class _ReducedKkt:
    """
    Factorised reduced KKT system of one iteration.

    Solves [[0, A^T, G^T], [-A, 0, 0], [-G, 0, W^T W]] (dx, dy, dz) = (r1, r2, r3)
    by eliminating dz.
    """

    def __init__(self, A: np.ndarray, G: np.ndarray, scaling):
        self.A = A
        self.scaling = scaling
        self.G_scaled = scaling.apply_inv_t(G)
        n, p = G.shape[1], A.shape[0]
        H = self.G_scaled.T @ self.G_scaled
        self.n, self.p = n, p
        self.matrix = np.block([[H, A.T], [A, np.zeros((p, p))]])
        delta = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(H)), initial=0.0)))
        regularised = self.matrix.copy()
        regularised[:n, :n] += delta * np.eye(n)
        regularised[n:, n:] -= delta * np.eye(p)
        self.factor = linalg.lu_factor(regularised, check_finite=True)

    def _solve_full(self, rhs: np.ndarray) -> np.ndarray:
        sol = linalg.lu_solve(self.factor, rhs)
        for _ in range(REFINEMENT_STEPS):
            sol = sol + linalg.lu_solve(self.factor, rhs - self.matrix @ sol)
        return sol

    def solve(self, r1: np.ndarray, r2: np.ndarray, r3: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        w_r3 = self.scaling.apply_inv_t(r3)
        rhs = np.concatenate([r1 - self.G_scaled.T @ w_r3, -r2])
        sol = self._solve_full(rhs)
        dx, dy = sol[:self.n], sol[self.n:]
        dz = self.scaling.apply_inv(w_r3 + self.G_scaled @ dx)
        return dx, dy, dz


class InteriorPointBackend:
    """Self-contained dense primal-dual solver on the homogeneous self-dual embedding."""
    name = "interior-point"

    def __init__(self, equilibrate: bool = True):
        self.equilibrate = equilibrate

    def solve(self, problem: ConicProblem, tolerances: Tolerances) -> ConicSolution:
        form = _standard_form(problem, tolerances.feas_tol)
        n = problem.n
        failed = (math.nan, math.nan, math.nan, math.nan, math.nan)
        if form.infeasible_block is not None:
            logger.debug("Constant block %d violates its cone", form.infeasible_block)
            return _assemble(problem, form, ConicStatus.PRIMAL_INFEASIBLE, np.full(n, np.nan),
                             np.zeros(form.A.shape[0]), np.zeros(form.G.shape[0]), failed, 0)
        try:
            equilibration = _Equilibration.fit(form) if self.equilibrate else _Equilibration.identity(form)
            status, x, y, z, stats, iterations = self._iterate(equilibration.apply(form), tolerances)
            x, y, z, stats = equilibration.recover(form, status, x, y, z, stats)
        except (linalg.LinAlgError, ArithmeticError, ValueError) as exc:
            logger.warning("Interior point iteration failed: %s", exc)
            return _assemble(problem, form, ConicStatus.NUMERICAL_LIMIT, np.full(n, np.nan),
                             np.zeros(form.A.shape[0]), np.zeros(form.G.shape[0]), failed, 0)
        return _assemble(problem, form, status, x, y, z, stats, iterations)

    def _iterate(self, form: _StandardForm, tol: Tolerances):
        c, A, b, G, h, K = form.c, form.A, form.b, form.G, form.h, form.cones
        n = c.size
        nu = K.degree
        e = K.identity()
        norm_c, norm_b, norm_h = (float(np.linalg.norm(v)) for v in (c, b, h))

        x = np.zeros(n)
        y = np.zeros(b.size)
        s = e.copy()
        z = e.copy()
        tau, kappa = 1.0, 1.0

        status = ConicStatus.NUMERICAL_LIMIT
        stats = (math.nan,) * 5
        certificate = (math.inf, math.inf)
        iteration = 0
        for iteration in range(tol.max_iter + 1):
            rx = A.T @ y + G.T @ z + c * tau
            ry = b * tau - A @ x
            rz = h * tau - G @ x - s
            rt = -(c @ x) - b @ y - h @ z - kappa

            pcost = float(c @ x) / tau
            dcost = -float(h @ z + b @ y) / tau
            pres = max(np.linalg.norm(ry) / (1.0 + norm_b), np.linalg.norm(rz) / (1.0 + norm_h)) / tau
            dres = np.linalg.norm(rx) / (1.0 + norm_c) / tau
            gap = abs(pcost - dcost) / (1.0 + abs(pcost))
            stats = (pcost, dcost, gap, float(pres), float(dres))
            logger.debug("it %3d pcost % .8e dcost % .8e pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e",
                         iteration, pcost, dcost, pres, dres, gap, tau, kappa)

            if pres <= tol.feas_tol and dres <= tol.feas_tol and gap <= tol.gap_tol:
                status = ConicStatus.OPTIMAL
                break

            certificate = self._certificates(A, b, G, h, c, x, y, z, s, norm_b, norm_c, norm_h)
            if certificate[0] <= tol.feas_tol:
                status = ConicStatus.PRIMAL_INFEASIBLE
                break
            if certificate[1] <= tol.feas_tol:
                status = ConicStatus.DUAL_INFEASIBLE
                break
            if iteration == tol.max_iter:
                break

            scaling = K.scaling(s, z)
            lam = scaling.lam
            mu = (s @ z + tau * kappa) / (nu + 1)
            kkt = _ReducedKkt(A, G, scaling)
            x2, y2, z2 = kkt.solve(c, b, h)
            denominator = c @ x2 + b @ y2 + h @ z2 + kappa / tau

            def newton(rho: float, rc: np.ndarray, rc_tau: float):
                lam_rc = K.divide(lam, rc)
                f3 = -rho * rz + scaling.apply_t(lam_rc)
                f4 = -rho * rt + rc_tau / tau
                x1, y1, z1 = kkt.solve(-rho * rx, -rho * ry, f3)
                dtau = (f4 + c @ x1 + b @ y1 + h @ z1) / denominator
                dx = x1 - dtau * x2
                dy = y1 - dtau * y2
                dz = z1 - dtau * z2
                ds = scaling.apply_t(lam_rc - scaling.apply(dz))
                dkappa = (rc_tau - kappa * dtau) / tau
                return dx, dy, dz, ds, dtau, dkappa

            def max_step(ds, dz, dtau, dkappa) -> float:
                alpha = min(K.max_step(s, ds), K.max_step(z, dz))
                if dtau < 0:
                    alpha = min(alpha, -tau / dtau)
                if dkappa < 0:
                    alpha = min(alpha, -kappa / dkappa)
                return alpha

            lam_sq = K.product(lam, lam)
            _, _, dz_a, ds_a, dtau_a, dkappa_a = newton(1.0, -lam_sq, -tau * kappa)
            alpha_aff = min(1.0, max_step(ds_a, dz_a, dtau_a, dkappa_a))
            sigma = (1.0 - alpha_aff) ** 3

            rc = -lam_sq - K.product(scaling.apply_inv_t(ds_a), scaling.apply(dz_a)) + sigma * mu * e
            rc_tau = -tau * kappa - dtau_a * dkappa_a + sigma * mu
            dx, dy, dz, ds, dtau, dkappa = newton(1.0 - sigma, rc, rc_tau)

            alpha = min(1.0, tol.step_fraction * max_step(ds, dz, dtau, dkappa))
            if not np.isfinite(alpha) or alpha < MIN_STEP:
                logger.debug("Step length %.2e too small, stopping", alpha)
                break

            x = x + alpha * dx
            y = y + alpha * dy
            z = z + alpha * dz
            s = s + alpha * ds
            tau = tau + alpha * dtau
            kappa = kappa + alpha * dkappa
            if not (np.all(np.isfinite(x)) and np.isfinite(tau)):
                break

        if status is ConicStatus.NUMERICAL_LIMIT:
            if certificate[0] <= STALL_CERTIFICATE_TOL:
                status = ConicStatus.PRIMAL_INFEASIBLE
            elif certificate[1] <= STALL_CERTIFICATE_TOL:
                status = ConicStatus.DUAL_INFEASIBLE
            logger.debug("Solver stopped after %d iterations with status %s", iteration, status.value)

        if status is ConicStatus.PRIMAL_INFEASIBLE:
            scale = -float(h @ z + b @ y)
            return status, np.full(n, np.nan), y / scale, z / scale, stats, iteration
        if status is ConicStatus.DUAL_INFEASIBLE:
            return status, x / -float(c @ x), np.zeros_like(y), np.zeros_like(z), stats, iteration
        return status, x / tau, y / tau, z / tau, stats, iteration

    @staticmethod
    def _certificates(A, b, G, h, c, x, y, z, s, norm_b, norm_c, norm_h) -> Tuple[float, float]:
        primal = math.inf
        dual = math.inf
        hz_by = float(h @ z + b @ y)
        if hz_by < 0:
            primal = float(np.linalg.norm(A.T @ y + G.T @ z)) / max(1.0, norm_c) / -hz_by
        cx = float(c @ x)
        if cx < 0:
            dual = max(
                float(np.linalg.norm(A @ x)) / max(1.0, norm_b),
                float(np.linalg.norm(G @ x + s)) / max(1.0, norm_h),
            ) / -cx
        return primal, dual


_DEFAULT_BACKEND = InteriorPointBackend()


def solve(problem: ConicProblem, tolerances: Optional[Tolerances] = None,
          backend: Optional[ConicBackend] = None) -> ConicSolution:
    """
    Solve a conic program.

    Args:
        problem: The program to solve
        tolerances: Stopping tolerances (defaults from parameters.py)
        backend: Solver backend; the built-in interior point method by default

    Returns:
        ConicSolution: Status, primal point, multipliers and residuals
    """
    tolerances = tolerances or Tolerances()
    backend = backend or _DEFAULT_BACKEND
    solution = backend.solve(problem, tolerances)
    logger.debug("%s solve: n=%d blocks=%d status=%s objective=%.6g iterations=%d",
                 backend.name, problem.n, len(problem.constraints), solution.status.value,
                 solution.objective, solution.iterations)
    return solution


# =============================================
# Plain-text debug dump
# =============================================
#
# CONIC 1
# VARIABLES <n>
# BLOCKS <count>
# OBJECTIVE <nnz>           followed by "<col> <value>" lines
# BLOCK <index> <kind> <size> <rows> <nnz>
#                           followed by "<row> <col> <value>" triplets of A
# OFFSET <nnz>              followed by "<row> <value>" lines of b
# END

def dump_problem(problem: ConicProblem) -> str:
    """Render a ConicProblem in the plain-text dump format above."""
    lines = ["CONIC 1", f"VARIABLES {problem.n}", f"BLOCKS {len(problem.constraints)}"]
    nonzero = np.flatnonzero(problem.objective)
    lines.append(f"OBJECTIVE {nonzero.size}")
    lines.extend(f"{j} {problem.objective[j]:.17g}" for j in nonzero)
    for index, constraint in enumerate(problem.constraints):
        rows, cols = np.nonzero(constraint.A)
        cone = constraint.cone
        lines.append(f"BLOCK {index} {cone.kind} {cone.size} {constraint.A.shape[0]} {rows.size}")
        lines.extend(f"{r} {c} {constraint.A[r, c]:.17g}" for r, c in zip(rows, cols))
        offsets = np.flatnonzero(constraint.b)
        lines.append(f"OFFSET {offsets.size}")
        lines.extend(f"{r} {constraint.b[r]:.17g}" for r in offsets)
    lines.append("END")
    return "\n".join(lines) + "\n"


def write_problem(problem: ConicProblem, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_problem(problem))


def parse_problem(text: str) -> ConicProblem:
    """Read a problem back from its dump."""
    lines = iter(line.split() for line in text.splitlines() if line.strip())

    def expect(tag: str) -> Sequence[str]:
        tokens = next(lines)
        if tokens[0] != tag:
            raise ValueError(f"expected {tag}, found {tokens[0]}")
        return tokens[1:]

    expect("CONIC")
    n = int(expect("VARIABLES")[0])
    blocks = int(expect("BLOCKS")[0])
    objective = np.zeros(n)
    for _ in range(int(expect("OBJECTIVE")[0])):
        col, value = next(lines)
        objective[int(col)] = float(value)
    problem = ConicProblem(n, objective)
    for _ in range(blocks):
        _, kind, size, rows, nnz = expect("BLOCK")
        A = np.zeros((int(rows), n))
        for _ in range(int(nnz)):
            r, col, value = next(lines)
            A[int(r), int(col)] = float(value)
        b = np.zeros(int(rows))
        for _ in range(int(expect("OFFSET")[0])):
            r, value = next(lines)
            b[int(r)] = float(value)
        problem.add(A, b, kind, int(size))
    expect("END")
    return problem
