"""Solver backends built on the HiGHS interfaces shipped with scipy"""

from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix, csr_matrix, vstack

from src.lpcore.program import (
    FeasibilityProgram,
    Relation,
    Sense,
    Solution,
    SolveOptions,
    SolverStatus,
    max_violation,
)
from src.utils.errors import BackendUnavailable
from src.utils.logger import setup_logger

try:
    from scipy.optimize import Bounds, LinearConstraint, milp
except ImportError:  # scipy < 1.9
    milp = None

# scipy result codes shared by linprog and milp
_STATUS_MAP = {
    0: SolverStatus.OPTIMAL,
    1: SolverStatus.TIME_LIMIT,
    2: SolverStatus.INFEASIBLE,
    3: SolverStatus.UNBOUNDED,
}


def milp_available() -> bool:
    """Whether the installed scipy exposes a MILP solver"""
    return milp is not None


class SolverBase(ABC):
    """Abstract base class for solver backends"""

    supports_integers: bool = False

    def __init__(self, name: str):
        self.name = name
        self.logger = setup_logger(f"{__name__}.{type(self).__name__}")

    @abstractmethod
    def solve(self, program: FeasibilityProgram, options: SolveOptions) -> Solution:
        """
        Solve a program.

        Args:
            program: Program to solve
            options: Tolerances and limits

        Returns:
            Solution with status, values (when optimal) and objective value
        """
        pass

    @staticmethod
    def _objective_vector(program: FeasibilityProgram, index: Dict[str, int]) -> Tuple[np.ndarray, float]:
        """Minimization vector and the sign to undo for maximization"""
        c = np.zeros(len(index))
        sign = 1.0
        if program.objective is not None:
            for var_id, coef in program.objective.coefs.items():
                c[index[var_id]] += coef
            if program.objective.sense is Sense.MAX:
                sign = -1.0
        return sign * c, sign

    @staticmethod
    def _constraint_matrix(
        program: FeasibilityProgram, index: Dict[str, int]
    ) -> Tuple[csr_matrix, np.ndarray, np.ndarray]:
        """Rows as lb <= A x <= ub"""
        rows: List[int] = []
        cols: List[int] = []
        data: List[float] = []
        lower = np.full(len(program.constraints), -np.inf)
        upper = np.full(len(program.constraints), np.inf)
        for r, constraint in enumerate(program.constraints):
            for var_id, coef in constraint.coefs.items():
                rows.append(r)
                cols.append(index[var_id])
                data.append(coef)
            if constraint.relation is Relation.LE:
                upper[r] = constraint.rhs
            elif constraint.relation is Relation.GE:
                lower[r] = constraint.rhs
            else:
                lower[r] = upper[r] = constraint.rhs
        matrix = coo_matrix((data, (rows, cols)), shape=(len(program.constraints), len(index))).tocsr()
        return matrix, lower, upper

    def _finish(
        self,
        program: FeasibilityProgram,
        ids: List[str],
        x: np.ndarray,
        fun: float,
        sign: float,
        options: SolveOptions,
        status: SolverStatus = SolverStatus.OPTIMAL,
        detail: str = "",
    ) -> Solution:
        values = {var_id: float(value) for var_id, value in zip(ids, x)}
        constant = program.objective.constant if program.objective is not None else 0.0
        violation = max_violation(program, values)
        if violation > 10 * options.feas_tol:
            self.logger.debug(f"{program.name}: solution breaches constraints by {violation:.3g}")
        return Solution(status, values, sign * float(fun) + constant, detail)


class HighsLinprogSolver(SolverBase):
    """Continuous programs through scipy.optimize.linprog(method='highs')"""

    def __init__(self):
        super().__init__("highs-lp")

    def solve(self, program: FeasibilityProgram, options: SolveOptions) -> Solution:
        if program.has_integers:
            raise ValueError(f"{self.name} cannot solve programs with binary variables")

        ids = program.variable_ids()
        index = {var_id: i for i, var_id in enumerate(ids)}
        c, sign = self._objective_vector(program, index)
        matrix, lower, upper = self._constraint_matrix(program, index)

        # linprog wants A_ub x <= b_ub and A_eq x = b_eq
        eq = lower == upper
        has_upper = np.isfinite(upper) & ~eq
        has_lower = np.isfinite(lower) & ~eq
        blocks = []
        rhs = []
        if has_upper.any():
            blocks.append(matrix[has_upper])
            rhs.append(upper[has_upper])
        if has_lower.any():
            blocks.append(-matrix[has_lower])
            rhs.append(-lower[has_lower])

        a_ub = vstack(blocks).tocsr() if blocks else None
        b_ub = np.concatenate(rhs) if rhs else None
        a_eq = matrix[eq] if eq.any() else None
        b_eq = upper[eq] if eq.any() else None
        bounds = [
            (None if np.isinf(v.lower) else v.lower, None if np.isinf(v.upper) else v.upper)
            for v in program.variables.values()
        ]

        highs_options = {
            "presolve": True,
            "primal_feasibility_tolerance": options.feas_tol,
            "dual_feasibility_tolerance": options.feas_tol,
        }
        if options.time_limit is not None:
            highs_options["time_limit"] = options.time_limit

        self.logger.debug(f"{program.name}: LP {program.summary()}")
        result = linprog(
            c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
            bounds=bounds, method="highs", options=highs_options,
        )
        status = _STATUS_MAP.get(result.status, SolverStatus.NUMERICAL_FAILURE)
        if status is not SolverStatus.OPTIMAL:
            return Solution(status, detail=str(result.message))
        return self._finish(program, ids, result.x, result.fun, sign, options)


class HighsMilpSolver(SolverBase):
    """Mixed-integer programs through scipy.optimize.milp"""

    supports_integers = True

    def __init__(self):
        super().__init__("highs-milp")
        if milp is None:
            raise BackendUnavailable("scipy.optimize.milp is not available (scipy >= 1.9 required)")

    def solve(self, program: FeasibilityProgram, options: SolveOptions) -> Solution:
        ids = program.variable_ids()
        index = {var_id: i for i, var_id in enumerate(ids)}
        c, sign = self._objective_vector(program, index)
        matrix, lower, upper = self._constraint_matrix(program, index)
        variables = list(program.variables.values())
        integrality = np.array([1 if v.is_binary else 0 for v in variables])
        bounds = Bounds(
            np.array([v.lower for v in variables]),
            np.array([v.upper for v in variables]),
        )
        constraints = [LinearConstraint(matrix, lower, upper)] if program.constraints else None

        milp_options = {"presolve": True, "mip_rel_gap": options.mip_rel_gap, "disp": False}
        if options.time_limit is not None:
            milp_options["time_limit"] = options.time_limit

        self.logger.debug(f"{program.name}: MILP {program.summary()}")
        result = milp(c, integrality=integrality, bounds=bounds, constraints=constraints, options=milp_options)

        status = _STATUS_MAP.get(result.status, SolverStatus.NUMERICAL_FAILURE)
        limited = status is SolverStatus.TIME_LIMIT
        if not (status is SolverStatus.OPTIMAL or limited) or result.x is None:
            if limited:
                self.logger.warning(f"{program.name}: {result.message} before any feasible point")
            return Solution(status, detail=str(result.message))
        detail = ""
        if limited:
            detail = f"{result.message}; best incumbent kept"
            self.logger.warning(f"{program.name}: {detail}")

        x = np.array(result.x, dtype=float)
        binary = integrality == 1
        off = np.abs(x[binary] - np.round(x[binary]))
        if off.size and off.max() > options.int_tol:
            self.logger.warning(f"{program.name}: binaries off by {off.max():.3g}")
        x[binary] = np.round(x[binary])
        solution = self._finish(program, ids, x, result.fun, sign, options, status, detail)

        if options.polish and binary.any():
            solution = self._polish(program, solution, options)
        return solution

    def _polish(self, program: FeasibilityProgram, solution: Solution, options: SolveOptions) -> Solution:
        """Fix the binaries and re-solve the continuous part at the LP tolerance"""
        binaries = [v.id for v in program.variables.values() if v.is_binary]
        relaxed = program.fixed(solution.values, binaries)
        polished = HighsLinprogSolver().solve(relaxed, options)
        if not polished.is_optimal:
            self.logger.warning(f"{program.name}: polishing LP returned {polished.status.value}, keeping MILP point")
            return solution
        if not solution.is_optimal:
            return Solution(solution.status, polished.values, polished.objective_value, solution.detail)
        return polished

