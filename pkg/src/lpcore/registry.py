"""Solver registry for managing available backends"""

from typing import Dict, Optional, Type

from src.lpcore.program import FeasibilityProgram, Solution, SolveOptions
from src.lpcore.solvers import HighsLinprogSolver, HighsMilpSolver, SolverBase, milp_available
from src.utils.errors import BackendUnavailable
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


class SolverRegistry:
    """Registry for managing available solver backends"""

    _solvers: Dict[str, Type[SolverBase]] = {
        'highs-lp': HighsLinprogSolver,
        'highs-milp': HighsMilpSolver,
    }

    _solver_descriptions: Dict[str, str] = {
        'highs-lp': 'HiGHS dual simplex / IPM through scipy.optimize.linprog. Continuous programs only.',
        'highs-milp': 'HiGHS branch-and-cut through scipy.optimize.milp. Handles binary variables.',
    }

    @classmethod
    def register(cls, name: str, solver_class: Type[SolverBase], description: str = ""):
        """Register a new backend"""
        cls._solvers[name] = solver_class
        if description:
            cls._solver_descriptions[name] = description

    @classmethod
    def get_solver(cls, name: str) -> SolverBase:
        """Get a solver instance by name"""
        if name not in cls._solvers:
            raise ValueError(f"Unknown solver: {name}. Available: {list(cls._solvers.keys())}")
        return cls._solvers[name]()

    @classmethod
    def list_solvers(cls) -> Dict[str, str]:
        """List all registered backends with descriptions"""
        return cls._solver_descriptions.copy()

    @classmethod
    def supports_integers(cls) -> bool:
        """Whether some registered backend can handle binaries"""
        return any(
            solver.supports_integers and (solver is not HighsMilpSolver or milp_available())
            for solver in cls._solvers.values()
        )

    @classmethod
    def for_program(cls, program: FeasibilityProgram, backend: Optional[str] = None) -> SolverBase:
        """
        Pick a backend able to solve the program.

        Args:
            program: Program to solve
            backend: Explicit backend name (optional)

        Returns:
            Fresh solver instance
        """
        if backend:
            solver = cls.get_solver(backend)
            if program.has_integers and not solver.supports_integers:
                raise BackendUnavailable(f"Backend {backend} cannot solve programs with binary variables")
            return solver
        if not program.has_integers:
            return cls.get_solver('highs-lp')
        for name, solver_class in cls._solvers.items():
            if solver_class.supports_integers:
                try:
                    return solver_class()
                except BackendUnavailable as e:
                    logger.debug(f"Skipping backend {name}: {e}")
        raise BackendUnavailable("No registered backend supports binary variables")


def solve(program: FeasibilityProgram, options: Optional[SolveOptions] = None) -> Solution:
    """
    Solve a program with the first suitable registered backend.

    Args:
        program: Program to solve
        options: Tolerances and limits (defaults when omitted)

    Returns:
        Solution
    """
    options = options or SolveOptions()
    solver = SolverRegistry.for_program(program, options.backend)
    solution = solver.solve(program, options)
    logger.debug(
        f"{program.name}: {solution.status.value}"
        + (f", objective {solution.objective_value:.10g}" if solution.objective_value is not None else "")
    )
    return solution
