"""Linear / mixed-integer program layer"""

from .export import to_lp_format, write_lp_file
from .program import (
    Constraint,
    FeasibilityProgram,
    Integrality,
    LinearExpression,
    Relation,
    Sense,
    Solution,
    SolveOptions,
    SolverStatus,
    Variable,
    max_violation,
)
from .registry import SolverRegistry, solve
from .solvers import HighsLinprogSolver, HighsMilpSolver, SolverBase, milp_available

__all__ = [
    'Constraint',
    'FeasibilityProgram',
    'HighsLinprogSolver',
    'HighsMilpSolver',
    'Integrality',
    'LinearExpression',
    'Relation',
    'Sense',
    'Solution',
    'SolveOptions',
    'SolverBase',
    'SolverRegistry',
    'SolverStatus',
    'Variable',
    'max_violation',
    'milp_available',
    'to_lp_format',
    'write_lp_file',
    'solve',
]
