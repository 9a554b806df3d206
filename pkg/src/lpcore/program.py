"""Backend-agnostic linear / mixed-integer program representation"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, Field

Number = Union[int, float]


class Relation(Enum):
    """Constraint sense"""
    LE = "<="
    EQ = "="
    GE = ">="


class Integrality(Enum):
    """Variable domain"""
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(Enum):
    """Objective direction"""
    MIN = "min"
    MAX = "max"


class SolverStatus(Enum):
    """Solver verdict"""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"
    TIME_LIMIT = "time_limit"  # stopped early; values hold the incumbent when one was found


class LinearExpression:
    """Sparse affine expression: Σ coef·var + constant"""

    __slots__ = ("coefs", "constant")

    def __init__(self, coefs: Optional[Mapping[str, Number]] = None, constant: Number = 0.0):
        self.coefs: Dict[str, float] = {}
        if coefs:
            for var, coef in coefs.items():
                self.add_term(var, coef)
        self.constant = float(constant)

    @classmethod
    def var(cls, var_id: str, coef: Number = 1.0) -> "LinearExpression":
        return cls({var_id: coef})

    def add_term(self, var_id: str, coef: Number) -> "LinearExpression":
        """In-place accumulate coef·var"""
        if coef != 0:
            total = self.coefs.get(var_id, 0.0) + float(coef)
            if total == 0.0:
                self.coefs.pop(var_id, None)
            else:
                self.coefs[var_id] = total
        return self

    def copy(self) -> "LinearExpression":
        out = LinearExpression(constant=self.constant)
        out.coefs = dict(self.coefs)
        return out

    def __add__(self, other: Union["LinearExpression", Number]) -> "LinearExpression":
        out = self.copy()
        if isinstance(other, LinearExpression):
            for var, coef in other.coefs.items():
                out.add_term(var, coef)
            out.constant += other.constant
        else:
            out.constant += float(other)
        return out

    __radd__ = __add__

    def __neg__(self) -> "LinearExpression":
        return self * -1.0

    def __sub__(self, other: Union["LinearExpression", Number]) -> "LinearExpression":
        return self + (-other if isinstance(other, LinearExpression) else -float(other))

    def __rsub__(self, other: Number) -> "LinearExpression":
        return (-self) + other

    def __mul__(self, scalar: Number) -> "LinearExpression":
        out = LinearExpression(constant=self.constant * scalar)
        if scalar != 0:
            out.coefs = {var: coef * scalar for var, coef in self.coefs.items()}
        return out

    __rmul__ = __mul__

    def evaluate(self, values: Mapping[str, float]) -> float:
        return self.constant + sum(coef * values[var] for var, coef in self.coefs.items())

    def bounds(self, variables: Mapping[str, "Variable"]) -> Tuple[float, float]:
        """Interval range of the expression over the variables' boxes"""
        low = high = self.constant
        for var_id, coef in self.coefs.items():
            v = variables[var_id]
            if coef > 0:
                low += coef * v.lower
                high += coef * v.upper
            else:
                low += coef * v.upper
                high += coef * v.lower
        return low, high

    def __repr__(self) -> str:
        terms = " + ".join(f"{c:g}*{v}" for v, c in self.coefs.items())
        return f"LinearExpression({terms} + {self.constant:g})"


@dataclass(frozen=True)
class Variable:
    id: str
    lower: float = 0.0
    upper: float = math.inf
    integrality: Integrality = Integrality.CONTINUOUS

    @property
    def is_binary(self) -> bool:
        return self.integrality is Integrality.BINARY


@dataclass(frozen=True)
class Constraint:
    """coefs · x (relation) rhs"""
    coefs: Dict[str, float]
    relation: Relation
    rhs: float
    name: Optional[str] = None


@dataclass
class Objective:
    coefs: Dict[str, float]
    sense: Sense = Sense.MIN
    constant: float = 0.0


@dataclass
class FeasibilityProgram:
    """
    Variables, sparse linear constraints and an optional objective.

    Built incrementally by the program builders, then treated as immutable
    by solvers.
    """
    variables: Dict[str, Variable] = field(default_factory=dict)
    constraints: List[Constraint] = field(default_factory=list)
    objective: Optional[Objective] = None
    name: str = "program"

    def add_variable(
        self,
        var_id: str,
        lower: float = 0.0,
        upper: float = math.inf,
        integrality: Integrality = Integrality.CONTINUOUS,
    ) -> LinearExpression:
        """Declare a variable and return it as an expression"""
        if var_id in self.variables:
            raise ValueError(f"Duplicate variable id: {var_id}")
        if lower > upper:
            raise ValueError(f"Variable {var_id}: lower bound {lower} exceeds upper bound {upper}")
        self.variables[var_id] = Variable(var_id, float(lower), float(upper), integrality)
        return LinearExpression.var(var_id)

    def add_binary(self, var_id: str) -> LinearExpression:
        return self.add_variable(var_id, 0.0, 1.0, Integrality.BINARY)

    def add_constraint(
        self,
        expr: LinearExpression,
        relation: Relation,
        rhs: Number = 0.0,
        name: Optional[str] = None,
    ) -> Constraint:
        """Add expr (relation) rhs; the expression's constant moves to the right"""
        for var_id in expr.coefs:
            if var_id not in self.variables:
                raise KeyError(f"Constraint {name or ''} references undeclared variable {var_id}")
        constraint = Constraint(dict(expr.coefs), relation, float(rhs) - expr.constant, name)
        self.constraints.append(constraint)
        return constraint

    def set_objective(self, expr: LinearExpression, sense: Sense) -> None:
        for var_id in expr.coefs:
            if var_id not in self.variables:
                raise KeyError(f"Objective references undeclared variable {var_id}")
        self.objective = Objective(dict(expr.coefs), sense, expr.constant)

    @property
    def has_integers(self) -> bool:
        return any(v.is_binary for v in self.variables.values())

    def variable_ids(self) -> List[str]:
        return list(self.variables)

    def summary(self) -> Dict[str, int]:
        return {
            "variables": len(self.variables),
            "binaries": sum(1 for v in self.variables.values() if v.is_binary),
            "constraints": len(self.constraints),
            "nonzeros": sum(len(c.coefs) for c in self.constraints),
        }

    def copy(self, name: Optional[str] = None) -> "FeasibilityProgram":
        """Shallow copy that can take extra rows without touching the original"""
        return FeasibilityProgram(dict(self.variables), list(self.constraints), self.objective, name or self.name)

    def fixed(self, values: Mapping[str, float], var_ids: Iterable[str]) -> "FeasibilityProgram":
        """Copy with the listed variables fixed (and relaxed to continuous)"""
        out = self.copy()
        for var_id in var_ids:
            value = float(values[var_id])
            out.variables[var_id] = Variable(var_id, value, value, Integrality.CONTINUOUS)
        return out


@dataclass
class Solution:
    status: SolverStatus
    values: Dict[str, float] = field(default_factory=dict)
    objective_value: Optional[float] = None
    detail: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    @property
    def has_incumbent(self) -> bool:
        """A feasible point is available (optimal, or the best found before a limit)"""
        return bool(self.values) and self.status in (SolverStatus.OPTIMAL, SolverStatus.TIME_LIMIT)

    def __getitem__(self, var_id: str) -> float:
        return self.values[var_id]


class SolveOptions(BaseModel):
    """Tolerances and limits passed to solver backends"""
    feas_tol: float = Field(default=1e-9, gt=0, description="Primal feasibility tolerance")
    int_tol: float = Field(default=1e-6, gt=0, lt=0.5, description="Integrality tolerance")
    time_limit: Optional[float] = Field(default=None, gt=0, description="Wall-clock limit in seconds")
    mip_rel_gap: float = Field(default=1e-6, ge=0)
    polish: bool = Field(default=True, description="Re-solve continuous part with binaries fixed")
    backend: Optional[str] = None


def max_violation(program: FeasibilityProgram, values: Mapping[str, float]) -> float:
    """Largest bound or constraint breach at the given point"""
    worst = 0.0
    for var in program.variables.values():
        x = values[var.id]
        worst = max(worst, var.lower - x, x - var.upper)
    for c in program.constraints:
        lhs = sum(coef * values[var] for var, coef in c.coefs.items())
        if c.relation is Relation.LE:
            worst = max(worst, lhs - c.rhs)
        elif c.relation is Relation.GE:
            worst = max(worst, c.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - c.rhs))
    return worst
