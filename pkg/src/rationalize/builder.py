"""Compiles a regime's stability conditions into a FeasibilityProgram"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

import numpy as np
from pydantic import BaseModel, Field

from src.core.market import AllocationCandidate, CommittedSet, Market, PairKey, cross_pairs, potential_pairs
from src.graph.paths import PathOfRemarriages, enumerate_permissible_paths
from src.lpcore.program import FeasibilityProgram, LinearExpression, Relation, Sense, SolveOptions
from src.rationalize.regimes import Regime, RegimeKind
from src.utils.errors import PathLimitRequired
from src.utils.logger import setup_logger

# NoTransfers without a path cap is only attempted up to this many couples
UNBOUNDED_PATHS_MAX_COUPLES = 6


class ProgramOptions(BaseModel):
    """Options for building and solving regime programs"""
    with_indices: bool = False
    max_path_len: Optional[int] = Field(default=4, ge=1, description="Edge cap for NoTransfers structures")
    eps: float = Field(default=1e-7, gt=0, description="Strictness tolerance")
    big_m: Optional[float] = Field(default=None, gt=0, description="Fixed big-M; instance-scaled when unset")
    use_assignable: bool = Field(default=True, description="Bound shares below by assignable data")
    solver: SolveOptions = Field(default_factory=SolveOptions)


def _label(pair: PairKey) -> str:
    m, w = pair
    return f"{'-' if m is None else m},{'-' if w is None else w}"


@dataclass
class BuiltProgram:
    """A regime program plus the bookkeeping to read candidates back"""
    program: FeasibilityProgram
    market: Market
    regime: Regime
    committed: CommittedSet
    options: ProgramOptions
    edge_exprs: Dict[PairKey, LinearExpression]
    structures: List[PathOfRemarriages] = field(default_factory=list)

    @staticmethod
    def q_var(couple: int, good: int) -> str:
        return f"q[{couple},{good}]"

    @staticmethod
    def pm_var(pair: PairKey, good: int) -> str:
        return f"Pm[{_label(pair)},{good}]"

    @staticmethod
    def s_var(pair: PairKey) -> str:
        return f"s[{_label(pair)}]"

    @staticmethod
    def t_var(couple: int) -> str:
        return f"t[{couple}]"

    def index_vars(self) -> Dict[PairKey, str]:
        if not self.options.with_indices:
            return {}
        return {pair: self.s_var(pair) for pair in potential_pairs(self.market)}

    def wife_share_value(self, couple: int) -> LinearExpression:
        """p·q_w of a couple at its own prices"""
        market = self.market
        p = market.p[market.observed_key(couple)]
        expr = LinearExpression(constant=float(p @ market.q_obs[couple]))
        for k in range(market.n_private):
            expr.add_term(self.q_var(couple, k), -p[k])
        return expr

    def candidate(self, values: Mapping[str, float]) -> AllocationCandidate:
        """Read an AllocationCandidate from solved variable values"""
        market = self.market
        q_m = np.array([
            [values[self.q_var(c, k)] for k in range(market.n_private)]
            for c in range(market.n_couples)
        ]).reshape(market.n_couples, market.n_private)
        Pm = {
            pair: np.array([values[self.pm_var(pair, j)] for j in range(market.n_public)])
            for pair in cross_pairs(market)
        }
        transfers = None
        if self.regime.kind is RegimeKind.TRANSFERS:
            transfers = np.array([values[self.t_var(c)] for c in range(market.n_couples)])
        s = None
        if self.options.with_indices:
            s = {pair: min(1.0, max(0.0, values[var])) for pair, var in self.index_vars().items()}
        return AllocationCandidate.from_shares(market, q_m, Pm, transfers=transfers, s=s)


class ProgramBuilder:
    """Builds regime programs over shares, Lindahl splits and indices"""

    def __init__(self, market: Market, regime: Regime, options: Optional[ProgramOptions] = None):
        """
        Initialize program builder.

        Args:
            market: Valid market
            regime: Divorce regime
            options: Build options
        """
        self.market = market
        self.regime = regime
        self.options = options or ProgramOptions()
        self.committed = regime.committed(market)
        self.logger = setup_logger(f"{__name__}.ProgramBuilder")

    def build(self) -> BuiltProgram:
        market, opts = self.market, self.options
        program = FeasibilityProgram(name=f"{self.regime.name}{'-indices' if opts.with_indices else ''}")
        built = BuiltProgram(program, market, self.regime, self.committed, opts, {})

        self._add_shares(built)
        self._add_lindahl(built)
        index_vars = built.index_vars()
        for var in index_vars.values():
            program.add_variable(var, 0.0, 1.0)

        for pair in potential_pairs(market):
            built.edge_exprs[pair] = self._edge_expression(built, pair)

        if self.regime.kind is RegimeKind.UNILATERAL:
            self._add_unilateral(built)
        elif self.regime.kind is RegimeKind.TRANSFERS:
            self._add_transfers(built)
        else:
            self._add_no_transfers(built)

        if index_vars:
            objective = LinearExpression({var: 1.0 for var in index_vars.values()})
            program.set_objective(objective, Sense.MAX)

        self.logger.debug(f"Built {program.name} for {market.n_couples} couples: {program.summary()}")
        return built

    def _add_shares(self, built: BuiltProgram) -> None:
        market = self.market
        if self.options.use_assignable:
            floor_m, floor_w = market.assignable_floor()
        else:
            floor_m = floor_w = np.zeros_like(market.q_obs)
        for c in range(market.n_couples):
            for k in range(market.n_private):
                lower = float(floor_m[c, k])
                upper = max(lower, float(market.q_obs[c, k] - floor_w[c, k]))
                built.program.add_variable(built.q_var(c, k), lower, upper)

    def _add_lindahl(self, built: BuiltProgram) -> None:
        # Lindahl prices relaxed from strictly positive to nonnegative
        for pair in cross_pairs(self.market):
            for j in range(self.market.n_public):
                built.program.add_variable(built.pm_var(pair, j), 0.0, float(self.market.P[pair][j]))

    def _edge_expression(self, built: BuiltProgram, pair: PairKey) -> LinearExpression:
        """The edge weight formula, affine in shares, splits and the index"""
        market = self.market
        m, w = pair
        p, P = market.p[pair], market.P[pair]
        expr = LinearExpression()
        if m is not None and w is not None:
            cm, cw = m, market.couple_of_woman(w)
            for k in range(market.n_private):
                expr.add_term(built.q_var(cm, k), p[k])
                expr.add_term(built.q_var(cw, k), -p[k])
            for j in range(market.n_public):
                expr.add_term(built.pm_var(pair, j), market.Q_obs[cm, j] - market.Q_obs[cw, j])
            expr.constant = float(p @ market.q_obs[cw] + P @ market.Q_obs[cw])
        elif m is not None:
            for k in range(market.n_private):
                expr.add_term(built.q_var(m, k), p[k])
            expr.constant = float(P @ market.Q_obs[m])
        else:
            cw = market.couple_of_woman(w)
            for k in range(market.n_private):
                expr.add_term(built.q_var(cw, k), -p[k])
            expr.constant = float(p @ market.q_obs[cw] + P @ market.Q_obs[cw])

        income = market.y[pair]
        if self.options.with_indices:
            expr.add_term(built.s_var(pair), -income)
        else:
            expr.constant -= income
        return expr

    def _single_owner(self, pair: PairKey) -> int:
        m, w = pair
        return m if m is not None else self.market.couple_of_woman(w)

    def _add_single_options(self, built: BuiltProgram) -> None:
        """Individual rationality for non-committed couples"""
        for pair, expr in built.edge_exprs.items():
            if pair[0] is None or pair[1] is None:
                if not self.committed.is_committed(self._single_owner(pair)):
                    built.program.add_constraint(expr, Relation.GE, 0.0, name=f"single[{_label(pair)}]")

    def _add_unilateral(self, built: BuiltProgram) -> None:
        for pair, expr in built.edge_exprs.items():
            built.program.add_constraint(expr, Relation.GE, 0.0, name=f"edge[{_label(pair)}]")

    def _add_transfers(self, built: BuiltProgram) -> None:
        program = built.program
        for c in range(self.market.n_couples):
            if self.committed.is_committed(c):
                program.add_variable(built.t_var(c), -np.inf, np.inf)
            else:
                program.add_variable(built.t_var(c), 0.0, 0.0)
        for pair, expr in built.edge_exprs.items():
            m, w = pair
            if m is None or w is None:
                continue
            cw = self.market.couple_of_woman(w)
            row = expr + LinearExpression({built.t_var(m): 1.0, built.t_var(cw): -1.0})
            program.add_constraint(row, Relation.GE, 0.0, name=f"edge[{_label(pair)}]")
        self._add_single_options(built)

    def _add_no_transfers(self, built: BuiltProgram) -> None:
        market, opts, program = self.market, self.options, built.program
        if opts.max_path_len is None and market.n_couples > UNBOUNDED_PATHS_MAX_COUPLES:
            raise PathLimitRequired(
                f"NoTransfers with unbounded path length on {market.n_couples} couples; set max_path_len")

        structures = enumerate_permissible_paths(market, opts.max_path_len, self.committed, minimal=True)
        built.structures = structures
        self._add_single_options(built)

        eps = opts.eps
        magnitude: Dict[PairKey, float] = {}
        binaries: Dict[PairKey, LinearExpression] = {}

        def edge_bigm(pair: PairKey) -> float:
            if pair not in magnitude:
                low, high = built.edge_exprs[pair].bounds(program.variables)
                magnitude[pair] = max(abs(low), abs(high)) + 1.0
            return magnitude[pair]

        def breaks_pattern(pair: PairKey) -> LinearExpression:
            """z_e = 1 forces a_e >= eps"""
            if pair not in binaries:
                z = program.add_binary(f"z[{_label(pair)}]")
                big_m = opts.big_m or edge_bigm(pair) + eps
                # a_e >= eps - M (1 - z)  <=>  a_e - M z >= eps - M
                program.add_constraint(built.edge_exprs[pair] - z * big_m, Relation.GE, eps - big_m,
                                       name=f"strict[{_label(pair)}]")
                binaries[pair] = z
            return binaries[pair]

        for i, structure in enumerate(structures):
            if len(structure) == 1:
                # one edge: "not (a <= 0 with a < 0)" is a >= 0
                program.add_constraint(built.edge_exprs[structure.edges[0]], Relation.GE, 0.0,
                                       name=f"edge[{_label(structure.edges[0])}]")
                continue
            w_var = program.add_binary(f"w[{i}]")
            big_m = opts.big_m or sum(edge_bigm(e) for e in structure.edges)
            cover = w_var.copy()
            for edge in structure.edges:
                cover = cover + breaks_pattern(edge)
                # a_e >= -M (1 - w_P)  <=>  a_e - M w_P >= -M
                program.add_constraint(built.edge_exprs[edge] - w_var * big_m, Relation.GE, -big_m,
                                       name=f"nonneg[{i},{_label(edge)}]")
            program.add_constraint(cover, Relation.GE, 1.0, name=f"cover[{i}]")


def build_program(market: Market, regime: Regime, opts: Optional[ProgramOptions] = None) -> BuiltProgram:
    """
    Compile the regime's stability conditions.

    Args:
        market: Valid market
        regime: Divorce regime
        opts: with_indices, max_path_len, eps, big_m, use_assignable

    Returns:
        BuiltProgram holding the FeasibilityProgram and its variable layout
    """
    return ProgramBuilder(market, regime, opts).build()
