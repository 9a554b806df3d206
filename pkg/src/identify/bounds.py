"""Bounds on the wife's share of private expenditure"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd

from src.core.market import Market
from src.lpcore.program import LinearExpression, Relation, Sense
from src.lpcore.registry import solve
from src.rationalize.builder import ProgramOptions, build_program
from src.rationalize.indices import IndexReport, compute_stability_indices
from src.rationalize.regimes import Regime
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# slack per index when pinning to the optimum, absorbs solver round-off
PIN_TOL = 1e-7


class PinningMode(Enum):
    """How optimal stability indices are held while bounding shares"""
    AGGREGATE = "aggregate"    # sum of indices at its optimum
    PER_OPTION = "per-option"  # each index at its optimal value


@dataclass
class SharingBounds:
    """
    Per-couple bounds on the money value of the wife's private consumption
    at the couple's own prices. The husband's bounds are the complements.
    """
    label: str
    lower: np.ndarray
    upper: np.ndarray
    total: np.ndarray

    def _fraction(self, values: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.total > 0, values / self.total, 0.0)

    @property
    def lower_frac(self) -> np.ndarray:
        return self._fraction(self.lower)

    @property
    def upper_frac(self) -> np.ndarray:
        return self._fraction(self.upper)

    @property
    def width(self) -> np.ndarray:
        """Upper minus lower as a fraction of private expenditure"""
        return self.upper_frac - self.lower_frac

    @property
    def husband_lower(self) -> np.ndarray:
        return self.total - self.upper

    @property
    def husband_upper(self) -> np.ndarray:
        return self.total - self.lower

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "couple": np.arange(len(self.total)),
            "bounds": self.label,
            "lower": self.lower,
            "upper": self.upper,
            "total": self.total,
            "lower_frac": self.lower_frac,
            "upper_frac": self.upper_frac,
            "width": self.width,
        })


def _totals(market: Market) -> np.ndarray:
    return np.array([market.private_expenditure(c) for c in range(market.n_couples)])


def naive_bounds(market: Market) -> SharingBounds:
    """
    Bounds implied by assignable consumption alone.

    Args:
        market: Valid market

    Returns:
        SharingBounds with lower = p·assignable_w and
        upper = total - p·assignable_m (0 and total without assignable data)
    """
    totals = _totals(market)
    floor_m, floor_w = market.assignable_floor()
    lower = np.array([market.p[market.observed_key(c)] @ floor_w[c] for c in range(market.n_couples)])
    upper = totals - np.array([market.p[market.observed_key(c)] @ floor_m[c] for c in range(market.n_couples)])
    return SharingBounds("naive", lower, upper, totals)


def bound_sharing_rule(
    market: Market,
    regime: Regime,
    opts: Optional[ProgramOptions] = None,
    pinning: PinningMode = PinningMode.AGGREGATE,
    index_report: Optional[IndexReport] = None,
) -> SharingBounds:
    """
    Minimize and maximize each wife's private expenditure subject to the
    regime program with stability indices held at their optimum.

    Args:
        market: Valid market
        regime: Divorce regime
        opts: Build and solver options (indices are always on)
        pinning: Aggregate or per-option index pinning
        index_report: Precomputed optimal indices (computed when omitted)

    Returns:
        SharingBounds; bounds the solver could not settle are NaN
    """
    opts = (opts or ProgramOptions()).model_copy(update={"with_indices": True})
    report = index_report or compute_stability_indices(market, regime, opts)
    built = build_program(market, regime, opts)
    base = built.program.copy(name=f"{built.program.name}-bounds")

    if report.s:
        if not report.is_optimal:
            logger.warning(f"{regime.name}: pinning at time-limited indices, bounds may be wider than optimal")
        index_vars = built.index_vars()
        if pinning is PinningMode.AGGREGATE:
            pinned = LinearExpression({var: 1.0 for var in index_vars.values()})
            base.add_constraint(pinned, Relation.GE, report.total - PIN_TOL * len(index_vars), name="pin[sum]")
        else:
            for pair, var in index_vars.items():
                base.add_constraint(LinearExpression.var(var), Relation.GE,
                                    max(0.0, report.s[pair] - PIN_TOL), name=f"pin[{var}]")
    else:
        logger.warning(f"{regime.name}: no optimal indices to pin ({report.status.value}); bounding unpinned")

    totals = _totals(market)
    lower = np.full(market.n_couples, math.nan)
    upper = np.full(market.n_couples, math.nan)
    for c in range(market.n_couples):
        share = built.wife_share_value(c)
        for sense, out in ((Sense.MIN, lower), (Sense.MAX, upper)):
            program = base.copy(name=f"{base.name}-{sense.value}[{c}]")
            program.set_objective(share, sense)
            solution = solve(program, opts.solver)
            if solution.is_optimal:
                out[c] = min(max(solution.objective_value, 0.0), totals[c])
            else:
                logger.warning(f"{program.name}: {solution.status.value} {solution.detail}")
    bounds = SharingBounds(regime.name, np.minimum(lower, upper), upper, totals)
    if np.isfinite(bounds.width).any():
        logger.info(f"{regime.name}: mean bound width {np.nanmean(bounds.width):.4f}")
    return bounds
