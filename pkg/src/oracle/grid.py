"""Discretized-share search for a stable candidate"""

import itertools
from typing import Dict, List, Optional

import numpy as np

from src.core.market import AllocationCandidate, Market, PairKey, cross_pairs
from src.graph.edges import DEFAULT_EPS, build_edge_matrix
from src.oracle.coalitions import blocking_coalition_in_edges, enumerate_coalitions
from src.rationalize.regimes import Regime, RegimeKind
from src.utils.errors import TooLarge
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

MAX_GRID_COUPLES = 3
MAX_GRID_PRIVATE = 2
MAX_GRID_PUBLIC = 1
MAX_GRID_POINTS = 50_000


def grid_values(lower: float, upper: float, steps: int) -> np.ndarray:
    """Cell midpoints of [lower, upper] split into steps cells"""
    return lower + (np.arange(steps) + 0.5) / steps * (upper - lower)


def _check_size(market: Market, grid_steps: int) -> None:
    if grid_steps < 1:
        raise ValueError("grid_steps must be at least 1")
    if market.n_couples > MAX_GRID_COUPLES or market.n_private > MAX_GRID_PRIVATE or market.n_public > MAX_GRID_PUBLIC:
        raise TooLarge(
            f"Grid search handles at most {MAX_GRID_COUPLES} couples, {MAX_GRID_PRIVATE} private "
            f"and {MAX_GRID_PUBLIC} public goods")
    points = grid_steps ** (market.n_couples * market.n_private)
    if points > MAX_GRID_POINTS:
        raise TooLarge(f"Grid of {points} share points exceeds {MAX_GRID_POINTS}; use fewer steps")


def _best_lindahl_splits(market: Market, grid_steps: int) -> Dict[PairKey, np.ndarray]:
    # a is affine in the man's split with slope Q[cm] - Q[cw]; a larger
    # weight never creates a block, so the best split is a grid end
    splits = {}
    for pair in cross_pairs(market):
        m, w = pair
        cm, cw = m, market.couple_of_woman(w)
        best = np.empty(market.n_public)
        for j in range(market.n_public):
            values = grid_values(0.0, float(market.P[pair][j]), grid_steps)
            slope = market.Q_obs[cm, j] - market.Q_obs[cw, j]
            best[j] = values[-1] if slope > 0 else values[0]
        splits[pair] = best
    return splits


def grid_search_witness(
    market: Market,
    grid_steps: int,
    regime: Regime,
    eps: float = DEFAULT_EPS,
    use_assignable: bool = True,
) -> Optional[AllocationCandidate]:
    """
    First grid candidate that no permissible coalition blocks.

    Args:
        market: Market with at most three couples, two private and one
            public good
        grid_steps: Cells per share dimension
        regime: Divorce regime
        eps: Strictness tolerance
        use_assignable: Keep shares within the assignable bounds

    Returns:
        A stable grid candidate, or None
    """
    _check_size(market, grid_steps)
    committed = regime.committed(market)
    coalitions = enumerate_coalitions(market.matching, committed)
    with_transfers = regime.kind is RegimeKind.TRANSFERS

    if use_assignable:
        floor_m, floor_w = market.assignable_floor()
    else:
        floor_m = floor_w = np.zeros_like(market.q_obs)
    axes: List[np.ndarray] = []
    for c in range(market.n_couples):
        for k in range(market.n_private):
            lower = float(floor_m[c, k])
            upper = max(lower, float(market.q_obs[c, k] - floor_w[c, k]))
            axes.append(grid_values(lower, upper, grid_steps))
    splits = _best_lindahl_splits(market, grid_steps)

    shape = (market.n_couples, market.n_private)
    for point in itertools.product(*axes):
        candidate = AllocationCandidate.from_shares(market, np.reshape(point, shape), splits)
        edges = build_edge_matrix(market, candidate, eps)
        if blocking_coalition_in_edges(edges, committed, with_transfers, eps, coalitions) is None:
            logger.debug(f"{regime.name}: grid witness at shares {np.round(point, 6).tolist()}")
            return candidate
    return None


def grid_search_rationalizability(
    market: Market,
    grid_steps: int,
    regime: Regime,
    eps: float = DEFAULT_EPS,
) -> bool:
    """One-sided check: True means some grid candidate is stable"""
    found = grid_search_witness(market, grid_steps, regime, eps) is not None
    logger.info(f"{regime.name}: grid search with {grid_steps} steps {'found' if found else 'found no'} witness")
    return found
