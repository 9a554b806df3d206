"""Brute-force coalition enumeration and blocking checks"""

import math
from typing import Dict, List, Optional, Sequence

from src.core.market import AllocationCandidate, CommittedSet, Market, Matching, PairKey
from src.graph.edges import DEFAULT_EPS, EdgeMatrix, build_edge_matrix
from src.graph.paths import (
    Coalition,
    committed_violations,
    decompose_coalition,
    has_committed_exit,
    split_at_uncommitted,
)
from src.graph.search import is_strict, is_weak
from src.rationalize.regimes import Regime, RegimeKind
from src.utils.errors import TooLarge
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

MAX_COALITION_COUPLES = 4


def _check_size(n_couples: int) -> None:
    if n_couples > MAX_COALITION_COUPLES:
        raise TooLarge(f"Coalition enumeration is limited to {MAX_COALITION_COUPLES} couples, got {n_couples}")


def enumerate_coalitions(matching: Matching, committed: CommittedSet) -> List[Coalition]:
    """
    Every non-empty rematching that pairs nobody with their own spouse
    and keeps committed spouses together in the coalition.

    Men are visited in index order, each absent, single, or paired with an
    unused woman other than his wife; leftover women are absent or single.
    """
    _check_size(matching.n_men)
    n_men, n_women = matching.n_men, matching.n_women
    found: List[Coalition] = []

    def finish_women(pairs: List[PairKey], used: set, w: int) -> None:
        if w == n_women:
            if pairs:
                coalition = Coalition.from_pairs(pairs)
                if not committed_violations(coalition, matching, committed):
                    found.append(coalition)
            return
        finish_women(pairs, used, w + 1)
        if w not in used:
            finish_women(pairs + [(None, w)], used, w + 1)

    def assign_men(pairs: List[PairKey], used: set, m: int) -> None:
        if m == n_men:
            finish_women(pairs, used, 0)
            return
        assign_men(pairs, used, m + 1)
        assign_men(pairs + [(m, None)], used, m + 1)
        for w in range(n_women):
            if w not in used and w != matching.spouse_of_man(m):
                assign_men(pairs + [(m, w)], used | {w}, m + 1)

    assign_men([], set(), 0)
    return found


def enumerate_permissible_coalitions(
    market: Market,
    committed: Optional[CommittedSet] = None,
) -> List[Coalition]:
    """
    All permissible coalitions of a small market.

    Args:
        market: Market with at most four couples
        committed: Committed set to respect (defaults to the market's)

    Returns:
        Coalitions in enumeration order

    Raises:
        TooLarge: beyond four couples
    """
    committed = market.committed if committed is None else committed
    return enumerate_coalitions(market.matching, committed)


def _blocks_pattern(values: Sequence[float], eps: float) -> bool:
    return bool(values) and all(is_weak(a, eps) for a in values) and any(is_strict(a, eps) for a in values)


def coalition_blocks(
    coalition: Coalition,
    edges: EdgeMatrix,
    matching: Matching,
    committed: CommittedSet,
    with_transfers: bool,
    eps: Optional[float] = None,
) -> bool:
    """
    Whether a coalition blocks at fixed edge weights.
    Options missing from the matrix never block.

    Without transfers every rematch edge must be weakly blocking and one
    strictly. With transfers between committed spouses, each component is
    cut at its non-committed interior couples (whose transfers are zero)
    and the same pattern is asked of the piece sums.
    """
    eps = edges.tolerance if eps is None else eps
    weights: Dict[PairKey, float] = edges.weights
    if not with_transfers:
        return _blocks_pattern([weights.get(pair, math.inf) for pair in coalition.pairs()], eps)

    values = []
    for component in decompose_coalition(coalition, matching):
        if component.is_single_option:
            values.append(weights.get(component.edges[0], math.inf))
            continue
        for piece in split_at_uncommitted(component, committed, matching.man_to_woman):
            values.append(piece.total(weights))
    return _blocks_pattern(values, eps)


def blocking_coalition_in_edges(
    edges: EdgeMatrix,
    committed: CommittedSet,
    with_transfers: bool,
    eps: Optional[float] = None,
    coalitions: Optional[List[Coalition]] = None,
) -> Optional[Coalition]:
    """
    First blocking coalition at fixed edge weights, or None.

    Pass a precomputed coalition list to reuse it across many matrices.
    """
    wives = edges.wives
    matching = Matching.from_couples(list(enumerate(wives)), len(wives), len(wives))
    if coalitions is None:
        coalitions = enumerate_coalitions(matching, committed)
    for coalition in coalitions:
        # committed members leaving for the single option are out of scope
        if has_committed_exit(coalition, matching, committed):
            continue
        if coalition_blocks(coalition, edges, matching, committed, with_transfers, eps):
            return coalition
    return None


def blocking_coalition_exists(
    market: Market,
    candidate: AllocationCandidate,
    regime: Regime,
    eps: float = DEFAULT_EPS,
) -> Optional[Coalition]:
    """
    Brute-force search for a coalition blocking the observed matching.

    Args:
        market: Market with at most four couples
        candidate: Shares and Lindahl splits to evaluate edges at
        regime: Divorce regime; unilateral divorce allows every coalition
        eps: Strictness tolerance

    Returns:
        A blocking coalition, or None

    Raises:
        TooLarge: beyond four couples
    """
    _check_size(market.n_couples)
    edges = build_edge_matrix(market, candidate, eps)
    found = blocking_coalition_in_edges(
        edges, regime.committed(market), regime.kind is RegimeKind.TRANSFERS, eps)
    if found is not None:
        logger.debug(f"{regime.name}: coalition {found.describe()} blocks")
    return found
