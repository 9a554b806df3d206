"""Piecewise-linear candidate utilities and the pair blocking LP"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core.market import AllocationCandidate, Market, PairKey, format_pair
from src.graph.edges import DEFAULT_EPS, edge_weight
from src.lpcore.program import FeasibilityProgram, LinearExpression, Relation, Sense, SolverStatus
from src.lpcore.registry import solve
from src.utils.errors import SolverFailure
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# Relative slope bracket around each price. The affordability bound on the
# gain holds for any bracket; a wide one keeps the LP well conditioned.
DEFAULT_MARGIN = 0.1


@dataclass(frozen=True, eq=False)
class CandidateUtility:
    """
    u(q, Q) = sum_k min(low_k * d_k, high_k * d_k) with d the deviation
    from the reference bundle (private components first, then public).

    Concave, non-decreasing, and zero at the reference bundle. With
    low_k <= price_k <= high_k it never exceeds the price-weighted
    deviation, so an unaffordable improvement cannot exist.
    """
    q_ref: np.ndarray
    Q_ref: np.ndarray
    slope_low: np.ndarray
    slope_high: np.ndarray

    def __post_init__(self):
        size = len(self.q_ref) + len(self.Q_ref)
        low = np.broadcast_to(np.asarray(self.slope_low, dtype=float), (size,)).copy()
        high = np.broadcast_to(np.asarray(self.slope_high, dtype=float), (size,)).copy()
        if np.any(low > high):
            raise ValueError("slope_low must not exceed slope_high")
        object.__setattr__(self, "q_ref", np.asarray(self.q_ref, dtype=float))
        object.__setattr__(self, "Q_ref", np.asarray(self.Q_ref, dtype=float))
        object.__setattr__(self, "slope_low", low)
        object.__setattr__(self, "slope_high", high)

    @classmethod
    def bracketing(
        cls,
        q_ref: np.ndarray,
        Q_ref: np.ndarray,
        prices: Sequence[float],
        margin: float,
    ) -> "CandidateUtility":
        """Slopes within a relative margin of each component's price"""
        prices = np.asarray(prices, dtype=float)
        a, b = prices * (1.0 - margin), prices * (1.0 + margin)
        return cls(q_ref, Q_ref, np.minimum(a, b), np.maximum(a, b))

    @classmethod
    def from_extrema(
        cls,
        q_ref: np.ndarray,
        Q_ref: np.ndarray,
        prices: Sequence[float],
        factor: float = 2.0,
    ) -> "CandidateUtility":
        """One low slope below the smallest price and one high slope above the largest"""
        prices = np.asarray(prices, dtype=float)
        return cls(q_ref, Q_ref, float(prices.min()) / factor, float(prices.max()) * factor)

    @property
    def reference(self) -> np.ndarray:
        return np.concatenate([self.q_ref, self.Q_ref])

    def value(self, q: np.ndarray, Q: np.ndarray) -> float:
        deviation = np.concatenate([np.asarray(q, dtype=float), np.asarray(Q, dtype=float)]) - self.reference
        return float(np.sum(np.minimum(self.slope_low * deviation, self.slope_high * deviation)))


def spouse_utilities(
    market: Market,
    candidate: AllocationCandidate,
    pair: PairKey,
    margin: float = DEFAULT_MARGIN,
):
    """
    Candidate utilities for the man and the woman of a cross pair.

    References are each spouse's current private share and their couple's
    public bundle; public slopes bracket the spouse's own Lindahl share.

    Returns:
        (man utility, woman utility)
    """
    m, w = pair
    cm, cw = m, market.couple_of_woman(w)
    p = market.p[pair]
    Pm, Pw = candidate.Pm[pair], candidate.Pw[pair]
    man = CandidateUtility.bracketing(candidate.q_m[cm], market.Q_obs[cm], np.concatenate([p, Pm]), margin)
    woman = CandidateUtility.bracketing(candidate.q_w[cw], market.Q_obs[cw], np.concatenate([p, Pw]), margin)
    return man, woman


def _add_epigraph(program: FeasibilityProgram, tag: str, utility: CandidateUtility, bundle) -> LinearExpression:
    total = LinearExpression()
    for k, (ref, low, high) in enumerate(zip(utility.reference, utility.slope_low, utility.slope_high)):
        u = program.add_variable(f"u{tag}[{k}]", lower=-np.inf)
        for slope in (low, high):
            # u <= slope * (x - ref)
            program.add_constraint(u - bundle[k] * float(slope), Relation.LE, -float(slope * ref), name=f"epi{tag}[{k}]")
        total = total + u
    return total


def best_joint_gain(
    market: Market,
    pair: PairKey,
    man: CandidateUtility,
    woman: CandidateUtility,
) -> Optional[float]:
    """
    Largest u_m + u_w over affordable bundles of the pair with both
    utilities non-negative; None when no such bundle exists.

    Raises:
        SolverFailure: the LP ended with any status other than optimal or
            infeasible
    """
    n, N = market.n_private, market.n_public
    program = FeasibilityProgram(name=f"block{format_pair(pair)}")
    q_m = [program.add_variable(f"qm[{k}]") for k in range(n)]
    q_w = [program.add_variable(f"qw[{k}]") for k in range(n)]
    Q = [program.add_variable(f"Q[{j}]") for j in range(N)]

    spend = LinearExpression()
    for k in range(n):
        spend = spend + (q_m[k] + q_w[k]) * float(market.p[pair][k])
    for j in range(N):
        spend = spend + Q[j] * float(market.P[pair][j])
    program.add_constraint(spend, Relation.LE, market.y[pair], name="budget")

    u_m = _add_epigraph(program, "m", man, q_m + Q)
    u_w = _add_epigraph(program, "w", woman, q_w + Q)
    program.add_constraint(u_m, Relation.GE, 0.0, name="keep[m]")
    program.add_constraint(u_w, Relation.GE, 0.0, name="keep[w]")
    program.set_objective(u_m + u_w, Sense.MAX)

    solution = solve(program)
    if solution.status is SolverStatus.INFEASIBLE:
        return None
    if not solution.is_optimal:
        raise SolverFailure(f"{program.name}: {solution.status.value} ({solution.detail})")
    return float(solution.objective_value)


def candidate_utility_block_check(
    market: Market,
    candidate: AllocationCandidate,
    pair: PairKey,
    eps: float = DEFAULT_EPS,
    margin: float = DEFAULT_MARGIN,
) -> bool:
    """
    Whether the pair blocks under utilities built from the candidate.

    Args:
        market: Observed dataset
        candidate: Shares and Lindahl splits
        pair: Cross pair (m, w)
        eps: Strictness tolerance; a gain above eps/4 counts as strict
        margin: Relative slope bracket around each price

    Returns:
        True iff some affordable bundle leaves both no worse off and one
        strictly better off

    Raises:
        SolverFailure: the blocking LP could not be solved
    """
    m, w = pair
    if m is None or w is None:
        raise ValueError(f"{format_pair(pair)} is not a cross pair")
    man, woman = spouse_utilities(market, candidate, pair, margin)
    gain = best_joint_gain(market, pair, man, woman)
    blocks = gain is not None and gain > eps / 4.0
    logger.debug(
        f"{format_pair(pair)}: a={edge_weight(market, candidate, pair, s=1.0):.3e} "
        f"gain={gain if gain is not None else 'n/a'} blocks={blocks}")
    return blocks
