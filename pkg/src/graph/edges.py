"""Edge weights of the remarriage graph for a fixed candidate"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from src.core.market import AllocationCandidate, Market, PairKey, format_pair, potential_pairs
from src.utils.errors import DimensionMismatch

DEFAULT_EPS = 1e-7


@dataclass(frozen=True, eq=False)
class EdgeMatrix:
    """
    Weighted directed graph over observed couples.

    Couple vertices are husband indices. A cross pair (m, w) is an edge
    from couple m to couple σ(w); single options (m, ∅) and (∅, w) are
    vertex-level weights.
    """
    wives: Tuple[int, ...]
    weights: Dict[PairKey, float]
    tolerance: float = DEFAULT_EPS

    @classmethod
    def from_weights(
        cls,
        weights: Mapping[PairKey, float],
        n_couples: int,
        tolerance: float = DEFAULT_EPS,
    ) -> "EdgeMatrix":
        """Weights on an identity matching (man i married to woman i)"""
        return cls(tuple(range(n_couples)), {k: float(v) for k, v in weights.items()}, tolerance)

    @property
    def n_couples(self) -> int:
        return len(self.wives)

    @property
    def couple_vertices(self) -> List[int]:
        return list(range(self.n_couples))

    def couple_of_woman(self, w: int) -> int:
        return self.wives.index(w)

    def endpoints(self, pair: PairKey) -> Tuple[int, int]:
        """(from couple, to couple) of a cross pair"""
        m, w = pair
        return m, self.couple_of_woman(w)

    def cross_items(self) -> List[Tuple[PairKey, float]]:
        return [(k, a) for k, a in self.weights.items() if k[0] is not None and k[1] is not None]

    def single_items(self) -> List[Tuple[PairKey, float]]:
        return [(k, a) for k, a in self.weights.items() if k[0] is None or k[1] is None]

    def single_vertex(self, pair: PairKey) -> int:
        """Couple a single-option weight belongs to"""
        m, w = pair
        return m if m is not None else self.couple_of_woman(w)

    def weight(self, pair: PairKey) -> float:
        return self.weights[pair]

    def scaled(self, factor: float) -> "EdgeMatrix":
        return EdgeMatrix(self.wives, {k: a * factor for k, a in self.weights.items()}, self.tolerance * factor)

    def to_digraph(self, shift: float = 0.0, keep=None) -> nx.DiGraph:
        """
        Cross edges as a networkx DiGraph.

        Args:
            shift: Constant added to every weight
            keep: Optional predicate on the raw weight selecting edges

        Returns:
            DiGraph with 'weight' and 'pair' edge attributes
        """
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n_couples))
        for pair, a in self.cross_items():
            if keep is None or keep(a):
                u, v = self.endpoints(pair)
                graph.add_edge(u, v, weight=a + shift, pair=pair)
        return graph

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for pair, a in self.weights.items():
            m, w = pair
            rows.append({
                "pair": format_pair(pair),
                "man": m,
                "woman": w,
                "from_couple": self.single_vertex(pair) if m is None or w is None else m,
                "to_couple": None if m is None or w is None else self.couple_of_woman(w),
                "weight": a,
            })
        return pd.DataFrame(rows)


def _check_length(name: str, vector: np.ndarray, expected: int) -> None:
    if np.shape(vector) != (expected,):
        raise DimensionMismatch(f"{name} has shape {np.shape(vector)}, expected ({expected},)")


def edge_weight(
    market: Market,
    candidate: AllocationCandidate,
    pair: PairKey,
    s: Optional[float] = None,
) -> float:
    """
    Cost of the pair's current bundles at its counterfactual prices,
    minus its (index-scaled) income.

    Args:
        market: Observed dataset
        candidate: Shares and Lindahl splits
        pair: Outside option (may be an observed couple for self-checks)
        s: Stability index override; defaults to the candidate's

    Returns:
        The weight a for the pair
    """
    m, w = pair
    p, P = market.p[pair], market.P[pair]
    _check_length(f"p{format_pair(pair)}", p, market.n_private)
    _check_length(f"P{format_pair(pair)}", P, market.n_public)
    index = candidate.index(pair) if s is None else s
    income = market.y[pair] * index

    if m is not None and w is not None:
        cm, cw = m, market.couple_of_woman(w)
        if cm == cw:
            # the couple staying together; splits don't matter
            return float(p @ market.q_obs[cm] + P @ market.Q_obs[cm] - income)
        Pm, Pw = candidate.Pm[pair], candidate.Pw[pair]
        _check_length(f"Pm{format_pair(pair)}", Pm, market.n_public)
        return float(
            p @ (candidate.q_m[cm] + candidate.q_w[cw])
            + Pm @ market.Q_obs[cm]
            + Pw @ market.Q_obs[cw]
            - income
        )
    if m is not None:
        return float(p @ candidate.q_m[m] + P @ market.Q_obs[m] - income)
    cw = market.couple_of_woman(w)
    return float(p @ candidate.q_w[cw] + P @ market.Q_obs[cw] - income)


def build_edge_matrix(
    market: Market,
    candidate: AllocationCandidate,
    tolerance: float = DEFAULT_EPS,
) -> EdgeMatrix:
    """
    Evaluate every outside option's weight at a candidate.

    Transfers are not folded in; regimes apply them downstream.

    Args:
        market: Observed dataset
        candidate: Shares, Lindahl splits, optional indices
        tolerance: Strictness tolerance carried by the matrix

    Returns:
        EdgeMatrix keyed exactly by potential_pairs(market)
    """
    k = market.n_couples
    if candidate.q_m.shape != (k, market.n_private) or candidate.q_w.shape != (k, market.n_private):
        raise DimensionMismatch(
            f"candidate shares have shape {candidate.q_m.shape}, expected ({k}, {market.n_private})")
    weights = {pair: edge_weight(market, candidate, pair) for pair in potential_pairs(market)}
    return EdgeMatrix(tuple(market.matching.man_to_woman), weights, tolerance)


def edge_weights_from_sequence(
    n_couples: int,
    values: Sequence[float],
    single_values: Optional[Sequence[float]] = None,
    tolerance: float = DEFAULT_EPS,
) -> EdgeMatrix:
    """
    Identity-matching EdgeMatrix from a flat list of cross weights in
    potential-pair order, optionally followed by single-option weights.
    """
    keys = [(m, w) for m in range(n_couples) for w in range(n_couples) if m != w]
    if len(values) != len(keys):
        raise DimensionMismatch(f"expected {len(keys)} cross weights, got {len(values)}")
    weights = dict(zip(keys, map(float, values)))
    if single_values is not None:
        single_keys = [(m, None) for m in range(n_couples)] + [(None, w) for w in range(n_couples)]
        if len(single_values) != len(single_keys):
            raise DimensionMismatch(f"expected {len(single_keys)} single weights, got {len(single_values)}")
        weights.update(zip(single_keys, map(float, single_values)))
    return EdgeMatrix(tuple(range(n_couples)), weights, tolerance)
