"""Market dataset and candidate unobservables"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np


# (man index or None, woman index or None); None stands for the single option
PairKey = Tuple[Optional[int], Optional[int]]


class Side(Enum):
    """Which house an agent belongs to"""
    MAN = "m"
    WOMAN = "w"
    EMPTY = "empty"


@dataclass(frozen=True)
class AgentId:
    """A man, a woman, or the single option"""
    side: Side
    index: Optional[int] = None

    @classmethod
    def man(cls, index: int) -> "AgentId":
        return cls(Side.MAN, index)

    @classmethod
    def woman(cls, index: int) -> "AgentId":
        return cls(Side.WOMAN, index)

    @property
    def is_empty(self) -> bool:
        return self.side is Side.EMPTY

    def sort_key(self) -> Tuple[int, int]:
        order = {Side.MAN: 0, Side.WOMAN: 1, Side.EMPTY: 2}
        return order[self.side], -1 if self.index is None else self.index

    def __str__(self) -> str:
        if self.is_empty:
            return "∅"
        return f"{self.side.value}{self.index}"


EMPTY = AgentId(Side.EMPTY)


def format_pair(pair: PairKey) -> str:
    """Human-readable pair key, e.g. (m0,w1) or (m0,∅)"""
    m, w = pair
    left = "∅" if m is None else f"m{m}"
    right = "∅" if w is None else f"w{w}"
    return f"({left},{right})"


@dataclass(frozen=True)
class Matching:
    """Observed assignment σ of men to women (None = single)"""
    man_to_woman: Tuple[Optional[int], ...]
    woman_to_man: Tuple[Optional[int], ...]

    @classmethod
    def from_couples(cls, couples: Sequence[Tuple[int, int]], n_men: int, n_women: int) -> "Matching":
        """Build a consistent matching from (man, woman) couples"""
        men: List[Optional[int]] = [None] * n_men
        women: List[Optional[int]] = [None] * n_women
        for m, w in couples:
            men[m] = w
            women[w] = m
        return cls(tuple(men), tuple(women))

    @classmethod
    def identity(cls, n: int) -> "Matching":
        """Man i married to woman i"""
        return cls(tuple(range(n)), tuple(range(n)))

    @property
    def n_men(self) -> int:
        return len(self.man_to_woman)

    @property
    def n_women(self) -> int:
        return len(self.woman_to_man)

    def spouse_of_man(self, m: int) -> Optional[int]:
        return self.man_to_woman[m]

    def spouse_of_woman(self, w: int) -> Optional[int]:
        return self.woman_to_man[w]

    def partner(self, agent: AgentId) -> AgentId:
        """σ(agent) as an AgentId (EMPTY when single)"""
        if agent.side is Side.MAN:
            w = self.man_to_woman[agent.index]
            return EMPTY if w is None else AgentId.woman(w)
        if agent.side is Side.WOMAN:
            m = self.woman_to_man[agent.index]
            return EMPTY if m is None else AgentId.man(m)
        return EMPTY


@dataclass(frozen=True)
class CommittedSet:
    """One flag per observed couple, indexed by the husband"""
    flags: Tuple[bool, ...]

    @classmethod
    def all(cls, n_couples: int) -> "CommittedSet":
        return cls(tuple([True] * n_couples))

    @classmethod
    def none(cls, n_couples: int) -> "CommittedSet":
        return cls(tuple([False] * n_couples))

    def __len__(self) -> int:
        return len(self.flags)

    def __contains__(self, couple: int) -> bool:
        return bool(self.flags[couple])

    def is_committed(self, couple: int) -> bool:
        return bool(self.flags[couple])

    @property
    def is_empty(self) -> bool:
        return not any(self.flags)


def _frozen(array, dtype=float) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


def _frozen_map(mapping: Mapping[PairKey, Sequence[float]]) -> Dict[PairKey, np.ndarray]:
    return {key: _frozen(value) for key, value in mapping.items()}


@dataclass(frozen=True, eq=False)
class Market:
    """
    Observed dataset: matching, committed couples, aggregate bundles,
    and prices/incomes for every potential pair including single options.

    Couples are indexed by the husband's index. Price and income maps are
    keyed by PairKey and include the observed couples' own keys.
    """
    n_private: int
    n_public: int
    matching: Matching
    committed: CommittedSet
    q_obs: np.ndarray
    Q_obs: np.ndarray
    p: Dict[PairKey, np.ndarray]
    P: Dict[PairKey, np.ndarray]
    y: Dict[PairKey, float]
    assignable_m: Optional[np.ndarray] = None
    assignable_w: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "q_obs", _frozen(self.q_obs))
        object.__setattr__(self, "Q_obs", _frozen(self.Q_obs))
        object.__setattr__(self, "p", _frozen_map(self.p))
        object.__setattr__(self, "P", _frozen_map(self.P))
        object.__setattr__(self, "y", {key: float(value) for key, value in self.y.items()})
        if self.assignable_m is not None:
            object.__setattr__(self, "assignable_m", _frozen(self.assignable_m))
        if self.assignable_w is not None:
            object.__setattr__(self, "assignable_w", _frozen(self.assignable_w))

    @property
    def n_couples(self) -> int:
        return self.matching.n_men

    @property
    def has_assignable(self) -> bool:
        return self.assignable_m is not None and self.assignable_w is not None

    def couples(self) -> List[PairKey]:
        """Observed couples (m, σ(m)) in husband order"""
        return [(m, w) for m, w in enumerate(self.matching.man_to_woman) if w is not None]

    def couple_of_man(self, m: int) -> int:
        return m

    def couple_of_woman(self, w: int) -> int:
        return self.matching.woman_to_man[w]

    def wife_of(self, couple: int) -> int:
        return self.matching.man_to_woman[couple]

    def observed_key(self, couple: int) -> PairKey:
        return couple, self.matching.man_to_woman[couple]

    def private_expenditure(self, couple: int) -> float:
        """Value of the couple's private bundle at its own prices"""
        return float(self.p[self.observed_key(couple)] @ self.q_obs[couple])

    def assignable_floor(self) -> Tuple[np.ndarray, np.ndarray]:
        """(husband, wife) lower bounds on private shares; zeros when absent"""
        if self.has_assignable:
            return self.assignable_m, self.assignable_w
        zeros = np.zeros_like(self.q_obs)
        return zeros, zeros

    def with_committed(self, committed: CommittedSet) -> "Market":
        return replace(self, committed=committed)

    def with_prices_and_incomes(
        self,
        p: Optional[Mapping[PairKey, Sequence[float]]] = None,
        P: Optional[Mapping[PairKey, Sequence[float]]] = None,
        y: Optional[Mapping[PairKey, float]] = None,
    ) -> "Market":
        return replace(
            self,
            p=dict(self.p if p is None else p),
            P=dict(self.P if P is None else P),
            y=dict(self.y if y is None else y),
        )

    def scaled(self, price_factor: float, quantity_factor: float = 1.0) -> "Market":
        """
        Rescale units: prices by price_factor, quantities by quantity_factor,
        incomes by their product, so every budget row scales uniformly.
        """
        income_factor = price_factor * quantity_factor
        return replace(
            self,
            q_obs=self.q_obs * quantity_factor,
            Q_obs=self.Q_obs * quantity_factor,
            p={k: v * price_factor for k, v in self.p.items()},
            P={k: v * price_factor for k, v in self.P.items()},
            y={k: v * income_factor for k, v in self.y.items()},
            assignable_m=None if self.assignable_m is None else self.assignable_m * quantity_factor,
            assignable_w=None if self.assignable_w is None else self.assignable_w * quantity_factor,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Market):
            return NotImplemented

        def same_map(a, b):
            return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)

        def same_optional(a, b):
            if a is None or b is None:
                return a is None and b is None
            return np.array_equal(a, b)

        return (
            self.n_private == other.n_private
            and self.n_public == other.n_public
            and self.matching == other.matching
            and self.committed == other.committed
            and np.array_equal(self.q_obs, other.q_obs)
            and np.array_equal(self.Q_obs, other.Q_obs)
            and same_map(self.p, other.p)
            and same_map(self.P, other.P)
            and self.y == other.y
            and same_optional(self.assignable_m, other.assignable_m)
            and same_optional(self.assignable_w, other.assignable_w)
        )

    __hash__ = None


def potential_pairs(market: Market) -> Iterator[PairKey]:
    """
    Every outside option (m, w), singles included, except observed couples.

    Order: men-major cross pairs by woman index, then (m, ∅) by man,
    then (∅, w) by woman.
    """
    for m in range(market.matching.n_men):
        spouse = market.matching.man_to_woman[m]
        for w in range(market.matching.n_women):
            if w != spouse:
                yield m, w
    for m in range(market.matching.n_men):
        yield m, None
    for w in range(market.matching.n_women):
        yield None, w


def cross_pairs(market: Market) -> List[PairKey]:
    return [key for key in potential_pairs(market) if key[0] is not None and key[1] is not None]


@dataclass(frozen=True, eq=False)
class AllocationCandidate:
    """
    Values for the unobservables: private shares, Lindahl splits,
    optional transfers and stability indices.

    q_m / q_w are indexed by couple; Pm / Pw are keyed by cross pair.
    """
    q_m: np.ndarray
    q_w: np.ndarray
    Pm: Dict[PairKey, np.ndarray]
    Pw: Dict[PairKey, np.ndarray]
    transfers: Optional[np.ndarray] = None
    s: Optional[Dict[PairKey, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "q_m", _frozen(self.q_m))
        object.__setattr__(self, "q_w", _frozen(self.q_w))
        object.__setattr__(self, "Pm", _frozen_map(self.Pm))
        object.__setattr__(self, "Pw", _frozen_map(self.Pw))
        if self.transfers is not None:
            object.__setattr__(self, "transfers", _frozen(self.transfers))
        if self.s is not None:
            object.__setattr__(self, "s", {k: float(v) for k, v in self.s.items()})

    @classmethod
    def from_shares(
        cls,
        market: Market,
        q_m: np.ndarray,
        Pm: Mapping[PairKey, Sequence[float]],
        transfers: Optional[Sequence[float]] = None,
        s: Optional[Mapping[PairKey, float]] = None,
    ) -> "AllocationCandidate":
        """Derive the wife's shares and Lindahl splits by adding-up"""
        q_m = np.asarray(q_m, dtype=float)
        Pm = {key: np.asarray(value, dtype=float) for key, value in Pm.items()}
        Pw = {key: market.P[key] - value for key, value in Pm.items()}
        return cls(
            q_m=q_m,
            q_w=market.q_obs - q_m,
            Pm=Pm,
            Pw=Pw,
            transfers=None if transfers is None else np.asarray(transfers, dtype=float),
            s=None if s is None else dict(s),
        )

    @classmethod
    def equal_split(cls, market: Market) -> "AllocationCandidate":
        """Halve every private bundle and every public price"""
        Pm = {key: market.P[key] / 2.0 for key in cross_pairs(market)}
        return cls.from_shares(market, market.q_obs / 2.0, Pm)

    def index(self, pair: PairKey) -> float:
        """Stability index for an outside option (1 when absent)"""
        if self.s is None:
            return 1.0
        return self.s.get(pair, 1.0)

    def without_indices(self) -> "AllocationCandidate":
        return replace(self, s=None)

    def adding_up_error(self, market: Market) -> float:
        """Largest breach of q_m + q_w = q_obs and Pm + Pw = P"""
        worst = float(np.max(np.abs(self.q_m + self.q_w - market.q_obs), initial=0.0))
        for key, value in self.Pm.items():
            worst = max(worst, float(np.max(np.abs(value + self.Pw[key] - market.P[key]), initial=0.0)))
        return worst
