"""Divorce regimes"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.core.market import CommittedSet, Market
from src.graph.search import SearchMode


class RegimeKind(Enum):
    """Divorce law governing outside options"""
    UNILATERAL = "unilateral"
    TRANSFERS = "transfers"          # mutual consent, spouses may compensate each other
    NO_TRANSFERS = "no-transfers"    # mutual consent, no compensation


@dataclass(frozen=True)
class Regime:
    """A regime kind plus an optional committed-set override"""
    kind: RegimeKind
    committed_override: Optional[CommittedSet] = None

    @classmethod
    def unilateral(cls) -> "Regime":
        return cls(RegimeKind.UNILATERAL)

    @classmethod
    def transfers(cls, committed: Optional[CommittedSet] = None) -> "Regime":
        return cls(RegimeKind.TRANSFERS, committed)

    @classmethod
    def no_transfers(cls, committed: Optional[CommittedSet] = None) -> "Regime":
        return cls(RegimeKind.NO_TRANSFERS, committed)

    @classmethod
    def parse(cls, text: str) -> "Regime":
        """Regime from its CLI name: unilateral, transfers, no-transfers"""
        normalized = text.strip().lower().replace("_", "-")
        for kind in RegimeKind:
            if kind.value == normalized:
                return cls(kind)
        raise ValueError(f"Unknown regime: {text}. Available: {[k.value for k in RegimeKind]}")

    @property
    def name(self) -> str:
        return self.kind.value

    def committed(self, market: Market) -> CommittedSet:
        """Committed set in force; unilateral divorce commits nobody"""
        if self.kind is RegimeKind.UNILATERAL:
            return CommittedSet.none(market.n_couples)
        if self.committed_override is not None:
            return self.committed_override
        return market.committed

    @property
    def search_mode(self) -> SearchMode:
        if self.kind is RegimeKind.TRANSFERS:
            return SearchMode.MONOTONICITY
        return SearchMode.CONSISTENCY
