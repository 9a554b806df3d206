"""Marriage market data model"""

from .market import (
    EMPTY,
    AgentId,
    AllocationCandidate,
    CommittedSet,
    Market,
    Matching,
    PairKey,
    Side,
    cross_pairs,
    format_pair,
    potential_pairs,
)
from .validation import Violation, ensure_valid, validate_market

__all__ = [
    'EMPTY',
    'AgentId',
    'AllocationCandidate',
    'CommittedSet',
    'Market',
    'Matching',
    'PairKey',
    'Side',
    'Violation',
    'cross_pairs',
    'ensure_valid',
    'format_pair',
    'potential_pairs',
    'validate_market',
]
