"""Brute-force checks for small markets"""

from .coalitions import (
    blocking_coalition_exists,
    blocking_coalition_in_edges,
    coalition_blocks,
    enumerate_coalitions,
    enumerate_permissible_coalitions,
)
from .grid import grid_search_rationalizability, grid_search_witness, grid_values
from .utility import CandidateUtility, best_joint_gain, candidate_utility_block_check, spouse_utilities

__all__ = [
    'CandidateUtility',
    'best_joint_gain',
    'blocking_coalition_exists',
    'blocking_coalition_in_edges',
    'candidate_utility_block_check',
    'coalition_blocks',
    'enumerate_coalitions',
    'enumerate_permissible_coalitions',
    'grid_search_rationalizability',
    'grid_search_witness',
    'grid_values',
    'spouse_utilities',
]
