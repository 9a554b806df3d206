"""Remarriage graph: edge weights, paths, coalitions and blocking search"""

from .edges import DEFAULT_EPS, EdgeMatrix, build_edge_matrix, edge_weight, edge_weights_from_sequence
from .paths import (
    Coalition,
    PathOfRemarriages,
    coalition_to_path,
    committed_violations,
    decompose_coalition,
    enumerate_permissible_paths,
    enumerate_structures,
    has_committed_exit,
    is_permissible,
    path_is_permissible,
    split_at_uncommitted,
    transfer_potentials,
    validate_coalition,
)
from .search import SearchMode, find_blocking_structure, is_strict, is_weak

__all__ = [
    'DEFAULT_EPS',
    'Coalition',
    'EdgeMatrix',
    'PathOfRemarriages',
    'SearchMode',
    'build_edge_matrix',
    'coalition_to_path',
    'committed_violations',
    'decompose_coalition',
    'edge_weight',
    'edge_weights_from_sequence',
    'enumerate_permissible_paths',
    'enumerate_structures',
    'find_blocking_structure',
    'has_committed_exit',
    'is_permissible',
    'is_strict',
    'is_weak',
    'path_is_permissible',
    'split_at_uncommitted',
    'transfer_potentials',
    'validate_coalition',
]
