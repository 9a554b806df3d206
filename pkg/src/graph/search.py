"""Blocking-structure search on a fixed edge matrix"""

import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import networkx as nx

from src.core.market import CommittedSet
from src.graph.edges import EdgeMatrix
from src.graph.paths import PathOfRemarriages
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


class SearchMode(Enum):
    """Which blocking pattern to look for"""
    CONSISTENCY = "consistency"    # all edges weakly blocking, one strictly
    MONOTONICITY = "monotonicity"  # negative total weight


def is_strict(a: float, eps: float) -> bool:
    """Strictly blocking: a <= -eps"""
    return a <= -eps


def is_weak(a: float, eps: float) -> bool:
    """Weakly blocking: a <= eps"""
    return a <= eps


def _single_option_block(edges: EdgeMatrix, committed: CommittedSet, eps: float) -> Optional[PathOfRemarriages]:
    for pair, a in edges.single_items():
        couple = edges.single_vertex(pair)
        if not committed.is_committed(couple) and is_strict(a, eps):
            return PathOfRemarriages.single(pair, couple)
    return None


def _canonical_cycle(cycle: List[int]) -> List[int]:
    body = cycle[:-1] if cycle[0] == cycle[-1] else list(cycle)
    pivot = body.index(min(body))
    body = body[pivot:] + body[:pivot]
    return body + [body[0]]


def _bellman_ford(graph: nx.DiGraph, sources: List[int]) -> Tuple[Dict[int, float], Dict[int, Optional[int]], Optional[int]]:
    """
    Relax every edge |V| times from the given sources.

    Returns:
        (distances, predecessors, vertex relaxed in the last pass); the
        vertex is None when the distances converged, otherwise it reaches
        a negative cycle through the predecessors
    """
    distance = {v: math.inf for v in graph.nodes}
    predecessor: Dict[int, Optional[int]] = {v: None for v in graph.nodes}
    for s in sources:
        distance[s] = 0.0
    last = None
    for _ in range(graph.number_of_nodes()):
        last = None
        for u, v, a in graph.edges(data="weight"):
            if distance[u] + a < distance[v]:
                distance[v] = distance[u] + a
                predecessor[v] = u
                last = v
        if last is None:
            break
    return distance, predecessor, last


def _retrace_cycle(predecessor: Dict[int, Optional[int]], start: int, n: int) -> Optional[List[int]]:
    v = start
    for _ in range(n):
        v = predecessor[v]
        if v is None:
            return None
    cycle = [v]
    u = predecessor[v]
    while u != v:
        if u is None or len(cycle) > n:
            return None
        cycle.append(u)
        u = predecessor[u]
    cycle.append(v)
    cycle.reverse()
    return cycle


def _retrace_path(predecessor: Dict[int, Optional[int]], source: int, target: int, n: int) -> Optional[List[int]]:
    path = [target]
    while path[-1] != source:
        u = predecessor[path[-1]]
        if u is None or len(path) > n:
            return None
        path.append(u)
    path.reverse()
    return path


def _total(graph: nx.DiGraph, vertices: List[int]) -> float:
    return sum(graph[u][v]["weight"] for u, v in zip(vertices, vertices[1:]))


def _monotonicity_search(edges: EdgeMatrix, committed: CommittedSet, eps: float) -> Optional[PathOfRemarriages]:
    # Every structure has at most n edges, so shifting each weight by eps/n
    # keeps any structure with total < -eps negative.
    n = max(edges.n_couples, 1)
    graph = edges.to_digraph(shift=eps / n)

    _, predecessor, last = _bellman_ford(graph, list(graph.nodes))
    if last is not None:
        cycle = _retrace_cycle(predecessor, last, n)
        if cycle is not None and _total(graph, cycle) < 0:
            return PathOfRemarriages.from_vertices(_canonical_cycle(cycle), edges.wives)
        logger.debug("Negative cycle lost to round-off; scanning bounded cycles")
        for cycle in nx.simple_cycles(graph, length_bound=n):
            closed = cycle + [cycle[0]]
            if _total(graph, closed) < 0:
                return PathOfRemarriages.from_vertices(_canonical_cycle(closed), edges.wives)

    open_ends = [v for v in range(edges.n_couples) if not committed.is_committed(v)]
    for u in open_ends:
        distance, predecessor, _ = _bellman_ford(graph, [u])
        for v in open_ends:
            if v != u and distance[v] < 0:
                path = _retrace_path(predecessor, u, v, n)
                if path is not None and _total(graph, path) < 0:
                    return PathOfRemarriages.from_vertices(path, edges.wives)
    return None


def _consistency_search(edges: EdgeMatrix, committed: CommittedSet, eps: float) -> Optional[PathOfRemarriages]:
    weak = edges.to_digraph(keep=lambda a: is_weak(a, eps))
    strict = sorted(
        (pair for pair, a in edges.cross_items() if is_strict(a, eps)),
        key=lambda pair: edges.endpoints(pair),
    )
    for pair in strict:
        u, v = edges.endpoints(pair)
        # on a cycle: the head reaches the tail inside the weak subgraph
        if nx.has_path(weak, v, u):
            back = nx.shortest_path(weak, v, u)
            return PathOfRemarriages.from_vertices(_canonical_cycle([u] + back), edges.wives)

        # on a permissible path: a non-committed couple reaches the tail and
        # the head reaches a non-committed couple; with no cycle through the
        # edge the two legs cannot share a vertex
        sources = sorted(s for s in nx.ancestors(weak, u) | {u} if not committed.is_committed(s))
        targets = sorted(t for t in nx.descendants(weak, v) | {v} if not committed.is_committed(t))
        if sources and targets:
            lead = nx.shortest_path(weak, sources[0], u)
            tail = nx.shortest_path(weak, v, targets[0])
            return PathOfRemarriages.from_vertices(lead + tail, edges.wives)
    return None


def find_blocking_structure(
    edges: EdgeMatrix,
    committed: CommittedSet,
    mode: SearchMode,
    eps: Optional[float] = None,
) -> Optional[PathOfRemarriages]:
    """
    Search for a permissible blocking path, cycle or single option.

    Single options count only for non-committed couples. Consistency mode
    looks for a structure whose edges are all <= eps with one <= -eps;
    monotonicity mode looks for a structure with negative total weight
    (every structure with total < -eps is found).

    Args:
        edges: Edge weights at a fixed candidate
        committed: Committed couples (empty for unilateral divorce)
        mode: Blocking pattern
        eps: Strictness tolerance (defaults to the matrix's)

    Returns:
        A blocking structure, or None
    """
    eps = edges.tolerance if eps is None else eps
    found = _single_option_block(edges, committed, eps)
    if found is None:
        if mode is SearchMode.MONOTONICITY:
            found = _monotonicity_search(edges, committed, eps)
        else:
            found = _consistency_search(edges, committed, eps)
    if found is not None:
        logger.debug(f"{mode.value}: blocking {found.describe()}")
    return found
