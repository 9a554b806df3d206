"""Paths of remarriages, coalitions, and the coalition-to-path construction"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from src.core.market import EMPTY, AgentId, CommittedSet, Market, Matching, PairKey, Side, format_pair
from src.utils.errors import MalformedCoalition, NotPermissible


@dataclass(frozen=True)
class PathOfRemarriages:
    """
    Chain m_1 -> σ(m_2), m_2 -> σ(m_3), ... ending at couple m_n.

    A cycle closes with m_n = m_1. A standalone single option is stored as
    one edge (m, ∅) or (∅, w) on its own couple.
    """
    men: Tuple[int, ...]
    endpoint: int
    edges: Tuple[PairKey, ...]
    is_cycle: bool = False

    @classmethod
    def from_vertices(cls, vertices: Sequence[int], wives: Sequence[int]) -> "PathOfRemarriages":
        """Build from the couple sequence v_1..v_n (v_n = v_1 for a cycle)"""
        vertices = tuple(vertices)
        if len(vertices) < 2:
            raise ValueError("A path needs at least two couple vertices")
        edges = tuple((vertices[j], wives[vertices[j + 1]]) for j in range(len(vertices) - 1))
        return cls(vertices[:-1], vertices[-1], edges, vertices[0] == vertices[-1])

    @classmethod
    def single(cls, pair: PairKey, couple: int) -> "PathOfRemarriages":
        return cls((couple,), couple, (pair,), False)

    @property
    def is_single_option(self) -> bool:
        return len(self.edges) == 1 and (self.edges[0][0] is None or self.edges[0][1] is None)

    @property
    def vertices(self) -> Tuple[int, ...]:
        if self.is_single_option:
            return self.men
        return self.men + (self.endpoint,)

    @property
    def interior(self) -> Tuple[int, ...]:
        """Vertices strictly between the ends (every vertex for a cycle)"""
        if self.is_cycle:
            return self.men
        return self.men[1:]

    def __len__(self) -> int:
        return len(self.edges)

    def total(self, weights: Mapping[PairKey, float]) -> float:
        return float(sum(weights[e] for e in self.edges))

    def describe(self) -> str:
        """Listing such as m0 -> (m1,w1) -> m0"""
        if self.is_single_option:
            return f"{format_pair(self.edges[0])} goes single"
        parts = [f"m{self.men[0]}"]
        for (_, w), nxt in zip(self.edges, self.men[1:] + (self.endpoint,)):
            parts.append(f"w{w} [couple m{nxt}]")
        kind = "cycle" if self.is_cycle else "path"
        return f"{kind}: " + " -> ".join(parts)


def path_is_permissible(path: PathOfRemarriages, committed: CommittedSet) -> bool:
    """A cycle, or a path whose two end couples are both non-committed"""
    if path.is_single_option:
        return not committed.is_committed(path.men[0])
    if path.is_cycle:
        return True
    return not committed.is_committed(path.men[0]) and not committed.is_committed(path.endpoint)


def split_at_uncommitted(path: PathOfRemarriages, committed: CommittedSet, wives: Sequence[int]) -> List[PathOfRemarriages]:
    """
    Cut a path or cycle at its non-committed interior couples.

    Transfers are zero on those couples, so each piece stands alone.
    """
    if path.is_single_option:
        return [path]
    vertices = list(path.vertices)
    cuts = [i for i, v in enumerate(vertices[:-1]) if not committed.is_committed(v)]
    if path.is_cycle:
        if not cuts:
            return [path]
        # rotate so the cycle starts at its first non-committed couple
        start = cuts[0]
        body = vertices[start:-1] + vertices[:start]
        vertices = body + [body[0]]
        cuts = [i for i, v in enumerate(vertices[:-1]) if not committed.is_committed(v)]
    else:
        cuts = [0] + [i for i in cuts if i > 0]
    bounds = cuts + [len(vertices) - 1]
    pieces = []
    for a, b in zip(bounds, bounds[1:]):
        if b > a:
            pieces.append(PathOfRemarriages.from_vertices(vertices[a:b + 1], wives))
    return pieces


def transfer_potentials(
    path: PathOfRemarriages, weights: Mapping[PairKey, float]
) -> Tuple[Dict[int, float], List[float]]:
    """
    Telescoping transfers along a path: t_1 = 0, t_{j+1} = a_j + t_j, with
    the end couple's transfer fixed at zero.

    Returns:
        (transfer per vertex, adjusted edge weights a_j + t_j - t_{j+1});
        every adjusted weight is zero except the last, which equals the
        path sum
    """
    vertices = path.vertices
    transfers: Dict[int, float] = {vertices[0]: 0.0}
    for j in range(1, len(vertices) - 1):
        transfers[vertices[j]] = weights[path.edges[j - 1]] + transfers[vertices[j - 1]]
    adjusted = []
    for j, edge in enumerate(path.edges):
        t_from = transfers[vertices[j]]
        t_to = 0.0 if j == len(path.edges) - 1 else transfers[vertices[j + 1]]
        adjusted.append(weights[edge] + t_from - t_to)
    return transfers, adjusted


@dataclass(frozen=True)
class Coalition:
    """Agents S with a rematching σ̂ on S (EMPTY allowed as partner)"""
    members: FrozenSet[AgentId]
    rematching: Tuple[Tuple[AgentId, AgentId], ...]

    @classmethod
    def from_pairs(cls, pairs: Sequence[PairKey]) -> "Coalition":
        """Coalition from rematched pairs such as (0, 1), (2, None)"""
        members = set()
        rematch: Dict[AgentId, AgentId] = {}
        for m, w in pairs:
            man = EMPTY if m is None else AgentId.man(m)
            woman = EMPTY if w is None else AgentId.woman(w)
            if not man.is_empty:
                members.add(man)
                rematch[man] = woman
            if not woman.is_empty:
                members.add(woman)
                rematch[woman] = man
        ordered = tuple(sorted(rematch.items(), key=lambda kv: kv[0].sort_key()))
        return cls(frozenset(members), ordered)

    @property
    def partner_map(self) -> Dict[AgentId, AgentId]:
        return dict(self.rematching)

    def pairs(self) -> List[PairKey]:
        """Rematched pairs: cross pairs men-major, then singles"""
        out: List[PairKey] = []
        partner = self.partner_map
        for agent in sorted(self.members, key=AgentId.sort_key):
            match = partner.get(agent, EMPTY)
            if agent.side is Side.MAN:
                out.append((agent.index, None if match.is_empty else match.index))
            elif agent.side is Side.WOMAN and match.is_empty:
                out.append((None, agent.index))
        cross = sorted(p for p in out if p[0] is not None and p[1] is not None)
        singles = [p for p in out if p[0] is None or p[1] is None]
        return cross + sorted(singles, key=lambda p: (p[0] is None, p[0] or 0, p[1] or 0))

    def describe(self) -> str:
        return ", ".join(format_pair(p) for p in self.pairs())


def validate_coalition(coalition: Coalition, matching: Matching) -> None:
    """Raise MalformedCoalition unless σ̂ is an involutive man-woman pairing"""
    partner = coalition.partner_map
    members = {a for a in coalition.members if not a.is_empty}
    if not members:
        raise MalformedCoalition("Coalition has no members")
    for agent in members:
        if agent.side is Side.MAN and not 0 <= agent.index < matching.n_men:
            raise MalformedCoalition(f"{agent} is not in the market")
        if agent.side is Side.WOMAN and not 0 <= agent.index < matching.n_women:
            raise MalformedCoalition(f"{agent} is not in the market")
        if agent not in partner:
            raise MalformedCoalition(f"{agent} has no partner under the rematching")
    for agent, match in partner.items():
        if agent not in members:
            raise MalformedCoalition(f"{agent} is rematched but not a member")
        if match.is_empty:
            continue
        if match not in members:
            raise MalformedCoalition(f"{agent} is rematched to non-member {match}")
        if match.side is agent.side:
            raise MalformedCoalition(f"{agent} is rematched within its own side")
        if partner.get(match) != agent:
            raise MalformedCoalition(f"Rematching is not involutive at {agent}")
    for agent in members:
        if not partner[agent].is_empty and partner[agent] == matching.partner(agent):
            raise MalformedCoalition(f"{agent} is rematched to its own spouse; drop the couple from the coalition")


def committed_violations(coalition: Coalition, matching: Matching, committed: CommittedSet) -> List[str]:
    """Committed members whose spouse is missing from the coalition"""
    problems = []
    for agent in coalition.members:
        if agent.is_empty:
            continue
        couple = agent.index if agent.side is Side.MAN else matching.spouse_of_woman(agent.index)
        if couple is not None and committed.is_committed(couple) and matching.partner(agent) not in coalition.members:
            problems.append(f"{agent} is committed but spouse {matching.partner(agent)} is not in the coalition")
    return problems


def has_committed_exit(coalition: Coalition, matching: Matching, committed: CommittedSet) -> bool:
    """A committed member leaves for the single option"""
    for agent, match in coalition.rematching:
        if not match.is_empty:
            continue
        couple = agent.index if agent.side is Side.MAN else matching.spouse_of_woman(agent.index)
        if couple is not None and committed.is_committed(couple):
            return True
    return False


def is_permissible(coalition: Coalition, matching: Matching, committed: CommittedSet) -> bool:
    return not committed_violations(coalition, matching, committed)


def decompose_coalition(coalition: Coalition, matching: Matching) -> List[PathOfRemarriages]:
    """
    Split σ̂ into remarriage paths, cycles and single options.

    Each man has at most one outgoing edge (his new wife's couple) and each
    couple at most one incoming edge (its wife's new husband), so the
    rematched cross pairs form disjoint simple paths and cycles. Paths come
    first, each started at the lowest husband whose wife is not rematched
    to a man; cycles follow, each started at its lowest husband; single
    options come last.
    """
    wives = matching.man_to_woman
    successor: Dict[int, int] = {}
    singles: List[PathOfRemarriages] = []
    for m, w in coalition.pairs():
        if m is not None and w is not None:
            successor[m] = matching.spouse_of_woman(w)
        elif m is not None:
            singles.append(PathOfRemarriages.single((m, None), m))
        else:
            singles.append(PathOfRemarriages.single((None, w), matching.spouse_of_woman(w)))

    has_incoming = set(successor.values())
    components: List[PathOfRemarriages] = []
    used = set()
    for start in sorted(m for m in successor if m not in has_incoming):
        vertices = [start]
        while vertices[-1] in successor:
            used.add(vertices[-1])
            vertices.append(successor[vertices[-1]])
        components.append(PathOfRemarriages.from_vertices(vertices, wives))
    for start in sorted(m for m in successor if m not in used):
        if start in used:
            continue
        vertices = [start]
        while True:
            used.add(vertices[-1])
            vertices.append(successor[vertices[-1]])
            if vertices[-1] == start:
                break
        components.append(PathOfRemarriages.from_vertices(vertices, wives))
    return components + singles


def coalition_to_path(coalition: Coalition, matching: Matching, committed: CommittedSet) -> PathOfRemarriages:
    """
    Extract a remarriage path from a permissible coalition.

    If some rematched man's wife is not rematched to a man (in particular
    when she is outside the coalition), walk from the lowest such man along
    m_{j+1} = σ(σ̂(m_j)) until the walk leaves the rematched men: an open
    path. Otherwise walk from the lowest rematched man until the walk
    returns to him: a cycle. Coalitions made only of single options yield
    the lowest single option.

    Args:
        coalition: Permissible coalition
        matching: Observed matching σ
        committed: Committed couples

    Returns:
        PathOfRemarriages passing path_is_permissible
    """
    validate_coalition(coalition, matching)
    problems = committed_violations(coalition, matching, committed)
    if problems:
        raise NotPermissible("; ".join(problems))
    if has_committed_exit(coalition, matching, committed):
        raise NotPermissible("A committed member leaves for the single option; such coalitions are not handled")
    return decompose_coalition(coalition, matching)[0]


def enumerate_structures(
    wives: Sequence[int],
    committed: CommittedSet,
    max_len: Optional[int],
    minimal: bool = False,
) -> List[PathOfRemarriages]:
    """
    Permissible simple paths and cycles on the complete couple graph.

    Args:
        wives: σ(m) per couple
        committed: Committed couples
        max_len: Maximum number of edges (None = unbounded)
        minimal: Drop structures implied by shorter ones: open paths with a
            non-committed interior couple, cycles with two or more
            non-committed couples

    Returns:
        Structures sorted by (edge count, open before cycle, vertices)
    """
    if max_len is not None and max_len < 1:
        raise ValueError("max_len must be at least 1")
    n = len(wives)
    graph = nx.complete_graph(n, create_using=nx.DiGraph)
    found: List[Tuple[int, bool, Tuple[int, ...]]] = []

    open_ends = [v for v in range(n) if not committed.is_committed(v)]
    for s in open_ends:
        for t in open_ends:
            if s == t:
                continue
            for vertices in nx.all_simple_paths(graph, s, t, cutoff=max_len):
                if minimal and any(not committed.is_committed(v) for v in vertices[1:-1]):
                    continue
                found.append((len(vertices) - 1, False, tuple(vertices)))

    cycle_bound = n if max_len is None else min(max_len, n)
    if cycle_bound >= 2:
        for cycle in nx.simple_cycles(graph, length_bound=cycle_bound):
            if minimal and sum(1 for v in cycle if not committed.is_committed(v)) > 1:
                continue
            pivot = cycle.index(min(cycle))
            rotated = cycle[pivot:] + cycle[:pivot]
            found.append((len(rotated), True, tuple(rotated) + (rotated[0],)))

    found.sort()
    return [PathOfRemarriages.from_vertices(vertices, wives) for _, _, vertices in found]


def enumerate_permissible_paths(
    market: Market,
    max_len: Optional[int],
    committed: Optional[CommittedSet] = None,
    minimal: bool = False,
) -> List[PathOfRemarriages]:
    """All permissible simple paths and cycles with at most max_len edges"""
    committed = market.committed if committed is None else committed
    return enumerate_structures(market.matching.man_to_woman, committed, max_len, minimal)
