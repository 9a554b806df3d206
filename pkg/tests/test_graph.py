"""Tests for edge weights, remarriage structures and the blocking search"""

import itertools
import math
import unittest

import numpy as np

from tests.fixtures import two_couple_market
from src.core.market import EMPTY, AgentId, AllocationCandidate, CommittedSet, Matching
from src.graph.edges import EdgeMatrix, build_edge_matrix, edge_weight, edge_weights_from_sequence
from src.graph.paths import (
    Coalition,
    PathOfRemarriages,
    coalition_to_path,
    decompose_coalition,
    enumerate_structures,
    has_committed_exit,
    path_is_permissible,
    split_at_uncommitted,
    transfer_potentials,
    validate_coalition,
)
from src.graph.search import SearchMode, find_blocking_structure
from src.lpcore.program import FeasibilityProgram, Relation, SolverStatus
from src.lpcore.registry import solve
from src.oracle.coalitions import enumerate_coalitions
from src.utils.errors import DimensionMismatch, MalformedCoalition, NotPermissible

EPS = 1e-7
MAX_COUPLES = 5
TRIALS = 200


def _random_committed(rng: np.random.Generator, n: int) -> CommittedSet:
    return CommittedSet(tuple(bool(flag) for flag in rng.random(n) < 0.5))


def _enumerated_blocks(edges: EdgeMatrix, committed: CommittedSet, mode: SearchMode, eps: float):
    """Every permissible structure matching the blocking pattern"""
    found = []
    for pair, a in edges.single_items():
        couple = edges.single_vertex(pair)
        if not committed.is_committed(couple) and a <= -eps:
            found.append(PathOfRemarriages.single(pair, couple))
    for structure in enumerate_structures(edges.wives, committed, None):
        weights = [edges.weight(e) for e in structure.edges]
        if mode is SearchMode.CONSISTENCY:
            if all(a <= eps for a in weights) and min(weights) <= -eps:
                found.append(structure)
        elif sum(weights) < -eps:
            found.append(structure)
    return found


def _transfer_program(edges: EdgeMatrix, committed: CommittedSet) -> FeasibilityProgram:
    """a(m, w) + t[m] - t[σ(w)] >= 0 with transfers free on committed couples only"""
    program = FeasibilityProgram(name="edge-transfers")
    t = {}
    for v in edges.couple_vertices:
        bound = math.inf if committed.is_committed(v) else 0.0
        t[v] = program.add_variable(f"t[{v}]", -bound, bound)
    for pair, a in edges.cross_items():
        u, v = edges.endpoints(pair)
        program.add_constraint(t[u] - t[v] + a, Relation.GE, 0.0, name=f"edge[{u},{v}]")
    return program


class EdgeWeightTests(unittest.TestCase):
    """Edge weights at a fixed candidate"""

    @classmethod
    def setUpClass(cls):
        cls.market = two_couple_market()
        cls.candidate = AllocationCandidate.from_shares(
            cls.market, [[1.0], [3.0]], {(0, 1): [0.25], (1, 0): [0.5]})

    def test_cross_weight(self):
        """p(q_m + q_w') + Pm Q + Pw Q' - y"""
        # m0 keeps 1, w1 keeps 4 - 3 = 1; public 1 + 1 at Lindahl prices 0.25 and 0.75
        self.assertAlmostEqual(edge_weight(self.market, self.candidate, (0, 1)), 1.0 + 1.0 + 1.0 - 4.0)

    def test_single_weights(self):
        """Singles pay their own share plus the couple's public bundle"""
        self.assertAlmostEqual(edge_weight(self.market, self.candidate, (0, None)), 1.0 + 1.0 - 3.0)
        self.assertAlmostEqual(edge_weight(self.market, self.candidate, (None, 0)), 3.0 + 1.0 - 2.0)

    def test_index_scales_income(self):
        """A stability index multiplies the income term"""
        self.assertAlmostEqual(edge_weight(self.market, self.candidate, (0, 1), s=0.5), 3.0 - 2.0)

    def test_observed_couple_weight_is_zero(self):
        """The budget identity makes an observed couple's own weight zero"""
        self.assertAlmostEqual(edge_weight(self.market, self.candidate, (0, 0)), 0.0)

    def test_matrix_keys(self):
        """The matrix covers exactly the potential pairs"""
        edges = build_edge_matrix(self.market, self.candidate)
        self.assertEqual(set(edges.weights), {(0, 1), (1, 0), (0, None), (1, None), (None, 0), (None, 1)})
        self.assertEqual(edges.endpoints((0, 1)), (0, 1))
        self.assertEqual(len(edges.to_frame()), 6)

    def test_shape_mismatch(self):
        """Candidates with the wrong share shape are rejected"""
        bad = AllocationCandidate(np.zeros((3, 1)), np.zeros((3, 1)), {}, {})
        with self.assertRaises(DimensionMismatch):
            build_edge_matrix(self.market, bad)

    def test_flat_sequence(self):
        """Cross weights come in potential-pair order"""
        edges = edge_weights_from_sequence(3, [1, 2, 3, 4, 5, 6])
        self.assertEqual(edges.weight((1, 2)), 4.0)
        with self.assertRaises(DimensionMismatch):
            edge_weights_from_sequence(3, [1, 2])


class StructureTests(unittest.TestCase):
    """Paths, cycles and their enumeration"""

    def test_path_from_vertices(self):
        """Edges pair each husband with the next couple's wife"""
        path = PathOfRemarriages.from_vertices([0, 2, 1], wives=[1, 2, 0])
        self.assertEqual(path.edges, ((0, 0), (2, 2)))
        self.assertFalse(path.is_cycle)
        self.assertEqual(path.interior, (2,))
        cycle = PathOfRemarriages.from_vertices([0, 1, 0], wives=[0, 1])
        self.assertTrue(cycle.is_cycle)
        self.assertEqual(cycle.vertices, (0, 1, 0))

    def test_permissibility(self):
        """Open paths need non-committed ends; cycles are always allowed"""
        committed = CommittedSet((False, True, False))
        wives = [0, 1, 2]
        self.assertTrue(path_is_permissible(PathOfRemarriages.from_vertices([0, 1, 2], wives), committed))
        self.assertFalse(path_is_permissible(PathOfRemarriages.from_vertices([0, 1], wives), committed))
        self.assertTrue(path_is_permissible(PathOfRemarriages.from_vertices([1, 2, 1], wives), committed))
        self.assertFalse(path_is_permissible(PathOfRemarriages.single((1, None), 1), committed))

    def test_counts_all_committed(self):
        """Three committed couples: three 2-cycles and two 3-cycles"""
        structures = enumerate_structures([0, 1, 2], CommittedSet.all(3), None)
        self.assertEqual(len(structures), 5)
        self.assertTrue(all(s.is_cycle for s in structures))
        self.assertEqual(len(enumerate_structures([0, 1, 2], CommittedSet.all(3), 2)), 3)

    def test_counts_none_committed(self):
        """Nothing committed: twelve open paths plus five cycles, six minimal"""
        self.assertEqual(len(enumerate_structures([0, 1, 2], CommittedSet.none(3), None)), 17)
        minimal = enumerate_structures([0, 1, 2], CommittedSet.none(3), None, minimal=True)
        self.assertEqual(len(minimal), 6)
        self.assertTrue(all(len(s) == 1 and not s.is_cycle for s in minimal))

    def test_enumeration_order(self):
        """Shorter structures first, open before cycles"""
        structures = enumerate_structures([0, 1, 2], CommittedSet((False, True, False)), None)
        lengths = [len(s) for s in structures]
        self.assertEqual(lengths, sorted(lengths))
        self.assertFalse(structures[0].is_cycle)

    def test_invalid_max_len(self):
        """The cap must allow at least one edge"""
        with self.assertRaises(ValueError):
            enumerate_structures([0, 1], CommittedSet.none(2), 0)

    def test_split_at_uncommitted(self):
        """Open paths break at non-committed interior couples"""
        committed = CommittedSet((False, False, True, False))
        path = PathOfRemarriages.from_vertices([0, 1, 2, 3], [0, 1, 2, 3])
        pieces = split_at_uncommitted(path, committed, [0, 1, 2, 3])
        self.assertEqual([p.vertices for p in pieces], [(0, 1), (1, 2, 3)])
        whole = split_at_uncommitted(path, CommittedSet((False, True, True, False)), [0, 1, 2, 3])
        self.assertEqual(len(whole), 1)

    def test_split_committed_cycle(self):
        """A fully committed cycle stays whole"""
        cycle = PathOfRemarriages.from_vertices([0, 1, 2, 0], [0, 1, 2])
        self.assertEqual(split_at_uncommitted(cycle, CommittedSet.all(3), [0, 1, 2]), [cycle])

    def test_transfer_potentials(self):
        """Telescoping transfers push the whole sum onto the last edge"""
        path = PathOfRemarriages.from_vertices([0, 1, 2], [0, 1, 2])
        transfers, adjusted = transfer_potentials(path, {(0, 1): 2.0, (1, 2): -5.0})
        self.assertEqual(transfers, {0: 0.0, 1: 2.0})
        self.assertEqual(adjusted, [0.0, -3.0])


class CoalitionTests(unittest.TestCase):
    """Coalition validation and the coalition-to-path construction"""

    def test_valid_coalition(self):
        """A swap of partners is a well-formed rematching"""
        coalition = Coalition.from_pairs([(0, 1), (1, 0)])
        validate_coalition(coalition, Matching.identity(2))
        self.assertEqual(coalition.pairs(), [(0, 1), (1, 0)])
        self.assertEqual(coalition.describe(), "(m0,w1), (m1,w0)")

    def test_own_spouse_rejected(self):
        """Rematching someone to their own spouse is malformed"""
        with self.assertRaises(MalformedCoalition):
            validate_coalition(Coalition.from_pairs([(0, 0)]), Matching.identity(2))

    def test_non_involutive_rejected(self):
        """σ̂(σ̂(i)) must be i"""
        m0, w1 = AgentId.man(0), AgentId.woman(1)
        coalition = Coalition(frozenset({m0, w1}), ((m0, w1), (w1, EMPTY)))
        with self.assertRaises(MalformedCoalition):
            validate_coalition(coalition, Matching.identity(2))

    def test_out_of_market_agent(self):
        """Members must exist"""
        with self.assertRaises(MalformedCoalition):
            validate_coalition(Coalition.from_pairs([(5, None)]), Matching.identity(2))

    def test_decomposition(self):
        """A swap plus a single decomposes into a cycle and a single option"""
        coalition = Coalition.from_pairs([(0, 1), (1, 0), (2, None)])
        parts = decompose_coalition(coalition, Matching.identity(3))
        self.assertTrue(parts[0].is_cycle)
        self.assertEqual(parts[0].vertices, (0, 1, 0))
        self.assertTrue(parts[1].is_single_option)

    def test_committed_spouse_missing(self):
        """A committed husband cannot leave his wife outside the coalition"""
        coalition = Coalition.from_pairs([(0, 1), (None, 0)])
        with self.assertRaises(NotPermissible):
            coalition_to_path(Coalition.from_pairs([(0, 1)]), Matching.identity(2), CommittedSet.all(2))
        self.assertTrue(has_committed_exit(coalition, Matching.identity(2), CommittedSet.all(2)))

    def test_every_permissible_coalition_yields_permissible_path(self):
        """All committed patterns on three couples"""
        matching = Matching.identity(3)
        for flags in itertools.product([False, True], repeat=3):
            committed = CommittedSet(flags)
            for coalition in enumerate_coalitions(matching, committed):
                if has_committed_exit(coalition, matching, committed):
                    with self.assertRaises(NotPermissible):
                        coalition_to_path(coalition, matching, committed)
                    continue
                path = coalition_to_path(coalition, matching, committed)
                self.assertTrue(path_is_permissible(path, committed), f"{flags}: {coalition.describe()}")
                self.assertTrue(set(path.edges) <= set(coalition.pairs()), coalition.describe())


class BlockingSearchTests(unittest.TestCase):
    """Consistency and monotonicity searches"""

    def test_negative_cycle_monotonicity_only(self):
        """-1 and 0.5 around a committed cycle: negative total, no strict pattern"""
        edges = edge_weights_from_sequence(2, [-1.0, 0.5], tolerance=EPS)
        found = find_blocking_structure(edges, CommittedSet.all(2), SearchMode.MONOTONICITY)
        self.assertIsNotNone(found)
        self.assertTrue(found.is_cycle)
        self.assertEqual(set(found.edges), {(0, 1), (1, 0)})
        self.assertIsNone(find_blocking_structure(edges, CommittedSet.all(2), SearchMode.CONSISTENCY))

    def test_consistency_cycle(self):
        """A strict edge closed by a weak one blocks without transfers"""
        edges = edge_weights_from_sequence(2, [-1.0, 0.0], tolerance=EPS)
        found = find_blocking_structure(edges, CommittedSet.all(2), SearchMode.CONSISTENCY)
        self.assertIsNotNone(found)
        self.assertTrue(found.is_cycle)

    def test_consistency_open_path(self):
        """Weak lead-in to a strict edge between non-committed ends"""
        # keys: (0,1) (0,2) (1,0) (1,2) (2,0) (2,1)
        edges = edge_weights_from_sequence(3, [0.0, 5.0, 5.0, -1.0, 5.0, 5.0], tolerance=EPS)
        found = find_blocking_structure(edges, CommittedSet((False, True, False)), SearchMode.CONSISTENCY)
        self.assertEqual(found.edges, ((0, 1), (1, 2)))
        self.assertIsNone(find_blocking_structure(edges, CommittedSet.all(3), SearchMode.CONSISTENCY))

    def test_monotonicity_open_path(self):
        """A negative path between non-committed couples through a committed one"""
        edges = edge_weights_from_sequence(3, [2.0, 5.0, 5.0, -3.0, 5.0, 5.0], tolerance=EPS)
        found = find_blocking_structure(edges, CommittedSet((False, True, False)), SearchMode.MONOTONICITY)
        self.assertEqual(found.vertices, (0, 1, 2))

    def test_monotonicity_tolerance(self):
        """Totals inside -eps are not reported; totals below -eps are"""
        small = edge_weights_from_sequence(2, [-0.25 * EPS, -0.25 * EPS], tolerance=EPS)
        self.assertIsNone(find_blocking_structure(small, CommittedSet.all(2), SearchMode.MONOTONICITY))
        large = edge_weights_from_sequence(2, [-EPS, -EPS], tolerance=EPS)
        self.assertIsNotNone(find_blocking_structure(large, CommittedSet.all(2), SearchMode.MONOTONICITY))

    def test_single_option(self):
        """Only non-committed couples may go single"""
        edges = edge_weights_from_sequence(2, [1.0, 1.0], single_values=[-1.0, 1.0, 1.0, 1.0], tolerance=EPS)
        found = find_blocking_structure(edges, CommittedSet((False, True)), SearchMode.CONSISTENCY)
        self.assertTrue(found.is_single_option)
        self.assertEqual(found.edges, ((0, None),))
        self.assertIsNone(find_blocking_structure(edges, CommittedSet.all(2), SearchMode.CONSISTENCY))

    def test_clean_matrix(self):
        """Positive weights block nothing"""
        edges = EdgeMatrix.from_weights({(0, 1): 1.0, (1, 0): 2.0}, 2, EPS)
        for mode in SearchMode:
            self.assertIsNone(find_blocking_structure(edges, CommittedSet.none(2), mode))


    def test_two_cycle_among_five_couples(self):
        """A lone negative 2-cycle in a larger market is returned as a cycle"""
        weights = {(m, w): 1.0 for m in range(5) for w in range(5) if m != w}
        weights[(2, 0)] = -1.084
        weights[(0, 2)] = 0.803
        edges = EdgeMatrix.from_weights(weights, 5, EPS)
        committed = CommittedSet((True, False, True, False, False))
        found = find_blocking_structure(edges, committed, SearchMode.MONOTONICITY)
        self.assertIsNotNone(found)
        self.assertTrue(found.is_cycle)
        self.assertEqual(found.vertices, (0, 2, 0))
        self.assertAlmostEqual(found.total(edges.weights), -0.281)
        self.assertIsNone(find_blocking_structure(edges, committed, SearchMode.CONSISTENCY))

    def test_committed_three_cycle(self):
        """-1, 0.4, 0.4 around three committed couples blocks only with transfers"""
        # keys: (0,1) (0,2) (1,0) (1,2) (2,0) (2,1)
        edges = edge_weights_from_sequence(3, [-1.0, 5.0, 5.0, 0.4, 0.4, 5.0], tolerance=EPS)
        committed = CommittedSet.all(3)
        found = find_blocking_structure(edges, committed, SearchMode.MONOTONICITY)
        self.assertEqual(found.vertices, (0, 1, 2, 0))
        self.assertAlmostEqual(found.total(edges.weights), -0.2)
        transfers, adjusted = transfer_potentials(found, edges.weights)
        np.testing.assert_allclose(adjusted, [0.0, 0.0, -0.2], atol=1e-12)
        self.assertAlmostEqual(transfers[1], -1.0)
        self.assertIsNone(find_blocking_structure(edges, committed, SearchMode.CONSISTENCY))

    def test_scaling_invariance(self):
        """Multiplying every weight and the tolerance by a positive constant changes nothing"""
        rng = np.random.default_rng(31)
        for trial in range(50):
            n = int(rng.integers(2, MAX_COUPLES + 1))
            edges = edge_weights_from_sequence(
                n, rng.normal(0.4, 1.0, size=n * (n - 1)),
                single_values=rng.normal(1.0, 1.0, size=2 * n), tolerance=EPS)
            committed = _random_committed(rng, n)
            for factor in (0.5, 8.0, 1024.0):
                scaled = edges.scaled(factor)
                self.assertAlmostEqual(scaled.tolerance, EPS * factor)
                for mode in SearchMode:
                    self.assertEqual(
                        find_blocking_structure(scaled, committed, mode),
                        find_blocking_structure(edges, committed, mode),
                        f"trial {trial}, factor {factor}, {mode.value}")


class EnumerationAgreementTests(unittest.TestCase):
    """Blocking search and transfer programs against exhaustive enumeration"""

    def test_consistency_matches_enumeration(self):
        """Weakly blocking structures with one strict edge, up to five couples"""
        rng = np.random.default_rng(11)
        levels = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
        hits = 0
        for trial in range(TRIALS):
            n = int(rng.integers(2, MAX_COUPLES + 1))
            edges = edge_weights_from_sequence(
                n, rng.choice(levels, size=n * (n - 1), p=[0.1, 0.1, 0.2, 0.2, 0.2, 0.2]),
                single_values=rng.choice(levels, size=2 * n, p=[0.02, 0.02, 0.16, 0.2, 0.3, 0.3]),
                tolerance=EPS)
            committed = _random_committed(rng, n)
            expected = _enumerated_blocks(edges, committed, SearchMode.CONSISTENCY, EPS)
            found = find_blocking_structure(edges, committed, SearchMode.CONSISTENCY)
            self.assertEqual(found is not None, bool(expected), f"trial {trial}")
            if found is not None:
                hits += 1
                self.assertIn(found, expected, f"trial {trial}: {found.describe()}")
        self.assertGreater(hits, 0)
        self.assertLess(hits, TRIALS)

    def test_monotonicity_matches_enumeration(self):
        """Structures with negative total weight, up to five couples"""
        rng = np.random.default_rng(12)
        hits = compared = 0
        for trial in range(TRIALS):
            n = int(rng.integers(2, MAX_COUPLES + 1))
            edges = edge_weights_from_sequence(
                n, rng.normal(0.6, 1.0, size=n * (n - 1)),
                single_values=rng.normal(1.5, 1.0, size=2 * n), tolerance=EPS)
            committed = _random_committed(rng, n)
            totals = [s.total(edges.weights) for s in enumerate_structures(edges.wives, committed, None)]
            if any(-EPS <= total < 0 for total in totals):
                continue
            compared += 1
            expected = _enumerated_blocks(edges, committed, SearchMode.MONOTONICITY, EPS)
            found = find_blocking_structure(edges, committed, SearchMode.MONOTONICITY)
            self.assertEqual(found is not None, bool(expected), f"trial {trial}")
            if found is not None:
                hits += 1
                self.assertTrue(path_is_permissible(found, committed), found.describe())
                self.assertIn(found, expected, f"trial {trial}: {found.describe()}")
        self.assertGreater(compared, TRIALS // 2)
        self.assertGreater(hits, 0)

    def test_transfer_program_matches_enumeration(self):
        """Edge-level transfer LP is feasible iff no permissible structure has negative total"""
        rng = np.random.default_rng(13)
        infeasible = 0
        for trial in range(TRIALS):
            n = int(rng.integers(2, MAX_COUPLES + 1))
            edges = edge_weights_from_sequence(n, rng.normal(0.8, 1.0, size=n * (n - 1)), tolerance=EPS)
            committed = _random_committed(rng, n)
            structures = enumerate_structures(edges.wives, committed, None)
            totals = [s.total(edges.weights) for s in structures]
            if any(abs(total) < 1e-6 for total in totals):
                continue
            negative = [s for s, total in zip(structures, totals) if total < 0]

            solution = solve(_transfer_program(edges, committed))
            self.assertIn(solution.status, (SolverStatus.OPTIMAL, SolverStatus.INFEASIBLE))
            self.assertEqual(solution.status is SolverStatus.INFEASIBLE, bool(negative), f"trial {trial}")

            if solution.is_optimal:
                for pair, a in edges.cross_items():
                    u, v = edges.endpoints(pair)
                    self.assertGreaterEqual(a + solution[f"t[{u}]"] - solution[f"t[{v}]"], -1e-7)
                continue
            infeasible += 1
            # explicit transfers certify the negative structure piece by piece
            structure = negative[0]
            pieces = split_at_uncommitted(structure, committed, edges.wives)
            sums = []
            for piece in pieces:
                _, adjusted = transfer_potentials(piece, edges.weights)
                self.assertTrue(all(committed.is_committed(v) for v in piece.vertices[1:-1]))
                np.testing.assert_allclose(adjusted[:-1], 0.0, atol=1e-9)
                self.assertAlmostEqual(adjusted[-1], piece.total(edges.weights))
                sums.append(adjusted[-1])
            self.assertAlmostEqual(sum(sums), structure.total(edges.weights))
            self.assertLess(min(sums), 0.0)
        self.assertGreater(infeasible, 0)

if __name__ == '__main__':
    unittest.main()
