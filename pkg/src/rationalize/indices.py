"""Rationalizability verdicts and stability indices"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import pandas as pd

from src.core.market import AllocationCandidate, CommittedSet, Market, PairKey, format_pair
from src.graph.edges import EdgeMatrix, build_edge_matrix
from src.graph.paths import PathOfRemarriages, split_at_uncommitted, transfer_potentials
from src.graph.search import find_blocking_structure
from src.lpcore.program import SolverStatus
from src.lpcore.registry import SolverRegistry, solve
from src.rationalize.builder import BuiltProgram, ProgramOptions, build_program
from src.rationalize.regimes import Regime, RegimeKind
from src.utils.errors import TooLarge
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass
class IndexReport:
    """
    Optimal stability indices for one market under one regime.

    Per-option values are one optimal vector among possibly many; the
    average is unique.
    """
    regime: Regime
    status: SolverStatus
    s: Dict[PairKey, float] = field(default_factory=dict)
    candidate: Optional[AllocationCandidate] = None
    detail: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL and bool(self.s)

    @property
    def total(self) -> float:
        return float(sum(self.s.values())) if self.s else math.nan

    @property
    def average(self) -> float:
        return self.total / len(self.s) if self.s else math.nan

    def exactly_rationalizable(self, tol: float = 1e-6) -> bool:
        return bool(self.s) and all(value >= 1.0 - tol for value in self.s.values())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"pair": format_pair(pair), "man": pair[0], "woman": pair[1], "s": value}
             for pair, value in self.s.items()]
        )


@dataclass
class RationalizationResult:
    """Verdict of a rationalizability check; None when the solver gave up"""
    regime: Regime
    verdict: Optional[bool]
    status: SolverStatus
    witness: Optional[AllocationCandidate] = None
    counterexample: Optional[PathOfRemarriages] = None
    detail: str = ""


def _oracle_fallback(market: Market, regime: Regime, opts: ProgramOptions) -> Optional[bool]:
    # no MILP backend: small markets can still be decided by brute force
    from src.oracle.grid import grid_search_rationalizability

    logger.warning("No MILP backend; deciding NoTransfers by grid search")
    try:
        return grid_search_rationalizability(market, 11, regime, eps=opts.eps)
    except TooLarge as e:
        logger.error(f"Grid search unavailable: {e}")
        return None


def compute_stability_indices(
    market: Market,
    regime: Regime,
    opts: Optional[ProgramOptions] = None,
) -> IndexReport:
    """
    Maximize the sum of stability indices under a regime.

    Args:
        market: Valid market
        regime: Divorce regime
        opts: Build and solver options (with_indices is forced on)

    Returns:
        IndexReport with per-option indices, average and witness. When the
        solver hits its time limit with an incumbent, the status is
        TIME_LIMIT and the indices are a feasible lower bound on the optimum.
    """
    opts = (opts or ProgramOptions()).model_copy(update={"with_indices": True})
    built = build_program(market, regime, opts)
    solution = solve(built.program, opts.solver)

    if solution.status is SolverStatus.INFEASIBLE:
        # all indices at zero satisfies every outside-option row
        raise RuntimeError(f"Index program for {regime.name} is infeasible; this indicates a modelling error")
    if not solution.has_incumbent:
        logger.warning(f"Index program for {regime.name} ended with {solution.status.value}: {solution.detail}")
        return IndexReport(regime, solution.status, detail=solution.detail)

    candidate = built.candidate(solution.values)
    detail = ""
    if not solution.is_optimal:
        detail = f"time limit reached; indices are a lower bound ({solution.detail})"
        logger.warning(f"{regime.name}: {detail}")
    report = IndexReport(regime, solution.status, dict(candidate.s), candidate, detail)
    logger.info(f"{regime.name}: average stability index {report.average:.6f} over {len(report.s)} options")
    return report


def check_rationalizable(
    market: Market,
    regime: Regime,
    opts: Optional[ProgramOptions] = None,
) -> RationalizationResult:
    """
    Decide whether the data are rationalizable as stable under a regime.

    When they are not, the graph search is run on the best-effort
    candidate from the index program to surface a blocking structure.
    Under Transfers the structure comes with explicit transfers that
    leave one negative edge, recorded in the detail.

    Args:
        market: Valid market
        regime: Divorce regime
        opts: Build and solver options

    Returns:
        RationalizationResult with witness or counterexample
    """
    opts = (opts or ProgramOptions()).model_copy(update={"with_indices": False})
    committed = regime.committed(market)
    built: BuiltProgram = build_program(market, regime, opts)

    if built.program.has_integers and not SolverRegistry.supports_integers():
        verdict = _oracle_fallback(market, regime, opts)
        if verdict is None:
            return RationalizationResult(regime, None, SolverStatus.NUMERICAL_FAILURE, detail="no MILP backend")
        return RationalizationResult(regime, verdict, SolverStatus.OPTIMAL, detail="decided by grid search")

    solution = solve(built.program, opts.solver)
    if solution.has_incumbent:
        # any feasible point is a witness, optimal or not
        witness = built.candidate(solution.values)
        # half tolerance so solver round-off cannot fake a blocking structure
        edges = build_edge_matrix(market, witness, opts.eps / 2)
        leftover = find_blocking_structure(edges, committed, regime.search_mode)
        if leftover is not None:
            logger.warning(f"{regime.name}: witness still admits {leftover.describe()}")
        detail = "" if solution.is_optimal else f"time limit reached; incumbent is feasible ({solution.detail})"
        logger.info(f"{regime.name}: rationalizable")
        return RationalizationResult(regime, True, solution.status, witness=witness, detail=detail)

    if solution.status is not SolverStatus.INFEASIBLE:
        logger.warning(f"{regime.name}: solver ended with {solution.status.value}: {solution.detail}")
        return RationalizationResult(regime, None, solution.status, detail=solution.detail)

    counterexample, edges = _find_counterexample(market, regime, opts)
    detail = ""
    if counterexample is None and regime.kind is not RegimeKind.NO_TRANSFERS:
        logger.warning(f"{regime.name}: infeasible but no blocking structure found at the best-effort candidate")
    elif counterexample is not None and regime.kind is RegimeKind.TRANSFERS:
        detail = transfer_certificate(counterexample, edges, committed) or ""
    logger.info(f"{regime.name}: not rationalizable")
    return RationalizationResult(regime, False, solution.status, counterexample=counterexample, detail=detail)


def _find_counterexample(
    market: Market, regime: Regime, opts: ProgramOptions
) -> Tuple[Optional[PathOfRemarriages], EdgeMatrix]:
    try:
        report = compute_stability_indices(market, regime, opts)
        candidate = report.candidate
    except RuntimeError as e:
        logger.warning(f"Index program failed while looking for a counterexample: {e}")
        candidate = None
    if candidate is None:
        candidate = AllocationCandidate.equal_split(market)
    edges = build_edge_matrix(market, candidate.without_indices(), opts.eps)
    return find_blocking_structure(edges, regime.committed(market), regime.search_mode), edges


def transfer_certificate(path: PathOfRemarriages, edges: EdgeMatrix, committed: CommittedSet) -> Optional[str]:
    """
    Explicit transfers showing a structure blocks under Transfers.

    The structure is cut at its non-committed couples, where transfers are
    zero. On a piece with negative sum, telescoping transfers on the
    committed couples leave every edge at zero except the last one, which
    carries the whole sum.

    Args:
        path: Blocking path, cycle or single option
        edges: Edge weights the structure was found on
        committed: Committed couples

    Returns:
        Description of the transfers and the negative edge, or None when
        no piece has a negative sum
    """
    if path.is_single_option:
        pair = path.edges[0]
        return f"{format_pair(pair)} goes single at weight {edges.weight(pair):.6g}; no transfer applies"
    for piece in split_at_uncommitted(path, committed, edges.wives):
        transfers, adjusted = transfer_potentials(piece, edges.weights)
        if adjusted[-1] >= 0:
            continue
        shown = ", ".join(f"t[m{v}]={t:.6g}" for v, t in transfers.items() if committed.is_committed(v))
        last = format_pair(piece.edges[-1])
        return f"transfers {shown or 'none'} leave every edge at zero but {last} at {adjusted[-1]:.6g}"
    return None
