"""Perturbation experiments over random markets"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.identify.bounds import bound_sharing_rule, naive_bounds
from src.identify.report import width_statistics
from src.rationalize.builder import ProgramOptions
from src.rationalize.indices import compute_stability_indices
from src.rationalize.regimes import Regime
from src.simulate.generator import generate_market
from src.simulate.scenarios import ScenarioConfig, ScenarioKind, apply_scenario
from src.utils.errors import MarketError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

STATISTICS = ["mean", "min", "median", "max"]
CELL_COLUMNS = ["scenario", "alpha", "regime", "mean", "min", "median", "max", "count", "failures"]
_KIND_STREAM = {ScenarioKind.PRICES: 1, ScenarioKind.INCOME: 2, ScenarioKind.BOTH: 3}


def baseline_rng(seed: int, draw: int) -> np.random.Generator:
    """Baseline stream, shared by every scenario and alpha for a draw"""
    return np.random.default_rng(np.random.SeedSequence([seed, draw]))


def perturbation_rng(seed: int, draw: int, kind: ScenarioKind, alpha: float) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([seed, draw, _KIND_STREAM[kind], int(round(alpha * 1_000_000))]))


@dataclass
class DrawOutcome:
    """Per-draw results for one scenario cell"""
    draw: int
    averages: Dict[str, float] = field(default_factory=dict)
    widths: Dict[str, List[float]] = field(default_factory=dict)
    failures: Dict[str, str] = field(default_factory=dict)


def run_draw(
    config: ScenarioConfig,
    draw: int,
    regimes: Sequence[Regime],
    opts: Optional[ProgramOptions] = None,
    with_bounds: bool = True,
) -> DrawOutcome:
    """
    Generate, perturb and evaluate one draw.

    Solver trouble in one regime is recorded as a failure for that regime
    and does not stop the others.
    """
    baseline = generate_market(config.generator_params(), baseline_rng(config.seed, draw))
    market = apply_scenario(baseline, config, perturbation_rng(config.seed, draw, config.kind, config.alpha))
    outcome = DrawOutcome(draw)
    if with_bounds:
        outcome.widths["naive"] = naive_bounds(market).width.tolist()

    for regime in regimes:
        try:
            report = compute_stability_indices(market, regime, opts)
            if not report.is_optimal:
                # a time-limited average is only a lower bound
                outcome.failures[regime.name] = f"{report.status.value}: {report.detail}"
                continue
            outcome.averages[regime.name] = report.average
            if with_bounds:
                bounds = bound_sharing_rule(market, regime, opts, index_report=report)
                outcome.widths[regime.name] = bounds.width.tolist()
        except (MarketError, RuntimeError) as e:
            outcome.failures[regime.name] = str(e)
    for name, reason in outcome.failures.items():
        logger.warning(f"Draw {draw} ({config.kind.value}, alpha={config.alpha}): {name} failed: {reason}")
    return outcome


def _run_task(task: Tuple[ScenarioConfig, int, Sequence[Regime], Optional[ProgramOptions], bool]) -> DrawOutcome:
    return run_draw(*task)


@dataclass
class ExperimentReport:
    """
    Statistics per (scenario, alpha, regime).

    indices holds mean/min/median/max of per-draw average stability
    indices; widths pools bound widths over every couple of every draw
    and carries a naive row.
    """
    indices: pd.DataFrame
    widths: pd.DataFrame
    metadata: Dict[str, Any]

    def to_tables(self) -> Dict[str, pd.DataFrame]:
        """Panels by scenario, rows by regime and statistic, columns by alpha"""
        tables = {}
        for name, frame in (("indices", self.indices), ("widths", self.widths)):
            if frame.empty:
                tables[name] = pd.DataFrame()
                continue
            long = frame.melt(id_vars=["scenario", "alpha", "regime"], value_vars=STATISTICS, var_name="statistic")
            tables[name] = long.pivot_table(
                index=["scenario", "regime", "statistic"], columns="alpha", values="value", dropna=False)
        return tables

    def to_dict(self) -> Dict[str, Any]:
        def records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
            out = []
            for row in frame.to_dict(orient="records"):
                out.append({k: (None if isinstance(v, float) and np.isnan(v) else v) for k, v in row.items()})
            return out

        return {"metadata": self.metadata, "indices": records(self.indices), "widths": records(self.widths)}

    def to_json(self, path: Optional[str] = None) -> str:
        """Full-precision JSON with sorted keys"""
        text = json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_json_default)
        if path is not None:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text

    def to_csv(self, directory: str) -> List[Path]:
        """Write indices.csv and widths.csv (six significant digits)"""
        out_dir = Path(directory)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, frame in (("indices", self.indices), ("widths", self.widths)):
            path = out_dir / f"{name}.csv"
            frame.to_csv(path, index=False, float_format="%.6g")
            paths.append(path)
        return paths


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    raise TypeError(f"Cannot serialise {type(value).__name__}")


def _cell(config: ScenarioConfig, regime: str, values: List[float], failures: int) -> Dict[str, Any]:
    stats = width_statistics(regime, values)
    return {
        "scenario": config.kind.value,
        "alpha": config.alpha,
        "regime": regime,
        **{name: stats[name] for name in STATISTICS},
        "count": stats["couples"],
        "failures": failures,
    }


def run_experiment(
    configs: Sequence[ScenarioConfig],
    regimes: Sequence[Regime],
    opts: Optional[ProgramOptions] = None,
    workers: Optional[int] = None,
    with_bounds: bool = True,
) -> ExperimentReport:
    """
    Sweep scenario cells and aggregate indices and bound widths.

    Args:
        configs: Scenario cells (kind, alpha, draws, seed, generator)
        regimes: Regimes evaluated on every draw
        opts: Build and solver options
        workers: Process count for parallel draws (None runs inline)
        with_bounds: Also compute sharing-rule bounds

    Returns:
        ExperimentReport; deterministic for fixed seeds
    """
    index_rows: List[Dict[str, Any]] = []
    width_rows: List[Dict[str, Any]] = []
    for config in configs:
        tasks = [(config, draw, list(regimes), opts, with_bounds) for draw in range(config.draws)]
        logger.info(f"Running {config.kind.value} alpha={config.alpha}: {config.draws} draws of "
                    f"{config.couples_per_draw} couples")
        if workers and workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                outcomes = list(executor.map(_run_task, tasks))
        else:
            outcomes = [_run_task(task) for task in tasks]

        for regime in regimes:
            name = regime.name
            averages = [o.averages[name] for o in outcomes if name in o.averages]
            failures = sum(1 for o in outcomes if name in o.failures)
            index_rows.append(_cell(config, name, averages, failures))
        if with_bounds:
            for name in ["naive"] + [r.name for r in regimes]:
                widths = [w for o in outcomes for w in o.widths.get(name, [])]
                failures = sum(1 for o in outcomes if name in o.failures)
                width_rows.append(_cell(config, name, widths, failures))

    metadata = {
        "seeds": sorted({c.seed for c in configs}),
        "draws": sorted({c.draws for c in configs}),
        "couples_per_draw": sorted({c.couples_per_draw for c in configs}),
        "regimes": [r.name for r in regimes],
    }
    return ExperimentReport(
        pd.DataFrame(index_rows, columns=CELL_COLUMNS),
        pd.DataFrame(width_rows, columns=CELL_COLUMNS),
        metadata,
    )
