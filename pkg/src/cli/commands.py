"""Subcommand handlers; each returns the process exit code"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from src.cli.market_file import dump_market, load_market
from src.core.market import Market, format_pair
from src.identify.bounds import PinningMode, bound_sharing_rule, naive_bounds
from src.lpcore.program import SolveOptions
from src.rationalize.builder import ProgramOptions
from src.rationalize.indices import check_rationalizable, compute_stability_indices
from src.rationalize.regimes import Regime
from src.simulate.experiment import baseline_rng, run_experiment
from src.simulate.generator import GeneratorParams, generate_market
from src.simulate.scenarios import ScenarioConfig, ScenarioKind
from src.utils.config import Config
from src.utils.errors import MarketError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_NOT_RATIONALIZABLE = 1
EXIT_USAGE = 2


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _program_options(args: argparse.Namespace, config: Config) -> ProgramOptions:
    """Config files first, then command-line overrides"""
    solver = dict(config.get_solver_config())
    if getattr(args, "time_limit", None) is not None:
        solver["time_limit"] = args.time_limit
    settings = dict(config.get_rationalize_config())
    if getattr(args, "max_path_len", None) is not None:
        settings["max_path_len"] = None if args.max_path_len == 0 else args.max_path_len
    if getattr(args, "eps", None) is not None:
        settings["eps"] = args.eps
    return ProgramOptions(**settings, solver=SolveOptions(**solver))


def _emit_frame(frame: pd.DataFrame, args: argparse.Namespace, extra: Optional[Dict[str, Any]] = None) -> None:
    """Print a table as CSV (six significant digits) or as full-precision JSON"""
    if getattr(args, "json", False):
        records = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
        payload = {"rows": records, **(extra or {})}
        text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, default=float)
    else:
        text = frame.to_csv(index=False, float_format="%.6g")
        if extra:
            text += "".join(f"# {key}: {value}\n" for key, value in extra.items())
    if getattr(args, "out", None):
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        print(text.rstrip("\n"))


def _load(args: argparse.Namespace) -> Market:
    return load_market(args.path)


def _regimes(text: str) -> List[Regime]:
    return [Regime.parse(part) for part in text.split(",") if part.strip()]


def cmd_check(args: argparse.Namespace) -> int:
    """Verdict for one regime: 0 rationalizable, 1 not, 2 error or undecided"""
    try:
        config = Config(args.config_dir)
        market = _load(args)
        regime = Regime.parse(args.regime)
        result = check_rationalizable(market, regime, _program_options(args, config))
    except (MarketError, ValueError) as e:
        return _fail(str(e))

    counterexample = result.counterexample
    if args.json:
        payload = {
            "regime": regime.name,
            "verdict": result.verdict,
            "status": result.status.value,
            "detail": result.detail,
            "counterexample": None if counterexample is None else {
                "kind": "single" if counterexample.is_single_option else
                        ("cycle" if counterexample.is_cycle else "path"),
                "edges": [format_pair(e) for e in counterexample.edges],
                "description": counterexample.describe(),
            },
        }
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    elif result.verdict is None:
        print(f"{regime.name}: undecided ({result.status.value}: {result.detail})")
    elif result.verdict:
        print(f"{regime.name}: rationalizable")
        if result.detail:
            print(f"  {result.detail}")
    else:
        print(f"{regime.name}: not rationalizable")
        if counterexample is not None:
            print(f"  blocking {counterexample.describe()}")
            print("  edges: " + " ".join(format_pair(e) for e in counterexample.edges))
        if result.detail:
            print(f"  {result.detail}")

    if result.verdict is None:
        return EXIT_USAGE
    return EXIT_OK if result.verdict else EXIT_NOT_RATIONALIZABLE


def cmd_index(args: argparse.Namespace) -> int:
    """Per-option stability indices and their average"""
    try:
        config = Config(args.config_dir)
        market = _load(args)
        regime = Regime.parse(args.regime)
        report = compute_stability_indices(market, regime, _program_options(args, config))
    except (MarketError, ValueError, RuntimeError) as e:
        return _fail(str(e))
    if not report.s:
        return _fail(f"index program ended with {report.status.value}: {report.detail}")
    if report.detail:
        logger.warning(report.detail)
    extra = {"regime": regime.name, "average": report.average, "status": report.status.value}
    _emit_frame(report.to_frame(), args, extra)
    return EXIT_OK


def cmd_identify(args: argparse.Namespace) -> int:
    """Sharing-rule bounds per couple, naive bounds included"""
    try:
        config = Config(args.config_dir)
        market = _load(args)
        regimes = _regimes(args.regime)
        pinning = PinningMode(args.pinning)
        opts = _program_options(args, config)
        frames = [naive_bounds(market).to_frame()]
        frames += [bound_sharing_rule(market, regime, opts, pinning).to_frame() for regime in regimes]
    except (MarketError, ValueError, RuntimeError) as e:
        return _fail(str(e))
    _emit_frame(pd.concat(frames, ignore_index=True), args, {"pinning": pinning.value})
    return EXIT_OK


def _parse_floats(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run the perturbation sweep and write report.json, indices.csv, widths.csv"""
    try:
        config = Config(args.config_dir)
        experiment = config.get_experiment_config()
        draws = args.draws if args.draws is not None else experiment.get("draws", 100)
        if draws < 1:
            return _fail("--draws must be at least 1")
        couples = args.couples if args.couples is not None else experiment.get("couples_per_draw", 30)
        seed = args.seed if args.seed is not None else experiment.get("seed", 42)
        alphas = _parse_floats(args.alpha_grid) if args.alpha_grid else experiment.get(
            "alpha_grid", [0.0, 0.05, 0.10, 0.15, 0.20, 0.25])
        scenarios = args.scenario.split(",") if args.scenario else experiment.get(
            "scenarios", [kind.value for kind in ScenarioKind])
        regimes = _regimes(args.regimes) if args.regimes else [
            Regime.parse(name) for name in experiment.get("regimes", ["unilateral", "transfers", "no-transfers"])]
        generator = GeneratorParams(**config.get_generator_config())
        configs = [
            ScenarioConfig(kind=ScenarioKind(kind.strip()), alpha=alpha, draws=draws,
                           couples_per_draw=couples, seed=seed, generator=generator)
            for kind in scenarios for alpha in alphas
        ]
        opts = _program_options(args, config)
    except (MarketError, ValueError) as e:
        return _fail(str(e))

    report = run_experiment(configs, regimes, opts, workers=args.workers, with_bounds=not args.no_bounds)
    out_dir = Path(args.out)
    report.to_json(str(out_dir / "report.json"))
    report.to_csv(str(out_dir))
    for name, table in report.to_tables().items():
        print(f"== {name} ==")
        print(table.to_string(float_format=lambda v: f"{v:.6g}"))
    logger.info(f"Report written to {out_dir}")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    """Emit one synthetic market file"""
    try:
        config = Config(args.config_dir)
        settings = dict(config.get_generator_config())
        settings["n_couples"] = args.couples
        if args.committed_share is not None:
            settings["committed_share"] = args.committed_share
        params = GeneratorParams(**settings)
    except ValueError as e:
        return _fail(str(e))
    market = generate_market(params, baseline_rng(args.seed, 0))
    text = dump_market(market, args.out)
    if not args.out:
        print(text)
    return EXIT_OK
