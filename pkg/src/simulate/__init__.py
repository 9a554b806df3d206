"""Synthetic markets and perturbation experiments"""

from .experiment import DrawOutcome, ExperimentReport, run_draw, run_experiment
from .generator import GeneratorParams, generate_market
from .scenarios import ScenarioConfig, ScenarioKind, apply_scenario

__all__ = [
    'DrawOutcome',
    'ExperimentReport',
    'GeneratorParams',
    'ScenarioConfig',
    'ScenarioKind',
    'apply_scenario',
    'generate_market',
    'run_draw',
    'run_experiment',
]
