"""Regime programs, verdicts and stability indices"""

from .builder import BuiltProgram, ProgramBuilder, ProgramOptions, build_program
from .indices import (
    IndexReport,
    RationalizationResult,
    check_rationalizable,
    compute_stability_indices,
    transfer_certificate,
)
from .regimes import Regime, RegimeKind

__all__ = [
    'BuiltProgram',
    'IndexReport',
    'ProgramBuilder',
    'ProgramOptions',
    'RationalizationResult',
    'Regime',
    'RegimeKind',
    'build_program',
    'check_rationalizable',
    'compute_stability_indices',
    'transfer_certificate',
]
