"""Partial identification of the sharing rule"""

from .bounds import PinningMode, SharingBounds, bound_sharing_rule, naive_bounds
from .report import identification_report, width_statistics

__all__ = [
    'PinningMode',
    'SharingBounds',
    'bound_sharing_rule',
    'identification_report',
    'naive_bounds',
    'width_statistics',
]
