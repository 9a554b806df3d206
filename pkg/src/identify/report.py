"""Width statistics across regimes"""

from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.core.market import Market
from src.identify.bounds import PinningMode, bound_sharing_rule, naive_bounds
from src.rationalize.builder import ProgramOptions
from src.rationalize.regimes import Regime

REPORT_COLUMNS = ["bounds", "mean", "min", "median", "max", "couples"]


def width_statistics(label: str, widths: np.ndarray) -> dict:
    """Mean, min, median and max of the finite widths"""
    widths = np.asarray(widths, dtype=float)
    widths = widths[np.isfinite(widths)]
    if widths.size == 0:
        return {"bounds": label, "mean": np.nan, "min": np.nan, "median": np.nan, "max": np.nan, "couples": 0}
    return {
        "bounds": label,
        "mean": float(np.mean(widths)),
        "min": float(np.min(widths)),
        "median": float(np.median(widths)),
        "max": float(np.max(widths)),
        "couples": int(widths.size),
    }


def identification_report(
    markets: Union[Market, Sequence[Market]],
    regimes: Sequence[Regime],
    opts: Optional[ProgramOptions] = None,
    pinning: PinningMode = PinningMode.AGGREGATE,
    include_naive: bool = True,
) -> pd.DataFrame:
    """
    Pool bound widths over every couple of every market.

    Args:
        markets: One market or a list
        regimes: Regimes to bound under
        opts: Build and solver options
        pinning: Index pinning mode
        include_naive: Prepend the naive-bounds row

    Returns:
        DataFrame with one row per bounds type: mean, min, median, max
    """
    if isinstance(markets, Market):
        markets = [markets]
    if not markets:
        return pd.DataFrame(columns=REPORT_COLUMNS)

    rows: List[dict] = []
    if include_naive:
        rows.append(width_statistics("naive", np.concatenate([naive_bounds(m).width for m in markets])))
    for regime in regimes:
        widths = [bound_sharing_rule(m, regime, opts, pinning).width for m in markets]
        rows.append(width_statistics(regime.name, np.concatenate(widths)))
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)
