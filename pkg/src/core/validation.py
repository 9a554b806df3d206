"""Market invariant checks"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.core.market import Market, PairKey, format_pair
from src.utils.errors import InvalidMarket

BUDGET_RTOL = 1e-6


@dataclass(frozen=True)
class Violation:
    """A broken market invariant"""
    code: str
    message: str
    pair: Optional[PairKey] = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _all_pair_keys(market: Market) -> List[PairKey]:
    keys: List[PairKey] = [
        (m, w) for m in range(market.matching.n_men) for w in range(market.matching.n_women)
    ]
    keys += [(m, None) for m in range(market.matching.n_men)]
    keys += [(None, w) for w in range(market.matching.n_women)]
    return keys


def _check_matching(market: Market) -> List[Violation]:
    violations = []
    matching = market.matching
    if matching.n_men != matching.n_women:
        violations.append(Violation(
            "UnequalSides", f"{matching.n_men} men but {matching.n_women} women"))

    for m, w in enumerate(matching.man_to_woman):
        if w is None:
            violations.append(Violation("UnmatchedAgent", f"man {m} is single in the observed matching"))
            continue
        if not 0 <= w < matching.n_women:
            violations.append(Violation("IndexOutOfRange", f"man {m} maps to unknown woman {w}"))
        elif matching.woman_to_man[w] != m:
            violations.append(Violation(
                "MatchingInconsistent",
                f"man {m} maps to woman {w} but woman {w} maps to {matching.woman_to_man[w]}",
                (m, w)))
    for w, m in enumerate(matching.woman_to_man):
        if m is None:
            violations.append(Violation("UnmatchedAgent", f"woman {w} is single in the observed matching"))
        elif not 0 <= m < matching.n_men:
            violations.append(Violation("IndexOutOfRange", f"woman {w} maps to unknown man {m}"))
        elif matching.man_to_woman[m] != w:
            violations.append(Violation(
                "MatchingInconsistent",
                f"woman {w} maps to man {m} but man {m} maps to {matching.man_to_woman[m]}",
                (m, w)))

    if len(market.committed) != matching.n_men:
        violations.append(Violation(
            "CommittedFlagCount", f"{len(market.committed)} committed flags for {matching.n_men} couples"))
    return violations


def _check_quantities(market: Market) -> List[Violation]:
    violations = []
    k = market.n_couples
    expected = {
        "q_obs": (market.q_obs, (k, market.n_private)),
        "Q_obs": (market.Q_obs, (k, market.n_public)),
    }
    if market.assignable_m is not None:
        expected["assignable_m"] = (market.assignable_m, (k, market.n_private))
    if market.assignable_w is not None:
        expected["assignable_w"] = (market.assignable_w, (k, market.n_private))

    shapes_ok = True
    for name, (array, shape) in expected.items():
        if array.shape != shape:
            shapes_ok = False
            violations.append(Violation("DimensionMismatch", f"{name} has shape {array.shape}, expected {shape}"))
        elif np.any(array < 0) or not np.all(np.isfinite(array)):
            violations.append(Violation("NegativeQuantity", f"{name} has negative or non-finite entries"))

    if (market.assignable_m is None) != (market.assignable_w is None):
        violations.append(Violation("DimensionMismatch", "assignable data given for one spouse only"))
    elif shapes_ok and market.has_assignable:
        excess = market.assignable_m + market.assignable_w - market.q_obs
        for couple in np.flatnonzero(np.any(excess > 1e-12, axis=1)):
            violations.append(Violation(
                "AssignableExceedsTotal", f"couple {couple}: assignable shares exceed the observed bundle"))
    return violations


def _check_maps(market: Market) -> List[Violation]:
    violations = []
    for key in _all_pair_keys(market):
        label = format_pair(key)
        if key not in market.p or key not in market.P:
            violations.append(Violation("MissingPrice", f"no prices for {label}", key))
        else:
            p, P = market.p[key], market.P[key]
            if p.shape != (market.n_private,) or P.shape != (market.n_public,):
                violations.append(Violation(
                    "DimensionMismatch", f"prices for {label} have lengths {p.shape}/{P.shape}", key))
            elif np.any(p <= 0) or np.any(P <= 0) or not (np.all(np.isfinite(p)) and np.all(np.isfinite(P))):
                violations.append(Violation("NonPositivePrice", f"non-positive price for {label}", key))
        if key not in market.y:
            violations.append(Violation("MissingIncome", f"no income for {label}", key))
        elif not market.y[key] > 0 or not np.isfinite(market.y[key]):
            violations.append(Violation("NonPositiveIncome", f"non-positive income for {label}", key))
    return violations


def _check_budgets(market: Market) -> List[Violation]:
    violations = []
    for m, w in market.couples():
        key = (m, w)
        if key not in market.p or key not in market.P or key not in market.y:
            continue
        spent = float(market.p[key] @ market.q_obs[m] + market.P[key] @ market.Q_obs[m])
        income = market.y[key]
        if abs(spent - income) > BUDGET_RTOL * max(1.0, abs(income)):
            violations.append(Violation(
                "BudgetIdentity",
                f"couple {format_pair(key)} spends {spent:.6g} out of income {income:.6g}",
                key))
    return violations


def validate_market(market: Market) -> List[Violation]:
    """
    Check every market invariant.

    Args:
        market: Market to check

    Returns:
        List of violations; empty means the market is valid
    """
    violations = _check_matching(market)
    if violations:
        # Index-based checks below assume a usable matching
        return violations
    violations += _check_quantities(market)
    violations += _check_maps(market)
    if not violations:
        violations += _check_budgets(market)
    return violations


def ensure_valid(market: Market) -> Market:
    """Raise InvalidMarket unless the market passes validation"""
    violations = validate_market(market)
    if violations:
        raise InvalidMarket(violations)
    return market
