"""Perturbations of counterfactual prices and incomes"""

from enum import Enum
from typing import Dict

import numpy as np
from pydantic import BaseModel, Field

from src.core.market import Market, PairKey, potential_pairs
from src.simulate.generator import GeneratorParams
from src.utils.errors import PriceNonPositive

MAX_REDRAWS = 100


class ScenarioKind(Enum):
    """What the perturbation touches"""
    PRICES = "prices"
    INCOME = "income"
    BOTH = "both"


class ScenarioConfig(BaseModel):
    """One cell of the experiment grid"""
    kind: ScenarioKind = ScenarioKind.PRICES
    alpha: float = Field(default=0.0, ge=0, le=1, description="Perturbation strength")
    draws: int = Field(default=100, ge=1)
    couples_per_draw: int = Field(default=30, ge=1)
    seed: int = Field(default=42, ge=0)
    generator: GeneratorParams = Field(default_factory=GeneratorParams)

    def generator_params(self) -> GeneratorParams:
        return self.generator.model_copy(update={"n_couples": self.couples_per_draw})


def _factors(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    """Draw 1 + alpha*u with u ~ U[-1, 1], redrawing non-positive values"""
    out = 1.0 + alpha * rng.uniform(-1.0, 1.0, size=size)
    for _ in range(MAX_REDRAWS):
        bad = out <= 0
        if not bad.any():
            return out
        out[bad] = 1.0 + alpha * rng.uniform(-1.0, 1.0, size=int(bad.sum()))
    raise PriceNonPositive(f"Could not draw a positive perturbation factor with alpha={alpha}")


def apply_scenario(market: Market, config: ScenarioConfig, rng: np.random.Generator) -> Market:
    """
    Perturb every outside option's prices and/or income.

    Observed couples keep their baseline prices and incomes; alpha = 0
    returns the market unchanged.

    Args:
        market: Baseline market
        config: Scenario kind and strength
        rng: Perturbation stream

    Returns:
        Perturbed market
    """
    if config.alpha == 0:
        return market
    touch_prices = config.kind in (ScenarioKind.PRICES, ScenarioKind.BOTH)
    touch_income = config.kind in (ScenarioKind.INCOME, ScenarioKind.BOTH)

    p: Dict[PairKey, np.ndarray] = dict(market.p)
    P: Dict[PairKey, np.ndarray] = dict(market.P)
    y: Dict[PairKey, float] = dict(market.y)
    for pair in potential_pairs(market):
        if touch_prices:
            p[pair] = market.p[pair] * _factors(rng, config.alpha, market.n_private)
            P[pair] = market.P[pair] * _factors(rng, config.alpha, market.n_public)
        if touch_income:
            y[pair] = market.y[pair] * float(_factors(rng, config.alpha, 1)[0])
    return market.with_prices_and_incomes(p, P, y)
