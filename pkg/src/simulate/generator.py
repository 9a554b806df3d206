"""Synthetic labour-supply marriage markets"""

from typing import Dict

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.core.market import CommittedSet, Market, Matching, PairKey

# goods: [man leisure, woman leisure, Hicksian private]; one Hicksian public good
N_PRIVATE = 3
N_PUBLIC = 1


class GeneratorParams(BaseModel):
    """
    Distributions behind a synthetic market.

    Defaults are placeholders, not calibrated to any survey; time
    endowment is 1 so an individual's full income equals their wage.
    """
    n_couples: int = Field(default=10, ge=1)
    wage_low: float = Field(default=8.0, gt=0, description="Lowest hourly wage")
    wage_high: float = Field(default=25.0, gt=0, description="Highest hourly wage")
    hours_low: float = Field(default=0.2, ge=0, le=1, description="Smallest share of time worked")
    hours_high: float = Field(default=0.5, ge=0, le=1, description="Largest share of time worked")
    assignable_fraction: float = Field(default=0.3, ge=0, le=1,
                                       description="Share of Hicksian spending observed per spouse")
    committed_share: float = Field(default=1.0, ge=0, le=1, description="Share of committed couples")

    @model_validator(mode="after")
    def check_ranges(self) -> "GeneratorParams":
        if self.wage_low > self.wage_high:
            raise ValueError("wage_low must not exceed wage_high")
        if self.hours_low > self.hours_high:
            raise ValueError("hours_low must not exceed hours_high")
        return self


def generate_market(params: GeneratorParams, rng: np.random.Generator) -> Market:
    """
    Draw one market where every observed couple exhausts its full income.

    Leisure is priced at the owner's wage and fully assignable; labour
    income buys Hicksian goods, of which a fraction is assignable and the
    rest is split equally between private and public consumption.

    Args:
        params: Generator distributions
        rng: Random generator (consumed in a fixed order)

    Returns:
        Valid Market on the identity matching
    """
    k = params.n_couples
    wages = rng.uniform(params.wage_low, params.wage_high, size=(k, 2))
    hours = rng.uniform(params.hours_low, params.hours_high, size=(k, 2))
    split = rng.uniform(0.0, 1.0, size=k)
    order = rng.permutation(k)

    leisure = 1.0 - hours
    labour_income = np.sum(wages * hours, axis=1)
    assignable = params.assignable_fraction * labour_income
    rest = labour_income - assignable

    q_obs = np.column_stack([leisure[:, 0], leisure[:, 1], assignable + rest / 2.0])
    Q_obs = (rest / 2.0).reshape(k, N_PUBLIC)
    assignable_m = np.column_stack([leisure[:, 0], np.zeros(k), assignable * split])
    assignable_w = np.column_stack([np.zeros(k), leisure[:, 1], assignable * (1.0 - split)])

    n_committed = int(round(params.committed_share * k))
    flags = np.zeros(k, dtype=bool)
    flags[order[:n_committed]] = True

    matching = Matching.identity(k)
    p: Dict[PairKey, np.ndarray] = {}
    P: Dict[PairKey, np.ndarray] = {}
    y: Dict[PairKey, float] = {}
    keys = [(c, c) for c in range(k)] + [(m, w) for m in range(k) for w in range(k) if m != w]
    keys += [(m, None) for m in range(k)] + [(None, w) for w in range(k)]
    for pair in keys:
        m, w = pair
        wage_m = wages[m, 0] if m is not None else wages[w, 1]
        wage_w = wages[w, 1] if w is not None else wages[m, 0]
        p[pair] = np.array([wage_m, wage_w, 1.0])
        P[pair] = np.ones(N_PUBLIC)
        y[pair] = (wages[m, 0] if m is not None else 0.0) + (wages[w, 1] if w is not None else 0.0)

    return Market(
        n_private=N_PRIVATE,
        n_public=N_PUBLIC,
        matching=matching,
        committed=CommittedSet(tuple(bool(f) for f in flags)),
        q_obs=q_obs,
        Q_obs=Q_obs,
        p=p,
        P=P,
        y=y,
        assignable_m=assignable_m,
        assignable_w=assignable_w,
    )

