"""Hand-built markets shared by the test suites"""

import os
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

os.environ.setdefault("LOG_TO_FILE", "0")
os.environ.setdefault("LOG_LEVEL", "WARNING")

from src.core.market import CommittedSet, Market, Matching, PairKey  # noqa: E402

# Individual incomes of the two-couple markets: (husband, wife) per couple
TWO_COUPLE_INCOMES = ((3.0, 2.0), (4.0, 1.0))

# Cross incomes (y(m0,w1), y(m1,w0))
ADDITIVE_CROSS = (4.0, 6.0)   # y_m + y_w: flat prices rationalize everything
INTERIOR_CROSS = (3.0, 5.0)   # unilateral feasible with room to spare
SWAP_CROSS = (20.0, 6.0)      # (m0,w1) can always afford more


def identity_market(
    q_obs: np.ndarray,
    Q_obs: np.ndarray,
    p: Dict[PairKey, Sequence[float]],
    P: Dict[PairKey, Sequence[float]],
    y: Dict[PairKey, float],
    committed: Sequence[bool],
    assignable: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Market:
    """Market on the identity matching"""
    q_obs = np.asarray(q_obs, dtype=float)
    k = q_obs.shape[0]
    return Market(
        n_private=q_obs.shape[1],
        n_public=np.asarray(Q_obs).shape[1],
        matching=Matching.identity(k),
        committed=CommittedSet(tuple(committed)),
        q_obs=q_obs,
        Q_obs=np.asarray(Q_obs, dtype=float),
        p=p,
        P=P,
        y=y,
        assignable_m=None if assignable is None else assignable[0],
        assignable_w=None if assignable is None else assignable[1],
    )


def all_keys(k: int):
    keys = [(m, w) for m in range(k) for w in range(k)]
    return keys + [(m, None) for m in range(k)] + [(None, w) for w in range(k)]


def two_couple_market(
    cross_incomes: Tuple[float, float] = ADDITIVE_CROSS,
    committed: Tuple[bool, bool] = (True, True),
    assignable: bool = False,
) -> Market:
    """
    Two couples, one private and one public good, all prices 1.

    Each couple buys 4 units of the private good and 1 of the public good
    out of income 5; singles earn their individual incomes.
    """
    (ym0, yw0), (ym1, yw1) = TWO_COUPLE_INCOMES
    y = {(0, 0): ym0 + yw0, (1, 1): ym1 + yw1,
         (0, 1): cross_incomes[0], (1, 0): cross_incomes[1],
         (0, None): ym0, (1, None): ym1, (None, 0): yw0, (None, 1): yw1}
    keys = all_keys(2)
    shares = None
    if assignable:
        shares = (np.array([[1.0], [1.5]]), np.array([[0.5], [1.0]]))
    return identity_market(
        q_obs=[[4.0], [4.0]],
        Q_obs=[[1.0], [1.0]],
        p={key: [1.0] for key in keys},
        P={key: [1.0] for key in keys},
        y=y,
        committed=committed,
        assignable=shares,
    )


def flat_price_market(
    n_couples: int,
    rng: np.random.Generator,
    committed: Optional[Sequence[bool]] = None,
    n_private: int = 2,
    assignable: bool = True,
) -> Market:
    """
    Flat prices and additive counterfactual incomes.

    Each spouse privately spends their own income minus half the public
    spend; assignable data are a fraction of those true shares.
    """
    y_m = rng.uniform(2.0, 6.0, size=n_couples)
    y_w = rng.uniform(2.0, 6.0, size=n_couples)
    public = rng.uniform(0.1, 0.3, size=n_couples) * (y_m + y_w)
    weights = rng.dirichlet(np.ones(n_private), size=n_couples)
    true_m = weights * (y_m - public / 2.0)[:, None]
    true_w = weights * (y_w - public / 2.0)[:, None]
    q_obs = true_m + true_w
    Q_obs = public[:, None]

    asg = None
    if assignable:
        fraction = rng.uniform(0.1, 0.5, size=(n_couples, 1))
        asg = (true_m * fraction, true_w * fraction)

    y: Dict[PairKey, float] = {}
    for m, w in all_keys(n_couples):
        y[(m, w)] = (0.0 if m is None else y_m[m]) + (0.0 if w is None else y_w[w])
    keys = all_keys(n_couples)
    flags = [True] * n_couples if committed is None else list(committed)
    return identity_market(
        q_obs=q_obs,
        Q_obs=Q_obs,
        p={key: np.ones(n_private) for key in keys},
        P={key: [1.0] for key in keys},
        y=y,
        committed=flags,
        assignable=asg,
    )
