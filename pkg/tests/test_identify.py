"""Tests for sharing-rule bounds"""

import unittest

import numpy as np

from tests.fixtures import SWAP_CROSS, flat_price_market, two_couple_market
from src.identify.bounds import PinningMode, bound_sharing_rule, naive_bounds
from src.identify.report import REPORT_COLUMNS, identification_report, width_statistics
from src.rationalize.regimes import Regime

BOUND_MARKETS = 50
BOUND_COUPLES = 10


class NaiveBoundsTests(unittest.TestCase):
    """Bounds from assignable data alone"""

    def test_assignable_bounds(self):
        """lower = p·assignable_w, upper = total - p·assignable_m"""
        bounds = naive_bounds(two_couple_market(assignable=True))
        np.testing.assert_allclose(bounds.lower, [0.5, 1.0])
        np.testing.assert_allclose(bounds.upper, [3.0, 2.5])
        np.testing.assert_allclose(bounds.width, [0.625, 0.375])
        np.testing.assert_allclose(bounds.husband_lower, [1.0, 1.5])

    def test_no_assignable_data(self):
        """Without assignable data anything goes"""
        bounds = naive_bounds(two_couple_market())
        np.testing.assert_allclose(bounds.lower, [0.0, 0.0])
        np.testing.assert_allclose(bounds.width, [1.0, 1.0])

    def test_frame(self):
        """One row per couple"""
        frame = naive_bounds(two_couple_market()).to_frame()
        self.assertEqual(list(frame["couple"]), [0, 1])
        self.assertTrue((frame["bounds"] == "naive").all())


class RegimeBoundsTests(unittest.TestCase):
    """Bounds under the regime programs"""

    @classmethod
    def setUpClass(cls):
        cls.swap = two_couple_market(SWAP_CROSS)

    def test_unilateral_swap_bounds(self):
        """The optimal indices force q_m1 = q_m0 + 1 with q_m0 in [2, 3]"""
        bounds = bound_sharing_rule(self.swap, Regime.unilateral())
        np.testing.assert_allclose(bounds.lower, [1.0, 0.0], atol=1e-4)
        np.testing.assert_allclose(bounds.upper, [2.0, 1.0], atol=1e-4)

    def test_transfers_swap_bounds_are_naive(self):
        """Transfers absorb every share on a committed cycle"""
        bounds = bound_sharing_rule(self.swap, Regime.transfers())
        np.testing.assert_allclose(bounds.lower, [0.0, 0.0], atol=1e-6)
        np.testing.assert_allclose(bounds.upper, [4.0, 4.0], atol=1e-6)

    def test_flat_prices_transfers_match_naive(self):
        """Flat prices, additive incomes, all committed: no information beyond assignable data"""
        market = flat_price_market(3, np.random.default_rng(21))
        bounds = bound_sharing_rule(market, Regime.transfers())
        naive = naive_bounds(market)
        np.testing.assert_allclose(bounds.lower, naive.lower, atol=1e-6)
        np.testing.assert_allclose(bounds.upper, naive.upper, atol=1e-6)

    def test_bounds_inside_naive(self):
        """Every regime narrows the naive interval"""
        market = flat_price_market(3, np.random.default_rng(4), committed=(True, False, False))
        naive = naive_bounds(market)
        for regime in (Regime.unilateral(), Regime.transfers(), Regime.no_transfers()):
            bounds = bound_sharing_rule(market, regime)
            self.assertTrue(np.all(bounds.lower >= naive.lower - 1e-6), regime.name)
            self.assertTrue(np.all(bounds.upper <= naive.upper + 1e-6), regime.name)
            self.assertTrue(np.all(bounds.lower <= bounds.upper), regime.name)

    def test_per_option_pinning_is_tighter(self):
        """Pinning each index is at least as informative as pinning their sum"""
        aggregate = bound_sharing_rule(self.swap, Regime.unilateral(), pinning=PinningMode.AGGREGATE)
        per_option = bound_sharing_rule(self.swap, Regime.unilateral(), pinning=PinningMode.PER_OPTION)
        self.assertTrue(np.all(per_option.lower >= aggregate.lower - 1e-6))
        self.assertTrue(np.all(per_option.upper <= aggregate.upper + 1e-6))


class NaiveEquivalenceTests(unittest.TestCase):
    """Transfers bounds on flat-price markets carry no information beyond assignable data"""

    def test_all_committed_match_naive(self):
        """Every couple's transfers bounds equal its naive bounds"""
        for seed in range(BOUND_MARKETS):
            market = flat_price_market(BOUND_COUPLES, np.random.default_rng(2000 + seed))
            bounds = bound_sharing_rule(market, Regime.transfers())
            naive = naive_bounds(market)
            np.testing.assert_allclose(bounds.lower, naive.lower, atol=1e-6, err_msg=f"market {seed}")
            np.testing.assert_allclose(bounds.upper, naive.upper, atol=1e-6, err_msg=f"market {seed}")

    def test_mixed_committed_match_on_committed(self):
        """With mixed committed sets the committed couples keep their naive bounds"""
        rng = np.random.default_rng(77)
        for seed in range(BOUND_MARKETS):
            flags = rng.random(BOUND_COUPLES) < 0.5
            market = flat_price_market(BOUND_COUPLES, np.random.default_rng(3000 + seed), committed=flags.tolist())
            bounds = bound_sharing_rule(market, Regime.transfers())
            naive = naive_bounds(market)
            np.testing.assert_allclose(bounds.lower[flags], naive.lower[flags], atol=1e-6, err_msg=f"market {seed}")
            np.testing.assert_allclose(bounds.upper[flags], naive.upper[flags], atol=1e-6, err_msg=f"market {seed}")
            self.assertTrue(np.all(bounds.lower >= naive.lower - 1e-6), f"market {seed}")
            self.assertTrue(np.all(bounds.upper <= naive.upper + 1e-6), f"market {seed}")


class ReportTests(unittest.TestCase):
    """Pooled width statistics"""

    def test_width_statistics_skip_nan(self):
        """Unsettled bounds are left out"""
        stats = width_statistics("x", np.array([0.2, np.nan, 0.4]))
        self.assertAlmostEqual(stats["mean"], 0.3)
        self.assertEqual(stats["couples"], 2)
        empty = width_statistics("x", np.array([np.nan]))
        self.assertTrue(np.isnan(empty["mean"]))
        self.assertEqual(empty["couples"], 0)

    def test_report_rows(self):
        """Naive row first, then one row per regime, pooled over markets"""
        markets = [two_couple_market(SWAP_CROSS), flat_price_market(3, np.random.default_rng(2))]
        frame = identification_report(markets, [Regime.unilateral(), Regime.transfers()])
        self.assertEqual(list(frame.columns), REPORT_COLUMNS)
        self.assertEqual(list(frame["bounds"]), ["naive", "unilateral", "transfers"])
        self.assertEqual(frame.loc[0, "couples"], 5)

    def test_empty_report(self):
        """No markets, no rows"""
        self.assertTrue(identification_report([], [Regime.transfers()]).empty)


if __name__ == '__main__':
    unittest.main()
