"""Tests for the synthetic market generator and perturbation experiments"""

import json
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import numpy as np

from tests import fixtures  # noqa: F401  (quiet logging)
from src.core.market import potential_pairs
from src.core.validation import validate_market
from src.lpcore.program import SolverStatus
from src.rationalize.indices import IndexReport
from src.rationalize.regimes import Regime
from src.simulate.experiment import (
    CELL_COLUMNS,
    baseline_rng,
    perturbation_rng,
    run_draw,
    run_experiment,
)
from src.simulate.generator import GeneratorParams, generate_market
from src.simulate.scenarios import ScenarioConfig, ScenarioKind, _factors, apply_scenario

MUTUAL_CONSENT = [Regime.transfers(), Regime.no_transfers()]


class GeneratorTests(unittest.TestCase):
    """Synthetic markets"""

    @classmethod
    def setUpClass(cls):
        cls.params = GeneratorParams(n_couples=6, committed_share=0.5)
        cls.market = generate_market(cls.params, baseline_rng(42, 0))

    def test_budget_identity(self):
        """Every couple exhausts its full income"""
        self.assertEqual(validate_market(self.market), [])

    def test_layout(self):
        """Three private goods, one public good, leisure fully assignable"""
        self.assertEqual((self.market.n_private, self.market.n_public), (3, 1))
        np.testing.assert_allclose(self.market.assignable_m[:, 0], self.market.q_obs[:, 0])
        np.testing.assert_allclose(self.market.assignable_w[:, 1], self.market.q_obs[:, 1])
        self.assertTrue(np.all(self.market.assignable_m + self.market.assignable_w <= self.market.q_obs + 1e-12))

    def test_committed_share(self):
        """Half of six couples are committed"""
        self.assertEqual(sum(self.market.committed.flags), 3)

    def test_deterministic(self):
        """Same seed and draw, same market"""
        self.assertEqual(generate_market(self.params, baseline_rng(42, 0)), self.market)
        self.assertNotEqual(generate_market(self.params, baseline_rng(42, 1)), self.market)

    def test_leisure_priced_at_wage(self):
        """Cross pairs pay each spouse's own wage for their leisure"""
        own_m = self.market.p[(0, 0)][0]
        own_w = self.market.p[(1, 1)][1]
        np.testing.assert_allclose(self.market.p[(0, 1)][:2], [own_m, own_w])
        self.assertAlmostEqual(self.market.y[(0, 1)], own_m + own_w)

    def test_invalid_ranges(self):
        """Inverted ranges are rejected"""
        with self.assertRaises(ValueError):
            GeneratorParams(wage_low=30.0, wage_high=10.0)
        with self.assertRaises(ValueError):
            GeneratorParams(hours_low=0.6, hours_high=0.4)


class ScenarioTests(unittest.TestCase):
    """Price and income perturbations"""

    @classmethod
    def setUpClass(cls):
        cls.market = generate_market(GeneratorParams(n_couples=4), baseline_rng(1, 0))

    def _perturb(self, kind: ScenarioKind, alpha: float):
        config = ScenarioConfig(kind=kind, alpha=alpha)
        return apply_scenario(self.market, config, perturbation_rng(1, 0, kind, alpha))

    def test_zero_alpha_is_identity(self):
        """alpha = 0 changes nothing for any kind"""
        for kind in ScenarioKind:
            self.assertIs(self._perturb(kind, 0.0), self.market)

    def test_price_range(self):
        """alpha = 0.25 keeps every price within 25% of its baseline"""
        perturbed = self._perturb(ScenarioKind.PRICES, 0.25)
        for pair in potential_pairs(self.market):
            ratio = perturbed.p[pair] / self.market.p[pair]
            self.assertTrue(np.all((ratio >= 0.75) & (ratio <= 1.25)), pair)
            public = perturbed.P[pair] / self.market.P[pair]
            self.assertTrue(np.all((public >= 0.75) & (public <= 1.25)), pair)
        self.assertEqual(perturbed.y, self.market.y)
        self.assertEqual(validate_market(perturbed), [])

    def test_observed_couples_untouched(self):
        """Own prices and incomes keep the budget identity"""
        perturbed = self._perturb(ScenarioKind.BOTH, 0.25)
        for couple in range(self.market.n_couples):
            key = self.market.observed_key(couple)
            np.testing.assert_array_equal(perturbed.p[key], self.market.p[key])
            self.assertEqual(perturbed.y[key], self.market.y[key])

    def test_income_only(self):
        """The income scenario leaves prices alone"""
        perturbed = self._perturb(ScenarioKind.INCOME, 0.2)
        for pair in potential_pairs(self.market):
            np.testing.assert_array_equal(perturbed.p[pair], self.market.p[pair])
            self.assertTrue(0.8 <= perturbed.y[pair] / self.market.y[pair] <= 1.2)

    def test_factors_positive(self):
        """Full-strength factors stay positive"""
        factors = _factors(np.random.default_rng(0), 1.0, 10_000)
        self.assertTrue(np.all(factors > 0))
        self.assertTrue(np.all(factors <= 2.0))

    def test_perturbation_streams_differ(self):
        """Each kind and alpha gets its own stream"""
        a = perturbation_rng(1, 0, ScenarioKind.PRICES, 0.1).uniform()
        b = perturbation_rng(1, 0, ScenarioKind.INCOME, 0.1).uniform()
        c = perturbation_rng(1, 0, ScenarioKind.PRICES, 0.1).uniform()
        self.assertNotEqual(a, b)
        self.assertEqual(a, c)


class ExperimentTests(unittest.TestCase):
    """Experiment sweeps and reports"""

    def _config(self, kind=ScenarioKind.BOTH, alpha=0.0, draws=2, couples=4):
        return ScenarioConfig(kind=kind, alpha=alpha, draws=draws, couples_per_draw=couples, seed=3)

    def test_zero_alpha_mutual_consent_scores_one(self):
        """Unperturbed committed markets are stable under mutual consent"""
        report = run_experiment([self._config()], MUTUAL_CONSENT)
        for stat in ("mean", "min", "median", "max"):
            np.testing.assert_allclose(report.indices[stat].to_numpy(dtype=float), 1.0, atol=1e-6)
        self.assertTrue((report.indices["failures"] == 0).all())

    def test_zero_alpha_transfers_widths_are_naive(self):
        """Without price variation, transfers learn nothing beyond assignable data"""
        report = run_experiment([self._config()], [Regime.transfers()])
        widths = report.widths.set_index("regime")
        for stat in ("mean", "min", "median", "max"):
            self.assertAlmostEqual(widths.loc["transfers", stat], widths.loc["naive", stat], places=6)

    def test_price_variation_narrows_transfers_bounds(self):
        """Private price variation gives transfers identifying power"""
        report = run_experiment([self._config(ScenarioKind.PRICES, 0.05, draws=3, couples=5)], [Regime.transfers()])
        widths = report.widths.set_index("regime")
        self.assertLess(widths.loc["transfers", "mean"], widths.loc["naive", "mean"])

    def test_deterministic_report(self):
        """Fixed seeds reproduce the report exactly"""
        configs = [self._config(alpha=0.1, couples=3)]
        first = run_experiment(configs, [Regime.unilateral()], with_bounds=False).to_json()
        second = run_experiment(configs, [Regime.unilateral()], with_bounds=False).to_json()
        self.assertEqual(first, second)

    def test_single_draw_statistics(self):
        """With one draw, every statistic is that draw's value"""
        report = run_experiment([self._config(alpha=0.2, draws=1, couples=3)], [Regime.transfers()],
                                with_bounds=False)
        row = report.indices.iloc[0]
        self.assertEqual(list(report.indices.columns), CELL_COLUMNS)
        self.assertEqual(row["mean"], row["min"])
        self.assertEqual(row["median"], row["max"])
        self.assertEqual(row["count"], 1)
        self.assertTrue(report.widths.empty)

    def test_regime_failure_is_recorded(self):
        """A failing regime is counted and the others go on"""
        with mock.patch("src.simulate.experiment.compute_stability_indices", side_effect=RuntimeError("boom")):
            outcome = run_draw(self._config(couples=3), 0, [Regime.transfers()], with_bounds=False)
            report = run_experiment([self._config(couples=3)], [Regime.transfers()], with_bounds=False)
        self.assertIn("transfers", outcome.failures)
        self.assertEqual(report.indices.loc[0, "failures"], 2)
        self.assertIsNone(report.to_dict()["indices"][0]["mean"])

    def test_time_limited_indices_are_a_failure(self):
        """Lower-bound indices from a stopped solve do not enter the averages"""
        regime = Regime.transfers()
        stopped = IndexReport(regime, SolverStatus.TIME_LIMIT, {(0, 1): 0.5}, detail="time limit reached")
        with mock.patch("src.simulate.experiment.compute_stability_indices", return_value=stopped):
            outcome = run_draw(self._config(couples=3), 0, [regime], with_bounds=False)
        self.assertNotIn("transfers", outcome.averages)
        self.assertIn("time_limit", outcome.failures["transfers"])

    def test_tables_and_files(self):
        """Pivoted tables by alpha, JSON and CSV output"""
        configs = [self._config(ScenarioKind.PRICES, alpha, draws=1, couples=3) for alpha in (0.0, 0.1)]
        report = run_experiment(configs, [Regime.transfers()])
        tables = report.to_tables()
        self.assertEqual(list(tables["indices"].columns), [0.0, 0.1])
        self.assertIn(("prices", "naive", "mean"), tables["widths"].index)

        with tempfile.TemporaryDirectory() as tmp:
            paths = report.to_csv(tmp)
            self.assertEqual([p.name for p in paths], ["indices.csv", "widths.csv"])
            report.to_json(str(Path(tmp) / "report.json"))
            payload = json.loads((Path(tmp) / "report.json").read_text())
        self.assertEqual(payload["metadata"]["seeds"], [3])
        self.assertEqual(payload["metadata"]["regimes"], ["transfers"])
        self.assertEqual(len(payload["indices"]), 2)


if __name__ == '__main__':
    unittest.main()
