import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from core.pricing.evaluate import REPORT_COLUMNS, mean_report, pricing_errors, report_frame
from core.pricing.exceptions import InvalidPriceError, ShapeMismatchError, ValidationFailed


class PricingErrorTests(SimpleTestCase):

    def test_identical_series(self):
        report = pricing_errors([120.0, 121.5, 119.0], [120.0, 121.5, 119.0])
        self.assertEqual((report.mre, report.mare, report.rmse, report.n_obs), (0.0, 0.0, 0.0, 3))

    def test_constant_overpricing(self):
        report = pricing_errors([103.0] * 4, [100.0] * 4)
        self.assertAlmostEqual(report.mre, 3.0)
        self.assertAlmostEqual(report.mare, 3.0)
        self.assertAlmostEqual(report.rmse, 3.0)

    def test_errors_that_cancel(self):
        report = pricing_errors([102.0, 98.0], [100.0, 100.0])
        self.assertAlmostEqual(report.mre, 0.0)
        self.assertAlmostEqual(report.mare, 2.0)
        self.assertAlmostEqual(report.rmse, 2.0)

    def test_metric_ordering(self):
        rng = np.random.default_rng(31)
        for _ in range(1000):
            n = int(rng.integers(1, 50))
            market = rng.uniform(80, 160, n)
            model = market * (1 + rng.normal(0, 0.05, n))
            report = pricing_errors(model, market)
            self.assertLessEqual(abs(report.mre), report.mare + 1e-12)
            self.assertLessEqual(report.mare, report.rmse + 1e-12)

    def test_scale_invariance(self):
        model = np.array([118.0, 125.0, 131.0])
        market = np.array([120.0, 121.0, 133.0])
        a = pricing_errors(model, market)
        b = pricing_errors(7.3 * model, 7.3 * market)
        for name in ('mre', 'mare', 'rmse'):
            self.assertAlmostEqual(getattr(a, name), getattr(b, name), places=10)

    def test_per_day_errors_keep_the_index(self):
        market = pd.Series([100.0, 200.0], index=[812, 813])
        report = pricing_errors([110.0, 190.0], market)
        self.assertEqual(list(report.per_day.index), [812, 813])
        self.assertAlmostEqual(report.per_day[813], -0.05)

    def test_length_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            pricing_errors([1.0, 2.0], [1.0])

    def test_empty_series(self):
        with self.assertRaises(ValidationFailed):
            pricing_errors([], [])

    def test_non_positive_market_price_names_the_day(self):
        market = pd.Series([100.0, 0.0], index=[812, 813])
        with self.assertRaisesMessage(InvalidPriceError, "non-positive market price at day 813") as ctx:
            pricing_errors([100.0, 100.0], market)
        self.assertEqual(ctx.exception.day, 813)


class ReportTests(SimpleTestCase):

    def test_mean_row(self):
        reports = [
            pricing_errors([103.0], [100.0], bond_id='A'),
            pricing_errors([99.0, 99.0], [100.0, 100.0], bond_id='B'),
        ]
        mean = mean_report(reports)
        self.assertEqual(mean.bond_id, 'Mean')
        self.assertAlmostEqual(mean.mre, 1.0)
        self.assertAlmostEqual(mean.mare, 2.0)
        self.assertEqual(mean.n_obs, 3)

    def test_mean_of_nothing(self):
        with self.assertRaises(ValidationFailed):
            mean_report([])

    def test_report_frame(self):
        report = pricing_errors([103.0], [100.0], bond_id='110011')
        frame = report_frame([report, mean_report([report])])
        self.assertEqual(list(frame.columns), REPORT_COLUMNS)
        self.assertEqual(list(frame.iloc[0]), ['110011', '3.00', '3.00', '3.00', 1])
        self.assertEqual(frame.iloc[1]['bond_id'], 'Mean')
