import numpy as np
from django.test import SimpleTestCase

from core.pricing.exceptions import ValidationFailed
from core.pricing.marketdata import annual_to_daily_rate
from core.pricing.pricer import (
    CONTINUATION,
    FORCED_CONVERSION,
    FORCED_REDEMPTION,
    PUTBACK,
    REDEMPTION_AT_MATURITY,
    TERMINAL_ACTIONS,
    VOLUNTARY_CONVERSION,
    PricingOptions,
    adjusted_conversion_price,
    decide,
    downward_adjust,
    price,
    terminal_value,
)
from core.pricing.regression import BANDED
from core.pricing.simulation import GbmParams, simulate
from core.pricing.terms import trigger_prices

from .factories import daqin_terms, plain_convertible

DAQIN_S0 = 7.54
DAQIN_SIGMA = 0.0125
RATE = annual_to_daily_rate(0.025)


def binomial_price(terms, s0, r, q, sigma, steps_per_day=4):
    """CRR tree for a bond convertible on any day, no call, put or reset clause."""
    n_days = terms.maturity_days
    n = n_days * steps_per_day
    dt = 1.0 / steps_per_day
    u = np.exp(sigma * np.sqrt(dt))
    d = 1.0 / u
    p = (np.exp((r - q) * dt) - d) / (u - d)
    disc = np.exp(-r * dt)
    m = terms.conversion_ratio

    stock = s0 * u ** np.arange(n, -n - 1, -2)
    value = np.maximum(m * stock, terms.redemption_price)
    for i in range(n - 1, -1, -1):
        stock = s0 * u ** np.arange(i, -i - 1, -2)
        value = disc * (p * value[:-1] + (1 - p) * value[1:])
        if i % steps_per_day == 0 and i // steps_per_day >= terms.conversion_start_day:
            value = np.maximum(value, m * stock)
    return float(value[0])


def call_fraction(path, trigger, window):
    out = []
    for t in range(len(path)):
        chunk = path[max(0, t + 1 - window):t + 1]
        out.append(sum(1 for x in chunk if x > trigger) / len(chunk))
    return out


class TerminalValueTests(SimpleTestCase):

    def test_floor_and_conversion(self):
        np.testing.assert_array_equal(terminal_value(np.array([5.0, 10.0]), 16.0, 108.0), [108.0, 160.0])


class DecideTests(SimpleTestCase):

    def setUp(self):
        self.terms = daqin_terms(conversion_price=100.0, call_price=103.0)

    def test_forced_conversion_above_call_price(self):
        decision = decide(1100, (110.0, 0.5, 0.0), 150.0, self.terms)
        self.assertEqual(decision.action, FORCED_CONVERSION)
        self.assertEqual(decision.value, 110.0)

    def test_forced_redemption_ignores_continuation(self):
        decision = decide(1100, (90.0, 0.6, 0.0), 150.0, self.terms)
        self.assertEqual(decision, (103.0, FORCED_REDEMPTION))

    def test_tie_with_put_keeps_holding(self):
        self.assertEqual(decide(1100, (50.0, 0.0, 1.0), 100.0, self.terms), (100.0, CONTINUATION))

    def test_putback(self):
        self.assertEqual(decide(1100, (50.0, 0.0, 1.0), 99.0, self.terms), (100.0, PUTBACK))

    def test_put_closed_before_put_window(self):
        self.assertEqual(decide(900, (50.0, 0.0, 1.0), 99.0, self.terms), (99.0, CONTINUATION))

    def test_put_needs_full_window(self):
        self.assertEqual(decide(1100, (50.0, 0.0, 0.9), 99.0, self.terms), (99.0, CONTINUATION))

    def test_tie_with_conversion_keeps_holding(self):
        self.assertEqual(decide(500, (100.0, 0.0, 0.0), 100.0, self.terms), (100.0, CONTINUATION))

    def test_voluntary_conversion(self):
        self.assertEqual(decide(500, (101.0, 0.0, 0.0), 100.0, self.terms), (101.0, VOLUNTARY_CONVERSION))

    def test_put_wins_tie_with_conversion(self):
        self.assertEqual(decide(1100, (100.0, 0.0, 1.0), 90.0, self.terms), (100.0, PUTBACK))

    def test_explicit_conversion_ratio(self):
        self.assertEqual(decide(500, (60.0, 0.0, 0.0), 100.0, self.terms, conversion_ratio=2.0),
                         (120.0, VOLUNTARY_CONVERSION))


class DownwardAdjustTests(SimpleTestCase):

    def setUp(self):
        self.terms = daqin_terms()
        self.closes = [5.0] * 19 + [4.0]

    def test_reset_price_is_max_of_average_and_last(self):
        self.assertAlmostEqual(adjusted_conversion_price(self.closes), 4.95)
        self.assertEqual(adjusted_conversion_price([3.0, 4.0, 5.0]), 5.0)
        self.assertEqual(adjusted_conversion_price([1.0] * 30 + [2.0] * 20), 2.0)

    def test_reset_applies_on_low_draw(self):
        decision = downward_adjust(1100, self.closes, (4.0, 0.0, 1.0), 90.0, self.terms, draw=0.1)
        self.assertTrue(decision.adjusted)
        self.assertAlmostEqual(decision.conversion_ratio, 100 / 4.95)
        self.assertEqual(decision.action, PUTBACK)

    def test_no_reset_on_high_draw(self):
        decision = downward_adjust(1100, self.closes, (4.0, 0.0, 1.0), 90.0, self.terms, draw=0.9)
        self.assertFalse(decision.adjusted)
        self.assertEqual(decision.conversion_ratio, self.terms.conversion_ratio)

    def test_reset_conversion_value_is_capped_at_face_value(self):
        closes = [5.0] * 19 + [5.2]
        decision = downward_adjust(1100, closes, (5.2, 0.0, 1.0), 90.0, self.terms, draw=0.5)
        self.assertTrue(decision.adjusted)
        self.assertAlmostEqual(decision.conversion_ratio * 5.2, 100.0)
        self.assertAlmostEqual(decision.value, 100.0)

    def test_called_path_is_not_reset(self):
        decision = downward_adjust(1100, self.closes, (4.0, 0.5, 1.0), 90.0, self.terms, draw=0.0)
        self.assertFalse(decision.adjusted)

    def test_probability_override(self):
        decision = downward_adjust(1100, self.closes, (4.0, 0.0, 1.0), 90.0, self.terms, draw=0.1, probability=0.0)
        self.assertFalse(decision.adjusted)


class OracleTests(SimpleTestCase):

    def test_bond_that_never_converts(self):
        terms = plain_convertible(
            conversion_price=1e9, maturity_days=700, put_start_day=700, redemption_price=100.0,
        )
        expected = 100.0 * np.exp(-700 * RATE)
        result = price(terms, 10.0, RATE, 0.0, 0.02, 1000, seed=3,
                       options=PricingOptions(propagation='cashflow'))
        self.assertAlmostEqual(result.price, expected, delta=1e-10)
        self.assertLess(result.std_error, 1e-10)
        self.assertEqual(result.action_counts[REDEMPTION_AT_MATURITY], 1000)

        result = price(terms, 10.0, RATE, 0.0, 0.02, 1000, seed=3)
        self.assertAlmostEqual(result.price / expected, 1.0, places=8)

    def test_zero_volatility_matches_scalar_recursion(self):
        terms = plain_convertible(
            maturity_days=700, conversion_start_day=10, put_start_day=600,
            call_trigger_frac=1.3, put_trigger_frac=0.7, adjust_trigger_frac=0.85,
        )
        s0 = 125.0
        path = simulate(GbmParams(s0=s0, r=RATE, q=0.0, sigma=0.0, horizon_days=700, n_paths=1)).prices[0]
        f = call_fraction(path, trigger_prices(terms).call, 30)

        value = max(terms.conversion_ratio * path[-1], terms.redemption_price)
        for t in range(699, -1, -1):
            continuation = np.exp(-RATE) * value
            if t < 10:
                value = continuation
            else:
                value = decide(t, (path[t], f[t], 0.0), continuation, terms).value

        result = price(terms, s0, RATE, 0.0, 0.0, 100, seed=1)
        self.assertAlmostEqual(result.price / value, 1.0, places=8)
        self.assertLess(result.std_error, 1e-8)
        self.assertEqual(result.action_counts[FORCED_CONVERSION] + result.action_counts[VOLUNTARY_CONVERSION], 100)

    def test_american_conversion_matches_binomial_tree(self):
        terms = plain_convertible()
        r = annual_to_daily_rate(0.03)
        q, sigma = 0.0004, 0.02
        tree = binomial_price(terms, 100.0, r, q, sigma)
        result = price(
            terms, 100.0, r, q, sigma, 50_000, seed=20230118,
            options=PricingOptions(propagation='cashflow', intercept=True, adjust_enabled=False),
        )
        self.assertAlmostEqual(result.price, tree, delta=max(0.01 * tree, 4 * result.std_error))


class PriceTests(SimpleTestCase):

    def test_minimum_paths(self):
        with self.assertRaisesMessage(ValidationFailed, "M must be ≥ 100"):
            price(daqin_terms(), DAQIN_S0, RATE, 0.0, DAQIN_SIGMA, 50, seed=1, valuation_day=812)

    def test_valuation_day_at_maturity(self):
        with self.assertRaises(ValidationFailed):
            price(daqin_terms(), DAQIN_S0, RATE, 0.0, DAQIN_SIGMA, 100, seed=1, valuation_day=1512)

    def test_invalid_terms_rejected(self):
        with self.assertRaises(ValidationFailed):
            price(daqin_terms(call_trigger_frac=0.9), DAQIN_S0, RATE, 0.0, DAQIN_SIGMA, 100, seed=1)

    def test_same_seed_any_worker_count(self):
        a = price(daqin_terms(), DAQIN_S0, RATE, 0.0, DAQIN_SIGMA, 5000, seed=20230118, valuation_day=812)
        b = price(daqin_terms(), DAQIN_S0, RATE, 0.0, DAQIN_SIGMA, 5000, seed=20230118, valuation_day=812,
                  options=PricingOptions(workers=3))
        self.assertEqual(a.price, b.price)
        self.assertEqual(a.std_error, b.std_error)
        self.assertEqual(a.action_counts, b.action_counts)

    def test_daqin_price_is_sensible(self):
        result = price(daqin_terms(), DAQIN_S0, RATE, 0.0, DAQIN_SIGMA, 5000, seed=20230118, valuation_day=812)
        # never below the discounted redemption floor nor below conversion value by much
        self.assertGreater(result.price, 108.0 * np.exp(-700 * RATE))
        self.assertGreater(result.price, 0.95 * daqin_terms().conversion_ratio * DAQIN_S0)
        self.assertEqual(sum(result.action_counts.values()), 5000)
        self.assertEqual([name for name, _ in result.summary_rows()][:4], ['price', 'std_error', 'n_paths', 'seed'])
        self.assertEqual(len(result.summary_rows()), 4 + len(TERMINAL_ACTIONS))

    def test_standard_error_shrinks_with_paths(self):
        terms = plain_convertible()
        r = annual_to_daily_rate(0.03)
        small = price(terms, 100.0, r, 0.0, 0.02, 5000, seed=7)
        large = price(terms, 100.0, r, 0.0, 0.02, 20_000, seed=7)
        self.assertAlmostEqual(small.std_error / large.std_error, 2.0, delta=0.4)

    def test_downward_adjustment_fires_in_put_window(self):
        terms = daqin_terms()
        warmup = [4.0] * 30
        adjusted = price(terms, 4.0, RATE, 0.0, DAQIN_SIGMA, 2000, seed=5, warmup=warmup, valuation_day=1100)
        plain = price(terms, 4.0, RATE, 0.0, DAQIN_SIGMA, 2000, seed=5, warmup=warmup, valuation_day=1100,
                      options=PricingOptions(adjust_probability=0.0))
        self.assertGreater(adjusted.diagnostics['adjusted'].sum(), 0)
        self.assertGreater(adjusted.diagnostics.loc[1100, 'adjusted'], 1000)
        self.assertEqual(plain.diagnostics['adjusted'].sum(), 0)
        self.assertGreaterEqual(adjusted.price, plain.price - 3 * plain.std_error)
        self.assertGreater(adjusted.price, 0)
        self.assertGreater(plain.price, 0)

    def test_adjustment_can_be_switched_off(self):
        result = price(daqin_terms(), 4.0, RATE, 0.0, DAQIN_SIGMA, 500, seed=5, warmup=[4.0] * 30,
                       valuation_day=1100, options=PricingOptions(adjust_enabled=False))
        self.assertEqual(result.diagnostics['adjusted'].sum(), 0)

    def test_banded_mode_with_coefficients(self):
        result = price(daqin_terms(), DAQIN_S0, RATE, 0.0, DAQIN_SIGMA, 2000, seed=9, valuation_day=1400,
                       options=PricingOptions(mode=BANDED, record_coefficients=True))
        self.assertGreater(result.price, 0)
        coefficients = result.coefficients
        self.assertEqual(list(coefficients.columns[:3]), ['day', 'band', 'S'])
        self.assertEqual(len(coefficients), 4 * 112)
        self.assertEqual(len(result.diagnostics), 112)

    def test_bad_options(self):
        with self.assertRaises(ValidationFailed):
            PricingOptions(mode='pooled')
        with self.assertRaises(ValidationFailed):
            PricingOptions(propagation='forward')
        with self.assertRaises(ValidationFailed):
            PricingOptions(adjust_probability=2.0)


class PricingFlagTests(SimpleTestCase):

    def price_daqin(self, **options):
        return price(daqin_terms(), DAQIN_S0, RATE, 0.0, DAQIN_SIGMA, 2000, seed=1, valuation_day=812,
                     options=PricingOptions(**options))

    def setUp(self):
        self.base = self.price_daqin()

    def test_coupons_raise_the_price(self):
        self.assertGreater(self.price_daqin(include_coupons=True).price, self.base.price)

    def test_printed_drift_lowers_the_price(self):
        self.assertLess(self.price_daqin(printed_drift=True).price, self.base.price)

    def test_antithetic_pricing_is_unbiased(self):
        paired = self.price_daqin(antithetic=True)
        bound = 3 * np.hypot(paired.std_error, self.base.std_error)
        self.assertAlmostEqual(paired.price, self.base.price, delta=bound)

    def test_reset_clause_signal_resets_more_paths(self):
        reset = self.price_daqin(adjust_signal='reset_clause')
        self.assertGreater(reset.diagnostics['adjusted'].sum(), self.base.diagnostics['adjusted'].sum())
        self.assertGreater(reset.price, self.base.price)


class PriceShapeTests(SimpleTestCase):

    def test_monotone_in_s0_and_above_redemption_floor(self):
        floor = 108.0 * np.exp(-700 * RATE)
        previous = None
        for s0 in np.arange(6.0, 10.01, 0.5):
            result = price(daqin_terms(), s0, RATE, 0.0, DAQIN_SIGMA, 2000, seed=1,
                           warmup=[DAQIN_S0] * 30, valuation_day=812)
            self.assertGreaterEqual(result.price, floor - 3 * result.std_error)
            if previous is not None:
                self.assertGreaterEqual(result.price, previous)
            previous = result.price

    def test_armed_call_converts_at_once(self):
        terms = daqin_terms()
        result = price(terms, 9.0, RATE, 0.0, DAQIN_SIGMA, 500, seed=2, warmup=[9.0] * 29, valuation_day=812)
        self.assertAlmostEqual(result.price, terms.conversion_ratio * 9.0, places=9)
        self.assertLess(result.std_error, 1e-9)
        self.assertEqual(result.action_counts[FORCED_CONVERSION], 500)

    def test_armed_call_redeems_at_call_price(self):
        terms = daqin_terms()
        result = price(terms, 6.0, RATE, 0.0, DAQIN_SIGMA, 500, seed=2, warmup=[9.0] * 29, valuation_day=812)
        self.assertAlmostEqual(result.price, terms.call_price_at(812), places=9)
        self.assertEqual(result.action_counts[FORCED_REDEMPTION], 500)
