from dataclasses import replace

from django.test import SimpleTestCase

from core.pricing.exceptions import ValidationFailed
from core.pricing.terms import (
    MarketQuote,
    conversion_ratio,
    load_terms,
    terms_from_mapping,
    trigger_prices,
    validate_terms,
)

from .factories import SAMPLE_DIR, daqin_terms


class ValidateTermsTests(SimpleTestCase):

    def test_daqin_terms_are_valid(self):
        terms = daqin_terms()
        self.assertIs(validate_terms(terms), terms)

    def test_validation_is_idempotent(self):
        terms = validate_terms(daqin_terms())
        self.assertEqual(validate_terms(validate_terms(terms)), terms)

    def test_call_trigger_below_one(self):
        with self.assertRaisesMessage(ValidationFailed, "call_trigger_frac must exceed 1"):
            validate_terms(daqin_terms(call_trigger_frac=0.9))

    def test_call_window_longer_than_count(self):
        with self.assertRaisesMessage(ValidationFailed, "m_c ≤ n_c"):
            validate_terms(daqin_terms(call_window=(31, 30)))

    def test_put_trigger_above_reset_trigger(self):
        with self.assertRaises(ValidationFailed):
            validate_terms(daqin_terms(put_trigger_frac=0.9))

    def test_put_window_must_open_after_conversion(self):
        with self.assertRaisesMessage(ValidationFailed, "conversion_start_day must precede put_start_day"):
            validate_terms(daqin_terms(conversion_start_day=1008))

    def test_put_start_after_maturity(self):
        with self.assertRaisesMessage(ValidationFailed, "put_start_day must not exceed maturity_days"):
            validate_terms(daqin_terms(put_start_day=1600))

    def test_probability_out_of_range(self):
        with self.assertRaises(ValidationFailed):
            validate_terms(daqin_terms(adjust_probability=1.5))

    def test_non_positive_prices(self):
        for name in ('face_value', 'conversion_price', 'put_price', 'redemption_price', 'call_price'):
            with self.subTest(name=name), self.assertRaisesMessage(ValidationFailed, f"{name} must be positive"):
                validate_terms(daqin_terms(**{name: 0.0}))


class DerivedQuantityTests(SimpleTestCase):

    def test_conversion_ratio(self):
        self.assertAlmostEqual(conversion_ratio(daqin_terms()), 16.0772, places=4)
        self.assertEqual(conversion_ratio(daqin_terms(conversion_price=100.0)), 1.0)
        self.assertEqual(conversion_ratio(daqin_terms(conversion_price=50.0)), 2.0)

    def test_ratio_times_price_is_face_value(self):
        terms = daqin_terms()
        self.assertAlmostEqual(terms.conversion_ratio * terms.conversion_price / terms.face_value, 1.0, places=10)

    def test_trigger_prices(self):
        call, put, adjust = trigger_prices(daqin_terms())
        self.assertAlmostEqual(call, 8.086, places=3)
        self.assertAlmostEqual(put, 4.354, places=3)
        self.assertAlmostEqual(adjust, 5.287, places=3)

    def test_trigger_prices_follow_a_reset(self):
        reset = daqin_terms().with_conversion_price(5.0)
        self.assertEqual(tuple(round(p, 10) for p in trigger_prices(reset)), (6.5, 3.5, 4.25))

    def test_trigger_prices_scale_with_conversion_price(self):
        base = trigger_prices(daqin_terms(conversion_price=100.0))
        scaled = trigger_prices(daqin_terms(conversion_price=300.0))
        for a, b in zip(base, scaled):
            self.assertAlmostEqual(b, 3 * a, places=10)

    def test_window_thresholds(self):
        terms = daqin_terms()
        self.assertEqual(terms.call_threshold, 0.5)
        self.assertEqual(terms.put_threshold, 1.0)


class CouponTests(SimpleTestCase):

    def test_call_price_defaults_to_face_plus_accrued(self):
        terms = daqin_terms()
        self.assertEqual(terms.call_price_at(0), 100.0)
        # half way through the second coupon year at 0.4%
        self.assertAlmostEqual(terms.call_price_at(252 + 126), 100.2, places=10)

    def test_configured_call_price_wins(self):
        self.assertEqual(daqin_terms(call_price=103.0).call_price_at(500), 103.0)

    def test_coupon_paid_on_anniversaries_only(self):
        terms = daqin_terms()
        self.assertAlmostEqual(terms.coupon_at(252), 0.2)
        self.assertAlmostEqual(terms.coupon_at(504), 0.4)
        self.assertEqual(terms.coupon_at(253), 0.0)
        self.assertEqual(terms.coupon_at(1512), 0.0)

    def test_no_coupons(self):
        terms = daqin_terms(coupon_rates=())
        self.assertEqual(terms.coupon_at(252), 0.0)
        self.assertEqual(terms.call_price_at(300), 100.0)


class MarketQuoteTests(SimpleTestCase):

    def test_daqin_quote(self):
        quote = MarketQuote.from_observation(812, 120.48, 7.54, 6.22)
        self.assertAlmostEqual(quote.conversion_value, 121.22, places=2)
        self.assertAlmostEqual(quote.premium_rate * 100, -0.61, places=2)
        self.assertTrue(quote.is_consistent(100.0, 6.22))

    def test_inconsistent_quote(self):
        quote = replace(MarketQuote.from_observation(1, 120.0, 7.5, 6.22), conversion_value=110.0)
        self.assertFalse(quote.is_consistent(100.0, 6.22))

    def test_rejects_non_positive_fields(self):
        with self.assertRaises(ValidationFailed):
            MarketQuote.from_observation(3, 120.0, 0.0, 6.22)


class LoadTermsTests(SimpleTestCase):

    def test_sample_term_sheet(self):
        terms = load_terms(SAMPLE_DIR / 'daqin.env')
        self.assertEqual(terms, daqin_terms())

    def test_missing_file_names_the_path(self):
        with self.assertRaisesMessage(FileNotFoundError, 'nowhere.env'):
            load_terms(SAMPLE_DIR / 'nowhere.env')

    def test_missing_key(self):
        values = {'FACE_VALUE': '100', 'CONVERSION_PRICE': '6.22'}
        with self.assertRaisesMessage(ValidationFailed, "missing term-sheet key MATURITY_DAYS"):
            terms_from_mapping(values)

    def test_bad_window(self):
        values = {
            'FACE_VALUE': '100', 'CONVERSION_PRICE': '6.22', 'MATURITY_DAYS': '1512',
            'CONVERSION_START_DAY': '126', 'PUT_START_DAY': '1008', 'CALL_TRIGGER': '1.3',
            'PUT_TRIGGER': '0.7', 'ADJUST_TRIGGER': '0.85', 'CALL_WINDOW': '15',
            'PUT_WINDOW': '30/30', 'ADJUST_WINDOW': '15/30', 'PUT_PRICE': '100',
            'REDEMPTION_PRICE': '108',
        }
        with self.assertRaisesMessage(ValidationFailed, "bad value for CALL_WINDOW"):
            terms_from_mapping(values)
