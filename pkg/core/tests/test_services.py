import shutil
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from core.pricing.exceptions import ValidationFailed
from core.services import PricingService, load_run_config

from .factories import SAMPLE_DIR


class RunConfigTests(SimpleTestCase):

    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def write(self, text):
        path = self.tmp / 'run.env'
        path.write_text(text)
        return path

    def test_pricing_flags_reach_the_engine(self):
        path = self.write(
            "TERMS=daqin.env\nINCLUDE_COUPONS=true\nADJUST_SIGNAL=reset_clause\n"
            "ANTITHETIC=yes\nPRINTED_DRIFT=1\n"
        )
        options = PricingService(load_run_config(path)).options()
        self.assertTrue(options.include_coupons)
        self.assertEqual(options.adjust_signal, 'reset_clause')
        self.assertTrue(options.antithetic)
        self.assertTrue(options.printed_drift)

    def test_flags_default_off(self):
        options = PricingService(load_run_config(SAMPLE_DIR / 'price.env')).options()
        self.assertFalse(options.include_coupons)
        self.assertEqual(options.adjust_signal, 'put')
        self.assertFalse(options.antithetic)
        self.assertFalse(options.printed_drift)

    def test_overrides_win_over_file(self):
        path = self.write("ANTITHETIC=false\nSEED=3\n")
        config = load_run_config(path, {'ANTITHETIC': True, 'SEED': None})
        self.assertTrue(config.antithetic)
        self.assertEqual(config.seed, 3)

    def test_relative_paths_follow_the_config_file(self):
        config = load_run_config(self.write("TERMS=daqin.env\n"))
        self.assertEqual(config.terms, self.tmp.resolve() / 'daqin.env')

    def test_unknown_adjust_signal(self):
        path = self.write("ADJUST_SIGNAL=always\n")
        with self.assertRaises(ValidationFailed):
            PricingService(load_run_config(path)).options()

    def test_bad_number(self):
        with self.assertRaises(ValidationFailed):
            load_run_config(self.write("PATHS=many\n"))
