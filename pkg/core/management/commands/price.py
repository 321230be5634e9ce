"""
Price one convertible bond from a term sheet and market inputs.
"""

from django.core.management.base import CommandError

from core.models import Bond
from core.pricing.exceptions import ValidationFailed

from ._common import PricingCommand


class Command(PricingCommand):
    help = 'Price a convertible bond with least-squares Monte Carlo'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--terms', help='Term-sheet file (overrides TERMS)')
        parser.add_argument('--bond', help='Code of a stored Bond to price instead of a term-sheet file')
        parser.add_argument('--valuation-day', type=int, help='Trading-day index to price at')
        parser.add_argument('--coefficients', action='store_true', help='Also write per-day regression coefficients')
        parser.add_argument('--include-coupons', action='store_true', default=None, help='Add coupons paid along the way to the discounted value')
        parser.add_argument('--adjust-signal', choices=['put', 'reset_clause'], help='Which signal makes a path eligible for the conversion-price reset')
        parser.add_argument('--save', action='store_true', help='Record the run in the database')

    def overrides(self, options):
        values = super().overrides(options)
        values['TERMS'] = options.get('terms')
        values['VALUATION_DAY'] = options.get('valuation_day')
        values['INCLUDE_COUPONS'] = options.get('include_coupons')
        values['ADJUST_SIGNAL'] = options.get('adjust_signal')
        return values

    def run(self, service, options):
        terms = None
        code = options.get('bond')
        if code:
            bond = Bond.objects.filter(code=code).first()
            if not bond:
                raise CommandError(f"validation_error: unknown bond {code}", returncode=1)
            terms = bond.to_terms()
        elif service.config.terms is None:
            raise ValidationFailed("TERMS is required")
        else:
            code = service.config.terms.stem.upper()

        if options.get('coefficients'):
            service.record_coefficients = True
        terms, result, inputs = service.price(terms)

        self.stdout.write(f"bond,{terms.name or code}")
        self.write_rows(result.summary_rows())

        out = self.output_dir(service)
        if out is not None:
            with open(out / 'price.csv', 'w', newline='') as fh:
                fh.write('key,value\n')
                fh.writelines(f"{key},{value}\n" for key, value in result.summary_rows())
            result.diagnostics.to_csv(out / 'diagnostics.csv')
            if result.coefficients is not None:
                result.coefficients.to_csv(out / 'coefficients.csv', index=False, float_format='%.10g')

        if options.get('save'):
            run = service.record_pricing_run(code, terms, result, inputs)
            self.stdout.write(self.style.SUCCESS(f"Saved pricing run #{run.pk}"))
