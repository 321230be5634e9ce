"""
Model-versus-market pricing errors per bond, with a closing Mean row.
"""

import pandas as pd

from core.pricing.evaluate import mean_report, report_frame

from ._common import PricingCommand


class Command(PricingCommand):
    help = 'Re-price bonds over their quote ranges and report MRE, MARE and RMSE'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--bonds', help='Comma-separated bond ids (overrides BONDS)')

    def overrides(self, options):
        values = super().overrides(options)
        bonds = options.get('bonds')
        values['BONDS'] = tuple(b.strip() for b in bonds.split(',') if b.strip()) if bonds else None
        return values

    def run(self, service, options):
        reports = service.evaluate()
        table = report_frame([*reports, mean_report(reports)])
        self.stdout.write(table.to_csv(index=False), ending='')

        out = self.output_dir(service)
        if out is not None:
            table.to_csv(out / 'errors.csv', index=False)
            daily = pd.concat(
                [r.per_day.rename_axis('day').reset_index().assign(bond_id=r.bond_id) for r in reports],
                ignore_index=True,
            )
            daily[['bond_id', 'day', 'relative_error']].to_csv(
                out / 'daily_errors.csv', index=False, float_format='%.10g',
            )
