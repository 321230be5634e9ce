"""
Top-k factor backtests over a panel of bonds.
"""

import pandas as pd

from ._common import PricingCommand


class Command(PricingCommand):
    help = 'Backtest the least-squares factors against the double-low baseline'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--panel', help='Factor panel file (overrides PANEL)')
        parser.add_argument('--top-k', type=int, help='Number of bonds held (overrides TOP_K)')
        parser.add_argument('--cost', type=float, help='Proportional cost per unit traded (overrides COST)')
        parser.add_argument('--save', action='store_true', help='Record the runs in the database')

    def overrides(self, options):
        values = super().overrides(options)
        values['PANEL'] = options.get('panel')
        values['TOP_K'] = options.get('top_k')
        values['COST'] = options.get('cost')
        return values

    def run(self, service, options):
        reports = service.backtest()
        summary = pd.DataFrame([r.summary_row() for r in reports])
        self.stdout.write(summary.to_csv(index=False), ending='')

        out = self.output_dir(service)
        if out is not None:
            summary.to_csv(out / 'backtest.csv', index=False)
            nav = pd.concat([r.nav.rename(r.factor_name) for r in reports], axis=1)
            nav.index.name = 'day'
            nav.to_csv(out / 'nav.csv', float_format='%.10g')
            holdings = pd.concat(
                [r.holdings.assign(factor=r.factor_name) for r in reports], ignore_index=True,
            )
            holdings[['factor', 'day', 'bond_id', 'weight']].to_csv(
                out / 'holdings.csv', index=False, float_format='%.10g',
            )

        if options.get('save'):
            for report in reports:
                run = service.record_backtest_run(report)
                self.stdout.write(self.style.SUCCESS(f"Saved backtest run #{run.pk} ({run.factor})"))
