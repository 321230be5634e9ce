"""
Simulate a GBM price grid and report terminal statistics.
"""

from ._common import PricingCommand


class Command(PricingCommand):
    help = 'Simulate stock price paths and check the terminal mean'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--horizon-days', type=int, help='Days to simulate (overrides HORIZON_DAYS)')

    def overrides(self, options):
        values = super().overrides(options)
        values['HORIZON_DAYS'] = options.get('horizon_days')
        return values

    def run(self, service, options):
        grid, stats = service.simulate()
        self.write_rows([
            ('n_paths', grid.n_paths),
            ('horizon_days', grid.horizon_days),
            ('mean_ST', f"{stats['mean']:.6f}"),
            ('std_ST', f"{stats['std']:.6f}"),
            ('std_error', f"{stats['std_error']:.6f}"),
            ('expected_ST', f"{stats['expected']:.6f}"),
        ])
        out = self.output_dir(service)
        if out is not None:
            grid.to_csv(out / 'paths.csv')
