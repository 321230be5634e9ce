"""
Shared plumbing for the pricing management commands.
"""

from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.pricing.exceptions import PricingError
from core.pricing.regression import BANDED, UNIFIED
from core.services import PricingService, load_run_config

EXIT_VALIDATION = 1
EXIT_IO = 2


class PricingCommand(BaseCommand):
    """
    Adds the common flags and turns engine errors into one-line messages
    with stable exit codes (1 validation, 2 I/O).
    """

    def add_arguments(self, parser):
        parser.add_argument('--config', help='KEY=value run-config file')
        parser.add_argument('--seed', type=int, help='Random seed')
        parser.add_argument('--paths', type=int, help='Number of simulated paths (M)')
        parser.add_argument('--mode', choices=[UNIFIED, BANDED], help='Regression mode')
        parser.add_argument('--workers', type=int, help='Worker threads for path simulation')
        parser.add_argument('--antithetic', action='store_true', default=None, help='Pair every path with its mirrored draws')
        parser.add_argument('--printed-drift', action='store_true', default=None, help='Use the r - q - sigma^2 drift')
        parser.add_argument('--out', help='Output directory for result files')

    def overrides(self, options) -> dict:
        """Config keys set from the command line."""
        return {
            'SEED': options.get('seed'),
            'PATHS': options.get('paths'),
            'MODE': options.get('mode'),
            'WORKERS': options.get('workers'),
            'ANTITHETIC': options.get('antithetic'),
            'PRINTED_DRIFT': options.get('printed_drift'),
            'OUT': options.get('out'),
        }

    def handle(self, *args, **options):
        try:
            config = load_run_config(options.get('config'), self.overrides(options))
            self.run(PricingService(config), options)
        except CommandError:
            raise
        except (PricingError, ValueError) as e:
            raise CommandError(f"validation_error: {e}", returncode=EXIT_VALIDATION)
        except OSError as e:
            raise CommandError(f"io_error: {e}", returncode=EXIT_IO)

    def run(self, service: PricingService, options):
        raise NotImplementedError

    def output_dir(self, service: PricingService):
        """The --out directory, created on demand, or None."""
        out = service.config.out
        if out is None:
            return None
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        return out

    def write_rows(self, rows):
        for key, value in rows:
            self.stdout.write(f"{key},{value}")
