"""
Management command to seed initial data.
Stores the sample term sheets as Bond records and optionally an admin user.
"""

from pathlib import Path

from django.conf import settings
from django.contrib.auth import get_user_model
from django.core.management.base import BaseCommand, CommandError

from core.models import Bond
from core.pricing.exceptions import ValidationFailed
from core.pricing.terms import load_terms

User = get_user_model()

SAMPLE_DIR = Path(settings.BASE_DIR) / 'sample_data'


class Command(BaseCommand):
    help = 'Seed initial data: sample bonds and an admin user'

    def add_arguments(self, parser):
        parser.add_argument(
            'terms',
            nargs='*',
            help='Term-sheet files to load (default: every .env term sheet in sample_data/)'
        )
        parser.add_argument(
            '--admin',
            action='store_true',
            help='Also create the admin user'
        )

    def handle(self, *args, **options):
        self.stdout.write('Seeding data...')

        paths = [Path(p) for p in options['terms']] or sorted(SAMPLE_DIR.glob('*.env'))
        for path in paths:
            try:
                terms = load_terms(path)
            except ValidationFailed as e:
                # run configs share the .env suffix
                if options['terms']:
                    raise CommandError(f"validation_error: {e}", returncode=1)
                continue
            except OSError as e:
                raise CommandError(f"io_error: {e}", returncode=2)

            code = path.stem.upper()
            bond = Bond.objects.filter(code=code).first()
            if bond:
                self.stdout.write(f'  Bond exists: {bond}')
                continue
            bond = Bond.from_terms(code, terms)
            bond.full_clean()
            bond.save()
            self.stdout.write(self.style.SUCCESS(f'  Created bond: {bond}'))

        if options['admin']:
            if not User.objects.filter(username='admin').exists():
                User.objects.create_superuser(
                    username='admin',
                    email='admin@example.com',
                    password='admin123',
                )
                self.stdout.write(self.style.SUCCESS('  Created admin user: admin / admin123'))
            else:
                self.stdout.write('  Admin user already exists')

        self.stdout.write(self.style.SUCCESS('\nSeeding completed!'))
