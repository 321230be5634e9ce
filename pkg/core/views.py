"""
CSV exports of stored pricing and backtest runs.
"""

import csv

from django.contrib.auth.mixins import LoginRequiredMixin
from django.http import HttpResponse
from django.shortcuts import get_object_or_404
from django.utils import timezone
from django.views.generic import View

from .filters import PricingRunFilter
from .models import BacktestRun, PricingRun
from .pricing.pricer import TERMINAL_ACTIONS


def _csv_response(filename):
    response = HttpResponse(content_type='text/csv; charset=utf-8')
    response['Content-Disposition'] = f'attachment; filename="{filename}"'
    return response


class PricingRunsExportView(LoginRequiredMixin, View):
    """Export pricing runs to CSV, filtered by bond, mode and date."""

    def get(self, request):
        runs = PricingRunFilter(
            request.GET,
            queryset=PricingRun.objects.select_related('bond'),
        ).qs

        response = _csv_response(f"pricing_runs_{timezone.now().strftime('%Y-%m-%d')}.csv")
        writer = csv.writer(response)
        writer.writerow([
            'created_at', 'bond', 'valuation_day', 'mode', 'n_paths', 'seed',
            's0', 'sigma', 'daily_rate', 'price', 'std_error', *TERMINAL_ACTIONS,
        ])
        for run in runs:
            writer.writerow([
                run.created_at.isoformat(timespec='seconds'),
                run.bond.code,
                run.valuation_day,
                run.mode,
                run.n_paths,
                run.seed,
                f"{run.s0:.6g}",
                f"{run.sigma:.6g}",
                f"{run.daily_rate:.6g}",
                f"{run.price:.6f}",
                f"{run.std_error:.6f}",
                *[run.action_counts.get(action, 0) for action in TERMINAL_ACTIONS],
            ])

        return response


class BacktestNavExportView(LoginRequiredMixin, View):
    """NAV series of one backtest run, ready for plotting."""

    def get(self, request, pk):
        run = get_object_or_404(BacktestRun, pk=pk)

        response = _csv_response(f"nav_{run.factor}_{run.pk}.csv")
        writer = csv.writer(response)
        writer.writerow(['day', 'nav'])
        for day, nav in run.nav:
            writer.writerow([day, f"{nav:.10g}"])

        return response
