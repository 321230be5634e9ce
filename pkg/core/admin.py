"""
Django Admin configuration for the convertible bond desk.
"""

from django.contrib import admin
from .models import Bond, PricingRun, BacktestRun


@admin.register(Bond)
class BondAdmin(admin.ModelAdmin):
    list_display = ['code', 'name', 'conversion_price', 'maturity_days', 'put_price', 'redemption_price', 'is_active']
    list_filter = ['is_active']
    search_fields = ['code', 'name']
    list_editable = ['is_active']
    ordering = ['code']
    readonly_fields = ['created_at', 'updated_at']

    fieldsets = (
        (None, {'fields': ('code', 'name', 'is_active')}),
        ('Terms', {'fields': (
            'face_value', 'conversion_price', 'maturity_days', 'conversion_start_day', 'put_start_day',
            'put_price', 'call_price', 'redemption_price', 'coupon_rates', 'dividend_yield',
        )}),
        ('Clauses', {'fields': (
            ('call_trigger_frac', 'call_window_m', 'call_window_n'),
            ('put_trigger_frac', 'put_window_m', 'put_window_n'),
            ('adjust_trigger_frac', 'adjust_window_m', 'adjust_window_n'),
            'adjust_probability',
        )}),
        ('Audit', {'fields': ('created_at', 'updated_at')}),
    )


@admin.register(PricingRun)
class PricingRunAdmin(admin.ModelAdmin):
    list_display = ['created_at', 'bond', 'valuation_day', 'mode', 'n_paths', 'price', 'std_error']
    list_filter = ['bond', 'mode', 'created_at']
    search_fields = ['bond__code', 'bond__name']
    date_hierarchy = 'created_at'
    readonly_fields = [
        'bond', 'valuation_day', 'mode', 'n_paths', 'seed', 's0', 'sigma', 'daily_rate',
        'price', 'std_error', 'action_counts', 'created_at',
    ]
    ordering = ['-created_at']

    def has_add_permission(self, request):
        return False  # Runs are only recorded by the price command

    def has_change_permission(self, request, obj=None):
        return False


@admin.register(BacktestRun)
class BacktestRunAdmin(admin.ModelAdmin):
    list_display = ['created_at', 'factor', 'top_k', 'cost', 'cumulative_return', 'sharpe', 'max_drawdown']
    list_filter = ['factor', 'created_at']
    date_hierarchy = 'created_at'
    exclude = ['nav']
    readonly_fields = [
        'factor', 'top_k', 'cost', 'cumulative_return', 'sharpe', 'max_drawdown', 'turnover', 'created_at',
    ]
    ordering = ['-created_at']

    def has_add_permission(self, request):
        return False

    def has_change_permission(self, request, obj=None):
        return False


# Customize admin site
admin.site.site_header = 'CCB Desk - Administration'
admin.site.site_title = 'CCB Desk'
admin.site.index_title = 'Pricing and backtests'
