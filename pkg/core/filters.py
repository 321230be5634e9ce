"""
Query-string filters for the export views.
"""

import django_filters

from .models import PricingRun


class PricingRunFilter(django_filters.FilterSet):
    bond = django_filters.CharFilter(field_name='bond__code', lookup_expr='iexact')
    mode = django_filters.ChoiceFilter(choices=PricingRun.Mode.choices)
    date_from = django_filters.DateFilter(field_name='created_at', lookup_expr='date__gte')
    date_to = django_filters.DateFilter(field_name='created_at', lookup_expr='date__lte')
    valuation_day = django_filters.NumberFilter()

    class Meta:
        model = PricingRun
        fields = ['bond', 'mode', 'valuation_day']
