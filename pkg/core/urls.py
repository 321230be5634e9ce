"""
URL configuration for core app.
"""
from django.urls import path
from . import views

app_name = 'core'

urlpatterns = [
    # CSV Export
    path('runs/pricing/export/', views.PricingRunsExportView.as_view(), name='pricing_runs_export'),
    path('runs/backtest/<int:pk>/nav/', views.BacktestNavExportView.as_view(), name='backtest_nav_export'),
]
