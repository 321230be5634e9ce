# Generated by Django 5.0.6 on 2026-10-18 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='BacktestRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('factor', models.CharField(max_length=30, verbose_name='Factor')),
                ('top_k', models.PositiveSmallIntegerField(verbose_name='Top k')),
                ('cost', models.FloatField(verbose_name='Cost per unit traded')),
                ('cumulative_return', models.FloatField(verbose_name='Cumulative return (%)')),
                ('sharpe', models.FloatField(blank=True, null=True, verbose_name='Sharpe ratio')),
                ('max_drawdown', models.FloatField(verbose_name='Max drawdown (%)')),
                ('turnover', models.FloatField(verbose_name='Turnover (%/day)')),
                ('nav', models.JSONField(default=list, help_text='[[day, nav], ...]', verbose_name='NAV')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Backtest run',
                'verbose_name_plural': 'Backtest runs',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='Bond',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('code', models.CharField(max_length=20, unique=True, verbose_name='Code')),
                ('name', models.CharField(blank=True, max_length=100, verbose_name='Name')),
                ('face_value', models.FloatField(default=100.0, verbose_name='Face value')),
                ('conversion_price', models.FloatField(verbose_name='Conversion price')),
                ('maturity_days', models.PositiveIntegerField(verbose_name='Maturity (days)')),
                ('conversion_start_day', models.PositiveIntegerField(verbose_name='Conversion start day')),
                ('put_start_day', models.PositiveIntegerField(verbose_name='Put start day')),
                ('call_trigger_frac', models.FloatField(default=1.3, verbose_name='Call trigger')),
                ('put_trigger_frac', models.FloatField(default=0.7, verbose_name='Put trigger')),
                ('adjust_trigger_frac', models.FloatField(default=0.85, verbose_name='Reset trigger')),
                ('call_window_m', models.PositiveSmallIntegerField(default=15)),
                ('call_window_n', models.PositiveSmallIntegerField(default=30)),
                ('put_window_m', models.PositiveSmallIntegerField(default=30)),
                ('put_window_n', models.PositiveSmallIntegerField(default=30)),
                ('adjust_window_m', models.PositiveSmallIntegerField(default=15)),
                ('adjust_window_n', models.PositiveSmallIntegerField(default=30)),
                ('put_price', models.FloatField(verbose_name='Put price')),
                ('call_price', models.FloatField(blank=True, help_text='Empty means face value plus accrued coupon', null=True, verbose_name='Call price')),
                ('redemption_price', models.FloatField(verbose_name='Redemption price')),
                ('adjust_probability', models.FloatField(default=0.8, verbose_name='Reset probability')),
                ('dividend_yield', models.FloatField(default=0.0, verbose_name='Daily dividend yield')),
                ('coupon_rates', models.CharField(blank=True, help_text='Annual rates in percent, comma separated', max_length=200, verbose_name='Coupon rates')),
                ('is_active', models.BooleanField(default=True, verbose_name='Active')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'verbose_name': 'Bond',
                'verbose_name_plural': 'Bonds',
                'ordering': ['code'],
            },
        ),
        migrations.CreateModel(
            name='PricingRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('valuation_day', models.PositiveIntegerField(default=0, verbose_name='Valuation day')),
                ('mode', models.CharField(choices=[('unified', 'Unified'), ('banded', 'Banded')], default='unified', max_length=10, verbose_name='Mode')),
                ('n_paths', models.PositiveIntegerField(verbose_name='Paths')),
                ('seed', models.BigIntegerField(default=0, verbose_name='Seed')),
                ('s0', models.FloatField(verbose_name='Stock price')),
                ('sigma', models.FloatField(verbose_name='Daily volatility')),
                ('daily_rate', models.FloatField(verbose_name='Daily rate')),
                ('price', models.FloatField(verbose_name='Model price')),
                ('std_error', models.FloatField(verbose_name='Standard error')),
                ('action_counts', models.JSONField(blank=True, default=dict, verbose_name='Stopping actions')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('bond', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='pricing_runs', to='core.bond', verbose_name='Bond')),
            ],
            options={
                'verbose_name': 'Pricing run',
                'verbose_name_plural': 'Pricing runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['bond', '-created_at'], name='pricingrun_bond_created_idx'), models.Index(fields=['mode', '-created_at'], name='pricingrun_mode_created_idx')],
            },
        ),
    ]
