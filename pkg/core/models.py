"""
Models for the convertible bond desk.
"""

from django.core.exceptions import ValidationError
from django.db import models

from .pricing.exceptions import ValidationFailed
from .pricing.terms import BondTerms, validate_terms


class Bond(models.Model):
    """
    A convertible bond term sheet.
    Day fields are trading-day indices counted from the issue date.
    """
    code = models.CharField(max_length=20, unique=True, verbose_name='Code')
    name = models.CharField(max_length=100, blank=True, verbose_name='Name')
    face_value = models.FloatField(default=100.0, verbose_name='Face value')
    conversion_price = models.FloatField(verbose_name='Conversion price')
    maturity_days = models.PositiveIntegerField(verbose_name='Maturity (days)')
    conversion_start_day = models.PositiveIntegerField(verbose_name='Conversion start day')
    put_start_day = models.PositiveIntegerField(verbose_name='Put start day')
    call_trigger_frac = models.FloatField(default=1.3, verbose_name='Call trigger')
    put_trigger_frac = models.FloatField(default=0.7, verbose_name='Put trigger')
    adjust_trigger_frac = models.FloatField(default=0.85, verbose_name='Reset trigger')
    call_window_m = models.PositiveSmallIntegerField(default=15)
    call_window_n = models.PositiveSmallIntegerField(default=30)
    put_window_m = models.PositiveSmallIntegerField(default=30)
    put_window_n = models.PositiveSmallIntegerField(default=30)
    adjust_window_m = models.PositiveSmallIntegerField(default=15)
    adjust_window_n = models.PositiveSmallIntegerField(default=30)
    put_price = models.FloatField(verbose_name='Put price')
    call_price = models.FloatField(
        null=True,
        blank=True,
        verbose_name='Call price',
        help_text='Empty means face value plus accrued coupon'
    )
    redemption_price = models.FloatField(verbose_name='Redemption price')
    adjust_probability = models.FloatField(default=0.8, verbose_name='Reset probability')
    dividend_yield = models.FloatField(default=0.0, verbose_name='Daily dividend yield')
    coupon_rates = models.CharField(
        max_length=200,
        blank=True,
        verbose_name='Coupon rates',
        help_text='Annual rates in percent, comma separated'
    )
    is_active = models.BooleanField(default=True, verbose_name='Active')
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['code']
        verbose_name = 'Bond'
        verbose_name_plural = 'Bonds'

    def __str__(self):
        return f"{self.name} ({self.code})" if self.name else self.code

    def to_terms(self) -> BondTerms:
        """Validated engine term sheet for this bond."""
        return validate_terms(BondTerms(
            face_value=self.face_value,
            conversion_price=self.conversion_price,
            maturity_days=self.maturity_days,
            conversion_start_day=self.conversion_start_day,
            put_start_day=self.put_start_day,
            call_trigger_frac=self.call_trigger_frac,
            put_trigger_frac=self.put_trigger_frac,
            adjust_trigger_frac=self.adjust_trigger_frac,
            call_window=(self.call_window_m, self.call_window_n),
            put_window=(self.put_window_m, self.put_window_n),
            adjust_window=(self.adjust_window_m, self.adjust_window_n),
            put_price=self.put_price,
            redemption_price=self.redemption_price,
            call_price=self.call_price,
            adjust_probability=self.adjust_probability,
            dividend_yield=self.dividend_yield,
            coupon_rates=tuple(float(r) for r in self.coupon_rates.split(',') if r.strip()),
            name=self.name or self.code,
        ))

    @classmethod
    def from_terms(cls, code: str, terms: BondTerms) -> 'Bond':
        """Unsaved instance carrying ``terms``."""
        return cls(
            code=code,
            name=terms.name,
            face_value=terms.face_value,
            conversion_price=terms.conversion_price,
            maturity_days=terms.maturity_days,
            conversion_start_day=terms.conversion_start_day,
            put_start_day=terms.put_start_day,
            call_trigger_frac=terms.call_trigger_frac,
            put_trigger_frac=terms.put_trigger_frac,
            adjust_trigger_frac=terms.adjust_trigger_frac,
            call_window_m=terms.call_window[0],
            call_window_n=terms.call_window[1],
            put_window_m=terms.put_window[0],
            put_window_n=terms.put_window[1],
            adjust_window_m=terms.adjust_window[0],
            adjust_window_n=terms.adjust_window[1],
            put_price=terms.put_price,
            call_price=terms.call_price,
            redemption_price=terms.redemption_price,
            adjust_probability=terms.adjust_probability,
            dividend_yield=terms.dividend_yield,
            coupon_rates=','.join(f"{r:g}" for r in terms.coupon_rates),
        )

    def clean(self):
        try:
            self.to_terms()
        except (ValidationFailed, ValueError) as e:
            raise ValidationError(str(e))


class PricingRun(models.Model):
    """
    One stored model price.
    """
    class Mode(models.TextChoices):
        UNIFIED = 'unified', 'Unified'
        BANDED = 'banded', 'Banded'

    bond = models.ForeignKey(
        Bond,
        on_delete=models.CASCADE,
        related_name='pricing_runs',
        verbose_name='Bond'
    )
    valuation_day = models.PositiveIntegerField(default=0, verbose_name='Valuation day')
    mode = models.CharField(max_length=10, choices=Mode.choices, default=Mode.UNIFIED, verbose_name='Mode')
    n_paths = models.PositiveIntegerField(verbose_name='Paths')
    seed = models.BigIntegerField(default=0, verbose_name='Seed')
    s0 = models.FloatField(verbose_name='Stock price')
    sigma = models.FloatField(verbose_name='Daily volatility')
    daily_rate = models.FloatField(verbose_name='Daily rate')
    price = models.FloatField(verbose_name='Model price')
    std_error = models.FloatField(verbose_name='Standard error')
    action_counts = models.JSONField(default=dict, blank=True, verbose_name='Stopping actions')
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = 'Pricing run'
        verbose_name_plural = 'Pricing runs'
        indexes = [
            models.Index(fields=['bond', '-created_at'], name='pricingrun_bond_created_idx'),
            models.Index(fields=['mode', '-created_at'], name='pricingrun_mode_created_idx'),
        ]

    def __str__(self):
        return f"{self.bond.code} day {self.valuation_day}: {self.price:.4f} ({self.get_mode_display()})"


class BacktestRun(models.Model):
    """
    Summary statistics and NAV of one factor backtest.
    """
    factor = models.CharField(max_length=30, verbose_name='Factor')
    top_k = models.PositiveSmallIntegerField(verbose_name='Top k')
    cost = models.FloatField(verbose_name='Cost per unit traded')
    cumulative_return = models.FloatField(verbose_name='Cumulative return (%)')
    sharpe = models.FloatField(null=True, blank=True, verbose_name='Sharpe ratio')
    max_drawdown = models.FloatField(verbose_name='Max drawdown (%)')
    turnover = models.FloatField(verbose_name='Turnover (%/day)')
    nav = models.JSONField(default=list, verbose_name='NAV', help_text='[[day, nav], ...]')
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = 'Backtest run'
        verbose_name_plural = 'Backtest runs'

    def __str__(self):
        return f"{self.factor} top-{self.top_k}: {self.cumulative_return:.2f}%"
