"""
Business logic for pricing, evaluation and backtest runs.
"""

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from django.conf import settings
from dotenv import dotenv_values

from .models import BacktestRun, Bond, PricingRun
from .pricing import backtest as bt
from .pricing.evaluate import ErrorReport, pricing_errors
from .pricing.exceptions import PricingError, ValidationFailed
from .pricing.marketdata import (
    PriceHistory,
    annual_to_daily_rate,
    historical_volatility,
    load_history,
    load_quotes,
)
from .pricing.pricer import PricingOptions, PricingResult, price
from .pricing.simulation import GbmParams, PathGrid, martingale_check, simulate
from .pricing.terms import BondTerms, load_terms

logger = logging.getLogger(__name__)

TRUE_VALUES = ('true', '1', 'yes')


def _flag(raw: str) -> bool:
    return raw.strip().lower() in TRUE_VALUES


def _bonds(raw: str) -> Tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(',') if part.strip())


# Run-config file keys mapped to (field, parser)
CONFIG_KEYS = {
    'PATHS': ('paths', int),
    'SEED': ('seed', int),
    'MODE': ('mode', str),
    'BASIS': ('basis', str),
    'INTERCEPT': ('intercept', _flag),
    'PROPAGATION': ('propagation', str),
    'INCLUDE_COUPONS': ('include_coupons', _flag),
    'ADJUST_SIGNAL': ('adjust_signal', str),
    'ANTITHETIC': ('antithetic', _flag),
    'PRINTED_DRIFT': ('printed_drift', _flag),
    'ADJUST_PROBABILITY': ('adjust_probability', float),
    'ANNUAL_RATE': ('annual_rate', float),
    'DIVIDEND_YIELD': ('dividend_yield', float),
    'S0': ('s0', float),
    'SIGMA': ('sigma', float),
    'HISTORY': ('history', Path),
    'TERMS': ('terms', Path),
    'VALUATION_DAY': ('valuation_day', int),
    'HORIZON_DAYS': ('horizon_days', int),
    'WORKERS': ('workers', int),
    'BONDS': ('bonds', _bonds),
    'PANEL': ('panel', Path),
    'TOP_K': ('top_k', int),
    'COST': ('cost', float),
    'OUT': ('out', Path),
}
PATH_FIELDS = {'history', 'terms', 'panel', 'out'}


@dataclass
class RunConfig:
    """
    Settings of one command run.
    Relative paths are resolved against ``base_dir``, the config file's directory.
    """
    paths: int = field(default_factory=lambda: settings.PRICING_DEFAULT_PATHS)
    seed: int = 0
    mode: str = 'unified'
    basis: str = 'full'
    intercept: bool = False
    propagation: str = 'value'
    include_coupons: bool = False
    adjust_signal: str = 'put'
    antithetic: bool = False
    printed_drift: bool = False
    adjust_probability: Optional[float] = None
    annual_rate: Optional[float] = None
    dividend_yield: Optional[float] = None
    s0: Optional[float] = None
    sigma: Optional[float] = None
    history: Optional[Path] = None
    terms: Optional[Path] = None
    valuation_day: int = 0
    horizon_days: Optional[int] = None
    workers: int = field(default_factory=lambda: settings.PRICING_WORKERS)
    bonds: Tuple[str, ...] = ()
    panel: Optional[Path] = None
    top_k: int = field(default_factory=lambda: settings.BACKTEST_TOP_K)
    cost: float = field(default_factory=lambda: settings.BACKTEST_COST)
    out: Optional[Path] = None
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self):
        if self.paths < settings.PRICING_MIN_PATHS:
            raise ValidationFailed(f"M must be ≥ {settings.PRICING_MIN_PATHS}")
        if self.workers < 1:
            raise ValidationFailed("WORKERS must be at least 1")
        for name in PATH_FIELDS:
            value = getattr(self, name)
            if value is not None and not Path(value).is_absolute():
                setattr(self, name, Path(self.base_dir) / value)

    def resolve(self, name: str) -> Path:
        """Path of a per-bond file next to the config."""
        return Path(self.base_dir) / name


def load_run_config(path=None, overrides: Optional[Dict[str, object]] = None) -> RunConfig:
    """
    Build a RunConfig from a KEY=value file, then apply ``overrides``
    (same keys; None values are ignored).
    """
    values: Dict[str, object] = {}
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        values.update({k: v for k, v in dotenv_values(path).items() if v not in (None, '')})
        base_dir = path.resolve().parent
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        logger.warning("Ignoring unknown config keys: %s", ', '.join(unknown))

    kwargs = {}
    for key, raw in values.items():
        if key in CONFIG_KEYS:
            field_name, parse = CONFIG_KEYS[key]
            try:
                kwargs[field_name] = parse(str(raw).strip())
            except ValueError as e:
                raise ValidationFailed(f"bad value for {key}: {e}") from e
    for key, value in (overrides or {}).items():
        if value is not None:
            field_name, _ = CONFIG_KEYS[key]
            # flag values are already typed; paths are taken relative to the working directory
            kwargs[field_name] = Path(value).resolve() if field_name in PATH_FIELDS else value
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(base_dir=base_dir, **{k: v for k, v in kwargs.items() if k in known})


@dataclass(frozen=True)
class MarketInputs:
    s0: float
    r: float
    q: Optional[float]
    sigma: float
    warmup: np.ndarray


class PricingService:
    """
    Runs the pricing engine for one RunConfig.
    Engine errors propagate unchanged; the management commands map them to exit codes.
    """

    def __init__(self, config: RunConfig, record_coefficients: bool = False):
        self.config = config
        self.record_coefficients = record_coefficients

    def options(self) -> PricingOptions:
        c = self.config
        return PricingOptions(
            mode=c.mode,
            basis=c.basis,
            intercept=c.intercept,
            propagation=c.propagation,
            include_coupons=c.include_coupons,
            adjust_signal=c.adjust_signal,
            antithetic=c.antithetic,
            printed_drift=c.printed_drift,
            adjust_probability=c.adjust_probability,
            workers=c.workers,
            max_cells=settings.PRICING_MAX_GRID_CELLS,
            record_coefficients=self.record_coefficients,
        )

    def daily_rate(self) -> float:
        if self.config.annual_rate is None:
            raise ValidationFailed("ANNUAL_RATE is required")
        return annual_to_daily_rate(self.config.annual_rate)

    def load_terms(self, path=None) -> BondTerms:
        path = path or self.config.terms
        if path is None:
            raise ValidationFailed("TERMS is required")
        defaults = {'ADJUST_PROBABILITY': str(settings.PRICING_DEFAULT_ADJUST_PROBABILITY)}
        return load_terms(path, defaults=defaults)

    def market_inputs(self, history: Optional[PriceHistory] = None, day: Optional[int] = None) -> MarketInputs:
        """
        S0, daily r, q and sigma at ``day``.

        Missing S0 is the last close on or before ``day``; missing sigma is the
        trailing historical volatility. Closes before ``day`` become warm-up.
        """
        c = self.config
        day = c.valuation_day if day is None else day
        if history is None and c.history is not None:
            history = load_history(c.history)

        s0, sigma = c.s0, c.sigma
        warmup = np.array([])
        if history is not None:
            known = history.before(day + 1)
            if len(known) == 0:
                raise ValidationFailed(f"history has no closes on or before day {day}")
            if s0 is None:
                s0 = float(known.closes[-1])
                warmup = known.closes[:-1]
            else:
                warmup = history.before(day).closes
            if sigma is None:
                sigma = historical_volatility(known, lookback=settings.PRICING_VOL_LOOKBACK)
        if s0 is None:
            raise ValidationFailed("S0 or HISTORY is required")
        if sigma is None:
            raise ValidationFailed("SIGMA or HISTORY is required")
        return MarketInputs(s0=s0, r=self.daily_rate(), q=c.dividend_yield, sigma=sigma, warmup=warmup)

    def price(self, terms: Optional[BondTerms] = None) -> Tuple[BondTerms, PricingResult, MarketInputs]:
        terms = terms or self.load_terms()
        inputs = self.market_inputs()
        result = price(
            terms, inputs.s0, inputs.r, inputs.q, inputs.sigma,
            n_paths=self.config.paths,
            seed=self.config.seed,
            options=self.options(),
            warmup=inputs.warmup,
            valuation_day=self.config.valuation_day,
        )
        return terms, result, inputs

    def model_series(self, terms: BondTerms, quotes: pd.DataFrame, history: Optional[PriceHistory]) -> pd.Series:
        """
        Re-price the bond on every quote day with that day's close, conversion
        price and trailing volatility. A stored ``model_price`` column is
        replayed instead.
        """
        if 'model_price' in quotes.columns:
            return pd.Series(quotes['model_price'].to_numpy(), index=quotes['day'], name='model_price')

        closes = pd.Series(quotes['stock_close'].to_numpy(), index=quotes['day'])
        if history is not None:
            earlier = pd.Series(history.closes, index=history.days)
            closes = pd.concat([earlier[earlier.index < closes.index[0]], closes])
        combined = PriceHistory(closes.index.to_numpy(), closes.to_numpy())

        options = self.options()
        r = self.daily_rate()
        values = []
        for row in quotes.itertuples(index=False):
            day_terms = terms.with_conversion_price(row.conversion_price)
            known = combined.before(row.day + 1)
            sigma = self.config.sigma
            if sigma is None:
                sigma = historical_volatility(known, lookback=settings.PRICING_VOL_LOOKBACK)
            result = price(
                day_terms, row.stock_close, r, self.config.dividend_yield, sigma,
                n_paths=self.config.paths,
                seed=self.config.seed,
                options=options,
                warmup=known.closes[:-1],
                valuation_day=int(row.day),
            )
            values.append(result.price)
        return pd.Series(values, index=quotes['day'], name='model_price')

    def evaluate(self) -> List[ErrorReport]:
        """
        One error report per bond listed in BONDS, read from
        ``<id>.env``, ``<id>_quotes.csv`` and optionally ``<id>_history.csv``.
        Bonds with unusable data are skipped with a warning.
        """
        if not self.config.bonds:
            raise ValidationFailed("BONDS is required")
        reports = []
        for bond_id in self.config.bonds:
            try:
                terms = self.load_terms(self.config.resolve(f"{bond_id}.env"))
                quotes = load_quotes(self.config.resolve(f"{bond_id}_quotes.csv"))
                history_path = self.config.resolve(f"{bond_id}_history.csv")
                history = load_history(history_path) if history_path.is_file() else None
                model = self.model_series(terms, quotes, history)
                market = pd.Series(quotes['bond_price'].to_numpy(), index=quotes['day'])
                reports.append(pricing_errors(model, market, bond_id=bond_id))
            except (PricingError, ValueError, OSError) as e:
                logger.warning("Skipping bond %s: %s", bond_id, e)
                continue
            logger.info("Evaluated %s over %d days", bond_id, reports[-1].n_obs)
        if not reports:
            raise ValidationFailed("no bond could be evaluated")
        return reports

    def backtest(self) -> List[bt.BacktestReport]:
        """Top-k backtest for every factor the panel supports."""
        if self.config.panel is None:
            raise ValidationFailed("PANEL is required")
        frame = bt.load_panel(self.config.panel)
        factors = [bt.LEAST_SQUARES]
        if bt.BANDED_MODEL_COLUMN in frame.columns:
            factors.append(bt.LEAST_SQUARES_MR)
        factors.append(bt.DOUBLE_LOW)

        reports = []
        for factor in factors:
            panel = bt.build_factor_panel(frame, factor)
            reports.append(bt.run_backtest(
                panel, k=self.config.top_k, cost=self.config.cost,
                direction=bt.FACTOR_DIRECTIONS[factor],
            ))
        return reports

    def simulate(self, terms: Optional[BondTerms] = None) -> Tuple[PathGrid, dict]:
        c = self.config
        horizon = c.horizon_days
        if horizon is None:
            if terms is None and c.terms is None:
                raise ValidationFailed("HORIZON_DAYS or TERMS is required")
            terms = terms or self.load_terms()
            horizon = terms.maturity_days - c.valuation_day
        inputs = self.market_inputs()
        q = inputs.q if inputs.q is not None else (terms.dividend_yield if terms else 0.0)
        grid = simulate(
            GbmParams(
                s0=inputs.s0, r=inputs.r, q=q, sigma=inputs.sigma,
                horizon_days=horizon, n_paths=c.paths, seed=c.seed,
                antithetic=c.antithetic, printed_drift=c.printed_drift,
            ),
            max_cells=settings.PRICING_MAX_GRID_CELLS,
            workers=c.workers,
        )
        return grid, martingale_check(grid)

    def record_pricing_run(self, code: str, terms: BondTerms, result: PricingResult, inputs: MarketInputs) -> PricingRun:
        """Store a result against the bond ``code``, creating the Bond from ``terms`` if needed."""
        bond = Bond.objects.filter(code=code).first()
        if not bond:
            bond = Bond.from_terms(code, terms)
            bond.full_clean()
            bond.save()
            logger.info("Created bond %s", code)
        return PricingRun.objects.create(
            bond=bond,
            valuation_day=self.config.valuation_day,
            mode=self.config.mode,
            n_paths=result.n_paths,
            seed=result.seed,
            s0=inputs.s0,
            sigma=inputs.sigma,
            daily_rate=inputs.r,
            price=result.price,
            std_error=result.std_error,
            action_counts=result.action_counts,
        )

    def record_backtest_run(self, report: bt.BacktestReport) -> BacktestRun:
        return BacktestRun.objects.create(
            factor=report.factor_name,
            top_k=self.config.top_k,
            cost=self.config.cost,
            cumulative_return=report.cumulative_return,
            sharpe=report.sharpe,
            max_drawdown=report.max_drawdown,
            turnover=report.turnover,
            nav=[[int(day), float(value)] for day, value in report.nav.items()],
        )
