"""
Daily-rebalanced top-k factor portfolios over a bond universe.

Ledger for each day j, trading at that day's close:
    value_before = nav_{j-1} * sum_b w_b * P_{b,j} / P_{b,j-1}   (1.0 on the first day)
    traded       = sum_b |value_before * target_b - drifted holding_b|
    nav_j        = value_before - cost * traded
Costs are proportional and charged per side. Cash earns nothing.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd

from .exceptions import InvalidPriceError, MalformedInputError, ValidationFailed
from .marketdata import _numeric, _read_frame
from .terms import TRADING_DAYS_PER_YEAR

logger = logging.getLogger(__name__)

MAXIMISE = 'max'
MINIMISE = 'min'

LEAST_SQUARES = 'least-squares'
LEAST_SQUARES_MR = 'least-squares+MR'
DOUBLE_LOW = 'double-low'
PANEL_COLUMNS = ['day', 'bond_id', 'model_price', 'market_price', 'premium_rate']
BANDED_MODEL_COLUMN = 'model_price_mr'


def underpricing_factor(model, market):
    """(model - market) / market; larger means cheaper."""
    market_arr = np.asarray(market, dtype=float)
    if np.any(~(market_arr > 0)):
        raise InvalidPriceError("market price must be positive")
    return (np.asarray(model, dtype=float) - market_arr) / market_arr


def double_low(bond_price, premium_rate, premium_weight: float = 100.0, price_weight: float = 1.0):
    """Bond price plus premium rate in percentage points; smaller means cheaper."""
    return price_weight * np.asarray(bond_price, dtype=float) + premium_weight * np.asarray(premium_rate, dtype=float)


@dataclass(frozen=True)
class FactorPanel:
    """
    Long-format panel: one row per (day, bond_id) with market_price, factor
    and, where available, model_price. Day-t factors use only day-t data.
    """
    frame: pd.DataFrame
    factor_name: str = ''

    def __post_init__(self):
        missing = {'day', 'bond_id', 'market_price', 'factor'} - set(self.frame.columns)
        if missing:
            raise ValidationFailed(f"panel lacks columns: {', '.join(sorted(missing))}")

    @property
    def days(self) -> np.ndarray:
        return np.sort(self.frame['day'].unique())

    def prices(self) -> pd.DataFrame:
        return self.frame.pivot(index='day', columns='bond_id', values='market_price').sort_index()

    def factors(self) -> pd.DataFrame:
        return self.frame.pivot(index='day', columns='bond_id', values='factor').sort_index()


def load_panel(source) -> pd.DataFrame:
    """Parse ``day,bond_id,model_price,market_price,premium_rate`` rows."""
    raw = _read_frame(source, PANEL_COLUMNS)
    frame = pd.DataFrame({
        'day': _numeric(raw, 'day', integer=True),
        'bond_id': raw['bond_id'].str.strip(),
    })
    for column in ('model_price', 'market_price', 'premium_rate'):
        frame[column] = _numeric(raw, column)
    if BANDED_MODEL_COLUMN in raw.columns:
        frame[BANDED_MODEL_COLUMN] = _numeric(raw, BANDED_MODEL_COLUMN)
    if frame.duplicated(['day', 'bond_id']).any():
        row = frame.loc[frame.duplicated(['day', 'bond_id'])].iloc[0]
        raise MalformedInputError(f"duplicate panel row for {row['bond_id']} on day {row['day']}")
    bad = frame.loc[frame['market_price'] <= 0]
    if len(bad):
        day = int(bad['day'].iloc[0])
        raise InvalidPriceError(f"non-positive market price at day {day}", day=day)
    return frame.sort_values(['day', 'bond_id'], kind='mergesort').reset_index(drop=True)


def build_factor_panel(frame: pd.DataFrame, factor: str) -> FactorPanel:
    """Attach one of the three named factors to a loaded panel."""
    panel = frame.copy()
    if factor == LEAST_SQUARES:
        panel['factor'] = underpricing_factor(panel['model_price'], panel['market_price'])
    elif factor == LEAST_SQUARES_MR:
        if BANDED_MODEL_COLUMN not in panel.columns:
            raise ValidationFailed(f"panel has no {BANDED_MODEL_COLUMN} column")
        panel['factor'] = underpricing_factor(panel[BANDED_MODEL_COLUMN], panel['market_price'])
    elif factor == DOUBLE_LOW:
        panel['factor'] = double_low(panel['market_price'], panel['premium_rate'])
    else:
        raise ValidationFailed(f"unknown factor {factor!r}")
    return FactorPanel(panel, factor_name=factor)


FACTOR_DIRECTIONS = {LEAST_SQUARES: MAXIMISE, LEAST_SQUARES_MR: MAXIMISE, DOUBLE_LOW: MINIMISE}


@dataclass
class BacktestReport:
    """
    ``nav`` holds one closing value per panel day, the first already net of
    the entry cost. The 1.0 starting capital sits before the first day and is
    not a row; statistics are computed on the series with it prepended.
    """
    nav: pd.Series
    cumulative_return: float
    sharpe: Optional[float]
    max_drawdown: float
    turnover: float
    holdings: pd.DataFrame
    factor_name: str = ''

    def summary_row(self) -> Dict:
        return {
            'factor': self.factor_name,
            'cumulative_return': round(self.cumulative_return, 2),
            'sharpe': 'n/a' if self.sharpe is None else round(self.sharpe, 2),
            'max_drawdown': round(self.max_drawdown, 2),
            'turnover': round(self.turnover, 2),
        }


def perf_stats(nav) -> Dict[str, Optional[float]]:
    """
    Cumulative return (%), annualised Sharpe ratio with zero risk-free rate,
    and maximum drawdown (%) of a NAV series. Sharpe is None when daily
    returns have no dispersion.
    """
    nav = np.asarray(nav, dtype=float)
    if len(nav) < 2:
        raise ValidationFailed("nav needs at least two points")
    if np.any(~(nav > 0)):
        raise ValidationFailed("nav must stay positive")

    returns = nav[1:] / nav[:-1] - 1.0
    sharpe = None
    if len(returns) > 1:
        std = np.std(returns, ddof=1)
        if std > 1e-12 * max(1.0, abs(np.mean(returns))):
            sharpe = float(np.mean(returns) / std * np.sqrt(TRADING_DAYS_PER_YEAR))
    peaks = np.maximum.accumulate(nav)
    return {
        'cumulative_return': float((nav[-1] / nav[0] - 1.0) * 100),
        'sharpe': sharpe,
        'max_drawdown': float(np.max((peaks - nav) / peaks) * 100),
    }


def _select(factors: pd.Series, k: int, direction: str) -> list:
    ranked = factors.dropna().rename('factor').reset_index()
    ascending = direction == MINIMISE
    ranked = ranked.sort_values(['factor', 'bond_id'], ascending=[ascending, True], kind='mergesort')
    return list(ranked['bond_id'].iloc[:k])


def run_backtest(
    panel: FactorPanel,
    k: int = 10,
    cost: float = 0.001,
    direction: str = MAXIMISE,
) -> BacktestReport:
    """
    Hold the top-k bonds by factor, equal weight, rebalanced at every close.

    A day with fewer than k scored bonds keeps the previous portfolio.
    """
    if k < 1:
        raise ValidationFailed("k must be at least 1")
    if cost < 0:
        raise ValidationFailed("cost must not be negative")
    if direction not in (MAXIMISE, MINIMISE):
        raise ValidationFailed(f"direction must be '{MAXIMISE}' or '{MINIMISE}'")
    prices = panel.prices()
    factors = panel.factors()
    if len(prices.index) < 2:
        raise ValidationFailed("backtest needs at least two days")
    # a bond without a quote keeps its last price, so it contributes no return
    filled = prices.ffill()

    weights = pd.Series(0.0, index=prices.columns)
    nav_prev = 1.0
    nav_values = []
    turnover = []
    holdings_log = []
    prev_day = None
    for day in prices.index:
        if prev_day is None:
            value_before = 1.0
            drifted = weights.copy()
        else:
            growth = (filled.loc[day] / filled.loc[prev_day]).fillna(1.0)
            drifted = nav_prev * weights * growth
            value_before = float(drifted.sum()) + nav_prev * (1.0 - float(weights.sum()))

        selected = _select(factors.loc[day], k, direction)
        if len(selected) < k:
            logger.warning("Day %s has %d scored bonds (< %d); holding previous portfolio", day, len(selected), k)
            target_weights = drifted / value_before if prev_day is not None else weights
            traded = 0.0
        else:
            target_weights = pd.Series(0.0, index=prices.columns)
            target_weights[selected] = 1.0 / k
            traded = float((value_before * target_weights - drifted).abs().sum())

        nav_today = value_before - cost * traded
        nav_values.append(nav_today)
        turnover.append(traded / value_before)
        for bond_id, weight in target_weights[target_weights > 0].items():
            holdings_log.append((day, bond_id, float(weight)))
        weights = target_weights
        nav_prev = nav_today
        prev_day = day

    nav = pd.Series(nav_values, index=prices.index, name=panel.factor_name or 'nav')
    stats = perf_stats(np.concatenate([[1.0], nav.to_numpy()]))
    return BacktestReport(
        nav=nav,
        cumulative_return=(nav.iloc[-1] - 1.0) * 100,
        sharpe=stats['sharpe'],
        max_drawdown=stats['max_drawdown'],
        turnover=float(np.mean(turnover) * 100),
        holdings=pd.DataFrame(holdings_log, columns=['day', 'bond_id', 'weight']),
        factor_name=panel.factor_name,
    )
