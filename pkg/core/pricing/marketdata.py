"""
Historical price ingestion and calibration of the daily rate and volatility.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from .exceptions import (
    InsufficientDataError,
    InvalidPriceError,
    MalformedInputError,
    ValidationFailed,
)
from .terms import TRADING_DAYS_PER_YEAR

logger = logging.getLogger(__name__)

MIN_VOLATILITY_CLOSES = 3
QUOTE_COLUMNS = ['day', 'date', 'bond_price', 'stock_close', 'conversion_price']


@dataclass(frozen=True)
class PriceHistory:
    """Closes indexed by strictly increasing trading days."""
    days: np.ndarray
    closes: np.ndarray

    def __post_init__(self):
        days = np.asarray(self.days, dtype=np.int64)
        closes = np.asarray(self.closes, dtype=float)
        if days.shape != closes.shape or days.ndim != 1:
            raise ValidationFailed("days and closes must be 1-d arrays of equal length")
        if np.any(np.diff(days) <= 0):
            raise ValidationFailed("day indices must be strictly increasing")
        bad = np.flatnonzero(~(closes > 0))
        if bad.size:
            raise InvalidPriceError(f"non-positive close at day {days[bad[0]]}", day=int(days[bad[0]]))
        object.__setattr__(self, 'days', days)
        object.__setattr__(self, 'closes', closes)

    def __len__(self):
        return len(self.closes)

    def tail(self, n: int) -> 'PriceHistory':
        return PriceHistory(self.days[-n:], self.closes[-n:])

    def before(self, day: int) -> 'PriceHistory':
        mask = self.days < day
        return PriceHistory(self.days[mask], self.closes[mask])


def annual_to_daily_rate(u: float) -> float:
    """r = (1 + u)^(1/252) - 1."""
    if not u > -1:
        raise ValidationFailed("annual rate must exceed -1")
    return float(np.expm1(np.log1p(u) / TRADING_DAYS_PER_YEAR))


def historical_volatility(
    history: PriceHistory,
    lookback: Optional[int] = TRADING_DAYS_PER_YEAR,
    log_returns: bool = False,
) -> float:
    """
    Daily sample standard deviation of close-to-close returns.

    Simple returns by default; ``log_returns`` switches to ln(S_t / S_{t-1}).
    Only the ``lookback`` most recent closes are used.
    """
    closes = history.closes
    if lookback is not None and len(closes) > lookback:
        closes = closes[-lookback:]
    if len(closes) < MIN_VOLATILITY_CLOSES:
        raise InsufficientDataError(
            f"need at least {MIN_VOLATILITY_CLOSES} closes for volatility, got {len(closes)}"
        )
    if lookback is not None and len(closes) < lookback:
        logger.warning("Volatility estimated from %d closes (lookback %d)", len(closes), lookback)

    if log_returns:
        returns = np.diff(np.log(closes))
    else:
        returns = closes[1:] / closes[:-1] - 1.0
    return float(np.std(returns, ddof=1))


def _read_frame(source, required):
    try:
        frame = pd.read_csv(source, dtype=str, skipinitialspace=True)
    except pd.errors.ParserError as exc:
        raise MalformedInputError(f"unparseable delimited input: {exc}") from exc
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise MalformedInputError(f"missing columns: {', '.join(missing)}", line=1)
    return frame


def _numeric(frame, column, integer=False):
    values = pd.to_numeric(frame[column], errors='coerce')
    bad = values.isna() | ~np.isfinite(values.astype(float))
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        # header is line 1
        raise MalformedInputError(f"malformed {column} on line {row + 2}", line=row + 2)
    if integer:
        if (values % 1 != 0).any():
            row = int(np.flatnonzero((values % 1 != 0).to_numpy())[0])
            raise MalformedInputError(f"non-integer day on line {row + 2}", line=row + 2)
        return values.astype(np.int64)
    return values.astype(float)


def _sorted_by_day(frame: pd.DataFrame, label: str) -> pd.DataFrame:
    if not frame['day'].is_monotonic_increasing:
        logger.warning("%s rows out of day order; re-sorting", label)
        frame = frame.sort_values('day', kind='mergesort').reset_index(drop=True)
    if frame['day'].duplicated().any():
        dup = int(frame.loc[frame['day'].duplicated(), 'day'].iloc[0])
        raise MalformedInputError(f"duplicate {label} row for day {dup}")
    return frame


def load_history(source) -> PriceHistory:
    """Parse a ``day,close`` file into a validated PriceHistory."""
    frame = _read_frame(source, ['day', 'close'])
    frame = pd.DataFrame({
        'day': _numeric(frame, 'day', integer=True),
        'close': _numeric(frame, 'close'),
    })
    frame = _sorted_by_day(frame, 'history')
    bad = frame.loc[frame['close'] <= 0]
    if len(bad):
        day = int(bad['day'].iloc[0])
        raise InvalidPriceError(f"non-positive close at day {day}", day=day)
    return PriceHistory(frame['day'].to_numpy(), frame['close'].to_numpy())


def load_quotes(source) -> pd.DataFrame:
    """
    Parse a market-quote file (day,date,bond_price,stock_close,conversion_price).

    An optional ``model_price`` column is kept for replaying stored model series.
    """
    raw = _read_frame(source, QUOTE_COLUMNS)
    frame = pd.DataFrame({'day': _numeric(raw, 'day', integer=True), 'date': raw['date'].str.strip()})
    for column in ('bond_price', 'stock_close', 'conversion_price'):
        frame[column] = _numeric(raw, column)
    if 'model_price' in raw.columns:
        frame['model_price'] = _numeric(raw, 'model_price')
    frame = _sorted_by_day(frame, 'quote')
    for column in ('bond_price', 'stock_close', 'conversion_price'):
        bad = frame.loc[frame[column] <= 0]
        if len(bad):
            day = int(bad['day'].iloc[0])
            raise InvalidPriceError(f"non-positive {column} at day {day}", day=day)
    return frame
