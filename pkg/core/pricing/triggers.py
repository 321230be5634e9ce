"""
Rolling trigger fractions for the call, put and reset clauses.

F_t is the share of the last n_c closes strictly above the call trigger
price, Y_t the share of the last n_p closes strictly below the put trigger
price. Observed closes before the valuation day (warm-up) fill the early
windows; without them the window is partial.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import ValidationFailed
from .simulation import PathGrid
from .terms import BondTerms, trigger_prices

ABOVE = 'above'
BELOW = 'below'


@dataclass(frozen=True)
class PathSignals:
    call_frac: np.ndarray
    put_frac: np.ndarray
    thresholds: Tuple[float, float]
    adjust_frac: Optional[np.ndarray] = None
    adjust_threshold: Optional[float] = None

    @property
    def call_threshold(self) -> float:
        return self.thresholds[0]

    @property
    def put_threshold(self) -> float:
        return self.thresholds[1]


def _indicator(prices: np.ndarray, trigger: float, direction: str) -> np.ndarray:
    if direction == ABOVE:
        return prices > trigger
    if direction == BELOW:
        return prices < trigger
    raise ValidationFailed(f"direction must be '{ABOVE}' or '{BELOW}'")


def rolling_fraction_matrix(
    prices: np.ndarray,
    trigger: float,
    window: int,
    direction: str,
    warmup=None,
) -> np.ndarray:
    """Row-wise rolling fraction; ``warmup`` is one observed prefix shared by every row."""
    if window < 1:
        raise ValidationFailed("window must be at least 1")
    if not trigger > 0:
        raise ValidationFailed("trigger price must be positive")
    prices = np.atleast_2d(np.asarray(prices, dtype=float))
    if prices.shape[1] == 0:
        raise ValidationFailed("price series is empty")

    hits = _indicator(prices, trigger, direction)
    warm = np.asarray([] if warmup is None else warmup, dtype=float)
    # only the last window - 1 warm-up closes can reach into day 0's window
    warm = warm[len(warm) - min(len(warm), window - 1):]
    w = len(warm)
    counts = np.zeros((prices.shape[0], w + prices.shape[1] + 1), dtype=np.int64)
    if w:
        counts[:, 1:w + 1] = np.cumsum(_indicator(warm, trigger, direction))[None, :]
    counts[:, w + 1:] = counts[:, w:w + 1] + np.cumsum(hits, axis=1)

    ends = w + np.arange(prices.shape[1]) + 1
    starts = np.maximum(ends - window, 0)
    return (counts[:, ends] - counts[:, starts]) / (ends - starts)


def rolling_fraction(path, trigger: float, window: int, direction: str = ABOVE, warmup=None) -> np.ndarray:
    """
    Fraction of the most recent min(available, window) closes beyond the trigger.

    Day t's own close is included, and so are warm-up closes.
    """
    return rolling_fraction_matrix(np.asarray(path, dtype=float)[None, :], trigger, window, direction, warmup)[0]


def compute_signals(
    grid: PathGrid,
    terms: BondTerms,
    warmup=None,
    include_adjust: bool = False,
) -> PathSignals:
    """F_t over n_c against the call trigger, Y_t over n_p against the put trigger."""
    triggers = trigger_prices(terms)
    call_frac = rolling_fraction_matrix(grid.prices, triggers.call, terms.call_window[1], ABOVE, warmup)
    put_frac = rolling_fraction_matrix(grid.prices, triggers.put, terms.put_window[1], BELOW, warmup)
    adjust_frac = None
    adjust_threshold = None
    if include_adjust:
        adjust_frac = rolling_fraction_matrix(grid.prices, triggers.adjust, terms.adjust_window[1], BELOW, warmup)
        adjust_threshold = terms.adjust_threshold
    return PathSignals(
        call_frac=call_frac,
        put_frac=put_frac,
        thresholds=(terms.call_threshold, terms.put_threshold),
        adjust_frac=adjust_frac,
        adjust_threshold=adjust_threshold,
    )
