"""
Backward-induction valuation of a convertible bond over simulated paths.

At each exercise day the discounted next-day value is regressed on the
(S, F, Y) basis and every path compares conversion, continuation and (when
armed) putback; once the call clause is armed the holder only chooses
between converting and surrendering at the call price. A put-clause path may
additionally see the conversion price reset downwards with a fixed
probability. Values propagate as in the recursion
    V_t = max(m S_t, y_hat_t, P_t 1{Y_t >= p_Y})
unless the classic cash-flow propagation is requested.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional

import numpy as np
import pandas as pd

from .exceptions import ValidationFailed
from .regression import BANDED, UNIFIED, column_names, fit
from .simulation import DEFAULT_MAX_CELLS, GbmParams, simulate, uniform_block
from .terms import BondTerms, trigger_prices, validate_terms
from .triggers import compute_signals

logger = logging.getLogger(__name__)

MIN_PATHS = 100
ADJUST_LOOKBACK = 20

CONTINUATION = 'continuation'
FORCED_REDEMPTION = 'forced_redemption'
FORCED_CONVERSION = 'forced_conversion'
PUTBACK = 'putback'
VOLUNTARY_CONVERSION = 'voluntary_conversion'
REDEMPTION_AT_MATURITY = 'redemption_at_maturity'
CONVERSION_AT_MATURITY = 'conversion_at_maturity'

# integer codes used on the path vectors; index into ACTIONS
ACTIONS = (
    CONTINUATION,
    FORCED_REDEMPTION,
    FORCED_CONVERSION,
    PUTBACK,
    VOLUNTARY_CONVERSION,
    REDEMPTION_AT_MATURITY,
    CONVERSION_AT_MATURITY,
)
_CODE = {name: code for code, name in enumerate(ACTIONS)}
TERMINAL_ACTIONS = ACTIONS[1:]
EXERCISE_ACTIONS = ACTIONS[1:5]


class Decision(NamedTuple):
    value: float
    action: str


class AdjustedDecision(NamedTuple):
    value: float
    action: str
    conversion_ratio: float
    adjusted: bool


@dataclass(frozen=True)
class PricingOptions:
    mode: str = UNIFIED
    adjust_enabled: bool = True
    adjust_probability: Optional[float] = None
    adjust_signal: str = 'put'
    basis: str = 'full'
    intercept: bool = False
    propagation: str = 'value'
    printed_drift: bool = False
    antithetic: bool = False
    include_coupons: bool = False
    min_band_count: Optional[int] = None
    workers: int = 1
    max_cells: int = DEFAULT_MAX_CELLS
    record_coefficients: bool = False

    def __post_init__(self):
        if self.mode not in (UNIFIED, BANDED):
            raise ValidationFailed(f"mode must be '{UNIFIED}' or '{BANDED}'")
        if self.propagation not in ('value', 'cashflow'):
            raise ValidationFailed("propagation must be 'value' or 'cashflow'")
        if self.adjust_signal not in ('put', 'reset_clause'):
            raise ValidationFailed("adjust_signal must be 'put' or 'reset_clause'")
        if self.adjust_probability is not None and not 0 <= self.adjust_probability <= 1:
            raise ValidationFailed("adjust_probability must lie in [0, 1]")
        if self.workers < 1:
            raise ValidationFailed("workers must be at least 1")


@dataclass
class PricingResult:
    price: float
    std_error: float
    n_paths: int
    action_counts: Dict[str, int]
    diagnostics: pd.DataFrame
    seed: int = 0
    coefficients: Optional[pd.DataFrame] = field(default=None, repr=False)

    def summary_rows(self):
        """Key-value rows for the structured result output."""
        rows = [
            ('price', f"{self.price:.6f}"),
            ('std_error', f"{self.std_error:.6f}"),
            ('n_paths', str(self.n_paths)),
            ('seed', str(self.seed)),
        ]
        rows.extend((name, str(self.action_counts[name])) for name in TERMINAL_ACTIONS)
        return rows


def terminal_value(s_t, m, b):
    """V_T = max(m S_T, B)."""
    return np.maximum(np.multiply(m, s_t), b)


def _put_armed(terms: BondTerms, day: int, put_frac) -> np.ndarray:
    return (day >= terms.put_start_day) & (np.asarray(put_frac) >= terms.put_threshold)


def decide(day: int, state, continuation: float, terms: BondTerms, conversion_ratio: Optional[float] = None) -> Decision:
    """
    Exercise decision for a single path.

    Ties resolve to continuation, then putback, then conversion.
    """
    s, f, y = state
    m = terms.conversion_ratio if conversion_ratio is None else conversion_ratio
    conversion = m * s
    if f >= terms.call_threshold:
        call_price = terms.call_price_at(day)
        if conversion > call_price:
            return Decision(conversion, FORCED_CONVERSION)
        return Decision(call_price, FORCED_REDEMPTION)

    value, action = continuation, CONTINUATION
    if _put_armed(terms, day, y) and terms.put_price > value:
        value, action = terms.put_price, PUTBACK
    if conversion > value:
        value, action = conversion, VOLUNTARY_CONVERSION
    return Decision(value, action)


def adjusted_conversion_price(closes) -> float:
    """max(mean of the last 20 closes, last close); fewer closes are averaged as available."""
    closes = np.asarray(closes, dtype=float)
    return float(max(closes[-ADJUST_LOOKBACK:].mean(), closes[-1]))


def downward_adjust(
    day: int,
    closes,
    state,
    continuation: float,
    terms: BondTerms,
    draw: float,
    probability: Optional[float] = None,
) -> AdjustedDecision:
    """
    Decision on a path whose put window is fully below the trigger.

    With probability p (draw < p) the conversion price resets to
    max(20-day average, last close) and the decision is taken with the new
    ratio; otherwise the standard rule applies. ``closes`` ends at day t and
    may start with observed warm-up closes.
    """
    p = terms.adjust_probability if probability is None else probability
    if draw < p and state[1] < terms.call_threshold:
        ratio = terms.face_value / adjusted_conversion_price(closes)
        decision = decide(day, state, continuation, terms, ratio)
        return AdjustedDecision(decision.value, decision.action, ratio, True)
    decision = decide(day, state, continuation, terms)
    return AdjustedDecision(decision.value, decision.action, terms.conversion_ratio, False)


def _decide_paths(day, s, f, y, continuation, ratio, terms):
    """Vectorised ``decide``; ``ratio`` may be a scalar or a per-path array."""
    conversion = ratio * s
    call_price = terms.call_price_at(day)
    forced = f >= terms.call_threshold

    value = continuation.copy()
    code = np.full(len(s), _CODE[CONTINUATION], dtype=np.int8)
    put = _put_armed(terms, day, y) & (terms.put_price > value)
    value[put] = terms.put_price
    code[put] = _CODE[PUTBACK]
    conv = conversion > value
    value[conv] = conversion[conv]
    code[conv] = _CODE[VOLUNTARY_CONVERSION]

    forced_conv = forced & (conversion > call_price)
    forced_red = forced & ~forced_conv
    value[forced_conv] = conversion[forced_conv]
    code[forced_conv] = _CODE[FORCED_CONVERSION]
    value[forced_red] = call_price
    code[forced_red] = _CODE[FORCED_REDEMPTION]
    return value, code


def _recent_mean(prices, warmup, t, rows):
    """Mean of the last ADJUST_LOOKBACK closes up to day t, reaching into warm-up if needed."""
    start = t + 1 - ADJUST_LOOKBACK
    if start >= 0:
        return prices[rows, start:t + 1].mean(axis=1)
    need = -start
    warm = warmup[len(warmup) - min(len(warmup), need):]
    total = prices[rows, :t + 1].sum(axis=1) + warm.sum()
    return total / (t + 1 + len(warm))


def price(
    terms: BondTerms,
    s0: float,
    r: float,
    q: Optional[float],
    sigma: float,
    n_paths: int,
    seed: int,
    options: Optional[PricingOptions] = None,
    warmup=None,
    valuation_day: int = 0,
) -> PricingResult:
    """
    Price the bond at ``valuation_day`` (a term-sheet day index).

    ``r``, ``q`` and ``sigma`` are per trading day; ``q`` defaults to the
    term sheet's dividend yield. ``warmup`` holds observed closes before the
    valuation day, oldest first.
    """
    options = options or PricingOptions()
    validate_terms(terms)
    if n_paths < MIN_PATHS:
        raise ValidationFailed(f"M must be ≥ {MIN_PATHS}")
    horizon = terms.maturity_days - valuation_day
    if horizon < 1:
        raise ValidationFailed(f"valuation day {valuation_day} is not before maturity")
    q = terms.dividend_yield if q is None else q
    warm = np.asarray([] if warmup is None else warmup, dtype=float)

    grid = simulate(
        GbmParams(
            s0=s0, r=r, q=q, sigma=sigma, horizon_days=horizon, n_paths=n_paths, seed=seed,
            antithetic=options.antithetic, printed_drift=options.printed_drift,
        ),
        max_cells=options.max_cells,
        workers=options.workers,
    )
    reset_clause = options.adjust_signal == 'reset_clause'
    signals = compute_signals(grid, terms, warm, include_adjust=reset_clause)
    prices = grid.prices

    m = terms.conversion_ratio
    triggers = trigger_prices(terms)
    band_edges = (triggers.put, terms.conversion_price, triggers.call)
    p_adjust = terms.adjust_probability if options.adjust_probability is None else options.adjust_probability
    adjusting = options.adjust_enabled and p_adjust > 0
    discount = np.exp(-r)
    first_exercise = max(terms.conversion_start_day - valuation_day, 0)

    value = terminal_value(prices[:, -1], m, terms.redemption_price)
    stop_code = np.where(
        m * prices[:, -1] > terms.redemption_price,
        _CODE[CONVERSION_AT_MATURITY],
        _CODE[REDEMPTION_AT_MATURITY],
    ).astype(np.int8)

    daily = []
    coef_rows = []
    for t in range(horizon - 1, -1, -1):
        day = valuation_day + t
        coupon = terms.coupon_at(day + 1) if options.include_coupons else 0.0
        discounted = discount * (value + coupon)
        if t < first_exercise:
            value = discounted
            continue

        s = prices[:, t]
        f = signals.call_frac[:, t]
        y = signals.put_frac[:, t]
        states = np.column_stack([s, f, y])
        predictor = fit(
            states, discounted, mode=options.mode, band_edges=band_edges,
            basis=options.basis, intercept=options.intercept,
            scale=terms.conversion_price, min_count=options.min_band_count,
        )
        continuation = predictor.predict(states)
        new_value, code = _decide_paths(day, s, f, y, continuation, m, terms)

        n_adjusted = 0
        if adjusting:
            if reset_clause:
                eligible = signals.adjust_frac[:, t] >= signals.adjust_threshold
            else:
                eligible = y >= 1.0
            rows = np.flatnonzero(eligible & (f < terms.call_threshold))
            if rows.size:
                draws = uniform_block(seed, rows, [day])[:, 0]
                hit = rows[draws < p_adjust]
                if hit.size:
                    c_hat = np.maximum(_recent_mean(prices, warm, t, hit), s[hit])
                    new_value[hit], code[hit] = _decide_paths(
                        day, s[hit], np.zeros(hit.size), y[hit], continuation[hit],
                        terms.face_value / c_hat, terms,
                    )
                    n_adjusted = int(hit.size)

        continuing = code == _CODE[CONTINUATION]
        if options.propagation == 'cashflow' or t == 0:
            # continuing paths carry the realised discounted value
            new_value[continuing] = discounted[continuing]
        value = new_value
        stop_code[~continuing] = code[~continuing]

        counts = np.bincount(code, minlength=len(ACTIONS))
        row = {'day': day, **{name: int(counts[_CODE[name]]) for name in EXERCISE_ACTIONS}}
        row['adjusted'] = n_adjusted
        row['fallback_bands'] = sum(getattr(predictor, 'fallback_flags', ()))
        daily.append(row)
        if options.record_coefficients:
            for band, coef in predictor.coefficient_rows():
                coef_rows.append([day, band, *coef])

    std_error = float(np.std(value, ddof=1) / np.sqrt(n_paths))
    final_counts = np.bincount(stop_code, minlength=len(ACTIONS))
    action_counts = {name: int(final_counts[_CODE[name]]) for name in TERMINAL_ACTIONS}

    diagnostics = pd.DataFrame(
        daily, columns=['day', *EXERCISE_ACTIONS, 'adjusted', 'fallback_bands'],
    ).sort_values('day').set_index('day')
    coefficients = None
    if options.record_coefficients:
        names = list(column_names(options.basis, options.intercept))
        coefficients = pd.DataFrame(coef_rows, columns=['day', 'band', *names]).sort_values(['day', 'band'])

    result = PricingResult(
        price=float(np.mean(value)),
        std_error=std_error,
        n_paths=n_paths,
        action_counts=action_counts,
        diagnostics=diagnostics,
        seed=seed,
        coefficients=coefficients,
    )
    logger.info(
        "Priced %s at day %d: %.4f (se %.4f, %d paths, %s)",
        terms.name or 'bond', valuation_day, result.price, result.std_error, n_paths, options.mode,
    )
    return result
