"""
Convertible bond term sheets and market quotes.

All dates are trading-day indices counted from the issue date, with
252 trading days per year.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Optional, Tuple

from dotenv import dotenv_values

from .exceptions import ValidationFailed

logger = logging.getLogger(__name__)

TRADING_DAYS_PER_YEAR = 252


class TriggerPrices(NamedTuple):
    call: float
    put: float
    adjust: float


@dataclass(frozen=True)
class BondTerms:
    """
    Full term sheet of a convertible bond.

    Windows are (m, n) pairs: the clause arms once m of the last n closes
    sit beyond the trigger price. ``call_price`` left as None means face
    value plus the coupon accrued in the current coupon year.
    """
    face_value: float
    conversion_price: float
    maturity_days: int
    conversion_start_day: int
    put_start_day: int
    call_trigger_frac: float
    put_trigger_frac: float
    adjust_trigger_frac: float
    call_window: Tuple[int, int]
    put_window: Tuple[int, int]
    adjust_window: Tuple[int, int]
    put_price: float
    redemption_price: float
    call_price: Optional[float] = None
    adjust_probability: float = 0.8
    dividend_yield: float = 0.0
    coupon_rates: Tuple[float, ...] = field(default_factory=tuple)
    name: str = ''

    @property
    def conversion_ratio(self) -> float:
        return conversion_ratio(self)

    @property
    def call_threshold(self) -> float:
        """p_F = m_c / n_c."""
        m, n = self.call_window
        return m / n

    @property
    def put_threshold(self) -> float:
        """p_Y = m_p / n_p."""
        m, n = self.put_window
        return m / n

    @property
    def adjust_threshold(self) -> float:
        m, n = self.adjust_window
        return m / n

    def accrued_coupon(self, day: int) -> float:
        """Flat accrual of the current coupon year's rate."""
        if not self.coupon_rates:
            return 0.0
        year = min(day // TRADING_DAYS_PER_YEAR, len(self.coupon_rates) - 1)
        elapsed = (day - year * TRADING_DAYS_PER_YEAR) / TRADING_DAYS_PER_YEAR
        return self.face_value * self.coupon_rates[year] / 100.0 * min(elapsed, 1.0)

    def coupon_at(self, day: int) -> float:
        """Coupon paid on ``day``; the final coupon is folded into the redemption price."""
        if not self.coupon_rates or day <= 0 or day >= self.maturity_days:
            return 0.0
        if day % TRADING_DAYS_PER_YEAR:
            return 0.0
        year = day // TRADING_DAYS_PER_YEAR - 1
        if year >= len(self.coupon_rates):
            return 0.0
        return self.face_value * self.coupon_rates[year] / 100.0

    def call_price_at(self, day: int) -> float:
        """K_t: the configured call price, or face value plus accrued coupon."""
        if self.call_price is not None:
            return self.call_price
        return self.face_value + self.accrued_coupon(day)

    def with_conversion_price(self, conversion_price: float) -> 'BondTerms':
        """Return a validated copy after a conversion-price reset."""
        return validate_terms(replace(self, conversion_price=float(conversion_price)))


@dataclass(frozen=True)
class MarketQuote:
    day: int
    bond_price: float
    stock_close: float
    conversion_value: float
    premium_rate: float

    @classmethod
    def from_observation(cls, day, bond_price, stock_close, conversion_price, face_value=100.0):
        """Derive conversion value and premium rate from a raw quote row."""
        if conversion_price <= 0 or stock_close <= 0 or bond_price <= 0:
            raise ValidationFailed(f"non-positive quote field at day {day}")
        conversion_value = face_value / conversion_price * stock_close
        premium_rate = (bond_price - conversion_value) / conversion_value
        return cls(
            day=int(day),
            bond_price=float(bond_price),
            stock_close=float(stock_close),
            conversion_value=conversion_value,
            premium_rate=premium_rate,
        )

    def is_consistent(self, face_value: float, conversion_price: float) -> bool:
        expected_cv = face_value / conversion_price * self.stock_close
        if abs(self.conversion_value - expected_cv) > 0.01:
            return False
        expected_pr = (self.bond_price - self.conversion_value) / self.conversion_value
        return abs(self.premium_rate - expected_pr) <= 1e-4


def _check_window(label: str, window: Tuple[int, int], symbols: Tuple[str, str]):
    m, n = window
    if m < 1 or n < 1:
        raise ValidationFailed(f"{label} {m}/{n}: windows must be at least 1")
    if m > n:
        raise ValidationFailed(f"{label} {m}/{n} violates {symbols[0]} ≤ {symbols[1]}")


def validate_terms(terms: BondTerms) -> BondTerms:
    """
    Check every term-sheet invariant and return the terms unchanged.

    Raises ValidationFailed naming the first violated invariant.
    """
    for name in ('face_value', 'conversion_price', 'put_price', 'redemption_price'):
        if not getattr(terms, name) > 0:
            raise ValidationFailed(f"{name} must be positive")
    if terms.call_price is not None and not terms.call_price > 0:
        raise ValidationFailed("call_price must be positive")

    if not terms.put_trigger_frac > 0:
        raise ValidationFailed("put_trigger_frac must be positive")
    if terms.put_trigger_frac > terms.adjust_trigger_frac:
        raise ValidationFailed("put_trigger_frac must not exceed adjust_trigger_frac")
    if not terms.adjust_trigger_frac < 1:
        raise ValidationFailed("adjust_trigger_frac must be below 1")
    if not terms.call_trigger_frac > 1:
        raise ValidationFailed("call_trigger_frac must exceed 1")

    _check_window('call_window', terms.call_window, ('m_c', 'n_c'))
    _check_window('put_window', terms.put_window, ('m_p', 'n_p'))
    _check_window('adjust_window', terms.adjust_window, ('m', 'n'))

    if terms.conversion_start_day < 0:
        raise ValidationFailed("conversion_start_day must not be negative")
    if not terms.conversion_start_day < terms.put_start_day:
        raise ValidationFailed("conversion_start_day must precede put_start_day")
    if not terms.put_start_day <= terms.maturity_days:
        raise ValidationFailed("put_start_day must not exceed maturity_days")

    if not 0 <= terms.adjust_probability <= 1:
        raise ValidationFailed("adjust_probability must lie in [0, 1]")
    if any(rate < 0 for rate in terms.coupon_rates):
        raise ValidationFailed("coupon_rates must not be negative")
    return terms


def conversion_ratio(terms: BondTerms) -> float:
    """m = FV / C_t."""
    return terms.face_value / terms.conversion_price


def trigger_prices(terms: BondTerms) -> TriggerPrices:
    """Call, put and adjustment trigger prices at the prevailing conversion price."""
    c = terms.conversion_price
    return TriggerPrices(
        call=terms.call_trigger_frac * c,
        put=terms.put_trigger_frac * c,
        adjust=terms.adjust_trigger_frac * c,
    )


# Term-sheet file keys mapped to (field, parser)
def _window(raw: str) -> Tuple[int, int]:
    m, sep, n = raw.partition('/')
    if not sep:
        raise ValueError(f"expected m/n, got {raw!r}")
    return int(m), int(n)


def _rates(raw: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in raw.split(',') if part.strip())


TERM_KEYS = {
    'FACE_VALUE': ('face_value', float),
    'CONVERSION_PRICE': ('conversion_price', float),
    'MATURITY_DAYS': ('maturity_days', int),
    'CONVERSION_START_DAY': ('conversion_start_day', int),
    'PUT_START_DAY': ('put_start_day', int),
    'CALL_TRIGGER': ('call_trigger_frac', float),
    'PUT_TRIGGER': ('put_trigger_frac', float),
    'ADJUST_TRIGGER': ('adjust_trigger_frac', float),
    'CALL_WINDOW': ('call_window', _window),
    'PUT_WINDOW': ('put_window', _window),
    'ADJUST_WINDOW': ('adjust_window', _window),
    'PUT_PRICE': ('put_price', float),
    'CALL_PRICE': ('call_price', float),
    'REDEMPTION_PRICE': ('redemption_price', float),
    'ADJUST_PROBABILITY': ('adjust_probability', float),
    'DIVIDEND_YIELD': ('dividend_yield', float),
    'COUPON_RATES': ('coupon_rates', _rates),
    'NAME': ('name', str),
}
OPTIONAL_KEYS = {'CALL_PRICE', 'ADJUST_PROBABILITY', 'DIVIDEND_YIELD', 'COUPON_RATES', 'NAME'}


def terms_from_mapping(values: dict) -> BondTerms:
    """Build validated terms from a KEY -> string mapping."""
    kwargs = {}
    for key, (field_name, parse) in TERM_KEYS.items():
        raw = values.get(key)
        if raw is None or str(raw).strip() == '':
            if key in OPTIONAL_KEYS:
                continue
            raise ValidationFailed(f"missing term-sheet key {key}")
        try:
            kwargs[field_name] = parse(str(raw).strip())
        except ValueError as exc:
            raise ValidationFailed(f"bad value for {key}: {exc}") from exc
    return validate_terms(BondTerms(**kwargs))


def load_terms(path, defaults: Optional[dict] = None) -> BondTerms:
    """Read one bond's term sheet from a KEY=value file; ``defaults`` fill absent keys."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"terms file not found: {path}")
    values = {**(defaults or {}), **dotenv_values(path)}
    terms = terms_from_mapping(values)
    logger.debug("Loaded terms %s from %s", terms.name or '<unnamed>', path)
    return terms
