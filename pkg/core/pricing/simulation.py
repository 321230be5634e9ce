"""
Risk-neutral geometric Brownian motion on a daily grid.

Noise is counter-based: the deviate for (path i, day t) is a pure function
of (seed, stream, i, t), obtained by hashing the counter with splitmix64 and
feeding two hashed uniforms through Box-Muller. Any block of paths can be
generated on its own, so results do not depend on how the work is split.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .exceptions import CapacityError, PricingError, ValidationFailed

logger = logging.getLogger(__name__)

NORMAL_STREAM = 0x5EED0001
ADJUST_STREAM = 0x5EED0002

DEFAULT_MAX_CELLS = 60_000_000
PATH_BLOCK = 4096

_MASK64 = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO_POW_53 = float(2 ** 53)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over='ignore'):
        z = x + _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _path_keys(seed: int, stream: int, paths) -> np.ndarray:
    base = _splitmix64(np.array([(int(seed) & _MASK64) ^ stream], dtype=np.uint64))
    return _splitmix64(base ^ np.asarray(paths, dtype=np.uint64))


def _uniform_bits(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """53-bit uniforms in (0, 1) for every (key, counter) pair by broadcasting."""
    h = _splitmix64(keys[:, None] ^ _splitmix64(counters.astype(np.uint64))[None, :])
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) / _TWO_POW_53


def normal_block(seed: int, paths, days, stream: int = NORMAL_STREAM) -> np.ndarray:
    """Standard normal deviates for every path in ``paths`` and day in ``days``."""
    keys = _path_keys(seed, stream, np.atleast_1d(paths))
    days = np.atleast_1d(np.asarray(days, dtype=np.int64))
    u1 = _uniform_bits(keys, 2 * days)
    u2 = _uniform_bits(keys, 2 * days + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def uniform_block(seed: int, paths, days, stream: int = ADJUST_STREAM) -> np.ndarray:
    """Uniforms on [0, 1) addressed the same way as ``normal_block``."""
    keys = _path_keys(seed, stream, np.atleast_1d(paths))
    days = np.atleast_1d(np.asarray(days, dtype=np.int64))
    h = _splitmix64(keys[:, None] ^ _splitmix64(days.astype(np.uint64))[None, :])
    return (h >> np.uint64(11)).astype(np.float64) / _TWO_POW_53


def normal_stream(seed: int, path_index: int, day: int) -> float:
    return float(normal_block(seed, [path_index], [day])[0, 0])


@dataclass(frozen=True)
class GbmParams:
    """Daily-grid GBM inputs; r, q and sigma are per trading day."""
    s0: float
    r: float
    q: float
    sigma: float
    horizon_days: int
    n_paths: int
    seed: int = 0
    antithetic: bool = False
    printed_drift: bool = False

    def __post_init__(self):
        if not self.s0 > 0:
            raise ValidationFailed("s0 must be positive")
        if self.sigma < 0:
            raise ValidationFailed("sigma must not be negative")
        if self.horizon_days < 1:
            raise ValidationFailed("horizon_days must be at least 1")
        if self.n_paths < 1:
            raise ValidationFailed("n_paths must be at least 1")
        if self.antithetic and self.n_paths % 2:
            raise ValidationFailed("antithetic sampling needs an even n_paths")

    @property
    def drift(self) -> float:
        """Per-day log drift; the printed variant subtracts sigma^2 instead of sigma^2 / 2."""
        convexity = self.sigma ** 2 if self.printed_drift else 0.5 * self.sigma ** 2
        return self.r - self.q - convexity


@dataclass(frozen=True)
class PathGrid:
    prices: np.ndarray
    params: GbmParams

    @property
    def n_paths(self) -> int:
        return self.prices.shape[0]

    @property
    def horizon_days(self) -> int:
        return self.prices.shape[1] - 1

    def terminal(self) -> np.ndarray:
        return self.prices[:, -1]

    def to_csv(self, path_or_buf) -> None:
        """Debug dump, one path per row."""
        frame = pd.DataFrame(self.prices, columns=[f"d{t}" for t in range(self.prices.shape[1])])
        frame.index.name = 'path'
        frame.to_csv(path_or_buf, float_format='%.10g')


def _simulate_block(params: GbmParams, paths: np.ndarray) -> np.ndarray:
    days = np.arange(1, params.horizon_days + 1)
    if params.antithetic:
        half = params.n_paths // 2
        source = np.where(paths < half, paths, paths - half)
        z = normal_block(params.seed, source, days)
        z[paths >= half] *= -1.0
    else:
        z = normal_block(params.seed, paths, days)
    log_steps = np.empty((len(paths), params.horizon_days + 1))
    log_steps[:, 0] = 0.0
    log_steps[:, 1:] = params.drift + params.sigma * z
    return params.s0 * np.exp(np.cumsum(log_steps, axis=1))


def simulate(
    params: GbmParams,
    max_cells: int = DEFAULT_MAX_CELLS,
    workers: int = 1,
) -> PathGrid:
    """
    Generate an n_paths x (horizon_days + 1) price grid.

    Path blocks may be spread over ``workers`` threads; output is identical
    for any worker count.

    Prices are ``s0 * exp(cumsum(log steps))``, so scaling ``s0`` by c scales
    the grid by c up to one rounding per cell (exactly for powers of two).
    """
    cells = params.n_paths * (params.horizon_days + 1)
    if cells > max_cells:
        raise CapacityError(
            f"grid of {params.n_paths} x {params.horizon_days + 1} exceeds cap of {max_cells} cells"
        )

    starts = range(0, params.n_paths, PATH_BLOCK)
    blocks = [np.arange(s, min(s + PATH_BLOCK, params.n_paths)) for s in starts]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _simulate_block(params, b), blocks))
    else:
        parts = [_simulate_block(params, b) for b in blocks]
    prices = np.vstack(parts)

    if not np.all(prices > 0):
        raise PricingError("simulated price underflowed to zero; sigma or horizon too large")
    logger.debug("Simulated %d paths over %d days (seed %d)", params.n_paths, params.horizon_days, params.seed)
    return PathGrid(prices=prices, params=params)


def martingale_check(grid: PathGrid) -> dict:
    """Sample mean of S_T against s0 * exp((r - q) T) with its standard error."""
    terminal = grid.terminal()
    p = grid.params
    expected = p.s0 * np.exp((p.r - p.q) * p.horizon_days)
    std = float(np.std(terminal, ddof=1)) if len(terminal) > 1 else 0.0
    return {
        'mean': float(np.mean(terminal)),
        'std': std,
        'std_error': std / np.sqrt(len(terminal)),
        'expected': float(expected),
    }
