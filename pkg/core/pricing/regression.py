"""
Least-squares continuation-value regression.

The basis is the nine-term expansion of (S, F, Y):
    S, S^2, F, F^2, Y, Y^2, S*F, S*Y, F*Y
with no intercept unless asked for. Fits can be pooled over all paths
("unified") or done separately on the four stock-price bands split at the
put trigger, the conversion price and the call trigger ("banded").
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .exceptions import ShapeMismatchError, ValidationFailed

logger = logging.getLogger(__name__)

UNIFIED = 'unified'
BANDED = 'banded'

BASES = {
    'full': ('S', 'S2', 'F', 'F2', 'Y', 'Y2', 'SF', 'SY', 'FY'),
    'no_y': ('S', 'S2', 'F', 'F2', 'SF'),
}
# power of S carried by each column, used to undo the price normalisation
S_POWER = {'S': 1, 'S2': 2, 'F': 0, 'F2': 0, 'Y': 0, 'Y2': 0, 'SF': 1, 'SY': 1, 'FY': 0, '1': 0}
BAND_LABELS = ('(-inf, p_t]', '(p_t, C_t]', '(C_t, k_t]', '(k_t, inf)')
MIN_SAMPLES_PER_COEF = 3


def column_names(basis: str, intercept: bool = False) -> Tuple[str, ...]:
    try:
        names = BASES[basis]
    except KeyError:
        raise ValidationFailed(f"unknown basis {basis!r}; expected one of {', '.join(BASES)}")
    return (('1',) if intercept else ()) + names


def _split_states(states) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.asarray(states, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ShapeMismatchError("states must have shape (n, 3) holding (S, F, Y)")
    if arr.shape[0] < 1:
        raise ValidationFailed("at least one state is required")
    bad = np.flatnonzero(~np.isfinite(arr).all(axis=1))
    if bad.size:
        raise ValidationFailed(f"non-finite state on path {bad[0]}")
    return arr[:, 0], arr[:, 1], arr[:, 2]


def build_design(states, basis: str = 'full', intercept: bool = False) -> np.ndarray:
    """Design matrix E, one row per path, columns in the fixed basis order."""
    s, f, y = _split_states(states)
    terms = {
        '1': np.ones_like(s),
        'S': s, 'S2': s * s,
        'F': f, 'F2': f * f,
        'Y': y, 'Y2': y * y,
        'SF': s * f, 'SY': s * y, 'FY': f * y,
    }
    return np.column_stack([terms[name] for name in column_names(basis, intercept)])


def solve_ls(design: np.ndarray, response: np.ndarray) -> np.ndarray:
    """
    Minimise ||E theta - y||^2.

    Uses an SVD-based solver, so rank-deficient systems (for example every
    path with Y = 0) get the minimum-norm solution instead of failing.
    """
    design = np.asarray(design, dtype=float)
    response = np.asarray(response, dtype=float)
    if design.ndim != 2 or response.ndim != 1 or design.shape[0] != response.shape[0]:
        raise ShapeMismatchError(
            f"design {design.shape} and response {response.shape} do not line up"
        )
    if design.shape[0] < 1:
        raise ShapeMismatchError("empty regression")
    theta, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    if rank < design.shape[1]:
        logger.debug("Rank-deficient design (%d of %d); minimum-norm solution", rank, design.shape[1])
    return theta


@dataclass(frozen=True)
class BandFit:
    coef: np.ndarray
    n_samples: int
    fallback: bool = False


@dataclass(frozen=True)
class UnifiedRegression:
    coef: np.ndarray
    basis: str = 'full'
    intercept: bool = False
    scale: float = 1.0
    n_samples: int = 0

    def predict(self, states) -> np.ndarray:
        return _design_scaled(states, self) @ self.coef

    def coefficient_rows(self) -> List[Tuple[str, np.ndarray]]:
        return [('all', _raw_units(self.coef, self))]


@dataclass(frozen=True)
class BandedRegression:
    band_edges: Tuple[float, float, float]
    bands: Tuple[BandFit, ...]
    pooled: UnifiedRegression
    basis: str = 'full'
    intercept: bool = False
    scale: float = 1.0

    @property
    def fallback_flags(self) -> Tuple[bool, ...]:
        return tuple(b.fallback for b in self.bands)

    def band_of(self, prices) -> np.ndarray:
        # right-closed intervals: S == edge falls in the lower band
        return np.searchsorted(np.asarray(self.band_edges), np.asarray(prices, dtype=float), side='left')

    def predict(self, states) -> np.ndarray:
        s, _, _ = _split_states(states)
        design = _design_scaled(states, self)
        band = self.band_of(s)
        out = np.empty(len(s))
        for j, fit_j in enumerate(self.bands):
            mask = band == j
            if mask.any():
                out[mask] = design[mask] @ fit_j.coef
        return out

    def coefficient_rows(self) -> List[Tuple[str, np.ndarray]]:
        return [(BAND_LABELS[j], _raw_units(b.coef, self)) for j, b in enumerate(self.bands)]


Predictor = Union[UnifiedRegression, BandedRegression]


def _design_scaled(states, model) -> np.ndarray:
    s, f, y = _split_states(states)
    return build_design(np.column_stack([s / model.scale, f, y]), model.basis, model.intercept)


def _raw_units(coef: np.ndarray, model) -> np.ndarray:
    powers = np.array([S_POWER[name] for name in column_names(model.basis, model.intercept)])
    return coef / model.scale ** powers


def _check_edges(band_edges) -> Tuple[float, float, float]:
    if band_edges is None or len(band_edges) != 3:
        raise ValidationFailed("banded mode needs three band edges (p_t, C_t, k_t)")
    edges = tuple(float(e) for e in band_edges)
    if not edges[0] < edges[1] < edges[2]:
        raise ValidationFailed("band edges must be strictly increasing")
    return edges


def fit(
    states,
    response,
    mode: str = UNIFIED,
    band_edges=None,
    basis: str = 'full',
    intercept: bool = False,
    scale: float = 1.0,
    min_count: Optional[int] = None,
) -> Predictor:
    """
    Fit the continuation regression.

    In banded mode each band with fewer than ``min_count`` samples
    (default three per coefficient) reuses the pooled fit.
    """
    if not scale > 0:
        raise ValidationFailed("scale must be positive")
    s, f, y = _split_states(states)
    response = np.asarray(response, dtype=float)
    design = build_design(np.column_stack([s / scale, f, y]), basis, intercept)
    pooled = UnifiedRegression(
        coef=solve_ls(design, response), basis=basis, intercept=intercept,
        scale=scale, n_samples=len(s),
    )
    if mode == UNIFIED:
        return pooled
    if mode != BANDED:
        raise ValidationFailed(f"mode must be '{UNIFIED}' or '{BANDED}'")

    edges = _check_edges(band_edges)
    if min_count is None:
        min_count = MIN_SAMPLES_PER_COEF * design.shape[1]
    band = np.searchsorted(np.asarray(edges), s, side='left')
    bands = []
    for j in range(len(edges) + 1):
        mask = band == j
        count = int(mask.sum())
        if count >= min_count:
            bands.append(BandFit(coef=solve_ls(design[mask], response[mask]), n_samples=count))
        else:
            bands.append(BandFit(coef=pooled.coef, n_samples=count, fallback=True))
    return BandedRegression(
        band_edges=edges, bands=tuple(bands), pooled=pooled,
        basis=basis, intercept=intercept, scale=scale,
    )


def predict(predictor: Predictor, state) -> Union[float, np.ndarray]:
    """Continuation estimate for one (S, F, Y) state or an (n, 3) array of them."""
    values = predictor.predict(state)
    if np.ndim(state) == 1:
        return float(values[0])
    return values


def sse(predictor: Predictor, states, response) -> float:
    resid = np.asarray(response, dtype=float) - predictor.predict(states)
    return float(resid @ resid)
