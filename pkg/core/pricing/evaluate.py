"""
Model-versus-market pricing error metrics.
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from .exceptions import InvalidPriceError, ShapeMismatchError, ValidationFailed

REPORT_COLUMNS = ['bond_id', 'MRE', 'MARE', 'RMSE', 'N']


@dataclass(frozen=True)
class ErrorReport:
    """MRE, MARE and RMSE in percent over ``n_obs`` observations."""
    mre: float
    mare: float
    rmse: float
    n_obs: int
    per_day: Optional[pd.Series] = None
    bond_id: str = ''

    def as_row(self, decimals: int = 2) -> List:
        return [
            self.bond_id,
            f"{self.mre:.{decimals}f}",
            f"{self.mare:.{decimals}f}",
            f"{self.rmse:.{decimals}f}",
            self.n_obs,
        ]


def pricing_errors(model, market, bond_id: str = '') -> ErrorReport:
    """
    Relative errors e_i = (model_i - market_i) / market_i summarised as
    mean, mean absolute and root-mean-square, all in percent.
    """
    index = market.index if isinstance(market, pd.Series) else None
    model = np.asarray(model, dtype=float)
    market = np.asarray(market, dtype=float)
    if model.shape != market.shape or model.ndim != 1:
        raise ShapeMismatchError(f"model ({model.shape}) and market ({market.shape}) lengths differ")
    if len(market) < 1:
        raise ValidationFailed("at least one observation is required")
    bad = np.flatnonzero(~(market > 0))
    if bad.size:
        day = index[bad[0]] if index is not None else bad[0]
        raise InvalidPriceError(f"non-positive market price at day {day}", day=day)

    errors = (model - market) / market
    return ErrorReport(
        mre=float(np.mean(errors) * 100),
        mare=float(np.mean(np.abs(errors)) * 100),
        rmse=float(np.sqrt(np.mean(errors ** 2)) * 100),
        n_obs=len(errors),
        per_day=pd.Series(errors, index=index, name='relative_error'),
        bond_id=bond_id,
    )


def mean_report(reports: Iterable[ErrorReport]) -> ErrorReport:
    """The closing "Mean" row: arithmetic mean of each metric, N summed."""
    reports = list(reports)
    if not reports:
        raise ValidationFailed("no reports to average")
    return ErrorReport(
        mre=float(np.mean([r.mre for r in reports])),
        mare=float(np.mean([r.mare for r in reports])),
        rmse=float(np.mean([r.rmse for r in reports])),
        n_obs=sum(r.n_obs for r in reports),
        bond_id='Mean',
    )


def report_frame(reports: Iterable[ErrorReport], decimals: int = 2) -> pd.DataFrame:
    return pd.DataFrame([r.as_row(decimals) for r in reports], columns=REPORT_COLUMNS)
