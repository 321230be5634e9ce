"""
Least-squares Monte Carlo pricing of convertible bonds.

Pure numerical engine; nothing in this package imports Django.
"""

from .exceptions import (
    CapacityError,
    InsufficientDataError,
    InvalidPriceError,
    MalformedInputError,
    PricingError,
    ShapeMismatchError,
    ValidationFailed,
)
from .pricer import PricingOptions, PricingResult, price
from .terms import BondTerms, load_terms, validate_terms

__all__ = [
    'BondTerms',
    'CapacityError',
    'InsufficientDataError',
    'InvalidPriceError',
    'MalformedInputError',
    'PricingError',
    'PricingOptions',
    'PricingResult',
    'ShapeMismatchError',
    'ValidationFailed',
    'load_terms',
    'price',
    'validate_terms',
]
