"""Shared helpers for the location-test statistic modules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError


@dataclass(frozen=True)
class Decision:
    """Outcome of one location test at one hypothesized date."""

    reject: bool
    reject_12: bool
    reject_21: bool


def scaled_ratio(num: float, log_denom: float) -> float:
    """``num / exp(log_denom)`` computed through logs.

    Explosive-coefficient powers in the denominators reach exponents of
    order the sample size, so the quotient is assembled in log space; a
    quotient beyond double range returns a signed infinity sentinel.
    """
    if num == 0.0:
        return 0.0
    e = math.log(abs(num)) - log_denom
    if e > 709.0:
        return math.copysign(math.inf, num)
    if e < -745.0:
        return math.copysign(0.0, num)
    return math.copysign(math.exp(e), num)


def check_finite_t(values: np.ndarray, where: str) -> None:
    if not np.isfinite(values).all():
        raise DegenerateFitError(
            f"undefined t-statistic in {where} (zero sum of squared lags on some range)"
        )
