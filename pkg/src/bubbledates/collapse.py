"""Location tests for the collapse date on the segment (t_e, t_r].

The hypothesized date t1 splits the segment into an explosive part and a
mean-reverting part.  Numerators use the recentered form
``2 * sum y_{t-1} dy_t + (2 - phi_a_hat - phi_b_hat) * sum y_{t-1}^2``.
Tails are flipped relative to the emergence tests: 12-statistics reject in
the RIGHT tail (they diverge when the true collapse is later than t1) and
21-statistics reject in the LEFT tail.  Both closed-form critical values are
chi-square based, so no response surfaces enter here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._stat_utils import Decision, check_finite_t, scaled_ratio
from .errors import DegenerateFitError, ParameterError, RangeError
from .estimation import RegimeFit
from .model import PrefixSums, Series, prefix_sums

__all__ = ["CollapseStats", "collapse_stats", "collapse_decision"]

VARIANTS = ("LRa", "EMa", "EMb")


@dataclass(frozen=True)
class CollapseStats:
    """Statistics for H0: collapse at ``t1`` (right tail: 12, left tail: 21)."""

    t1: int
    lr_a12: float
    em_a12: float
    em_b12: float
    lr_a21: float
    em_a21: float
    em_b21: float

    def pair(self, variant: str) -> tuple[float, float]:
        """(right-tail statistic, left-tail statistic) for a test variant."""
        try:
            return {
                "LRa": (self.lr_a12, self.lr_a21),
                "EMa": (self.em_a12, self.em_a21),
                "EMb": (self.em_b12, self.em_b21),
            }[variant]
        except KeyError:
            raise ParameterError(f"unknown collapse variant {variant!r}") from None


def _check_fit(fit: RegimeFit) -> None:
    if not fit.sigma2_hat > 0:
        raise DegenerateFitError(f"sigma2_hat={fit.sigma2_hat} must be positive")
    if not fit.rho_a_hat > 0:
        raise DegenerateFitError(f"phi_a_hat={fit.phi_a_hat} <= 1: no explosive regime")
    if not fit.rho_b_hat > 0:
        raise DegenerateFitError(f"phi_b_hat={fit.phi_b_hat} >= 1: no collapsing regime")
    if not fit.phi_a_hat - fit.phi_b_hat > 0:
        raise DegenerateFitError(
            f"phi_a_hat - phi_b_hat = {fit.phi_a_hat - fit.phi_b_hat} must be positive"
        )


def _side12(ps, fit, t_e, t_r, t1, m, big_t):
    t2 = np.arange(t1 + m, t_r + 1)
    if t2.size == 0:
        return None
    ydy = ps.s_ydy[t2] - ps.s_ydy[t1]
    y2 = ps.s_y2[t2] - ps.s_y2[t1]
    gap = 2.0 - fit.phi_a_hat - fit.phi_b_hat
    num = 2.0 * ydy + gap * y2
    log_phi_pow = 2.0 * (t1 - t_e) * math.log(fit.phi_a_hat)
    lr_den = (
        math.log(big_t)
        + math.log(fit.phi_a_hat - fit.phi_b_hat)
        + log_phi_pow
        + math.log(fit.sigma2_hat)
        - math.log(2.0 * fit.rho_b_hat)
    )
    lr_a12 = scaled_ratio(float(num.max()), lr_den)
    with np.errstate(divide="ignore", invalid="ignore"):
        t12 = ydy / (math.sqrt(fit.sigma2_hat) * np.sqrt(y2))
    check_finite_t(t12, "collapse 12-scan")
    em_den = 0.5 * (
        math.log(big_t) + math.log(fit.rho_b_hat) + log_phi_pow - math.log(2.0)
    )
    return {
        "lr_a12": lr_a12,
        "em_a12": scaled_ratio(float(t12.mean()), em_den),
        "em_b12": scaled_ratio(float(t12.max()), em_den),
    }


def _side21(ps, fit, t_e, t1, m, big_t):
    # The backward scan starts at the first observation of the segment.
    t2 = np.arange(t_e + 1, t1 - m + 1)
    if t2.size == 0:
        return None
    ydy = ps.s_ydy[t1] - ps.s_ydy[t2]
    y2 = ps.s_y2[t1] - ps.s_y2[t2]
    gap = 2.0 - fit.phi_a_hat - fit.phi_b_hat
    num = 2.0 * ydy + gap * y2
    log_phi_pow = 2.0 * (t1 - t_e) * math.log(fit.phi_a_hat)
    lr_den = (
        math.log(big_t)
        + math.log(fit.phi_a_hat - fit.phi_b_hat)
        + log_phi_pow
        + math.log(fit.sigma2_hat)
        - math.log(2.0 * fit.rho_a_hat)
    )
    lr_a21 = scaled_ratio(float(num.min()), lr_den)
    with np.errstate(divide="ignore", invalid="ignore"):
        t21 = ydy / (math.sqrt(fit.sigma2_hat) * np.sqrt(y2))
    check_finite_t(t21, "collapse 21-scan")
    em_den = 0.5 * (
        math.log(big_t) + math.log(fit.rho_a_hat) + log_phi_pow - math.log(2.0)
    )
    return {
        "lr_a21": lr_a21,
        "em_a21": scaled_ratio(float(t21.mean()), em_den),
        "em_b21": scaled_ratio(float(t21.min()), em_den),
    }


def collapse_stats(
    series: Series,
    fit: RegimeFit,
    t_e: int,
    t_r: int,
    t1: int,
    eps: float = 0.1,
    prefix: PrefixSums | None = None,
) -> CollapseStats:
    """Compute all collapse statistics at one hypothesized date.

    ``t_e`` and ``t_r`` bound the segment (true or estimated); the trimming
    unit is ``t_bc = t_r - t_e``.  Requires positive ``rho_a_hat``,
    ``rho_b_hat`` and ``phi_a_hat - phi_b_hat``.
    """
    big_t = series.sample_size
    if not 1 <= t_e < t_r <= big_t:
        raise ParameterError(f"invalid segment ({t_e}, {t_r}] for sample size {big_t}")
    m = math.floor((t_r - t_e) * eps)
    if m < 2:
        raise ParameterError(
            f"floor(t_bc * eps) = {m} < 2; segment too short for trimming eps={eps}"
        )
    _check_fit(fit)
    ps = prefix if prefix is not None else prefix_sums(series)
    s12 = _side12(ps, fit, t_e, t_r, t1, m, big_t)
    s21 = _side21(ps, fit, t_e, t1, m, big_t)
    if s12 is None:
        raise RangeError(f"empty forward scan range at t1={t1} (t1 + {m} > t_r={t_r})")
    if s21 is None:
        raise RangeError(f"empty backward scan range at t1={t1} (t1 - {m} <= t_e={t_e})")
    return CollapseStats(t1=t1, **s12, **s21)


def collapse_decision(
    stats: CollapseStats, cvs: tuple[float, float], variant: str = "EMa"
) -> Decision:
    """Reject iff the 12-statistic exceeds ``cvs[0]`` or the 21-statistic
    falls below ``cvs[1]``.

    The 12 critical values are negative and the 21 ones positive (both limits
    are sign-definite), so each one-sided test has positive rejection
    probability against either misplacement.  Comparisons are strict.
    """
    s12, s21 = stats.pair(variant)
    cv12, cv21 = cvs
    r12 = bool(s12 > cv12)
    r21 = bool(s21 < cv21)
    return Decision(reject=r12 or r21, reject_12=r12, reject_21=r21)
