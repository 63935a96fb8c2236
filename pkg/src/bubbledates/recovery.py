"""Location tests for the recovery date on the segment (t_c, T].

The hypothesized date t1 splits the segment into a collapsing part and the
final unit-root part.  Scalings carry the accumulated explosive growth
``phi_a_hat^(2*(t_c - t_e))`` times decaying collapse powers of ``phi_b_hat``,
all assembled in log space.  The backward scan range is trimmed on BOTH
sides: ``t_c + floor(t_cu * eps) <= t2 <= t1 - floor(t_cu * eps)``.

Critical values follow the conservative policy for the unobservable ordering
of the explosive and collapse rates: the LR bounds come from the
chi-square closed forms, the extremum-t 12-statistics from response surfaces
fit under the faster-collapse regime (whose quantiles are the smaller ones),
and the 21-statistics reject above the negative closed-form bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._stat_utils import Decision, check_finite_t, scaled_ratio
from .errors import DegenerateFitError, ParameterError, RangeError
from .estimation import RegimeFit
from .model import BreakDates, PrefixSums, Series, prefix_sums

__all__ = ["RecoveryStats", "recovery_stats", "recovery_decision"]

VARIANTS = ("LRa", "EMa", "EMb", "LE")


@dataclass(frozen=True)
class RecoveryStats:
    """Statistics for H0: recovery at ``t1`` (left tail: 12, right tail: 21)."""

    t1: int
    lr_a12: float
    em_a12: float
    em_b12: float
    lr_a21: float
    lr_b21: float
    em_a21: float
    em_b21: float
    t_lra12: int
    t_lra21: int
    t_lrb21: int
    t_emb21: int

    def pair(self, variant: str) -> tuple[float, float]:
        """(left-tail statistic, right-tail statistic) for a test variant."""
        try:
            return {
                "LRa": (self.lr_a12, self.lr_a21),
                "EMa": (self.em_a12, self.em_a21),
                "EMb": (self.em_b12, self.em_b21),
                "LE": (self.em_b12, self.lr_b21),
            }[variant]
        except KeyError:
            raise ParameterError(f"unknown recovery variant {variant!r}") from None


def _check_fit(fit: RegimeFit) -> None:
    if not fit.sigma2_hat > 0:
        raise DegenerateFitError(f"sigma2_hat={fit.sigma2_hat} must be positive")
    if not 0.0 < fit.phi_b_hat < 1.0:
        raise DegenerateFitError(
            f"phi_b_hat={fit.phi_b_hat} outside (0, 1): no collapsing regime"
        )
    if not fit.phi_a_hat > 0:
        raise DegenerateFitError(f"phi_a_hat={fit.phi_a_hat} must be positive")


def _side12(ps, fit, breaks, t1, m, big_t):
    t2 = np.arange(t1 + m, big_t + 1)
    if t2.size == 0:
        return None
    ydy = ps.s_ydy[t2] - ps.s_ydy[t1]
    y2 = ps.s_y2[t2] - ps.s_y2[t1]
    rho_b, sig2 = fit.rho_b_hat, fit.sigma2_hat
    num = 2.0 * ydy + rho_b * y2
    i = int(np.argmin(num))
    growth = 2.0 * (breaks.t_c - breaks.t_e) * math.log(fit.phi_a_hat)
    decay = 2.0 * (t1 - breaks.t_c) * math.log(fit.phi_b_hat)
    lr_den = (
        math.log(big_t)
        + math.log(t2[i] - t1)
        + math.log(rho_b)
        + growth
        + decay
        + math.log(sig2)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        t12 = ydy / (math.sqrt(sig2) * np.sqrt(y2))
    check_finite_t(t12, "recovery 12-scan")
    t_cu = big_t - breaks.t_c
    return {
        "lr_a12": scaled_ratio(float(num[i]), lr_den),
        "em_a12": float(t12.sum()) / t_cu,
        "em_b12": float(t12.min()),
        "t_lra12": int(t2[i]),
    }


def _side21(ps, fit, breaks, t1, m, big_t):
    t2 = np.arange(breaks.t_c + m, t1 - m + 1)
    if t2.size == 0:
        return None
    ydy = ps.s_ydy[t1] - ps.s_ydy[t2]
    y2 = ps.s_y2[t1] - ps.s_y2[t2]
    rho_b, sig2 = fit.rho_b_hat, fit.sigma2_hat
    log_phi_b = math.log(fit.phi_b_hat)
    growth = 2.0 * (breaks.t_c - breaks.t_e) * math.log(fit.phi_a_hat)

    def lr_den(t2_opt: int) -> float:
        return (
            math.log(big_t)
            + growth
            + 2.0 * (t2_opt - breaks.t_c) * log_phi_b
            + math.log(sig2)
            - math.log(2.0)
        )

    num_a = 2.0 * ydy + rho_b * y2
    ja = int(np.argmax(num_a))
    num_b = -ps.y[t2] ** 2 - (ps.s_dy2[t1] - ps.s_dy2[t2]) + rho_b * y2
    jb = int(np.argmax(num_b))
    with np.errstate(divide="ignore", invalid="ignore"):
        t21 = ydy / (math.sqrt(sig2) * np.sqrt(y2))
    check_finite_t(t21, "recovery 21-scan")
    em_a_den = 0.5 * (
        math.log(big_t) + growth + 2.0 * m * log_phi_b - math.log(2.0 * rho_b)
    )
    je = int(np.argmax(t21))
    em_b_den = 0.5 * (
        math.log(big_t)
        + math.log(rho_b)
        + growth
        + 2.0 * (t2[je] - breaks.t_c) * log_phi_b
        - math.log(2.0)
    )
    return {
        "lr_a21": scaled_ratio(float(num_a[ja]), lr_den(int(t2[ja]))),
        "lr_b21": scaled_ratio(float(num_b[jb]), lr_den(int(t2[jb]))),
        "em_a21": scaled_ratio(float(t21.sum()), em_a_den),
        "em_b21": scaled_ratio(float(t21[je]), em_b_den),
        "t_lra21": int(t2[ja]),
        "t_lrb21": int(t2[jb]),
        "t_emb21": int(t2[je]),
    }


def recovery_stats(
    series: Series,
    fit: RegimeFit,
    breaks: BreakDates,
    t1: int,
    eps: float = 0.1,
    prefix: PrefixSums | None = None,
) -> RecoveryStats:
    """Compute all recovery statistics at one hypothesized date.

    ``breaks`` supplies t_e and t_c for the growth/decay scalings (true or
    estimated, matching the segment policy); the segment is (t_c, T] with
    trimming unit ``t_cu = T - t_c``.
    """
    big_t = series.sample_size
    breaks.validate_for(big_t)
    t_cu = big_t - breaks.t_c
    m = math.floor(t_cu * eps)
    if m < 2:
        raise ParameterError(
            f"floor(t_cu * eps) = {m} < 2; segment too short for trimming eps={eps}"
        )
    _check_fit(fit)
    ps = prefix if prefix is not None else prefix_sums(series)
    s12 = _side12(ps, fit, breaks, t1, m, big_t)
    s21 = _side21(ps, fit, breaks, t1, m, big_t)
    if s12 is None:
        raise RangeError(f"empty forward scan range at t1={t1} (t1 + {m} > T={big_t})")
    if s21 is None:
        raise RangeError(
            f"empty doubly-trimmed backward range at t1={t1} "
            f"(needs t_c + {m} <= t1 - {m})"
        )
    return RecoveryStats(t1=t1, **s12, **s21)


def recovery_decision(
    stats: RecoveryStats, cvs: tuple[float, float], variant: str = "LE"
) -> Decision:
    """Reject iff the left-tail statistic falls below ``cvs[0]`` or the
    right-tail statistic exceeds ``cvs[1]``.  Comparisons are strict."""
    s12, s21 = stats.pair(variant)
    cv12, cv21 = cvs
    r12 = bool(s12 < cv12)
    r21 = bool(s21 > cv21)
    return Decision(reject=r12 or r21, reject_12=r12, reject_21=r21)
