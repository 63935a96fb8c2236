"""Location tests for the emergence date on the segment [1, t_c].

For a hypothesized date t1 the seven statistics contrast the fit of the
unit-root/explosive split at t1 against splits at every permissible t2.
The 12-statistics scan t2 > t1 and reject in the LEFT tail (they collapse to
zero when the true emergence is later than t1); the 21-statistics scan
t2 < t1 and reject in the RIGHT tail.  Scalings follow the statistics'
derivation exactly: the LR 12-denominators use the full sample size with the
explosive coefficient raised to the optimizing scan offset, while the LR
21-denominator uses the squared segment length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._stat_utils import Decision, check_finite_t, scaled_ratio
from .errors import DegenerateFitError, ParameterError, RangeError
from .estimation import RegimeFit
from .model import PrefixSums, Series, prefix_sums

__all__ = ["EmergenceStats", "emergence_stats", "emergence_decision"]

VARIANTS = ("LRa", "EMa", "EMb", "LE")


@dataclass(frozen=True)
class EmergenceStats:
    """Statistics for H0: emergence at ``t1`` (left tail: 12, right tail: 21)."""

    t1: int
    lr_a12: float
    lr_b12: float
    em_a12: float
    em_b12: float
    lr_a21: float
    em_a21: float
    em_b21: float
    t_lra12: int
    t_lrb12: int
    t_emb12: int

    def pair(self, variant: str) -> tuple[float, float]:
        """(left-tail statistic, right-tail statistic) for a test variant."""
        try:
            return {
                "LRa": (self.lr_a12, self.lr_a21),
                "EMa": (self.em_a12, self.em_a21),
                "EMb": (self.em_b12, self.em_b21),
                "LE": (self.lr_b12, self.em_a21),
            }[variant]
        except KeyError:
            raise ParameterError(f"unknown emergence variant {variant!r}") from None


def _check_fit(fit: RegimeFit) -> None:
    if not fit.sigma2_hat > 0:
        raise DegenerateFitError(f"sigma2_hat={fit.sigma2_hat} must be positive")
    if not fit.rho_a_hat > 0:
        raise DegenerateFitError(
            f"phi_a_hat={fit.phi_a_hat} <= 1: no explosiveness detected, "
            "scalings involving sqrt(rho_a_hat) are undefined"
        )


def _side12(ps: PrefixSums, fit: RegimeFit, t_c: int, t1: int, m: int, big_t: int):
    t2 = np.arange(t1 + m, t_c + 1)
    if t2.size == 0:
        return None
    ydy = ps.s_ydy[t2] - ps.s_ydy[t1]
    y2 = ps.s_y2[t2] - ps.s_y2[t1]
    rho_a, phi_a, sig2 = fit.rho_a_hat, fit.phi_a_hat, fit.sigma2_hat
    log_phi_a = math.log(phi_a)
    base = math.log(big_t) + math.log(sig2) - math.log(2.0)

    num_a = 2.0 * ydy - rho_a * y2
    ia = int(np.argmin(num_a))
    lr_a12 = scaled_ratio(float(num_a[ia]), base + 2.0 * (t2[ia] - t1) * log_phi_a)

    num_b = ps.y[t2] ** 2 - rho_a * y2
    ib = int(np.argmin(num_b))
    lr_b12 = scaled_ratio(float(num_b[ib]), base + 2.0 * (t2[ib] - t1) * log_phi_a)

    with np.errstate(divide="ignore", invalid="ignore"):
        t12 = ydy / (math.sqrt(sig2) * np.sqrt(y2))
    check_finite_t(t12, "emergence 12-scan")
    em_a12 = scaled_ratio(
        float(t12.sum()),
        0.5 * (math.log(big_t) + 2.0 * (t_c - t1) * log_phi_a - math.log(2.0 * rho_a)),
    )
    ie = int(np.argmin(t12))
    em_b12 = scaled_ratio(
        float(t12[ie]),
        0.5 * (math.log(big_t) + math.log(rho_a) + 2.0 * (t2[ie] - t1) * log_phi_a - math.log(2.0)),
    )
    return {
        "lr_a12": lr_a12,
        "lr_b12": lr_b12,
        "em_a12": em_a12,
        "em_b12": em_b12,
        "t_lra12": int(t2[ia]),
        "t_lrb12": int(t2[ib]),
        "t_emb12": int(t2[ie]),
    }


def _side21(ps: PrefixSums, fit: RegimeFit, t_ub: int, t1: int, m: int):
    t2 = np.arange(1, t1 - m + 1)
    if t2.size == 0:
        return None
    ydy = ps.s_ydy[t1] - ps.s_ydy[t2]
    y2 = ps.s_y2[t1] - ps.s_y2[t2]
    rho_a, sig2 = fit.rho_a_hat, fit.sigma2_hat
    num = 2.0 * ydy - rho_a * y2
    lr_a21 = float(num.max()) / (t_ub**2 * rho_a * sig2)
    with np.errstate(divide="ignore", invalid="ignore"):
        t21 = ydy / (math.sqrt(sig2) * np.sqrt(y2))
    check_finite_t(t21, "emergence 21-scan")
    return {
        "lr_a21": lr_a21,
        "em_a21": float(t21.sum()) / t_ub,
        "em_b21": float(t21.max()),
    }


def emergence_stats(
    series: Series,
    fit: RegimeFit,
    t_c: int,
    t1: int,
    eps: float = 0.1,
    prefix: PrefixSums | None = None,
) -> EmergenceStats:
    """Compute all emergence statistics at one hypothesized date.

    Parameters
    ----------
    series : Series
        Full observed path (the scan stays within [1, t_c]).
    fit : RegimeFit
        Plug-in estimates; requires ``sigma2_hat > 0`` and ``rho_a_hat > 0``.
    t_c : int
        Segment end (true or estimated collapse date); t_ub = t_c.
    t1 : int
        Hypothesized emergence date.
    eps : float
        Trimming fraction; both scan ranges must be nonempty, i.e.
        ``floor(t_ub * eps) <= t1 - 1`` and ``t1 + floor(t_ub * eps) <= t_c``.
    prefix : PrefixSums, optional
        Reuse a precomputed kernel when scanning many dates.
    """
    big_t = series.sample_size
    if not 1 <= t_c <= big_t:
        raise ParameterError(f"t_c={t_c} out of range for sample size {big_t}")
    m = math.floor(t_c * eps)
    if m < 2:
        raise ParameterError(
            f"floor(t_ub * eps) = {m} < 2; segment too short for trimming eps={eps}"
        )
    _check_fit(fit)
    ps = prefix if prefix is not None else prefix_sums(series)
    s12 = _side12(ps, fit, t_c, t1, m, big_t)
    s21 = _side21(ps, fit, t_c, t1, m)
    if s12 is None:
        raise RangeError(f"empty forward scan range at t1={t1} (t1 + {m} > t_c={t_c})")
    if s21 is None:
        raise RangeError(f"empty backward scan range at t1={t1} (t1 - {m} < 1)")
    return EmergenceStats(t1=t1, **s12, **s21)


def emergence_decision(
    stats: EmergenceStats, cvs: tuple[float, float], variant: str = "LE"
) -> Decision:
    """Apply the rejection rule: reject iff the left-tail statistic falls
    below ``cvs[0]`` or the right-tail statistic exceeds ``cvs[1]``.

    The two one-sided tests each run at level delta/2, so the combination is
    conservative at level delta.  Comparisons are strict; a statistic exactly
    at its critical value retains.
    """
    s12, s21 = stats.pair(variant)
    cv12, cv21 = cvs
    r12 = bool(s12 < cv12)
    r21 = bool(s21 > cv21)
    return Decision(reject=r12 or r21, reject_12=r12, reject_21=r21)
