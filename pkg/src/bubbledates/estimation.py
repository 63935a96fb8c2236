"""Break-date estimation, subsample AR(1) fits, and the sup-ADF detector.

Break dates are located step by step with least squares, collapse first:

1. ``t_c``: global minimizer of the two-regime sum of squared residuals for
   a zero-intercept AR(1) with a free coefficient on each side of the split,
   over the trimmed full sample.  The crash is the dominant break.
2. ``t_e``: minimizer of the unit-root-to-free-AR(1) split SSR on [1, t_c].
3. ``t_r``: minimizer of the free-AR(1)-to-unit-root split SSR on (t_c, T].

Ties are broken toward the earliest date so the estimator is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, ParameterError
from .model import BreakDates, Series

__all__ = [
    "RegimeFit",
    "estimate_breaks",
    "fit_regimes",
    "sadf",
    "sadf_critical_value",
]


@dataclass(frozen=True)
class RegimeFit:
    """Subsample AR(1) estimates and the full-sample residual variance.

    ``phi_a_hat`` is the zero-intercept OLS coefficient on the explosive
    regime, ``phi_b_hat`` on the collapse regime, and ``sigma2_hat`` averages
    the squared regime-appropriate residuals over the whole sample.  On
    noiseless input ``sigma2_hat`` is exactly zero; statistics modules raise
    :class:`~bubbledates.errors.DegenerateFitError` in that case.
    """

    phi_a_hat: float
    phi_b_hat: float
    sigma2_hat: float

    @property
    def rho_a_hat(self) -> float:
        return self.phi_a_hat - 1.0

    @property
    def rho_b_hat(self) -> float:
        return 1.0 - self.phi_b_hat


class _SsrKernel:
    """O(1) split SSRs from cumulative cross moments of (y_{t-1}, y_t).

    Moments stay in extended precision: the SSR identity ``Syy - Sxy^2/Sxx``
    cancels catastrophically once squared explosive levels dwarf the
    innovation variance.
    """

    def __init__(self, y: np.ndarray) -> None:
        ylag = y[:-1].astype(np.longdouble)
        ycur = y[1:].astype(np.longdouble)
        z = np.zeros(1, dtype=np.longdouble)
        self.a = np.concatenate([z, np.cumsum(ylag * ylag)])
        self.b = np.concatenate([z, np.cumsum(ylag * ycur)])
        self.c = np.concatenate([z, np.cumsum(ycur * ycur)])
        d = ycur - ylag
        self.d = np.concatenate([z, np.cumsum(d * d)])

    def free_ssr(self, i, j):
        """SSR of y_t = phi * y_{t-1} fit by OLS over observations (i, j]."""
        sxx = self.a[j] - self.a[i]
        sxy = self.b[j] - self.b[i]
        syy = self.c[j] - self.c[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            ssr = syy - np.where(sxx > 0, sxy * sxy / np.where(sxx > 0, sxx, 1.0), 0.0)
        return np.maximum(ssr, 0.0).astype(float)

    def unit_root_ssr(self, i, j):
        """SSR with phi pinned at 1 (residuals are the first differences)."""
        diff = self.d[j] - self.d[i]
        return diff.astype(float) if np.ndim(diff) else float(diff)

    def phi_hat(self, i: int, j: int) -> float:
        sxx = self.a[j] - self.a[i]
        if sxx <= 0.0:
            raise DegenerateFitError(
                f"zero sum of squared lags on observations ({i}, {j}]"
            )
        return float((self.b[j] - self.b[i]) / sxx)


# Bubble regimes shorter than this fraction of the sample cannot support the
# downstream tests' trimming and mark a self-inconsistent stepwise solution.
_MIN_REGIME_FRACTION = 0.03


def _stepwise_triple(k: _SsrKernel, T: int, trim: float) -> tuple[int, int, int]:
    # Collapse split first (the dominant break), then each side of it.
    m1 = math.floor(trim * T)
    grid = np.arange(m1, T - m1 + 1)
    ssr = k.free_ssr(0, grid) + k.free_ssr(grid, T)
    t_c = int(grid[np.argmin(ssr)])

    m2 = math.floor(trim * t_c)
    grid = np.arange(m2, t_c - m2 + 1)
    ssr = k.unit_root_ssr(0, grid) + k.free_ssr(grid, t_c)
    t_e = int(grid[np.argmin(ssr)])

    seg = T - t_c
    m3 = math.floor(trim * seg)
    grid = np.arange(t_c + m3, T - m3 + 1)
    ssr = k.free_ssr(t_c, grid) + k.unit_root_ssr(grid, T)
    t_r = int(grid[np.argmin(ssr)])
    return t_e, t_c, t_r


def _consistent_triple(k: _SsrKernel, T: int, t_e: int, t_c: int, t_r: int) -> bool:
    """The fitted regimes must actually describe a bubble: an explosive
    coefficient above one, a collapsing one below it, and regimes long
    enough to carry the location tests' trimmed scan ranges."""
    dur = math.floor(_MIN_REGIME_FRACTION * T)
    if t_c - t_e < dur or t_r - t_c < dur:
        return False
    try:
        phi_a = k.phi_hat(t_e, t_c)
        phi_b = k.phi_hat(t_c, t_r)
    except DegenerateFitError:
        return False
    return phi_a > 1.0 > phi_b


def _joint_triple(k: _SsrKernel, T: int, trim: float) -> tuple[int, int, int]:
    # Exact minimizer of the four-regime SSR with the two outer breaks
    # profiled out for each collapse candidate.
    m1 = math.floor(trim * T)
    gap = max(m1 // 2, 2)
    k2s = np.arange(m1 + gap, T - m1 - gap + 1)
    best1 = np.empty(k2s.size)
    best3 = np.empty(k2s.size)
    arg1 = np.empty(k2s.size, dtype=int)
    arg3 = np.empty(k2s.size, dtype=int)
    for i, k2 in enumerate(k2s):
        k1 = np.arange(m1, k2 - gap + 1)
        v = k.unit_root_ssr(0, k1) + k.free_ssr(k1, k2)
        j = int(np.argmin(v))
        best1[i], arg1[i] = v[j], k1[j]
        k3 = np.arange(k2 + gap, T - m1 + 1)
        v = k.free_ssr(k2, k3) + k.unit_root_ssr(k3, T)
        j = int(np.argmin(v))
        best3[i], arg3[i] = v[j], k3[j]
    i = int(np.argmin(best1 + best3))
    return int(arg1[i]), int(k2s[i]), int(arg3[i])


def estimate_breaks(series: Series, trim: float = 0.10) -> BreakDates:
    """Estimate (t_e, t_c, t_r) by step-by-step least squares.

    The collapse date is located first as the minimizer of the two-regime
    free-coefficient SSR over the trimmed full sample; the emergence and
    recovery dates then come from unit-root/free splits of the subsamples on
    each side.  When the resulting triple is not self-consistent (the fitted
    "explosive" coefficient is not above one, the "collapsing" one not below
    it, or a bubble regime is too short to carry the tests' trimmed scans),
    the triple is re-estimated by exact joint minimization of the same
    four-regime SSR.  Ties always break toward the earliest date.

    Parameters
    ----------
    series : Series
        Observed path.
    trim : float
        Fraction of each search segment excluded at both ends, so every
        estimate sits at least ``floor(trim * segment)`` from the segment
        boundaries.

    Returns
    -------
    BreakDates
    """
    if not 0 < trim < 0.5:
        raise ParameterError(f"trim must lie in (0, 0.5), got {trim}")
    T = series.sample_size
    if T < 20 / trim:
        raise ParameterError(
            f"series too short: need at least {math.ceil(20 / trim)} observations, got {T}"
        )
    k = _SsrKernel(series.y)
    t_e, t_c, t_r = _stepwise_triple(k, T, trim)
    if not _consistent_triple(k, T, t_e, t_c, t_r):
        t_e, t_c, t_r = _joint_triple(k, T, trim)
    return BreakDates(t_e=t_e, t_c=t_c, t_r=t_r)


def fit_regimes(series: Series, breaks: BreakDates) -> RegimeFit:
    """OLS AR(1) coefficients on the estimated regimes plus sigma2_hat.

    ``phi_a_hat`` regresses over (t_e, t_c], ``phi_b_hat`` over (t_c, t_r].
    ``sigma2_hat`` is the mean squared residual over all T observations,
    using first differences on the unit-root regimes and the fitted
    coefficients on the middle two.  Residuals are summed explicitly: the
    moment-based SSR identity loses every digit once squared levels are
    many orders above the innovation variance.
    """
    T = series.sample_size
    breaks.validate_for(T)
    if breaks.t_c - breaks.t_e < 1 or breaks.t_r - breaks.t_c < 1:
        raise ParameterError("each regime needs at least one observation")
    k = _SsrKernel(series.y)
    phi_a = k.phi_hat(breaks.t_e, breaks.t_c)
    phi_b = k.phi_hat(breaks.t_c, breaks.t_r)
    y = series.y
    t_e, t_c, t_r = breaks.t_e, breaks.t_c, breaks.t_r
    resid = np.concatenate(
        [
            np.diff(y[: t_e + 1]),
            y[t_e + 1 : t_c + 1] - phi_a * y[t_e:t_c],
            y[t_c + 1 : t_r + 1] - phi_b * y[t_c:t_r],
            np.diff(y[t_r:]),
        ]
    )
    ssr = float(np.dot(resid, resid))
    return RegimeFit(phi_a_hat=phi_a, phi_b_hat=phi_b, sigma2_hat=ssr / T)


def _adf_t_prefix(y: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """ADF t-statistics (intercept, no lags) for windows (0, end] via prefix sums."""
    ylag = y[:-1].astype(np.longdouble)
    dy = np.diff(y.astype(np.longdouble))
    z = np.zeros(1, dtype=np.longdouble)

    def cum(v):
        return np.concatenate([z, np.cumsum(v)]).astype(float)

    sx, sy = cum(ylag), cum(dy)
    sxx, sxy, syy = cum(ylag * ylag), cum(ylag * dy), cum(dy * dy)
    n = ends.astype(float)
    sxx_c = sxx[ends] - sx[ends] ** 2 / n
    sxy_c = sxy[ends] - sx[ends] * sy[ends] / n
    syy_c = syy[ends] - sy[ends] ** 2 / n
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = sxy_c / sxx_c
        ssr = np.maximum(syy_c - rho * sxy_c, 0.0)
        s2 = ssr / (n - 2)
        t = rho / np.sqrt(s2 / sxx_c)
        t = np.where((ssr == 0) & (sxx_c > 0), np.sign(rho) * np.inf, t)
    t[sxx_c <= 0] = np.nan
    return t


def sadf(series: Series, r0: float = 0.1, lags: int = 0) -> float:
    """Supremum of forward-recursive ADF t-statistics over expanding windows.

    The regression ``dy_t = c + rho * y_{t-1} (+ lagged dy terms) + e_t`` is
    run on (0, k] for every end point k from ``floor(r0 * T)`` to ``T``; the
    statistic is the supremum of the t-ratios on rho.

    Parameters
    ----------
    series : Series
    r0 : float
        Minimal window fraction; ``r0 * T`` must be at least 10.
    lags : int
        Number of lagged-difference augmentation terms (default 0; the
        model's innovations are uncorrelated).
    """
    T = series.sample_size
    if r0 * T < 10:
        raise ParameterError(f"minimal window r0*T must be >= 10, got {r0 * T:.1f}")
    if lags < 0:
        raise ParameterError("lags must be nonnegative")
    k0 = math.floor(r0 * T)
    if lags == 0:
        t = _adf_t_prefix(series.y, np.arange(k0, T + 1))
        if np.isnan(t).all():
            raise DegenerateFitError("zero-variance regressor in every ADF window")
        return float(np.nanmax(t))

    y = series.y
    dy = np.diff(y)
    best = -np.inf
    seen = False
    for k in range(k0, T + 1):
        # rows t = lags+1 .. k of dy_t on [1, y_{t-1}, dy_{t-1}, ..., dy_{t-lags}]
        rows = np.arange(lags, k)
        x = np.column_stack(
            [np.ones(rows.size), y[rows]]
            + [dy[rows - j] for j in range(1, lags + 1)]
        )
        resp = dy[rows]
        if rows.size <= x.shape[1]:
            continue
        coef, _, rank, _ = np.linalg.lstsq(x, resp, rcond=None)
        if rank < x.shape[1]:
            continue
        resid = resp - x @ coef
        s2 = resid @ resid / (rows.size - x.shape[1])
        xtx_inv = np.linalg.inv(x.T @ x)
        se = math.sqrt(max(s2 * xtx_inv[1, 1], 0.0))
        if se == 0.0:
            best = np.inf
            seen = True
            continue
        seen = True
        best = max(best, coef[1] / se)
    if not seen:
        raise DegenerateFitError("no ADF window was estimable")
    return float(best)


def sadf_critical_value(
    sample_size: int,
    r0: float = 0.1,
    level: float = 0.95,
    reps: int = 2000,
    seed: int = 0,
    lags: int = 0,
) -> float:
    """Simulated sup-ADF quantile under a driftless Gaussian random walk null."""
    if reps < 100:
        raise ParameterError("reps must be >= 100 for a usable quantile")
    if not 0 < level < 1:
        raise ParameterError(f"level must lie in (0,1), got {level}")
    draws = np.empty(reps)
    for r in range(reps):
        rng = np.random.default_rng([seed, r])
        path = np.concatenate([[0.0], np.cumsum(rng.normal(0.0, 1.0, sample_size))])
        draws[r] = sadf(Series(path), r0=r0, lags=lags)
    return float(np.quantile(draws, level))
