"""Domain types, the four-regime data generating process, and prefix-sum kernels.

The process starts as a driftless random walk, turns mildly explosive at the
emergence date, mean-reverts during the collapse regime, and returns to a
random walk after the recovery date:

    y_t = y_{t-1} + e_t            t <= T_e        (unit root)
    y_t = phi_a * y_{t-1} + e_t    T_e < t <= T_c  (explosive, phi_a = 1 + a/T^alpha)
    y_t = phi_b * y_{t-1} + e_t    T_c < t <= T_r  (collapsing, phi_b = 1 - b/T^beta)
    y_t = y_{t-1} + e_t            T_r < t <= T    (unit root)

Every location-test statistic in this package reduces to range sums of
``y_{t-1}^2``, ``y_{t-1} * dy_t`` and ``dy_t^2``; :class:`PrefixSums` caches
their cumulative versions so any range sum is a two-term difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericOverflowError, ParameterError

__all__ = [
    "BreakDates",
    "BubbleDgpSpec",
    "PrefixSums",
    "Series",
    "prefix_sums",
    "simulate",
]

# |y_t| beyond this would square outside double range; fail early instead.
_LEVEL_LIMIT = 1e150


@dataclass(frozen=True)
class BreakDates:
    """Integer emergence, collapse, and recovery dates ``1 <= t_e < t_c < t_r < T``.

    The date marks the last observation of the regime that ends there: the
    explosive regime covers ``t_e + 1 .. t_c``.
    """

    t_e: int
    t_c: int
    t_r: int

    def __post_init__(self) -> None:
        for name in ("t_e", "t_c", "t_r"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise ParameterError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 1 <= self.t_e < self.t_c < self.t_r:
            raise ParameterError(
                f"break dates must satisfy 1 <= t_e < t_c < t_r, got "
                f"({self.t_e}, {self.t_c}, {self.t_r})"
            )

    def validate_for(self, sample_size: int) -> None:
        if self.t_r >= sample_size:
            raise ParameterError(
                f"t_r={self.t_r} must be < sample size {sample_size}"
            )

    # Segment lengths used by the three location-test families.
    @property
    def t_ub(self) -> int:
        """Length of the unit-root-plus-explosive segment (1 .. t_c)."""
        return self.t_c

    @property
    def t_bc(self) -> int:
        """Length of the explosive-plus-collapse segment (t_e .. t_r]."""
        return self.t_r - self.t_e

    def t_cu(self, sample_size: int) -> int:
        """Length of the collapse-plus-recovery segment (t_c .. T]."""
        self.validate_for(sample_size)
        return sample_size - self.t_c

    def fractions(self, sample_size: int) -> tuple[float, float, float]:
        """Break fractions (t_e/T, t_c/T, t_r/T)."""
        self.validate_for(sample_size)
        return (
            self.t_e / sample_size,
            self.t_c / sample_size,
            self.t_r / sample_size,
        )


@dataclass(frozen=True)
class BubbleDgpSpec:
    """Full parameterization of the four-regime process.

    Parameters
    ----------
    sample_size : int
        Number of observations T generated after the initial level (>= 20).
    a, alpha : float
        Explosive rate parameters; phi_a = 1 + a / T**alpha with a > 0 and
        0 < alpha <= 1.  alpha = 1 is the local-to-unity boundary used by
        the built-in replication scenarios.
    b, beta : float
        Collapse rate parameters; phi_b = 1 - b / T**beta, constrained to (0, 1).
    lambda_e, lambda_c, lambda_r : float
        Break fractions with 0 < lambda_e < lambda_c < lambda_r < 1.  Integer
        dates are floor(lambda * T).
    sigma : float
        Innovation standard deviation (> 0).
    y0 : float
        Initial level stored at index 0 of the simulated series.
    """

    sample_size: int
    a: float
    alpha: float
    b: float
    beta: float
    lambda_e: float
    lambda_c: float
    lambda_r: float
    sigma: float = 1.0
    y0: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.sample_size, (int, np.integer)) or self.sample_size < 20:
            raise ParameterError(f"sample_size must be an integer >= 20, got {self.sample_size}")
        object.__setattr__(self, "sample_size", int(self.sample_size))
        if not self.a > 0:
            raise ParameterError(f"a must be > 0, got {self.a}")
        if not self.b > 0:
            raise ParameterError(f"b must be > 0, got {self.b}")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.beta <= 1:
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta}")
        if not 0 < self.lambda_e < self.lambda_c < self.lambda_r < 1:
            raise ParameterError(
                "break fractions must satisfy 0 < lambda_e < lambda_c < lambda_r < 1, "
                f"got ({self.lambda_e}, {self.lambda_c}, {self.lambda_r})"
            )
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if not math.isfinite(self.y0):
            raise ParameterError(f"y0 must be finite, got {self.y0}")
        if not 0 < self.phi_b < 1:
            raise ParameterError(
                f"phi_b = 1 - b/T**beta = {self.phi_b} must lie in (0, 1); reduce b"
            )
        dates = self.break_dates()
        dates.validate_for(self.sample_size)

    @property
    def phi_a(self) -> float:
        return 1.0 + self.a / self.sample_size**self.alpha

    @property
    def phi_b(self) -> float:
        return 1.0 - self.b / self.sample_size**self.beta

    def break_dates(self) -> BreakDates:
        T = self.sample_size
        return BreakDates(
            t_e=math.floor(self.lambda_e * T),
            t_c=math.floor(self.lambda_c * T),
            t_r=math.floor(self.lambda_r * T),
        )


@dataclass(frozen=True)
class Series:
    """Observed levels ``y_0 .. y_T`` with the initial value stored at index 0."""

    y: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.y, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ParameterError("series must be one-dimensional with length >= 2")
        if not np.isfinite(arr).all():
            raise ParameterError("series contains non-finite values")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "y", arr)

    @property
    def sample_size(self) -> int:
        """Number of observations T (the array holds T + 1 levels)."""
        return self.y.size - 1

    def __len__(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class PrefixSums:
    """Cumulative sums so that a sum over (t1, t2] is ``s[t2] - s[t1]``.

    ``s_y2[k] = sum_{t=1..k} y_{t-1}^2``, ``s_ydy[k] = sum y_{t-1} dy_t``,
    ``s_dy2[k] = sum dy_t^2``.  Accumulation runs in extended precision
    because squared explosive levels span many orders of magnitude.
    """

    y: np.ndarray = field(repr=False)
    s_y2: np.ndarray = field(repr=False)
    s_ydy: np.ndarray = field(repr=False)
    s_dy2: np.ndarray = field(repr=False)

    def range_y2(self, t1: int, t2) -> np.ndarray | float:
        return self.s_y2[t2] - self.s_y2[t1]

    def range_ydy(self, t1: int, t2) -> np.ndarray | float:
        return self.s_ydy[t2] - self.s_ydy[t1]

    def range_dy2(self, t1: int, t2) -> np.ndarray | float:
        return self.s_dy2[t2] - self.s_dy2[t1]


def simulate(
    spec: BubbleDgpSpec,
    rng: np.random.Generator | None = None,
    innovations: np.ndarray | None = None,
) -> Series:
    """Simulate one path of the four-regime process.

    Parameters
    ----------
    spec : BubbleDgpSpec
        Validated parameterization.
    rng : numpy.random.Generator, optional
        Source for i.i.d. Gaussian innovations with standard deviation
        ``spec.sigma``.  Ignored when ``innovations`` is given.
    innovations : ndarray, optional
        Explicit innovation sequence of length ``spec.sample_size``.  Any
        martingale-difference sequence can be injected here, e.g. draws
        from a conditionally heteroskedastic recursion.

    Returns
    -------
    Series
        Path of length ``spec.sample_size + 1`` starting at ``spec.y0``.
    """
    T = spec.sample_size
    if innovations is not None:
        eps = np.asarray(innovations, dtype=float)
        if eps.shape != (T,):
            raise ParameterError(
                f"innovations must have shape ({T},), got {eps.shape}"
            )
        if not np.isfinite(eps).all():
            raise ParameterError("innovations contain non-finite values")
    else:
        if rng is None:
            rng = np.random.default_rng()
        eps = rng.normal(0.0, spec.sigma, size=T)

    dates = spec.break_dates()
    phi_a, phi_b = spec.phi_a, spec.phi_b
    y = np.empty(T + 1)
    y[0] = spec.y0
    for t in range(1, T + 1):
        if t <= dates.t_e or t > dates.t_r:
            y[t] = y[t - 1] + eps[t - 1]
        elif t <= dates.t_c:
            y[t] = phi_a * y[t - 1] + eps[t - 1]
        else:
            y[t] = phi_b * y[t - 1] + eps[t - 1]
        if not abs(y[t]) < _LEVEL_LIMIT:
            raise NumericOverflowError(
                f"|y_{t}| = {abs(y[t]):.3e} exceeds {_LEVEL_LIMIT:.0e}; "
                "squared levels would overflow (reduce a, alpha, or sample_size)"
            )
    return Series(y)


def prefix_sums(series: Series) -> PrefixSums:
    """Build the cumulative-sum kernel for a series.

    Range queries over any (t1, t2] with ``0 <= t1 < t2 <= T`` reproduce
    direct summation; the telescoping identity

        2 * sum y_{t-1} dy_t  =  y_{t2}^2 - y_{t1}^2 - sum dy_t^2

    holds on every range up to floating-point tolerance.
    """
    y = series.y
    if y.size < 2:
        raise ParameterError("series too short for prefix sums")
    ylag = y[:-1].astype(np.longdouble)
    dy = np.diff(y.astype(np.longdouble))
    z = np.zeros(1, dtype=np.longdouble)

    def cum(v: np.ndarray) -> np.ndarray:
        out = np.concatenate([z, np.cumsum(v)])
        return out.astype(float)

    ps = PrefixSums(
        y=y,
        s_y2=cum(ylag * ylag),
        s_ydy=cum(ylag * dy),
        s_dy2=cum(dy * dy),
    )
    for arr in (ps.s_y2, ps.s_ydy, ps.s_dy2):
        arr.flags.writeable = False
    return ps


def t_stat_range(
    ps: PrefixSums, sigma2: float, start, end
) -> np.ndarray | float:
    """One-sided t-statistic for the AR(1) slope over observations (start, end].

    ``t = sum y_{t-1} dy_t / (sigma_hat * sqrt(sum y_{t-1}^2))`` with the
    full-sample ``sigma2`` plugged in.  ``start`` or ``end`` may be an index
    array; ranges with a zero sum of squares yield NaN (callers treat those
    as degenerate).
    """
    num = ps.s_ydy[end] - ps.s_ydy[start]
    den2 = ps.s_y2[end] - ps.s_y2[start]
    sigma = math.sqrt(sigma2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / (sigma * np.sqrt(den2))
