"""Critical values: chi-square closed forms, simulated Brownian functionals,
and response-surface evaluation and refitting.

Under the null, the left-tail (or sign-flipped) limits of the LR-type and
extremum-t statistics are ``W^2(lam)`` and ``|W(lam)|`` for a standard
Brownian motion W, so their quantiles are chi-square(1) percentiles scaled by
the relevant break fraction.  The remaining limits are nonstandard Brownian
functionals; their quantiles are tabulated by Monte Carlo on a fraction grid
and compressed into cubic-plus-reciprocal response surfaces.  The surfaces
shipped in :data:`TABLE1_SURFACES` were fit to 50,000-replication simulations
(1,000-step paths) at the 0.05 per-tail level; fresh simulation is opt-in via
:func:`simulate_cv`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import FitError, ParameterError, RangeError

__all__ = [
    "CHI2_1_Q05",
    "CvBundle",
    "ResponseSurface",
    "TABLE1_SURFACES",
    "chi2_cv",
    "chi2_quantile_1df",
    "eval_surface",
    "fit_surface",
    "norm_ppf",
    "simulate_cv",
    "tabulate_cvs",
]

FUNCTIONALS = ("LR21e", "EMa21e", "EMb21e", "EMa12r", "EMb12r")

# Default quantile level per functional: the 21-family supplies upper-tail
# critical values, the recovery 12-family lower-tail ones.
DEFAULT_QUANTILE = {
    "LR21e": 0.95,
    "EMa21e": 0.95,
    "EMb21e": 0.95,
    "EMa12r": 0.05,
    "EMb12r": 0.05,
}

_SURFACE_DOMAIN = (0.10, 0.90)
_BRANCH_THRESHOLD = 0.7


def norm_ppf(p: float) -> float:
    """Standard normal quantile via a rational approximation plus one
    Halley refinement on the complementary error function (~1e-15 accurate)."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"probability must lie in (0,1), got {p}")
    # Acklam's rational approximation.
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low, p_high = 0.02425, 1 - 0.02425
    if p < p_low:
        q = math.sqrt(-2 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1)
    else:
        q = math.sqrt(-2 * math.log(1 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)
    # One Halley step: F(x) - p with F the normal CDF.
    e = 0.5 * math.erfc(-x / math.sqrt(2)) - p
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


def chi2_quantile_1df(level: float) -> float:
    """Quantile of the chi-square(1) distribution via the squared-normal relation."""
    if not 0.0 <= level < 1.0:
        raise ParameterError(f"level must lie in [0,1), got {level}")
    if level == 0.0:
        return 0.0
    return norm_ppf((1.0 + level) / 2.0) ** 2


CHI2_1_Q05 = chi2_quantile_1df(0.05)  # 0.00393214...


def chi2_cv(level: float, lam: float, shape: str, sign: int = 1) -> float:
    """Closed-form critical value ``sign * lam * q`` or ``sign * sqrt(lam * q)``.

    Parameters
    ----------
    level : float
        Chi-square(1) quantile level (0.05 for a 0.90 two-sided confidence set).
    lam : float
        Break fraction scaling the limiting ``W^2`` / ``|W|`` variance.
    shape : {"quadratic", "absolute"}
        "quadratic" for the squared-Brownian (LR) limits, "absolute" for the
        absolute-Brownian (extremum-t) limits.
    sign : {1, -1}
        Tail orientation of the target statistic.
    """
    if not 0.0 <= lam <= 1.0:
        raise ParameterError(f"lambda must lie in [0,1], got {lam}")
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign}")
    q = chi2_quantile_1df(level)
    if shape == "quadratic":
        return sign * lam * q
    if shape == "absolute":
        return sign * math.sqrt(lam * q)
    raise ParameterError(f"shape must be 'quadratic' or 'absolute', got {shape!r}")


@dataclass(frozen=True)
class ResponseSurface:
    """Critical value as a function of the within-segment break fraction.

    ``cv(lam) = a0 + a_m1/lam + a1*lam + a2*lam^2 + a3*lam^3``, plus the same
    polynomial block with ``b`` coefficients added when ``lam > 0.7`` for the
    one surface that needs a second branch.  Valid on [0.10, 0.90] only; no
    extrapolation.
    """

    a0: float
    a_m1: float
    a1: float
    a2: float
    a3: float
    b0: float | None = None
    b_m1: float | None = None
    b1: float | None = None
    b2: float | None = None
    b3: float | None = None

    @property
    def two_branch(self) -> bool:
        return self.b0 is not None

    def __call__(self, lam: float) -> float:
        lo, hi = _SURFACE_DOMAIN
        if not lo - 1e-9 <= lam <= hi + 1e-9:
            raise RangeError(
                f"surface evaluated at lambda={lam}; fitted range is [{lo}, {hi}]"
            )
        lam = min(max(lam, lo), hi)
        v = self.a0 + self.a_m1 / lam + self.a1 * lam + self.a2 * lam**2 + self.a3 * lam**3
        if self.two_branch and lam > _BRANCH_THRESHOLD:
            v += self.b0 + self.b_m1 / lam + self.b1 * lam + self.b2 * lam**2 + self.b3 * lam**3
        return v


def eval_surface(surface: ResponseSurface, lam: float) -> float:
    """Evaluate a response surface; RangeError outside [0.10, 0.90]."""
    return surface(lam)


# 0.95-level surfaces for the emergence right-tail statistics and 0.05-level
# surfaces for the recovery left-tail extremum-t statistics, keyed by the
# functional they bound.
TABLE1_SURFACES: Mapping[str, ResponseSurface] = {
    "LR21e": ResponseSurface(-9.99e-4, 5.13e-5, -1.09e-3, 4.40e-4, -2.16e-4),
    "EMa21e": ResponseSurface(-0.127, -4.75e-4, 1.34, -0.185, 0.0956),
    "EMb21e": ResponseSurface(1.59, -0.0368, 0.706, -0.525, 0.194),
    "EMa12r": ResponseSurface(-1.47, 5.02e-5, 1.57, -0.0124, 0.0779),
    "EMb12r": ResponseSurface(
        -2.81, -7.44e-5, 0.258, -0.382, 0.745,
        b0=-2710.0, b_m1=530.0, b1=5192.0, b2=-4420.0, b3=1411.0,
    ),
}


def grid_lambda(lam: float) -> float:
    """Snap a fraction to the 0.01 tabulation grid, clamped to [0.10, 0.90]."""
    lo, hi = _SURFACE_DOMAIN
    return min(max(round(100.0 * lam) / 100.0, lo), hi)


_PATH_BATCH = 1000


def _functional_draws(
    functional: str, lambda1_star: float, eps: float, w: np.ndarray, steps: int
) -> np.ndarray:
    """Evaluate one limiting functional on a batch of discretized paths."""
    j1 = round(lambda1_star * steps)
    if functional in ("LR21e", "EMa21e", "EMb21e"):
        jlo = round((lambda1_star - eps) * steps)
        if jlo < 0 or jlo >= j1:
            raise ParameterError(
                f"{functional} needs eps <= lambda1_star <= 1, got {lambda1_star}"
            )
        if functional == "LR21e":
            return -(w[:, jlo:j1] ** 2).sum(axis=1) / steps
        # Left-Riemann cumulative integral of W^2: v[:, k] ~ int_0^{k/steps} W^2.
        v = np.cumsum(w[:, :-1] ** 2, axis=1) / steps
        v = np.concatenate([np.zeros((w.shape[0], 1)), v], axis=1)
        i = np.arange(0, jlo + 1)
        num = 0.5 * (w[:, j1:j1 + 1] ** 2 - w[:, i] ** 2 - (j1 - i) / steps)
        den = np.sqrt(v[:, j1:j1 + 1] - v[:, i])
        adf = num / den
        if functional == "EMa21e":
            return adf[:, :jlo].sum(axis=1) / steps
        return adf.max(axis=1)

    if functional in ("EMa12r", "EMb12r"):
        kmin = round((lambda1_star + eps) * steps) - j1
        width = steps - j1
        if kmin < 1 or kmin > width:
            raise ParameterError(
                f"{functional} needs 0 <= lambda1_star <= 1 - eps, got {lambda1_star}"
            )
        b = w[:, j1:] - w[:, j1:j1 + 1]
        u = np.cumsum(b[:, :-1] ** 2, axis=1) / steps
        u = np.concatenate([np.zeros((b.shape[0], 1)), u], axis=1)
        k = np.arange(kmin, width + 1)
        num = 0.5 * (b[:, k] ** 2 - k / steps)
        den = np.sqrt(u[:, k])
        adfr = num / den
        if functional == "EMa12r":
            return adfr[:, :-1].sum(axis=1) / steps
        return adfr.min(axis=1)

    raise ParameterError(f"unknown functional {functional!r}; expected one of {FUNCTIONALS}")


def simulate_cv(
    functional: str,
    lambda1_star: float,
    eps: float = 0.1,
    reps: int = 50_000,
    steps: int = 1000,
    quantile: float | None = None,
    seed: int = 0,
) -> float:
    """Monte Carlo quantile of a limiting Brownian functional.

    Standard Brownian motion is approximated by scaled partial sums of
    ``steps`` i.i.d. standard normals; integrals use left-Riemann sums and
    extrema are taken over the grid.  Deterministic given ``seed`` (paths are
    generated in fixed blocks keyed by ``(seed, block_index)``).

    Parameters
    ----------
    functional : {"LR21e", "EMa21e", "EMb21e", "EMa12r", "EMb12r"}
        Which null limit to simulate, named after the statistic it bounds.
    lambda1_star : float
        Within-segment fraction of the hypothesized date.
    eps : float
        Trimming fraction of the scan range.
    reps, steps : int
        Replications (>= 1000) and path grid size (>= 100).
    quantile : float, optional
        Quantile level; defaults to the tail conventional for the functional
        (0.95 for the 21-family, 0.05 for the recovery 12-family).
    seed : int
        Reproducibility seed.
    """
    if reps < 1000:
        raise ParameterError(f"reps must be >= 1000, got {reps}")
    if steps < 100:
        raise ParameterError(f"steps must be >= 100, got {steps}")
    if not 0 < eps < 0.5:
        raise ParameterError(f"eps must lie in (0, 0.5), got {eps}")
    if quantile is None:
        quantile = DEFAULT_QUANTILE.get(functional)
        if quantile is None:
            raise ParameterError(
                f"unknown functional {functional!r}; expected one of {FUNCTIONALS}"
            )
    if not 0 < quantile < 1:
        raise ParameterError(f"quantile must lie in (0,1), got {quantile}")

    draws = np.empty(reps)
    done = 0
    block = 0
    scale = 1.0 / math.sqrt(steps)
    while done < reps:
        n = min(_PATH_BATCH, reps - done)
        rng = np.random.default_rng([seed, block])
        inc = rng.standard_normal((n, steps)) * scale
        w = np.concatenate([np.zeros((n, 1)), np.cumsum(inc, axis=1)], axis=1)
        draws[done:done + n] = _functional_draws(functional, lambda1_star, eps, w, steps)
        done += n
        block += 1
    return float(np.quantile(draws, quantile))


def tabulate_cvs(
    functional: str,
    lambdas: Iterable[float],
    eps: float = 0.1,
    reps: int = 50_000,
    steps: int = 1000,
    quantile: float | None = None,
    seed: int = 0,
) -> list[dict]:
    """Simulate critical values over a fraction grid; rows ready for CSV export."""
    rows = []
    for i, lam in enumerate(lambdas):
        cv = simulate_cv(
            functional, lam, eps=eps, reps=reps, steps=steps,
            quantile=quantile, seed=seed + i,
        )
        rows.append(
            {
                "lambda": round(float(lam), 6),
                "cv": cv,
                "functional": functional,
                "reps": reps,
                "steps": steps,
                "quantile": quantile if quantile is not None else DEFAULT_QUANTILE[functional],
                "seed": seed + i,
            }
        )
    return rows


def fit_surface(
    grid: Iterable[tuple[float, float]],
    two_branch: bool = False,
    degree: int = 3,
) -> tuple[ResponseSurface, dict]:
    """Least-squares fit of the cubic-plus-reciprocal response surface.

    Parameters
    ----------
    grid : iterable of (lambda, cv)
        Simulated critical values on a fraction grid (>= 10 points).
    two_branch : bool
        Add the indicator-activated second polynomial block for lam > 0.7.
    degree : int
        Must be 3; the functional form is part of the model class and other
        degrees raise :class:`FitError`.

    Returns
    -------
    (ResponseSurface, dict)
        The fitted surface and a residual report with keys ``rmse``,
        ``max_abs_resid`` and ``n``.
    """
    if degree != 3:
        raise FitError(f"surface model class is cubic-plus-reciprocal; degree={degree} unsupported")
    pts = [(float(l), float(c)) for l, c in grid]
    if len(pts) < 10:
        raise FitError(f"need at least 10 grid points, got {len(pts)}")
    lam = np.array([p[0] for p in pts])
    cv = np.array([p[1] for p in pts])
    if np.any(lam <= 0):
        raise FitError("grid fractions must be positive")
    base = np.column_stack([np.ones_like(lam), 1.0 / lam, lam, lam**2, lam**3])
    if two_branch:
        ind = (lam > _BRANCH_THRESHOLD).astype(float)[:, None]
        x = np.hstack([base, base * ind])
    else:
        x = base
    coef, _, rank, _ = np.linalg.lstsq(x, cv, rcond=None)
    if rank < x.shape[1]:
        raise FitError(
            f"rank-deficient design (rank {rank} < {x.shape[1]}); "
            "widen the grid or drop the second branch"
        )
    if two_branch:
        surface = ResponseSurface(*coef[:5], *coef[5:])
    else:
        surface = ResponseSurface(*coef)
    resid = cv - x @ coef
    report = {
        "rmse": float(np.sqrt(np.mean(resid**2))),
        "max_abs_resid": float(np.max(np.abs(resid))),
        "n": len(pts),
    }
    return surface, report


@dataclass(frozen=True)
class CvBundle:
    """Critical values for every date type and variant at one significance level.

    ``delta`` is the two-sided level, split evenly across tails.  Closed-form
    chi-square values adapt to any ``delta``; surface-backed values are only
    available at the level the surfaces were fit for (0.05 per tail, i.e.
    ``delta = 0.10``) unless refit surfaces are supplied.

    Each accessor returns ``(cv_12, cv_21)`` — the critical values compared
    against that date type's 12- and 21-statistics.  The tail orientation
    (which comparison rejects) lives in the decision functions.
    """

    delta: float = 0.10
    surfaces: Mapping[str, ResponseSurface] = None
    source: str = "table-1"

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta < 1.0:
            raise ParameterError(f"delta must lie in [0,1), got {self.delta}")
        if self.surfaces is None:
            object.__setattr__(self, "surfaces", TABLE1_SURFACES)

    @property
    def tail_level(self) -> float:
        return self.delta / 2.0

    def _surface(self, key: str) -> ResponseSurface:
        if self.surfaces is TABLE1_SURFACES and not math.isclose(self.delta, 0.10):
            raise ParameterError(
                "built-in surfaces are fit at the 0.05 per-tail level; "
                f"delta={self.delta} requires freshly tabulated surfaces"
            )
        try:
            return self.surfaces[key]
        except KeyError:
            raise ParameterError(f"no surface available for {key!r}") from None

    # -- emergence: 12-statistics reject in the left tail, 21 in the right --

    def emergence(self, variant: str, t1: int, t_ub: int, sample_size: int) -> tuple[float, float]:
        lam1 = t1 / sample_size
        lam1_star = grid_lambda(t1 / t_ub)
        shape = "quadratic" if variant in ("LRa", "LE") else "absolute"
        cv12 = chi2_cv(self.tail_level, lam1, shape, +1)
        key = {"LRa": "LR21e", "EMa": "EMa21e", "EMb": "EMb21e", "LE": "EMa21e"}[variant]
        cv21 = self._surface(key)(lam1_star)
        return cv12, cv21

    # -- collapse: 12-statistics reject in the right tail, 21 in the left --

    def collapse(self, variant: str, lambda_e: float) -> tuple[float, float]:
        if variant == "LRa":
            return (
                chi2_cv(self.tail_level, lambda_e, "quadratic", -1),
                chi2_cv(self.tail_level, lambda_e, "quadratic", +1),
            )
        if variant in ("EMa", "EMb"):
            return (
                chi2_cv(self.tail_level, lambda_e, "absolute", -1),
                chi2_cv(self.tail_level, lambda_e, "absolute", +1),
            )
        raise ParameterError(f"collapse variant must be LRa, EMa or EMb, got {variant!r}")

    # -- recovery: 12-statistics reject in the left tail, 21 in the right --

    def recovery(
        self, variant: str, t1: int, t_c: int, t_cu: int, lambda_e: float
    ) -> tuple[float, float]:
        lam1_star = grid_lambda((t1 - t_c) / t_cu)
        if variant == "LRa":
            cv12 = chi2_cv(self.tail_level, lambda_e, "quadratic", +1)
        elif variant == "EMa":
            cv12 = self._surface("EMa12r")(lam1_star)
        elif variant in ("EMb", "LE"):
            cv12 = self._surface("EMb12r")(lam1_star)
        else:
            raise ParameterError(f"unknown recovery variant {variant!r}")
        if variant in ("LRa", "LE"):
            cv21 = chi2_cv(self.tail_level, lambda_e, "quadratic", -1)
        else:
            cv21 = chi2_cv(self.tail_level, lambda_e, "absolute", -1)
        return cv12, cv21
