"""Independent brute-force oracles.

Everything here recomputes quantities with direct loops, naive scans, and
plain power/arithmetic so the fast prefix-sum and log-space implementations
are checked against a genuinely different code path.
"""

from __future__ import annotations

import math


def recursion_path(sample_size, t_e, t_c, t_r, phi_a, phi_b, y0, eps):
    """Straight re-run of the four-regime recursion."""
    y = [float(y0)]
    for t in range(1, sample_size + 1):
        if t <= t_e or t > t_r:
            y.append(y[-1] + eps[t - 1])
        elif t <= t_c:
            y.append(phi_a * y[-1] + eps[t - 1])
        else:
            y.append(phi_b * y[-1] + eps[t - 1])
    return y


def range_sum_ydy(y, t1, t2):
    return sum(y[t - 1] * (y[t] - y[t - 1]) for t in range(t1 + 1, t2 + 1))


def range_sum_y2(y, t1, t2):
    return sum(y[t - 1] ** 2 for t in range(t1 + 1, t2 + 1))


def range_sum_dy2(y, t1, t2):
    return sum((y[t] - y[t - 1]) ** 2 for t in range(t1 + 1, t2 + 1))


def t_stat(y, sigma2, t1, t2):
    return range_sum_ydy(y, t1, t2) / math.sqrt(sigma2 * range_sum_y2(y, t1, t2))


def emergence_stats(y, phi_a, sigma2, t_c, t1, eps, sample_size):
    """All seven emergence statistics by naive scan."""
    rho_a = phi_a - 1.0
    t_ub = t_c
    m = math.floor(t_ub * eps)
    grid12 = range(t1 + m, t_c + 1)
    num_a = [2 * range_sum_ydy(y, t1, t2) - rho_a * range_sum_y2(y, t1, t2) for t2 in grid12]
    num_b = [y[t2] ** 2 - rho_a * range_sum_y2(y, t1, t2) for t2 in grid12]
    t12 = [t_stat(y, sigma2, t1, t2) for t2 in grid12]

    def den12(t2):
        return sample_size * phi_a ** (2 * (t2 - t1)) * sigma2 / 2.0

    ia = min(range(len(num_a)), key=num_a.__getitem__)
    ib = min(range(len(num_b)), key=num_b.__getitem__)
    ie = min(range(len(t12)), key=t12.__getitem__)
    grid12 = list(grid12)
    out = {
        "lr_a12": num_a[ia] / den12(grid12[ia]),
        "lr_b12": num_b[ib] / den12(grid12[ib]),
        "em_a12": sum(t12) / math.sqrt(sample_size * phi_a ** (2 * (t_c - t1)) / (2 * rho_a)),
        "em_b12": t12[ie] / math.sqrt(sample_size * rho_a * phi_a ** (2 * (grid12[ie] - t1)) / 2.0),
        "t_lra12": grid12[ia],
        "t_lrb12": grid12[ib],
        "t_emb12": grid12[ie],
    }
    grid21 = range(1, t1 - m + 1)
    num21 = [2 * range_sum_ydy(y, t2, t1) - rho_a * range_sum_y2(y, t2, t1) for t2 in grid21]
    t21 = [t_stat(y, sigma2, t2, t1) for t2 in grid21]
    out["lr_a21"] = max(num21) / (t_ub**2 * rho_a * sigma2)
    out["em_a21"] = sum(t21) / t_ub
    out["em_b21"] = max(t21)
    return out


def collapse_stats(y, phi_a, phi_b, sigma2, t_e, t_r, t1, eps, sample_size):
    """All six collapse statistics by naive scan."""
    rho_a, rho_b = phi_a - 1.0, 1.0 - phi_b
    m = math.floor((t_r - t_e) * eps)
    gap = 2.0 - phi_a - phi_b
    pow_a = phi_a ** (2 * (t1 - t_e))
    grid12 = list(range(t1 + m, t_r + 1))
    num12 = [
        2 * range_sum_ydy(y, t1, t2) + gap * range_sum_y2(y, t1, t2) for t2 in grid12
    ]
    t12 = [t_stat(y, sigma2, t1, t2) for t2 in grid12]
    grid21 = list(range(t_e + 1, t1 - m + 1))
    num21 = [
        2 * range_sum_ydy(y, t2, t1) + gap * range_sum_y2(y, t2, t1) for t2 in grid21
    ]
    t21 = [t_stat(y, sigma2, t2, t1) for t2 in grid21]
    em_den_12 = math.sqrt(sample_size * rho_b * pow_a / 2.0)
    em_den_21 = math.sqrt(sample_size * rho_a * pow_a / 2.0)
    return {
        "lr_a12": max(num12) / (sample_size * (phi_a - phi_b) * pow_a * sigma2 / (2 * rho_b)),
        "lr_a21": min(num21) / (sample_size * (phi_a - phi_b) * pow_a * sigma2 / (2 * rho_a)),
        "em_a12": (sum(t12) / len(grid12)) / em_den_12,
        "em_a21": (sum(t21) / len(grid21)) / em_den_21,
        "em_b12": max(t12) / em_den_12,
        "em_b21": min(t21) / em_den_21,
    }


def recovery_stats(y, phi_a, phi_b, sigma2, t_e, t_c, t1, eps, sample_size):
    """All seven recovery statistics by naive scan."""
    rho_b = 1.0 - phi_b
    t_cu = sample_size - t_c
    m = math.floor(t_cu * eps)
    growth = phi_a ** (2 * (t_c - t_e))
    grid12 = list(range(t1 + m, sample_size + 1))
    num12 = [
        2 * range_sum_ydy(y, t1, t2) + rho_b * range_sum_y2(y, t1, t2) for t2 in grid12
    ]
    t12 = [t_stat(y, sigma2, t1, t2) for t2 in grid12]
    i = min(range(len(num12)), key=num12.__getitem__)
    lr_a12 = num12[i] / (
        sample_size * (grid12[i] - t1) * rho_b * growth * phi_b ** (2 * (t1 - t_c)) * sigma2
    )
    grid21 = list(range(t_c + m, t1 - m + 1))
    num_a21 = [
        2 * range_sum_ydy(y, t2, t1) + rho_b * range_sum_y2(y, t2, t1) for t2 in grid21
    ]
    num_b21 = [
        -y[t2] ** 2 - range_sum_dy2(y, t2, t1) + rho_b * range_sum_y2(y, t2, t1)
        for t2 in grid21
    ]
    t21 = [t_stat(y, sigma2, t2, t1) for t2 in grid21]

    def den21(t2):
        return sample_size * growth * phi_b ** (2 * (t2 - t_c)) * sigma2 / 2.0

    ja = max(range(len(num_a21)), key=num_a21.__getitem__)
    jb = max(range(len(num_b21)), key=num_b21.__getitem__)
    je = max(range(len(t21)), key=t21.__getitem__)
    return {
        "lr_a12": lr_a12,
        "em_a12": sum(t12) / t_cu,
        "em_b12": min(t12),
        "lr_a21": num_a21[ja] / den21(grid21[ja]),
        "lr_b21": num_b21[jb] / den21(grid21[jb]),
        "em_a21": sum(t21)
        / math.sqrt(sample_size * growth * phi_b ** (2 * m) / (2 * rho_b)),
        "em_b21": t21[je]
        / math.sqrt(sample_size * rho_b * growth * phi_b ** (2 * (grid21[je] - t_c)) / 2.0),
        "t_lra12": grid12[i],
        "t_lra21": grid21[ja],
        "t_lrb21": grid21[jb],
        "t_emb21": grid21[je],
    }


def chi2_quantile_bisect(level, tol=1e-12):
    """Chi-square(1) quantile by bisection on the erf-based CDF."""

    def cdf(x):
        return math.erf(math.sqrt(x / 2.0))

    lo, hi = 0.0, 100.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cdf(mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def adf_t_with_intercept(y, end):
    """ADF t-ratio on observations (0, end] by explicit regression algebra."""
    n = end
    x = [y[t - 1] for t in range(1, end + 1)]
    d = [y[t] - y[t - 1] for t in range(1, end + 1)]
    mx = sum(x) / n
    md = sum(d) / n
    sxx = sum((xi - mx) ** 2 for xi in x)
    sxd = sum((xi - mx) * (di - md) for xi, di in zip(x, d))
    rho = sxd / sxx
    ssr = sum((di - md - rho * (xi - mx)) ** 2 for xi, di in zip(x, d))
    s2 = ssr / (n - 2)
    if s2 == 0:
        return math.inf if rho > 0 else -math.inf
    return rho / math.sqrt(s2 / sxx)
