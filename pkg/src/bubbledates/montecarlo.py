"""Scenario engine reproducing the coverage and length experiments.

A scenario draws replications of the four-regime process (defaults: 200
observations, Gaussian innovations with standard deviation 6.79, initial
level 100, local-to-unity rates ``phi_a = 1 + a/T`` and ``phi_b = 1 - a/T``),
builds the confidence sets for each date type either on the true segment
boundaries or on estimated ones, and aggregates coverage rates and relative
lengths.

Coverage averages over ALL replications; length averages include only the
replications whose estimated segment actually contains the true date (with
true ends that is every replication).  Replications are seeded as
``(seed, replication_index)`` so results are identical for any worker count.
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .confidence_sets import (
    VARIANTS_BY_TYPE,
    build_sets,
    fit_is_degenerate,
    set_metrics,
)
from .critical_values import CvBundle
from .errors import ParameterError
from .estimation import estimate_breaks, fit_regimes
from .model import BubbleDgpSpec, prefix_sums, simulate

__all__ = ["CASES", "McReport", "McScenario", "emit_tables", "run_scenario"]

CASES: Mapping[int, tuple[float, float, float]] = {
    1: (0.3, 0.5, 0.7),
    2: (0.4, 0.6, 0.8),
    3: (0.5, 0.7, 0.9),
    4: (0.4, 0.6, 0.7),
}

METRICS = (
    "coverage",
    "coverage12",
    "coverage21",
    "length",
    "length12left",
    "length12right",
    "length21left",
    "length21right",
)

DATE_TYPES = ("emergence", "collapse", "recovery")


@dataclass(frozen=True)
class McScenario:
    """One Monte Carlo configuration.

    ``case`` selects a built-in break-fraction triple; pass ``fractions``
    directly for a custom design.  ``ends`` chooses whether segments are
    bounded by the true break dates or by estimates.
    """

    a: float = 2.0
    case: int = 1
    fractions: tuple[float, float, float] | None = None
    ends: str = "true"
    reps: int = 2000
    seed: int = 0
    sample_size: int = 200
    sigma: float = 6.79
    y0: float = 100.0
    delta: float = 0.10
    eps: float = 0.10
    trim: float = 0.10
    date_types: tuple[str, ...] = DATE_TYPES

    def __post_init__(self) -> None:
        if self.fractions is None:
            if self.case not in CASES:
                raise ParameterError(f"unknown case {self.case}; choose from {sorted(CASES)}")
            object.__setattr__(self, "fractions", CASES[self.case])
        if self.ends not in ("true", "estimated"):
            raise ParameterError(f"ends must be 'true' or 'estimated', got {self.ends!r}")
        if self.reps < 1:
            raise ParameterError("reps must be >= 1")
        for dt in self.date_types:
            if dt not in DATE_TYPES:
                raise ParameterError(f"unknown date type {dt!r}")

    def dgp_spec(self) -> BubbleDgpSpec:
        lam_e, lam_c, lam_r = self.fractions
        return BubbleDgpSpec(
            sample_size=self.sample_size,
            a=self.a,
            alpha=1.0,
            b=self.a,
            beta=1.0,
            lambda_e=lam_e,
            lambda_c=lam_c,
            lambda_r=lam_r,
            sigma=self.sigma,
            y0=self.y0,
        )

    def config_items(self) -> list[tuple[str, str]]:
        lam = ",".join(repr(x) for x in self.fractions)
        return [
            ("a", repr(self.a)),
            ("case", str(self.case)),
            ("fractions", lam),
            ("ends", self.ends),
            ("reps", str(self.reps)),
            ("seed", str(self.seed)),
            ("sample_size", str(self.sample_size)),
            ("sigma", repr(self.sigma)),
            ("y0", repr(self.y0)),
            ("delta", repr(self.delta)),
            ("eps", repr(self.eps)),
            ("trim", repr(self.trim)),
            ("date_types", ",".join(self.date_types)),
        ]


def _layout(scenario: McScenario) -> list[tuple]:
    keys: list[tuple] = []
    for dt in scenario.date_types:
        for variant in VARIANTS_BY_TYPE[dt]:
            for metric in METRICS:
                keys.append((dt, variant, metric))
        keys.append((dt, "_meta", "truth_in_segment"))
        keys.append((dt, "_meta", "lengths_valid"))
    return keys


def _truth_date(dt: str, truth) -> int:
    return {"emergence": truth.t_e, "collapse": truth.t_c, "recovery": truth.t_r}[dt]


def _truth_in_segment(dt: str, truth, breaks, sample_size: int) -> bool:
    d = _truth_date(dt, truth)
    if dt == "emergence":
        return d <= breaks.t_c
    if dt == "collapse":
        return breaks.t_e < d <= breaks.t_r
    return breaks.t_c < d <= sample_size


def _replicate(scenario: McScenario, rep: int) -> np.ndarray:
    spec = scenario.dgp_spec()
    truth = spec.break_dates()
    rng = np.random.default_rng([scenario.seed, rep])
    series = simulate(spec, rng)
    if scenario.ends == "true":
        breaks = truth
    else:
        breaks = estimate_breaks(series, trim=scenario.trim)
    fit = fit_regimes(series, breaks)
    ps = prefix_sums(series)
    bundle = CvBundle(delta=scenario.delta)

    keys = _layout(scenario)
    out = np.zeros(len(keys))
    pos = 0
    for dt in scenario.date_types:
        variants = VARIANTS_BY_TYPE[dt]
        d_true = _truth_date(dt, truth)
        in_seg = _truth_in_segment(dt, truth, breaks, scenario.sample_size)
        degenerate = fit_is_degenerate(fit, dt)
        try:
            sets = build_sets(
                series, fit, breaks, dt,
                variants=variants,
                delta=scenario.delta,
                eps=scenario.eps,
                ends=scenario.ends,
                cv_bundle=bundle,
                prefix=ps,
            )
            buildable = True
        except ParameterError:
            sets, buildable = {}, False
        for variant in variants:
            if buildable:
                m = set_metrics(sets[variant], d_true)
                vals = (
                    m.contains, m.contains_12, m.contains_21,
                    m.length, m.length12_left, m.length12_right,
                    m.length21_left, m.length21_right,
                )
            else:
                vals = (0.0,) * len(METRICS)
            out[pos:pos + len(METRICS)] = vals
            pos += len(METRICS)
        out[pos] = float(in_seg)
        # Length averages cover only replications where the truth lies in the
        # segment and the tests were actually computable; a degenerate fit
        # retains every date, which says nothing about set size.
        out[pos + 1] = float(in_seg and buildable and not degenerate)
        pos += 2
    return out


@dataclass(frozen=True)
class McReport:
    """Aggregated coverage/length table for one scenario."""

    scenario: McScenario
    values: Mapping[tuple[str, str, str], float]
    non_containment: Mapping[str, float]
    lengths_reps_used: Mapping[str, int]

    def value(self, date_type: str, variant: str, metric: str) -> float:
        return self.values[(date_type, variant, metric)]


def run_scenario(scenario: McScenario, n_jobs: int = 1) -> McReport:
    """Run all replications and aggregate.

    ``n_jobs > 1`` distributes replications over processes; the result is
    byte-identical for any job count because each replication owns an RNG
    keyed by its index and aggregation happens in index order.
    """
    reps = scenario.reps
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            chunk = max(1, reps // (n_jobs * 8))
            rows = list(
                pool.map(_replicate, [scenario] * reps, range(reps), chunksize=chunk)
            )
    else:
        rows = [_replicate(scenario, rep) for rep in range(reps)]
    arr = np.vstack(rows)
    keys = _layout(scenario)

    values: dict[tuple[str, str, str], float] = {}
    non_containment: dict[str, float] = {}
    lengths_used: dict[str, int] = {}
    valid_mask: dict[str, np.ndarray] = {}
    for j, key in enumerate(keys):
        dt, variant, metric = key
        if variant == "_meta":
            if metric == "truth_in_segment":
                non_containment[dt] = 1.0 - float(arr[:, j].mean())
            else:
                mask = arr[:, j] > 0
                valid_mask[dt] = mask
                lengths_used[dt] = int(mask.sum())
    for j, key in enumerate(keys):
        dt, variant, metric = key
        if variant == "_meta":
            continue
        if metric.startswith("length"):
            mask = valid_mask[dt]
            values[key] = float(arr[mask, j].mean()) if mask.any() else 0.0
        else:
            values[key] = float(arr[:, j].mean())
    return McReport(
        scenario=scenario,
        values=values,
        non_containment=non_containment,
        lengths_reps_used=lengths_used,
    )


def emit_tables(report: McReport, fmt: str = "csv") -> str:
    """Render a report as CSV (lossless, parseable) or markdown tables."""
    if fmt == "csv":
        return _emit_csv(report)
    if fmt == "markdown":
        return _emit_markdown(report)
    raise ParameterError(f"format must be 'csv' or 'markdown', got {fmt!r}")


def _emit_csv(report: McReport) -> str:
    buf = io.StringIO()
    buf.write("# bubbledates monte carlo report\n")
    for k, v in report.scenario.config_items():
        buf.write(f"# {k}={v}\n")
    buf.write("date_type,variant,metric,value\n")
    for dt in report.scenario.date_types:
        for variant in VARIANTS_BY_TYPE[dt]:
            for metric in METRICS:
                v = report.values[(dt, variant, metric)]
                buf.write(f"{dt},{variant},{metric},{v:.17g}\n")
        buf.write(f"{dt},_meta,non_containment,{report.non_containment[dt]:.17g}\n")
        buf.write(f"{dt},_meta,lengths_reps_used,{report.lengths_reps_used[dt]}\n")
    return buf.getvalue()


def parse_report_csv(text: str) -> McReport:
    """Parse :func:`emit_tables` CSV output back into an McReport."""
    meta: dict[str, str] = {}
    values: dict[tuple[str, str, str], float] = {}
    non_containment: dict[str, float] = {}
    lengths_used: dict[str, int] = {}
    for line in text.splitlines():
        if line.startswith("# ") and "=" in line:
            k, _, v = line[2:].partition("=")
            meta[k] = v
        elif not line or line.startswith("#") or line.startswith("date_type,"):
            continue
        else:
            dt, variant, metric, value = line.split(",", 3)
            if variant == "_meta":
                if metric == "non_containment":
                    non_containment[dt] = float(value)
                else:
                    lengths_used[dt] = int(value)
            else:
                values[(dt, variant, metric)] = float(value)
    fr = tuple(float(x) for x in meta["fractions"].split(","))
    scenario = McScenario(
        a=float(meta["a"]),
        case=int(meta["case"]),
        fractions=fr,
        ends=meta["ends"],
        reps=int(meta["reps"]),
        seed=int(meta["seed"]),
        sample_size=int(meta["sample_size"]),
        sigma=float(meta["sigma"]),
        y0=float(meta["y0"]),
        delta=float(meta["delta"]),
        eps=float(meta["eps"]),
        trim=float(meta["trim"]),
        date_types=tuple(meta["date_types"].split(",")),
    )
    return McReport(scenario, values, non_containment, lengths_used)


def _emit_markdown(report: McReport) -> str:
    buf = io.StringIO()
    sc = report.scenario
    buf.write(
        f"# Monte Carlo report (case {sc.case}, a={sc.a}, ends={sc.ends}, "
        f"reps={sc.reps}, seed={sc.seed})\n"
    )
    for dt in sc.date_types:
        variants = VARIANTS_BY_TYPE[dt]
        buf.write(f"\n## {dt}\n\n")
        buf.write("| metric | " + " | ".join(variants) + " |\n")
        buf.write("|---" * (len(variants) + 1) + "|\n")
        for metric in METRICS:
            row = " | ".join(
                f"{report.values[(dt, v, metric)]:.2f}" for v in variants
            )
            buf.write(f"| {metric} | {row} |\n")
        buf.write(
            f"\nnon-containment rate: {report.non_containment[dt]:.3f}; "
            f"replications used for lengths: {report.lengths_reps_used[dt]}\n"
        )
    return buf.getvalue()
