"""Figure rendering for CLI reports.

Figures are derived from the same rows that go into the delimited outputs,
so the picture and the CSV cannot drift apart.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .confidence_sets import VARIANTS_BY_TYPE
from .montecarlo import McReport

BAND_COLORS = {"emergence": "0.6", "collapse": "steelblue", "recovery": "gold"}


def render_bands(band_rows, estimates, out_path, title="Confidence sets for bubble dates"):
    """Price path with shaded confidence bands and point-estimate lines.

    ``band_rows`` are dicts with keys ``index``, ``level``, ``in_emergence_set``,
    ``in_collapse_set``, ``in_recovery_set`` (the rows of the bands CSV);
    ``estimates`` maps date type to the estimated observation index.
    """
    idx = np.array([r["index"] for r in band_rows])
    level = np.array([r["level"] for r in band_rows])
    fig, ax = plt.subplots(figsize=(9, 4.5))
    for date_type, color in BAND_COLORS.items():
        member = np.array([bool(r[f"in_{date_type}_set"]) for r in band_rows])
        ax.fill_between(
            idx, level.min(), level.max(), where=member,
            color=color, alpha=0.35, linewidth=0, label=f"{date_type} set",
        )
    for date_type, est in estimates.items():
        ax.axvline(est, color="red", linewidth=1.0)
    ax.plot(idx, level, color="black", linewidth=1.0)
    ax.set_xlabel("observation")
    ax.set_ylabel("level")
    ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_mc_report(report: McReport, out_path):
    """Coverage and length bars per variant, one panel pair per date type."""
    date_types = report.scenario.date_types
    fig, axes = plt.subplots(2, len(date_types), figsize=(4 * len(date_types), 6), squeeze=False)
    for j, dt in enumerate(date_types):
        variants = VARIANTS_BY_TYPE[dt]
        x = np.arange(len(variants))
        cov = [report.values[(dt, v, "coverage")] for v in variants]
        ln = [report.values[(dt, v, "length")] for v in variants]
        ax = axes[0][j]
        ax.bar(x, cov, color="steelblue")
        ax.axhline(1 - report.scenario.delta, color="red", linestyle="--", linewidth=1)
        ax.set_xticks(x, variants)
        ax.set_ylim(0, 1.05)
        ax.set_title(f"{dt}: coverage")
        ax = axes[1][j]
        ax.bar(x, ln, color="0.6")
        ax.set_xticks(x, variants)
        ax.set_ylim(0, 1.0)
        ax.set_title(f"{dt}: relative length")
    fig.suptitle(
        f"case {report.scenario.case}, a={report.scenario.a}, "
        f"ends={report.scenario.ends}, reps={report.scenario.reps}"
    )
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_cv_table(rows, out_path):
    """Simulated critical values against the break fraction, one line per functional."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_functional: dict[str, list] = {}
    for r in rows:
        by_functional.setdefault(r["functional"], []).append(r)
    for functional, pts in by_functional.items():
        pts = sorted(pts, key=lambda r: r["lambda"])
        ax.plot(
            [p["lambda"] for p in pts],
            [p["cv"] for p in pts],
            marker="o", markersize=2.5, linewidth=1, label=functional,
        )
    ax.set_xlabel("within-segment break fraction")
    ax.set_ylabel("critical value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
