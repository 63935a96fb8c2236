"""Command-line front end.

Subcommands
-----------
detect    sup-ADF explosiveness pre-test with a simulated critical value
estimate  break dates (emergence, collapse, recovery) as calendar dates
ci        the three confidence sets plus band CSV and rendered figure
mc        Monte Carlo coverage/length report for a scenario
tabulate  simulate critical values over a fraction grid, optionally refit
          the response surfaces

Flags can also be supplied through ``--config FILE`` holding flat
``key=value`` lines (same names as the long flags, dashes as underscores);
explicit flags win.  Every artifact embeds the resolved configuration and
seed.  Exit codes: 0 success, 2 configuration error, 3 data error,
4 numeric degeneracy.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .confidence_sets import build_set
from .critical_values import (
    DEFAULT_QUANTILE,
    FUNCTIONALS,
    fit_surface,
    tabulate_cvs,
)
from .errors import (
    BubbleDatesError,
    DataError,
    DegenerateFitError,
    NumericOverflowError,
    ParameterError,
)
from .estimation import estimate_breaks, fit_regimes, sadf, sadf_critical_value
from .ingest import ingest
from .montecarlo import CASES, McScenario, emit_tables, run_scenario

_EXIT_CONFIG = 2
_EXIT_DATA = 3
_EXIT_NUMERIC = 4


def _read_config(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{n}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill argument defaults from --config for flags the user did not pass."""
    if not getattr(args, "config", None):
        return
    cfg = _read_config(args.config)
    for key, raw in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ParameterError(f"unknown config key {key!r}")
        if attr in args._explicit:  # command line wins
            continue
        current = getattr(args, attr)
        if isinstance(current, bool):
            setattr(args, attr, raw.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, attr, int(raw))
        elif isinstance(current, float):
            setattr(args, attr, float(raw))
        else:
            setattr(args, attr, raw)


class _TrackingParser(argparse.ArgumentParser):
    """Remember which destinations were set explicitly on the command line."""

    def parse_args(self, argv=None, namespace=None):  # noqa: D102
        args = super().parse_args(argv, namespace)
        explicit = set()
        tokens = list(argv) if argv is not None else sys.argv[1:]
        for tok in tokens:
            if tok.startswith("--"):
                explicit.add(tok[2:].split("=")[0].replace("-", "_"))
        args._explicit = explicit
        return args


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _provenance_lines(args, extra: dict | None = None) -> list[str]:
    items = {
        "command": args.command,
        "version": __version__,
        **{
            k: v
            for k, v in sorted(vars(args).items())
            if not k.startswith("_") and k not in ("command", "func") and v is not None
        },
    }
    if extra:
        items.update(extra)
    return [f"# {k}={v}" for k, v in items.items()]


def _provenance_dict(args, extra: dict | None = None) -> dict:
    d = {
        k: v
        for k, v in sorted(vars(args).items())
        if not k.startswith("_") and k not in ("command", "func") and v is not None
    }
    d["command"] = args.command
    d["version"] = __version__
    if extra:
        d.update(extra)
    return d


def _load_series(args):
    return ingest(
        args.input,
        date_column=args.date_column,
        price_column=args.price_column,
        log_transform=not args.no_log,
    )


def _cmd_detect(args) -> int:
    series, dates = _load_series(args)
    stat = sadf(series, r0=args.r0, lags=args.lags)
    cv = sadf_critical_value(
        series.sample_size, r0=args.r0, level=args.level,
        reps=args.cv_reps, seed=args.seed, lags=args.lags,
    )
    verdict = bool(stat > cv)
    out = _out_dir(args)
    payload = {
        "sadf": stat,
        "critical_value": cv,
        "level": args.level,
        "explosive": verdict,
        "observations": series.sample_size,
        "start": str(dates[0]),
        "end": str(dates[-1]),
        "config": _provenance_dict(args),
    }
    (out / "detect.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(
        f"sup-ADF = {stat:.4f}, {args.level:.0%} critical value = {cv:.4f} "
        f"-> {'explosive episode detected' if verdict else 'no rejection'}"
    )
    return 0


def _cmd_estimate(args) -> int:
    series, dates = _load_series(args)
    breaks = estimate_breaks(series, trim=args.trim)
    fit = fit_regimes(series, breaks)
    out = _out_dir(args)
    payload = {
        "emergence": {"index": breaks.t_e, "date": str(dates[breaks.t_e])},
        "collapse": {"index": breaks.t_c, "date": str(dates[breaks.t_c])},
        "recovery": {"index": breaks.t_r, "date": str(dates[breaks.t_r])},
        "phi_a_hat": fit.phi_a_hat,
        "phi_b_hat": fit.phi_b_hat,
        "sigma2_hat": fit.sigma2_hat,
        "config": _provenance_dict(args),
    }
    (out / "estimate.json").write_text(json.dumps(payload, indent=2) + "\n")
    for name in ("emergence", "collapse", "recovery"):
        print(f"{name}: {payload[name]['date']} (t = {payload[name]['index']})")
    return 0


def _cmd_ci(args) -> int:
    series, dates = _load_series(args)
    breaks = estimate_breaks(series, trim=args.trim)
    fit = fit_regimes(series, breaks)
    variants = {
        "emergence": args.variant_emergence,
        "collapse": args.variant_collapse,
        "recovery": args.variant_recovery,
    }
    sets = {}
    for date_type, variant in variants.items():
        sets[date_type] = build_set(
            series, fit, breaks, date_type,
            variant=variant, delta=args.delta, eps=args.eps, ends="estimated",
        )
    out = _out_dir(args)
    prov = _provenance_lines(args)
    for date_type, cs in sets.items():
        path = out / f"confidence_set_{date_type}.csv"
        path.write_text("\n".join(prov) + "\n" + cs.to_csv())

    # Band rows are derived from the same ConfidenceSet objects that were
    # serialized above, so the figure and CSVs share one source of truth.
    membership = {dt: set(cs.retained) for dt, cs in sets.items()}
    band_rows = [
        {
            "index": i,
            "date": str(dates[i]),
            "level": float(series.y[i]),
            "in_emergence_set": int(i in membership["emergence"]),
            "in_collapse_set": int(i in membership["collapse"]),
            "in_recovery_set": int(i in membership["recovery"]),
        }
        for i in range(series.y.size)
    ]
    band_csv = out / "bands.csv"
    with band_csv.open("w") as fh:
        fh.write("\n".join(prov) + "\n")
        fh.write("index,date,level,in_emergence_set,in_collapse_set,in_recovery_set\n")
        for r in band_rows:
            fh.write(
                f"{r['index']},{r['date']},{r['level']:.17g},"
                f"{r['in_emergence_set']},{r['in_collapse_set']},{r['in_recovery_set']}\n"
            )
    if not args.no_plot:
        from .plotting import render_bands

        estimates = {
            "emergence": breaks.t_e,
            "collapse": breaks.t_c,
            "recovery": breaks.t_r,
        }
        render_bands(band_rows, estimates, out / "bands.png")

    # The point estimate need not belong to its own set; report both sides.
    summary = {
        "estimates": {
            "emergence": {"index": breaks.t_e, "date": str(dates[breaks.t_e])},
            "collapse": {"index": breaks.t_c, "date": str(dates[breaks.t_c])},
            "recovery": {"index": breaks.t_r, "date": str(dates[breaks.t_r])},
        },
        "sets": {dt: json.loads(cs.to_json()) for dt, cs in sets.items()},
        "estimate_in_set": {
            dt: bool(
                cs.contains({"emergence": breaks.t_e, "collapse": breaks.t_c,
                             "recovery": breaks.t_r}[dt])
            )
            for dt, cs in sets.items()
        },
        "config": _provenance_dict(args),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    for date_type, cs in sets.items():
        runs = ", ".join(
            f"{dates[a]}..{dates[b]}" for a, b in cs.runs()
        ) or "(empty)"
        print(f"{date_type} ({cs.variant}, {1 - cs.delta:.0%}): {runs}")
    return 0


def _cmd_mc(args) -> int:
    date_types = tuple(args.date_types.split(",")) if args.date_types else ("emergence", "collapse", "recovery")
    scenario = McScenario(
        a=args.a,
        case=args.case,
        ends=args.ends,
        reps=args.reps,
        seed=args.seed,
        sample_size=args.sample_size,
        sigma=args.sigma,
        y0=args.y0,
        delta=args.delta,
        eps=args.eps,
        trim=args.trim,
        date_types=date_types,
    )
    report = run_scenario(scenario, n_jobs=args.threads)
    out = _out_dir(args)
    (out / "mc_report.csv").write_text(emit_tables(report, "csv"))
    md = emit_tables(report, "markdown")
    (out / "mc_report.md").write_text(md)
    if not args.no_plot:
        from .plotting import render_mc_report

        render_mc_report(report, out / "mc_report.png")
    print(md)
    return 0


def _cmd_tabulate(args) -> int:
    functionals = FUNCTIONALS if args.functional == "all" else (args.functional,)
    try:
        lo, step, hi = (float(x) for x in args.grid.split(":"))
    except ValueError:
        raise ParameterError(f"--grid must be lo:step:hi, got {args.grid!r}") from None
    lambdas = np.arange(lo, hi + step / 2, step).round(6)
    out = _out_dir(args)
    all_rows = []
    for fn in functionals:
        all_rows.extend(
            tabulate_cvs(
                fn, lambdas, eps=args.eps, reps=args.reps, steps=args.steps,
                quantile=args.quantile, seed=args.seed,
            )
        )
    with (out / "cv_table.csv").open("w") as fh:
        fh.write("\n".join(_provenance_lines(args)) + "\n")
        fh.write("lambda,cv,functional,reps,steps,quantile,seed\n")
        for r in all_rows:
            fh.write(
                f"{r['lambda']},{r['cv']:.17g},{r['functional']},{r['reps']},"
                f"{r['steps']},{r['quantile']},{r['seed']}\n"
            )
    if not args.no_plot:
        from .plotting import render_cv_table

        render_cv_table(all_rows, out / "cv_table.png")
    if args.fit:
        surfaces = {}
        for fn in functionals:
            pts = [(r["lambda"], r["cv"]) for r in all_rows if r["functional"] == fn]
            surface, resid = fit_surface(pts, two_branch=(fn == "EMb12r"))
            surfaces[fn] = {
                "coefficients": {
                    k: getattr(surface, k)
                    for k in ("a0", "a_m1", "a1", "a2", "a3", "b0", "b_m1", "b1", "b2", "b3")
                    if getattr(surface, k) is not None
                },
                "residuals": resid,
            }
        (out / "surfaces.json").write_text(json.dumps(
            {"surfaces": surfaces, "config": _provenance_dict(args)}, indent=2) + "\n")
    print(f"tabulated {len(all_rows)} critical values -> {out / 'cv_table.csv'}")
    return 0


def _add_io_flags(p) -> None:
    p.add_argument("--input", required=True, help="CSV with date and price columns")
    p.add_argument("--date-column", default="date")
    p.add_argument("--price-column", default="price")
    p.add_argument("--no-log", action="store_true", help="analyze raw levels, not logs")


def _add_common(p) -> None:
    p.add_argument("--config", help="flat key=value config file; flags override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".", help="artifact directory")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def build_parser() -> _TrackingParser:
    parser = _TrackingParser(prog="bubbledates")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="sup-ADF explosiveness pre-test")
    _add_io_flags(p)
    _add_common(p)
    p.add_argument("--r0", type=float, default=0.1, help="minimal window fraction")
    p.add_argument("--lags", type=int, default=0)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--cv-reps", type=int, default=2000)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("estimate", help="estimate break dates")
    _add_io_flags(p)
    _add_common(p)
    p.add_argument("--trim", type=float, default=0.10)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("ci", help="confidence sets for the three dates")
    _add_io_flags(p)
    _add_common(p)
    p.add_argument("--trim", type=float, default=0.10)
    p.add_argument("--delta", type=float, default=0.10)
    p.add_argument("--eps", type=float, default=0.10)
    p.add_argument("--variant-emergence", default="LE", choices=("LRa", "EMa", "EMb", "LE"))
    p.add_argument("--variant-collapse", default="EMa", choices=("LRa", "EMa", "EMb"))
    p.add_argument("--variant-recovery", default="LE", choices=("LRa", "EMa", "EMb", "LE"))
    p.set_defaults(func=_cmd_ci)

    p = sub.add_parser("mc", help="Monte Carlo coverage/length report")
    _add_common(p)
    p.add_argument("--case", type=int, default=1, choices=sorted(CASES))
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--ends", default="true", choices=("true", "estimated"))
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--sample-size", type=int, default=200)
    p.add_argument("--sigma", type=float, default=6.79)
    p.add_argument("--y0", type=float, default=100.0)
    p.add_argument("--delta", type=float, default=0.10)
    p.add_argument("--eps", type=float, default=0.10)
    p.add_argument("--trim", type=float, default=0.10)
    p.add_argument("--date-types", default=None, help="comma list, default all three")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("tabulate", help="simulate critical-value tables")
    _add_common(p)
    p.add_argument("--functional", default="all", choices=FUNCTIONALS + ("all",))
    p.add_argument("--grid", default="0.10:0.01:0.90", help="lambda grid lo:step:hi")
    p.add_argument("--eps", type=float, default=0.10)
    p.add_argument("--reps", type=int, default=50_000)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--quantile", type=float, default=None,
                   help=f"default per functional: {DEFAULT_QUANTILE}")
    p.add_argument("--fit", action="store_true", help="refit response surfaces")
    p.set_defaults(func=_cmd_tabulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args, parser)
        return args.func(args)
    except (DataError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_DATA
    except (DegenerateFitError, NumericOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except (ParameterError, BubbleDatesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
