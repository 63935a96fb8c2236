"""Invert the location tests over all permissible dates into confidence sets.

A date enters the set unless some one-sided test rejects it, so the set is a
possibly discontinuous collection of integer dates.  Dates where a statistic
is undefined (degenerate fit, or a scan side with an empty range near the
segment edge) are RETAINED on that side with a logged flag: an undefined test
must not spuriously exclude dates.

Critical values for the surface-backed tails are evaluated at the
within-segment fraction snapped to the 0.01 tabulation grid and clamped to
[0.10, 0.90].
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

from . import collapse as _collapse
from . import emergence as _emergence
from . import recovery as _recovery
from .critical_values import CvBundle
from .errors import DegenerateFitError, ParameterError
from .estimation import RegimeFit
from .model import BreakDates, PrefixSums, Series, prefix_sums

__all__ = [
    "ConfidenceSet",
    "DateDecision",
    "SetMetrics",
    "build_set",
    "build_sets",
    "set_metrics",
]

DATE_TYPES = ("emergence", "collapse", "recovery")

DEFAULT_VARIANTS = {"emergence": "LE", "collapse": "EMa", "recovery": "LE"}

VARIANTS_BY_TYPE = {
    "emergence": _emergence.VARIANTS,
    "collapse": _collapse.VARIANTS,
    "recovery": _recovery.VARIANTS,
}

# Which statistic fields feed each variant's (12, 21) pair.
_PAIR_FIELDS = {
    "emergence": {
        "LRa": ("lr_a12", "lr_a21"),
        "EMa": ("em_a12", "em_a21"),
        "EMb": ("em_b12", "em_b21"),
        "LE": ("lr_b12", "em_a21"),
    },
    "collapse": {
        "LRa": ("lr_a12", "lr_a21"),
        "EMa": ("em_a12", "em_a21"),
        "EMb": ("em_b12", "em_b21"),
    },
    "recovery": {
        "LRa": ("lr_a12", "lr_a21"),
        "EMa": ("em_a12", "em_a21"),
        "EMb": ("em_b12", "em_b21"),
        "LE": ("em_b12", "lr_b21"),
    },
}

_NAN = float("nan")


@dataclass(frozen=True)
class DateDecision:
    """Log entry for one hypothesized date under one test variant."""

    t1: int
    stat_12: float
    stat_21: float
    cv_12: float
    cv_21: float
    reject_12: bool
    reject_21: bool
    flag: str  # "ok", "degenerate", "no-12-range", "no-21-range", "delta-zero"

    @property
    def retained(self) -> bool:
        return not (self.reject_12 or self.reject_21)


@dataclass(frozen=True)
class SetMetrics:
    """Containment and relative-length decomposition against a known date."""

    contains: bool
    contains_12: bool
    contains_21: bool
    truth_in_segment: bool
    length: float
    length12_left: float
    length12_right: float
    length21_left: float
    length21_right: float
    segment_length: int


@dataclass(frozen=True)
class ConfidenceSet:
    """Retained dates plus the full per-date decision log."""

    date_type: str
    variant: str
    delta: float
    eps: float
    ends: str
    segment_start: int  # exclusive
    segment_end: int  # inclusive
    sample_size: int
    decisions: tuple[DateDecision, ...]
    retained: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "retained",
            tuple(d.t1 for d in self.decisions if d.retained),
        )

    @property
    def segment_length(self) -> int:
        return self.segment_end - self.segment_start

    def contains(self, date: int) -> bool:
        return date in set(self.retained)

    def runs(self) -> list[tuple[int, int]]:
        """Maximal runs of consecutive retained dates (the set can be gappy)."""
        out: list[tuple[int, int]] = []
        for d in self.retained:
            if out and d == out[-1][1] + 1:
                out[-1] = (out[-1][0], d)
            else:
                out.append((d, d))
        return out

    def header_lines(self) -> list[str]:
        return [
            "# bubbledates confidence set",
            f"# date_type={self.date_type}",
            f"# variant={self.variant}",
            f"# delta={self.delta!r}",
            f"# eps={self.eps!r}",
            f"# ends={self.ends}",
            f"# segment=({self.segment_start},{self.segment_end}]",
            f"# sample_size={self.sample_size}",
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in self.header_lines():
            buf.write(line + "\n")
        buf.write("date,retained,stat_12,stat_21,cv_12,cv_21,reject_12,reject_21,flag\n")
        for d in self.decisions:
            buf.write(
                f"{d.t1},{int(d.retained)},{d.stat_12:.17g},{d.stat_21:.17g},"
                f"{d.cv_12:.17g},{d.cv_21:.17g},{int(d.reject_12)},{int(d.reject_21)},{d.flag}\n"
            )
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "date_type": self.date_type,
                "variant": self.variant,
                "delta": self.delta,
                "eps": self.eps,
                "ends": self.ends,
                "segment": [self.segment_start, self.segment_end],
                "sample_size": self.sample_size,
                "n_scanned": len(self.decisions),
                "n_retained": len(self.retained),
                "relative_length": len(self.retained) / self.segment_length,
                "runs": self.runs(),
                "flags": sorted({d.flag for d in self.decisions if d.flag != "ok"}),
            },
            indent=2,
        )


def _segment(date_type: str, breaks: BreakDates, sample_size: int) -> tuple[int, int]:
    if date_type == "emergence":
        return 0, breaks.t_c
    if date_type == "collapse":
        return breaks.t_e, breaks.t_r
    if date_type == "recovery":
        return breaks.t_c, sample_size
    raise ParameterError(f"unknown date type {date_type!r}")


def _span(date_type: str, start: int, end: int, m: int) -> range:
    """Hypothesized dates where both scan ranges are nonempty.

    The backward range starts untrimmed at the segment's first observation
    for the emergence and collapse tests, while the recovery test's backward
    scan is trimmed on both sides, so its span starts two trim units in.
    """
    lo = start + m + 1 if date_type != "recovery" else start + 2 * m
    return range(lo, end - m + 1)


def fit_is_degenerate(fit: RegimeFit, date_type: str) -> bool:
    """True when the plug-in fit cannot support the date type's statistics."""
    checker = {
        "emergence": _emergence._check_fit,
        "collapse": _collapse._check_fit,
        "recovery": _recovery._check_fit,
    }[date_type]
    try:
        checker(fit)
    except DegenerateFitError:
        return True
    return False


def _scan_sides(date_type, ps, fit, breaks, t1, m, big_t):
    """Per-side statistics at t1; a side is None when its range is empty or
    the scan hit a degenerate denominator."""
    flag12 = flag21 = None
    try:
        if date_type == "emergence":
            s12 = _emergence._side12(ps, fit, breaks.t_c, t1, m, big_t)
        elif date_type == "collapse":
            s12 = _collapse._side12(ps, fit, breaks.t_e, breaks.t_r, t1, m, big_t)
        else:
            s12 = _recovery._side12(ps, fit, breaks, t1, m, big_t)
        if s12 is None:
            flag12 = "no-12-range"
    except DegenerateFitError:
        s12, flag12 = None, "degenerate"
    try:
        if date_type == "emergence":
            s21 = _emergence._side21(ps, fit, breaks.t_c, t1, m)
        elif date_type == "collapse":
            s21 = _collapse._side21(ps, fit, breaks.t_e, t1, m, big_t)
        else:
            s21 = _recovery._side21(ps, fit, breaks, t1, m, big_t)
        if s21 is None:
            flag21 = "no-21-range"
    except DegenerateFitError:
        s21, flag21 = None, "degenerate"
    return s12, s21, flag12, flag21


def build_sets(
    series: Series,
    fit: RegimeFit,
    breaks: BreakDates,
    date_type: str,
    variants: tuple[str, ...] | None = None,
    delta: float = 0.10,
    eps: float = 0.10,
    ends: str = "true",
    cv_bundle: CvBundle | None = None,
    prefix: PrefixSums | None = None,
) -> dict[str, ConfidenceSet]:
    """Invert several test variants in a single scan over the segment.

    Returns one ConfidenceSet per requested variant; statistics are computed
    once per date and shared.  See :func:`build_set` for parameter semantics.
    """
    if date_type not in DATE_TYPES:
        raise ParameterError(f"unknown date type {date_type!r}")
    if variants is None:
        variants = VARIANTS_BY_TYPE[date_type]
    for v in variants:
        if v not in VARIANTS_BY_TYPE[date_type]:
            raise ParameterError(f"variant {v!r} not available for {date_type}")
    big_t = series.sample_size
    breaks.validate_for(big_t)
    start, end = _segment(date_type, breaks, big_t)
    seg_len = end - start
    m = math.floor(seg_len * eps)
    if m < 2 or seg_len < 2 * m + 2:
        raise ParameterError(
            f"{date_type} segment of length {seg_len} too short for eps={eps}"
        )
    span = _span(date_type, start, end, m)
    if len(span) == 0:
        raise ParameterError(
            f"{date_type} segment of length {seg_len} leaves no testable dates at eps={eps}"
        )
    if cv_bundle is None:
        cv_bundle = CvBundle(delta=delta)
    elif not math.isclose(cv_bundle.delta, delta):
        raise ParameterError("cv_bundle.delta disagrees with delta argument")
    lambda_e = breaks.t_e / big_t

    # delta = 0 inverts a never-rejecting test: the full permissible range.
    if delta == 0.0:
        decisions = tuple(
            DateDecision(t1, _NAN, _NAN, _NAN, _NAN, False, False, "delta-zero")
            for t1 in span
        )
        return {
            v: ConfidenceSet(
                date_type, v, delta, eps, ends, start, end, big_t, decisions
            )
            for v in variants
        }

    ps = prefix if prefix is not None else prefix_sums(series)
    try:
        if date_type == "emergence":
            _emergence._check_fit(fit)
        elif date_type == "collapse":
            _collapse._check_fit(fit)
        else:
            _recovery._check_fit(fit)
        fit_ok = True
    except DegenerateFitError:
        fit_ok = False

    per_variant: dict[str, list[DateDecision]] = {v: [] for v in variants}
    for t1 in span:
        if fit_ok:
            s12, s21, flag12, flag21 = _scan_sides(
                date_type, ps, fit, breaks, t1, m, big_t
            )
        else:
            s12, s21, flag12, flag21 = None, None, "degenerate", "degenerate"
        flag = flag12 or flag21 or "ok"
        for v in variants:
            f12, f21 = _PAIR_FIELDS[date_type][v]
            stat12 = s12[f12] if s12 is not None else _NAN
            stat21 = s21[f21] if s21 is not None else _NAN
            if date_type == "emergence":
                cv12, cv21 = cv_bundle.emergence(v, t1, breaks.t_c, big_t)
                r12 = s12 is not None and stat12 < cv12
                r21 = s21 is not None and stat21 > cv21
            elif date_type == "collapse":
                cv12, cv21 = cv_bundle.collapse(v, lambda_e)
                r12 = s12 is not None and stat12 > cv12
                r21 = s21 is not None and stat21 < cv21
            else:
                cv12, cv21 = cv_bundle.recovery(
                    v, t1, breaks.t_c, big_t - breaks.t_c, lambda_e
                )
                r12 = s12 is not None and stat12 < cv12
                r21 = s21 is not None and stat21 > cv21
            per_variant[v].append(
                DateDecision(t1, stat12, stat21, cv12, cv21, bool(r12), bool(r21), flag)
            )
    return {
        v: ConfidenceSet(
            date_type, v, delta, eps, ends, start, end, big_t, tuple(per_variant[v])
        )
        for v in variants
    }


def build_set(
    series: Series,
    fit: RegimeFit,
    breaks: BreakDates,
    date_type: str,
    variant: str | None = None,
    delta: float = 0.10,
    eps: float = 0.10,
    ends: str = "true",
    cv_bundle: CvBundle | None = None,
    prefix: PrefixSums | None = None,
) -> ConfidenceSet:
    """Confidence set for one date type by test inversion.

    Parameters
    ----------
    series : Series
        Full observed path.
    fit : RegimeFit
        Plug-in estimates consistent with ``breaks``.
    breaks : BreakDates
        Segment boundaries: true dates or estimates, matching ``ends``.
    date_type : {"emergence", "collapse", "recovery"}
    variant : str, optional
        Test variant; defaults to the recommended one per date type
        (LE for emergence and recovery, EMa for collapse).
    delta : float
        Two-sided significance level (0.10 gives nominal 90% coverage);
        0 retains the whole permissible range.
    eps : float
        Trimming fraction for scan ranges and the permissible span.
    ends : str
        Provenance label ("true" or "estimated") recorded in the output.
    cv_bundle : CvBundle, optional
        Critical values; defaults to the built-in surfaces at ``delta``.
    prefix : PrefixSums, optional
        Precomputed kernel to share across calls.
    """
    if date_type not in DATE_TYPES:
        raise ParameterError(f"unknown date type {date_type!r}")
    if variant is None:
        variant = DEFAULT_VARIANTS[date_type]
    return build_sets(
        series, fit, breaks, date_type, (variant,), delta, eps, ends, cv_bundle, prefix
    )[variant]


def set_metrics(cs: ConfidenceSet, truth: int) -> SetMetrics:
    """Containment flags and relative-length decomposition against ``truth``.

    Lengths divide by the segment length.  The one-sided decompositions use
    each side's own retention (a date counts in the 12-set when the
    12-statistic did not reject), and the true date counts in both the left
    and right portions.
    """
    seg_len = cs.segment_length
    in_seg = cs.segment_start < truth <= cs.segment_end
    set12 = [d.t1 for d in cs.decisions if not d.reject_12]
    set21 = [d.t1 for d in cs.decisions if not d.reject_21]
    scanned = {d.t1: d for d in cs.decisions}
    truth_dec = scanned.get(truth)
    return SetMetrics(
        contains=truth in set(cs.retained),
        contains_12=truth_dec is not None and not truth_dec.reject_12,
        contains_21=truth_dec is not None and not truth_dec.reject_21,
        truth_in_segment=in_seg,
        length=len(cs.retained) / seg_len,
        length12_left=sum(1 for d in set12 if d <= truth) / seg_len,
        length12_right=sum(1 for d in set12 if d >= truth) / seg_len,
        length21_left=sum(1 for d in set21 if d <= truth) / seg_len,
        length21_right=sum(1 for d in set21 if d >= truth) / seg_len,
        segment_length=seg_len,
    )
