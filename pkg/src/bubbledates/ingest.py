"""CSV ingestion: dated price records into an analysis series.

The reader is strict: a malformed row fails with its line number, dates must
be strictly increasing, and prices must be positive.  The returned date
index maps observation index i (0 .. T, with the first price stored as the
initial level) back to its calendar date for reporting.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .model import Series

__all__ = ["PriceRecord", "ingest"]

_DATE_FORMATS = ("%Y-%m-%d", "%Y/%m/%d", "%d.%m.%Y", "%m/%d/%Y")


@dataclass(frozen=True)
class PriceRecord:
    date: dt.date
    price: float


def _parse_date(raw: str, line_no: int) -> dt.date:
    raw = raw.strip()
    for fmt in _DATE_FORMATS:
        try:
            return dt.datetime.strptime(raw, fmt).date()
        except ValueError:
            continue
    raise DataError(f"line {line_no}: cannot parse date {raw!r}")


def ingest(
    path: str,
    date_column: str = "date",
    price_column: str = "price",
    log_transform: bool = True,
) -> tuple[Series, tuple[dt.date, ...]]:
    """Read a dated price CSV into a (log-)level series plus its date index.

    Parameters
    ----------
    path : str
        CSV file with a header row containing ``date_column`` and
        ``price_column``.
    log_transform : bool
        Analyze log prices (the default for asset-price applications).

    Returns
    -------
    (Series, tuple[datetime.date, ...])
        ``series.y[i]`` corresponds to ``dates[i]``; observation indices in
        break dates and confidence sets point into ``dates``.
    """
    records: list[PriceRecord] = []
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, expected a CSV header")
        fields = [f.strip() for f in reader.fieldnames]
        for col in (date_column, price_column):
            if col not in fields:
                raise DataError(
                    f"{path}: missing column {col!r}; header has {fields}"
                )
        for line_no, row in enumerate(reader, start=2):
            raw_price = (row.get(price_column) or "").strip()
            raw_date = (row.get(date_column) or "").strip()
            if not raw_price or not raw_date:
                raise DataError(f"line {line_no}: empty date or price field")
            date = _parse_date(raw_date, line_no)
            try:
                price = float(raw_price)
            except ValueError:
                raise DataError(
                    f"line {line_no}: cannot parse price {raw_price!r}"
                ) from None
            if not np.isfinite(price) or price <= 0:
                raise DataError(f"line {line_no}: price must be positive, got {price}")
            if records and date <= records[-1].date:
                raise DataError(
                    f"line {line_no}: dates must be strictly increasing "
                    f"({records[-1].date} then {date})"
                )
            records.append(PriceRecord(date, price))
    if len(records) < 2:
        raise DataError(f"{path}: need at least 2 rows, got {len(records)}")
    levels = np.array([r.price for r in records])
    if log_transform:
        levels = np.log(levels)
    return Series(levels), tuple(r.date for r in records)
