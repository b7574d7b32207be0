"""Per-column and per-table profiles, pre-binned for transport.

All distributions are computed over non-null cells only; nulls surface through
``n_null`` / ``null_fraction``. Payload size is O(bins + top-k), independent of
row count.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .table import Column, Fingerprint, SemanticType, Table

TOP_K = 10
MAX_NUMERIC_BINS = 40
MAX_TEMPORAL_BINS = 100

ASCENDING = "ascending"
DESCENDING = "descending"
UNSORTED = "unsorted"


class EmptyInput(Exception):
    pass


@dataclass
class Histogram:
    bin_edges: list[float]
    counts: list[int]
    n_null: int

    def to_dict(self) -> dict:
        return {
            "bin_edges": [float(e) for e in self.bin_edges],
            "counts": list(self.counts),
            "n_null": self.n_null,
        }


@dataclass
class NumericSummary:
    min: Optional[float]
    q1: Optional[float]
    median: Optional[float]
    q3: Optional[float]
    max: Optional[float]
    mean: Optional[float]
    std: Optional[float]
    n_pos: int
    n_zero: int
    n_neg: int
    sortedness: str
    outliers_sigma: int
    outliers_iqr: int

    def to_dict(self) -> dict:
        f = lambda v: None if v is None else float(v)
        return {
            "min": f(self.min),
            "q1": f(self.q1),
            "median": f(self.median),
            "q3": f(self.q3),
            "max": f(self.max),
            "mean": f(self.mean),
            "std": f(self.std),
            "n_pos": self.n_pos,
            "n_zero": self.n_zero,
            "n_neg": self.n_neg,
            "sortedness": self.sortedness,
            "outliers_sigma": self.outliers_sigma,
            "outliers_iqr": self.outliers_iqr,
        }


@dataclass
class CategoricalSummary:
    cardinality: int
    top_values: list[tuple[str, int]]
    n_null: int
    duplicate_rows: int
    is_unique: bool
    strlen_min: Optional[int]
    strlen_mean: Optional[float]
    strlen_max: Optional[int]

    def to_dict(self) -> dict:
        return {
            "cardinality": self.cardinality,
            "top_values": [[v, c] for v, c in self.top_values],
            "n_null": self.n_null,
            "duplicate_rows": self.duplicate_rows,
            "is_unique": self.is_unique,
            "strlen_min": self.strlen_min,
            "strlen_mean": None if self.strlen_mean is None else float(self.strlen_mean),
            "strlen_max": self.strlen_max,
        }


@dataclass
class TemporalSummary:
    histogram: Histogram
    t_min: Optional[int]
    t_max: Optional[int]
    sortedness: str

    def to_dict(self) -> dict:
        return {
            "t_min": self.t_min,
            "t_max": self.t_max,
            "sortedness": self.sortedness,
        }


@dataclass
class ColumnProfile:
    name: str
    stype: SemanticType
    null_fraction: float
    histogram: Optional[Histogram]  # numeric and temporal columns
    summary: object  # NumericSummary | CategoricalSummary | TemporalSummary

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "stype": self.stype.value,
            "null_fraction": float(self.null_fraction),
        }
        if self.histogram is not None:
            d["histogram"] = self.histogram.to_dict()
        d["summary"] = self.summary.to_dict()
        return d


@dataclass
class TableProfile:
    table_name: str
    nrows: int
    ncols: int
    columns: list[ColumnProfile]
    epoch: int
    fingerprint: Fingerprint
    temporary: bool

    def to_dict(self) -> dict:
        return {
            "table_name": self.table_name,
            "nrows": self.nrows,
            "ncols": self.ncols,
            "epoch": self.epoch,
            "fingerprint": {
                "hash": self.fingerprint.hex,
                "nrows": self.fingerprint.nrows,
                "ncols": self.fingerprint.ncols,
            },
            "temporary": self.temporary,
            "columns": [c.to_dict() for c in self.columns],
        }


def to_canonical_json(obj) -> str:
    """Canonical serialization: fixed key order, shortest float round-trip."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def quantile(values: Sequence[float], p: float) -> float:
    """Type-7 quantile: linear interpolation at position (n-1)*p.

    ``values`` must be sorted ascending, non-empty, null-free.
    """
    n = len(values)
    if n == 0:
        raise EmptyInput("quantile of empty sequence")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    h = (n - 1) * p
    lo = int(math.floor(h))
    frac = h - lo
    if frac == 0.0 or lo + 1 >= n:
        return float(values[lo])
    return float(values[lo]) + frac * (float(values[lo + 1]) - float(values[lo]))


def _nonnull(values: Sequence) -> list:
    return [v for v in values if v is not None]


def _sortedness(values: Sequence) -> str:
    """Non-strict order over the original sequence, nulls ignored."""
    xs = _nonnull(values)
    if len(xs) <= 1:
        return ASCENDING
    if all(a <= b for a, b in zip(xs, xs[1:])):
        return ASCENDING
    if all(a >= b for a, b in zip(xs, xs[1:])):
        return DESCENDING
    return UNSORTED


def _bin(values: Sequence[float], max_bins: int, n_null: int) -> Histogram:
    xs = _nonnull(values)
    n = len(xs)
    if n == 0:
        return Histogram(bin_edges=[], counts=[], n_null=n_null)
    lo, hi = min(xs), max(xs)
    if lo == hi:
        return Histogram(bin_edges=[float(lo), float(hi)], counts=[n], n_null=n_null)
    b = min(max_bins, math.ceil(math.sqrt(n)))
    width = (hi - lo) / b
    edges = [lo + width * i for i in range(b)] + [hi]
    arr = np.asarray(xs, dtype=float)
    # bins right-open on [edge_i, edge_{i+1}) except the last, right-closed
    idx = np.searchsorted(np.asarray(edges), arr, side="right") - 1
    idx = np.clip(idx, 0, b - 1)
    counts = np.bincount(idx, minlength=b)
    return Histogram(
        bin_edges=[float(e) for e in edges],
        counts=[int(c) for c in counts],
        n_null=n_null,
    )


def numeric_histogram(values: Sequence) -> Histogram:
    """Equal-width histogram, B = min(40, ceil(sqrt(n_nonnull)))."""
    return _bin(values, MAX_NUMERIC_BINS, sum(1 for v in values if v is None))


def outliers_sigma(values: Sequence, k: float = 3.0) -> list[int]:
    """Row indices where |v - mean| > k * sample std; std==0 gives none."""
    xs = _nonnull(values)
    n = len(xs)
    if n == 0:
        return []
    mean = math.fsum(xs) / n
    if n < 2:
        return []
    std = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1))
    if std == 0.0:
        return []
    return [
        i
        for i, v in enumerate(values)
        if v is not None and abs(v - mean) > k * std
    ]


def outliers_iqr(values: Sequence, k: float = 1.5) -> list[int]:
    """Row indices outside [q1 - k*IQR, q3 + k*IQR], type-7 quartiles."""
    xs = sorted(_nonnull(values))
    if not xs:
        return []
    q1 = quantile(xs, 0.25)
    q3 = quantile(xs, 0.75)
    iqr = q3 - q1
    lo, hi = q1 - k * iqr, q3 + k * iqr
    return [
        i for i, v in enumerate(values) if v is not None and (v < lo or v > hi)
    ]


def numeric_summary(values: Sequence) -> NumericSummary:
    xs = _nonnull(values)
    n = len(xs)
    sortedness = _sortedness(values)
    if n == 0:
        return NumericSummary(
            min=None, q1=None, median=None, q3=None, max=None, mean=None,
            std=None, n_pos=0, n_zero=0, n_neg=0, sortedness=sortedness,
            outliers_sigma=0, outliers_iqr=0,
        )
    xs_sorted = sorted(xs)
    mean = math.fsum(xs) / n
    std = (
        math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1))
        if n > 1
        else 0.0
    )
    return NumericSummary(
        min=float(xs_sorted[0]),
        q1=quantile(xs_sorted, 0.25),
        median=quantile(xs_sorted, 0.5),
        q3=quantile(xs_sorted, 0.75),
        max=float(xs_sorted[-1]),
        mean=mean,
        std=std,
        n_pos=sum(1 for x in xs if x > 0),
        n_zero=sum(1 for x in xs if x == 0),
        n_neg=sum(1 for x in xs if x < 0),
        sortedness=sortedness,
        outliers_sigma=len(outliers_sigma(values)),
        outliers_iqr=len(outliers_iqr(values)),
    )


def _render_categorical(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def categorical_profile(values: Sequence, k: int = TOP_K) -> CategoricalSummary:
    """Top-k frequencies, uniqueness and string-length facts.

    Ties in top_values break by value ascending (code-point order) so output
    is deterministic.
    """
    rendered = [_render_categorical(v) for v in values if v is not None]
    n_null = len(values) - len(rendered)
    counts = Counter(rendered)
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    cardinality = len(counts)
    duplicate_rows = len(rendered) - cardinality
    lengths = [len(s) for s in rendered]
    return CategoricalSummary(
        cardinality=cardinality,
        top_values=top,
        n_null=n_null,
        duplicate_rows=duplicate_rows,
        is_unique=duplicate_rows == 0,
        strlen_min=min(lengths) if lengths else None,
        strlen_mean=math.fsum(lengths) / len(lengths) if lengths else None,
        strlen_max=max(lengths) if lengths else None,
    )


def temporal_profile(values: Sequence) -> TemporalSummary:
    xs = _nonnull(values)
    hist = _bin(values, MAX_TEMPORAL_BINS, len(values) - len(xs))
    return TemporalSummary(
        histogram=hist,
        t_min=min(xs) if xs else None,
        t_max=max(xs) if xs else None,
        sortedness=_sortedness(values),
    )


def profile_column(column: Column, nrows: int) -> ColumnProfile:
    n_null = column.n_null()
    null_fraction = (n_null / nrows) if nrows else 0.0
    if column.stype.is_numeric:
        return ColumnProfile(
            name=column.name,
            stype=column.stype,
            null_fraction=null_fraction,
            histogram=numeric_histogram(column.values),
            summary=numeric_summary(column.values),
        )
    if column.stype == SemanticType.TEMPORAL:
        summary = temporal_profile(column.values)
        return ColumnProfile(
            name=column.name,
            stype=column.stype,
            null_fraction=null_fraction,
            histogram=summary.histogram,
            summary=summary,
        )
    # boolean and categorical columns share the categorical layout
    return ColumnProfile(
        name=column.name,
        stype=column.stype,
        null_fraction=null_fraction,
        histogram=None,
        summary=categorical_profile(column.values),
    )


def profile_table(
    table: Table,
    fingerprint: Fingerprint,
    epoch: int = 0,
    temporary: bool = False,
    name: Optional[str] = None,
) -> TableProfile:
    """One ColumnProfile per column, dispatched on semantic type."""
    return TableProfile(
        table_name=table.name if name is None else name,
        nrows=table.nrows,
        ncols=table.ncols,
        columns=[profile_column(c, table.nrows) for c in table.columns],
        epoch=epoch,
        fingerprint=fingerprint,
        temporary=temporary,
    )
