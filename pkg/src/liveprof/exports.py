"""Deterministic snippet generation: selections and analysis templates as DSL
source text, with table and column names substituted.

Every snippet parses under the session grammar, stays under 10 lines, and is
byte-identical for identical requests. Generation never mutates the session.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import dsl
from .session import SessionState, plot_kind_for
from .table import SemanticType, Table

SIGMA_FACTOR = 3
IQR_FACTOR = 1.5


class ExportError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class Snippet:
    text: str
    new_name: str


def _resolve(session: SessionState, table: str, column: Optional[str]) -> Table:
    if not session.has_table(table):
        raise ExportError("UnknownTable", f"unknown table {table!r}")
    t = session.get_table(table)
    if column is not None and not t.has_column(column):
        raise ExportError("UnknownColumn", f"table {table!r} has no column {column!r}")
    return t


def _suggest_name(session: SessionState, base: str) -> str:
    if not session.has_table(base):
        return base
    i = 2
    while session.has_table(f"{base}_{i}"):
        i += 1
    return f"{base}_{i}"


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _num(x: float) -> str:
    """Shortest numeric literal: integral floats render without a decimal."""
    if float(x).is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def export_categorical_selection(
    session: SessionState, table: str, column: str, value: Optional[str]
) -> Snippet:
    t = _resolve(session, table, column)
    stype = t.column(column).stype
    if stype not in (SemanticType.CATEGORICAL, SemanticType.BOOLEAN):
        raise ExportError(
            "UnknownColumn", f"column {column!r} is {stype.value}, not categorical"
        )
    if value is None:
        pred = f"isnull({column})"
    else:
        pred = f"{column} == {_quote(value)}"
    name = _suggest_name(session, f"{table}_sel")
    return Snippet(f"{name} = filter {table} where {pred}", name)


def export_numeric_range(
    session: SessionState,
    table: str,
    column: str,
    lo: float,
    hi: float,
    last_bin: bool = False,
) -> Snippet:
    t = _resolve(session, table, column)
    if not t.column(column).stype.is_numeric:
        raise ExportError("UnknownColumn", f"column {column!r} is not numeric")
    if lo > hi:
        raise ExportError("InvalidRange", f"lo {lo} exceeds hi {hi}")
    name = _suggest_name(session, f"{table}_sel")
    if lo == hi:
        pred = f"{column} >= {_num(lo)} and {column} <= {_num(hi)}"
    elif last_bin:
        pred = f"{column} >= {_num(lo)} and {column} <= {_num(hi)}"
    else:
        pred = f"{column} >= {_num(lo)} and {column} < {_num(hi)}"
    return Snippet(f"{name} = filter {table} where {pred}", name)


def export_outlier_template(
    session: SessionState, table: str, column: str, method: str
) -> Snippet:
    t = _resolve(session, table, column)
    if not t.column(column).stype.is_numeric:
        raise ExportError("UnknownColumn", f"column {column!r} is not numeric")
    name = _suggest_name(session, f"{table}_out")
    c, tb = column, table
    if method == "sigma":
        pred = (
            f"{c} < mean({tb}.{c}) - {SIGMA_FACTOR} * std({tb}.{c}) "
            f"or {c} > mean({tb}.{c}) + {SIGMA_FACTOR} * std({tb}.{c})"
        )
    elif method == "iqr":
        pred = (
            f"{c} < quantile({tb}.{c}, 0.25) - {IQR_FACTOR} * iqr({tb}.{c}) "
            f"or {c} > quantile({tb}.{c}, 0.75) + {IQR_FACTOR} * iqr({tb}.{c})"
        )
    else:
        raise ExportError("InvalidRange", f"unknown outlier method {method!r}")
    return Snippet(f"{name} = filter {tb} where {pred}", name)


def export_duplicates_template(session: SessionState, table: str, column: str) -> Snippet:
    _resolve(session, table, column)
    name = _suggest_name(session, f"{table}_dups")
    return Snippet(f"{name} = filter {table} where duplicated({column})", name)


def export_plot_template(session: SessionState, table: str, column: str) -> Snippet:
    t = _resolve(session, table, column)
    kind = plot_kind_for(t.column(column).stype)
    return Snippet(f"plot {table}.{column} as {kind}", "")


def handle_export_request(session: SessionState, req: dict) -> Snippet:
    """Dispatch a wire-format export request (sync-server `export` message)."""
    kind = req.get("kind")
    table = req.get("table", "")
    column = req.get("column", "")
    params = req.get("params", {}) or {}
    if kind == "cat_value":
        return export_categorical_selection(session, table, column, params.get("value"))
    if kind == "num_range":
        return export_numeric_range(
            session,
            table,
            column,
            float(params["lo"]),
            float(params["hi"]),
            bool(params.get("last_bin", False)),
        )
    if kind == "outliers_sigma":
        return export_outlier_template(session, table, column, "sigma")
    if kind == "outliers_iqr":
        return export_outlier_template(session, table, column, "iqr")
    if kind == "duplicates":
        return export_duplicates_template(session, table, column)
    if kind == "plot":
        return export_plot_template(session, table, column)
    raise ExportError("InvalidRange", f"unknown export kind {kind!r}")


def snippet_parses(snippet: Snippet) -> bool:
    try:
        dsl.parse(snippet.text)
        return True
    except dsl.ParseError:
        return False
