"""Session state machine: a variable environment of tables driven by DSL
execution, with execution epochs, temporary output profiles, and
fingerprint-based change detection.

Execution follows notebook semantics: statements run serially and, on the
first error, bindings completed earlier in the same source persist.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from . import dsl
from .dsl import ParseError, Span
from .profiler import EmptyInput, quantile
from .table import (
    Column,
    CsvOptions,
    Fingerprint,
    SemanticType,
    Table,
    TableError,
    fingerprint,
    format_temporal,
    parse_bool,
    parse_float,
    parse_int,
    parse_temporal,
    read_csv,
    render_cell,
)

TEMP_NAME_PREFIX = "Output of statement "


class EvalError(Exception):
    def __init__(self, kind: str, message: str, span: Optional[Span] = None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span


def _err(kind, message, span=None) -> EvalError:
    return EvalError(kind, message, span)


@dataclass
class ExecError:
    kind: str
    message: str
    span: Optional[Span]

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "message": self.message}
        if self.span is not None:
            d["span"] = {"line": self.span.line, "col": self.span.col}
        return d


@dataclass
class ExecResult:
    ok: bool
    error: Optional[ExecError]
    changed: list[str]
    removed: list[str]
    plots: list[tuple[str, str, str]] = field(default_factory=list)


@dataclass
class EnvEntry:
    table: Table
    fingerprint: Fingerprint
    last_epoch: int


class SessionState:
    """Single-writer environment of named tables plus one temporary output."""

    def __init__(self, base_dir: str = ".", csv_options: CsvOptions = CsvOptions()):
        self.env: dict[str, EnvEntry] = {}
        self.epoch = 0
        self.pinned: set[str] = set()
        self.temp_output: Optional[EnvEntry] = None
        self.temp_name: Optional[str] = None
        self.base_dir = base_dir
        self.csv_options = csv_options

    # -- lookup -------------------------------------------------------------

    def get_table(self, name: str) -> Table:
        if name in self.env:
            return self.env[name].table
        if self.temp_name == name and self.temp_output is not None:
            return self.temp_output.table
        raise _err("NameError", f"unknown table {name!r}")

    def has_table(self, name: str) -> bool:
        return name in self.env or (self.temp_name == name and self.temp_output is not None)

    def live_entries(self) -> list[tuple[str, EnvEntry]]:
        items = list(self.env.items())
        if self.temp_output is not None and self.temp_name is not None:
            items.append((self.temp_name, self.temp_output))
        return items

    # -- execution ----------------------------------------------------------

    def execute(self, source: str) -> ExecResult:
        self.epoch += 1
        removed: list[str] = []
        if self.temp_output is not None:
            removed.append(self.temp_name)
            self.temp_output = None
            self.temp_name = None
        before = {name: e.fingerprint.hash for name, e in self.env.items()}
        plots: list[tuple[str, str, str]] = []
        error: Optional[ExecError] = None
        try:
            program = dsl.parse(source)
        except ParseError as e:
            return ExecResult(False, ExecError("ParseError", str(e), e.span), [], removed)
        for stmt in program.statements:
            try:
                self._run_statement(stmt, plots)
            except EvalError as e:
                error = ExecError(e.kind, e.message, e.span or getattr(stmt, "span", None))
                break
        changed = []
        for name, entry in self.env.items():
            if before.get(name) != entry.fingerprint.hash:
                entry.last_epoch = self.epoch
                changed.append(name)
        if self.temp_output is not None:
            changed.append(self.temp_name)
        return ExecResult(error is None, error, changed, removed, plots)

    def reset(self) -> list[str]:
        """Clear all state; returns the names that disappeared."""
        names = [name for name, _ in self.live_entries()]
        self.env.clear()
        self.pinned.clear()
        self.temp_output = None
        self.temp_name = None
        self.epoch += 1
        return names

    def _run_statement(self, stmt, plots: list) -> None:
        if isinstance(stmt, dsl.Load):
            path = stmt.path
            if not os.path.isabs(path):
                path = os.path.join(self.base_dir, path)
            try:
                table = read_csv(path, self.csv_options, name=stmt.name)
            except TableError as e:
                kind = type(e).__name__
                raise _err(kind, str(e), stmt.span)
            self._bind(stmt.name, table)
        elif isinstance(stmt, dsl.Assign):
            table = self._eval_table(stmt.expr, name=stmt.name)
            self._bind(stmt.name, table)
        elif isinstance(stmt, dsl.ExprStmt):
            name = f"{TEMP_NAME_PREFIX}{self.epoch}"
            table = self._eval_table(stmt.expr, name=name)
            self.temp_name = name
            self.temp_output = EnvEntry(table, fingerprint(table), self.epoch)
        elif isinstance(stmt, dsl.Plot):
            table = self.get_table(stmt.table)
            if not table.has_column(stmt.column):
                raise _err(
                    "NameError",
                    f"table {stmt.table!r} has no column {stmt.column!r}",
                    stmt.span,
                )
            stype = table.column(stmt.column).stype
            want = plot_kind_for(stype)
            if stmt.kind != want:
                raise _err(
                    "TypeError",
                    f"column {stmt.column!r} is {stype.value}; use {want!r}",
                    stmt.span,
                )
            plots.append((stmt.table, stmt.column, stmt.kind))
        else:  # pragma: no cover
            raise _err("TypeError", f"unknown statement {stmt!r}")

    def _bind(self, name: str, table: Table) -> None:
        self.env[name] = EnvEntry(table, fingerprint(table), self.epoch)

    # -- table expressions --------------------------------------------------

    def _eval_table(self, expr, name: str) -> Table:
        t = self._eval_texpr(expr)
        return Table(name=name, columns=t.columns)

    def _eval_texpr(self, expr) -> Table:
        if isinstance(expr, dsl.Ref):
            try:
                return self.get_table(expr.name)
            except EvalError as e:
                raise _err(e.kind, e.message, expr.span)
        if isinstance(expr, dsl.Filter):
            src = self._eval_texpr(expr.source)
            mask = _eval_predicate(expr.predicate, src, self)
            return _take_rows(src, [i for i, keep in enumerate(mask) if keep])
        if isinstance(expr, dsl.Select):
            src = self._eval_texpr(expr.source)
            cols = [_require_column(src, c, expr.span) for c in expr.columns]
            return Table(src.name, [Column(c.name, c.stype, list(c.values)) for c in cols])
        if isinstance(expr, dsl.DropCols):
            src = self._eval_texpr(expr.source)
            for c in expr.columns:
                _require_column(src, c, expr.span)
            keep = [c for c in src.columns if c.name not in set(expr.columns)]
            return Table(src.name, [Column(c.name, c.stype, list(c.values)) for c in keep])
        if isinstance(expr, dsl.Mutate):
            src = self._eval_texpr(expr.source)
            stype, values = _eval_column_expr(expr.expr, src, self)
            new = Column(expr.column, stype, values)
            cols = [c for c in src.columns]
            for i, c in enumerate(cols):
                if c.name == expr.column:
                    cols = cols[:i] + [new] + cols[i + 1 :]
                    break
            else:
                cols = cols + [new]
            return Table(src.name, [Column(c.name, c.stype, list(c.values)) for c in cols])
        if isinstance(expr, dsl.DropNa):
            src = self._eval_texpr(expr.source)
            cols = (
                [_require_column(src, c, expr.span) for c in expr.columns]
                if expr.columns is not None
                else src.columns
            )
            keep = [
                i
                for i in range(src.nrows)
                if all(c.values[i] is not None for c in cols)
            ]
            return _take_rows(src, keep)
        if isinstance(expr, dsl.Dedupe):
            src = self._eval_texpr(expr.source)
            cols = (
                [_require_column(src, c, expr.span) for c in expr.by]
                if expr.by is not None
                else src.columns
            )
            seen = set()
            keep = []
            for i in range(src.nrows):
                key = tuple(c.values[i] for c in cols)
                if key not in seen:
                    seen.add(key)
                    keep.append(i)
            return _take_rows(src, keep)
        if isinstance(expr, dsl.Sort):
            src = self._eval_texpr(expr.source)
            col = _require_column(src, expr.column, expr.span)
            nonnull = [i for i in range(src.nrows) if col.values[i] is not None]
            nulls = [i for i in range(src.nrows) if col.values[i] is None]
            nonnull.sort(key=lambda i: col.values[i], reverse=not expr.ascending)
            return _take_rows(src, nonnull + nulls)  # nulls last either way
        if isinstance(expr, dsl.Head):
            src = self._eval_texpr(expr.source)
            return _take_rows(src, list(range(min(expr.n, src.nrows))))
        raise _err("TypeError", f"unknown table expression {expr!r}")


def plot_kind_for(stype: SemanticType) -> str:
    if stype.is_numeric:
        return "histogram"
    if stype == SemanticType.TEMPORAL:
        return "timeline"
    return "topk"


def _require_column(table: Table, name: str, span=None) -> Column:
    if not table.has_column(name):
        raise _err("NameError", f"table {table.name!r} has no column {name!r}", span)
    return table.column(name)


def _take_rows(table: Table, indices: list[int]) -> Table:
    return Table(
        table.name,
        [Column(c.name, c.stype, [c.values[i] for i in indices]) for c in table.columns],
    )


# ---------------------------------------------------------------------------
# Expression evaluation
#
# Expressions are statically typed over the column's semantic types; each cell
# evaluates to a typed value or null (nulls propagate through arithmetic and
# make comparisons false).

_NUMERIC = (SemanticType.INTEGER, SemanticType.FLOAT)


class _Evaluator:
    def __init__(self, table: Table, session: SessionState):
        self.table = table
        self.session = session
        self.agg_cache: dict[tuple, Optional[float]] = {}

    def static_type(self, node) -> SemanticType:
        if isinstance(node, dsl.Lit):
            if isinstance(node.value, int):
                return SemanticType.INTEGER
            if isinstance(node.value, float):
                return SemanticType.FLOAT
            return SemanticType.CATEGORICAL
        if isinstance(node, dsl.ColRef):
            return _require_column(self.table, node.name, node.span).stype
        if isinstance(node, (dsl.IsNull, dsl.Duplicated)):
            _require_column(self.table, node.column, node.span)
            return SemanticType.BOOLEAN
        if isinstance(node, dsl.Agg):
            self.agg_value(node)  # validates table/column eagerly
            return SemanticType.FLOAT
        if isinstance(node, dsl.FuncCall):
            arg_t = self.static_type(node.arg)
            return self.func_result_type(node, arg_t)
        if isinstance(node, dsl.Unary):
            t = self.static_type(node.operand)
            if node.op == "not":
                if t != SemanticType.BOOLEAN:
                    raise _err("TypeError", "'not' needs a boolean operand", node.span)
                return SemanticType.BOOLEAN
            if t not in _NUMERIC:
                raise _err("TypeError", "unary '-' needs a numeric operand", node.span)
            return t
        if isinstance(node, dsl.BinOp):
            return self.binop_type(node)
        raise _err("TypeError", f"unknown expression {node!r}")

    def func_result_type(self, node: dsl.FuncCall, arg_t: SemanticType) -> SemanticType:
        f = node.func
        if f in ("int", "try_int"):
            if arg_t == SemanticType.TEMPORAL:
                raise _err("TypeError", f"{f}() cannot take a temporal value", node.span)
            return SemanticType.INTEGER
        if f in ("float", "try_float"):
            if arg_t == SemanticType.TEMPORAL:
                raise _err("TypeError", f"{f}() cannot take a temporal value", node.span)
            return SemanticType.FLOAT
        if f in ("date", "try_date"):
            if arg_t not in (SemanticType.CATEGORICAL, SemanticType.TEMPORAL):
                raise _err("TypeError", f"{f}() needs a string operand", node.span)
            return SemanticType.TEMPORAL
        if f == "str":
            return SemanticType.CATEGORICAL
        if f in ("upper", "lower"):
            if arg_t != SemanticType.CATEGORICAL:
                raise _err("TypeError", f"{f}() needs a string operand", node.span)
            return SemanticType.CATEGORICAL
        if f == "len":
            if arg_t != SemanticType.CATEGORICAL:
                raise _err("TypeError", "len() needs a string operand", node.span)
            return SemanticType.INTEGER
        raise _err("TypeError", f"unknown function {f!r}", node.span)

    def binop_type(self, node: dsl.BinOp) -> SemanticType:
        op = node.op
        lt = self.static_type(node.left)
        rt = self.static_type(node.right)
        if op in ("and", "or"):
            if lt != SemanticType.BOOLEAN or rt != SemanticType.BOOLEAN:
                raise _err("TypeError", f"{op!r} needs boolean operands", node.span)
            return SemanticType.BOOLEAN
        if op in ("==", "!=", "<", "<=", ">", ">="):
            ok = (
                (lt in _NUMERIC and rt in _NUMERIC)
                or (lt == rt)
                # boolean columns profile as "true"/"false" strings, so allow
                # comparing them against string literals
                or {lt, rt} == {SemanticType.BOOLEAN, SemanticType.CATEGORICAL}
            )
            if not ok:
                raise _err(
                    "TypeError",
                    f"cannot compare {lt.value} with {rt.value}",
                    node.span,
                )
            return SemanticType.BOOLEAN
        if op in ("+", "-", "*", "/"):
            if lt not in _NUMERIC or rt not in _NUMERIC:
                raise _err(
                    "TypeError",
                    f"arithmetic {op!r} needs numeric operands",
                    node.span,
                )
            if op == "/":
                return SemanticType.FLOAT
            if SemanticType.FLOAT in (lt, rt):
                return SemanticType.FLOAT
            return SemanticType.INTEGER
        raise _err("TypeError", f"unknown operator {op!r}", node.span)

    def agg_value(self, node: dsl.Agg) -> Optional[float]:
        key = (node.func, node.table, node.column, node.p)
        if key in self.agg_cache:
            return self.agg_cache[key]
        try:
            table = self.session.get_table(node.table)
        except EvalError as e:
            raise _err(e.kind, e.message, node.span)
        col = _require_column(table, node.column, node.span)
        if not col.stype.is_numeric:
            raise _err(
                "TypeError",
                f"aggregate {node.func}() needs a numeric column, "
                f"{node.table}.{node.column} is {col.stype.value}",
                node.span,
            )
        xs = [v for v in col.values if v is not None]
        value = _aggregate(node.func, xs, node.p)
        self.agg_cache[key] = value
        return value

    def duplicated_mask(self, column: Column) -> list[bool]:
        # nulls form a group of their own: two or more nulls are duplicates
        counts = Counter(column.values)
        return [counts[v] > 1 for v in column.values]

    # -- per-row evaluation -------------------------------------------------

    def eval_row(self, node, i: int):
        if isinstance(node, dsl.Lit):
            return node.value
        if isinstance(node, dsl.ColRef):
            return self.table.column(node.name).values[i]
        if isinstance(node, dsl.IsNull):
            return self.table.column(node.column).values[i] is None
        if isinstance(node, dsl.Duplicated):
            return self._dup_masks[node.column][i]
        if isinstance(node, dsl.Agg):
            return self.agg_value(node)
        if isinstance(node, dsl.FuncCall):
            return self.eval_func(node, i)
        if isinstance(node, dsl.Unary):
            v = self.eval_row(node.operand, i)
            if node.op == "not":
                return not bool(v)  # null is falsy in boolean context
            return None if v is None else -v
        if isinstance(node, dsl.BinOp):
            return self.eval_binop(node, i)
        raise _err("TypeError", f"unknown expression {node!r}")

    def eval_func(self, node: dsl.FuncCall, i: int):
        v = self.eval_row(node.arg, i)
        arg_t = self._types[id(node.arg)]
        f = node.func
        if v is None:
            return None
        strict = not f.startswith("try_")
        base = f.removeprefix("try_")
        if base == "int":
            out = _cast_int(v, arg_t)
        elif base == "float":
            out = _cast_float(v, arg_t)
        elif base == "date":
            out = _cast_date(v, arg_t)
        elif f == "str":
            return render_cell(v, arg_t)
        elif f == "upper":
            return v.upper()
        elif f == "lower":
            return v.lower()
        elif f == "len":
            return len(v)
        else:  # pragma: no cover
            raise _err("TypeError", f"unknown function {f!r}", node.span)
        if out is None and strict:
            raise _err(
                "CastError",
                f"{f}() failed on row {i + 1}: cannot convert {v!r}",
                node.span,
            )
        return out

    def eval_binop(self, node: dsl.BinOp, i: int):
        op = node.op
        if op == "and":
            return bool(self.eval_row(node.left, i)) and bool(self.eval_row(node.right, i))
        if op == "or":
            return bool(self.eval_row(node.left, i)) or bool(self.eval_row(node.right, i))
        l = self.eval_row(node.left, i)
        r = self.eval_row(node.right, i)
        if op in ("==", "!=", "<", "<=", ">", ">="):
            if l is None or r is None:
                return False  # comparisons against null are false
            lt = self._types[id(node.left)]
            rt = self._types[id(node.right)]
            if lt == SemanticType.BOOLEAN and rt == SemanticType.CATEGORICAL:
                l = "true" if l else "false"
            elif rt == SemanticType.BOOLEAN and lt == SemanticType.CATEGORICAL:
                r = "true" if r else "false"
            return _compare(op, l, r)
        if l is None or r is None:
            return None
        if op == "+":
            return l + r
        if op == "-":
            return l - r
        if op == "*":
            return l * r
        if op == "/":
            if r == 0:
                return None  # division by zero yields null, not a crash
            return l / r
        raise _err("TypeError", f"unknown operator {op!r}", node.span)

    def prepare(self, node) -> SemanticType:
        """Type-check the tree, cache per-node types and duplicated() masks."""
        self._types: dict[int, SemanticType] = {}
        self._dup_masks: dict[str, list[bool]] = {}

        def walk(n) -> SemanticType:
            if isinstance(n, dsl.BinOp):
                walk(n.left)
                walk(n.right)
            elif isinstance(n, (dsl.Unary, dsl.FuncCall)):
                walk(n.operand if isinstance(n, dsl.Unary) else n.arg)
            elif isinstance(n, dsl.Duplicated):
                col = _require_column(self.table, n.column, n.span)
                self._dup_masks[n.column] = self.duplicated_mask(col)
            t = self.static_type(n)
            self._types[id(n)] = t
            return t

        return walk(node)


def _compare(op: str, l, r) -> bool:
    if op == "==":
        return l == r
    if op == "!=":
        return l != r
    if op == "<":
        return l < r
    if op == "<=":
        return l <= r
    if op == ">":
        return l > r
    return l >= r


def _aggregate(func: str, xs: list, p: Optional[float]) -> Optional[float]:
    if not xs:
        return None  # aggregate of an all-null column is null
    xs = [float(v) for v in xs]
    if func == "mean":
        return math.fsum(xs) / len(xs)
    if func == "std":
        if len(xs) < 2:
            return 0.0
        m = math.fsum(xs) / len(xs)
        return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))
    if func == "min":
        return min(xs)
    if func == "max":
        return max(xs)
    xs.sort()
    if func == "median":
        return quantile(xs, 0.5)
    if func == "iqr":
        return quantile(xs, 0.75) - quantile(xs, 0.25)
    if func == "quantile":
        if p is None or not 0.0 <= p <= 1.0:
            raise _err("TypeError", "quantile probability must be in [0, 1]")
        return quantile(xs, p)
    raise _err("TypeError", f"unknown aggregate {func!r}")


def _cast_int(v, arg_t: SemanticType) -> Optional[int]:
    if arg_t == SemanticType.BOOLEAN:
        return 1 if v else 0
    if arg_t == SemanticType.INTEGER:
        return v
    if arg_t == SemanticType.FLOAT:
        return int(v) if float(v).is_integer() else None
    return parse_int(v)


def _cast_float(v, arg_t: SemanticType) -> Optional[float]:
    if arg_t == SemanticType.BOOLEAN:
        return 1.0 if v else 0.0
    if arg_t in _NUMERIC:
        return float(v)
    return parse_float(v)


def _cast_date(v, arg_t: SemanticType) -> Optional[int]:
    if arg_t == SemanticType.TEMPORAL:
        return v
    return parse_temporal(v)


def _eval_predicate(node, table: Table, session: SessionState) -> list[bool]:
    ev = _Evaluator(table, session)
    t = ev.prepare(node)
    if t != SemanticType.BOOLEAN:
        raise _err(
            "TypeError",
            f"filter predicate must be boolean, got {t.value}",
            getattr(node, "span", None),
        )
    return [bool(ev.eval_row(node, i)) for i in range(table.nrows)]


def _eval_column_expr(node, table: Table, session: SessionState):
    ev = _Evaluator(table, session)
    stype = ev.prepare(node)
    values = [ev.eval_row(node, i) for i in range(table.nrows)]
    return stype, values
