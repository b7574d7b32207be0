"""Columnar table model: CSV ingestion, semantic type inference, fingerprinting.

Cell values are plain Python objects: bool, int, float, str, or int epoch-ms
for temporal cells. ``None`` is the null marker and is distinct from ``""``.
"""

from __future__ import annotations

import csv
import hashlib
import re
import struct
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Optional, Sequence


class SemanticType(str, Enum):
    BOOLEAN = "boolean"
    INTEGER = "integer"
    FLOAT = "float"
    TEMPORAL = "temporal"
    CATEGORICAL = "categorical"

    @property
    def is_numeric(self) -> bool:
        return self in (SemanticType.INTEGER, SemanticType.FLOAT)


class TableError(Exception):
    """Base class for table-layer errors."""


class IoError(TableError):
    pass


class CsvError(TableError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

DEFAULT_NA_TOKENS = ("", "NA", "NaN", "null")

_BOOL_TOKENS = {"true": True, "false": False}

# YYYY-MM-DD, YYYY-MM-DD HH:MM[:SS], YYYY-MM-DDTHH:MM[:SS][Z]
_TEMPORAL_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})"
    r"(?:[ T](\d{2}):(\d{2})(?::(\d{2}))?Z?)?$"
)

_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class CsvOptions:
    delimiter: str = ","
    na_tokens: Sequence[str] = DEFAULT_NA_TOKENS


@dataclass(frozen=True)
class Fingerprint:
    hash: int  # unsigned 64-bit
    nrows: int
    ncols: int

    @property
    def hex(self) -> str:
        return f"{self.hash:016x}"


@dataclass
class Column:
    name: str
    stype: SemanticType
    values: list

    def __len__(self) -> int:
        return len(self.values)

    def n_null(self) -> int:
        return sum(1 for v in self.values if v is None)


@dataclass
class Table:
    name: str
    columns: list[Column] = field(default_factory=list)

    def __post_init__(self):
        lengths = {len(c) for c in self.columns}
        if len(lengths) > 1:
            raise ValueError("columns have unequal lengths")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")

    @property
    def nrows(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def ncols(self) -> int:
        return len(self.columns)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def row(self, i: int) -> tuple:
        return tuple(c.values[i] for c in self.columns)


def parse_temporal(token: str) -> Optional[int]:
    """Parse an accepted timestamp token to UTC epoch milliseconds, or None."""
    m = _TEMPORAL_RE.match(token)
    if not m:
        return None
    year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3))
    hour = int(m.group(4) or 0)
    minute = int(m.group(5) or 0)
    second = int(m.group(6) or 0)
    try:
        dt = datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)
    except ValueError:
        return None
    return int(dt.timestamp() * 1000)


def format_temporal(epoch_ms: int) -> str:
    dt = datetime.fromtimestamp(epoch_ms / 1000, tz=timezone.utc)
    if dt.hour == 0 and dt.minute == 0 and dt.second == 0 and dt.microsecond == 0:
        return dt.strftime("%Y-%m-%d")
    return dt.strftime("%Y-%m-%d %H:%M:%S")


def parse_bool(token: str) -> Optional[bool]:
    return _BOOL_TOKENS.get(token.strip().lower())


def parse_int(token: str) -> Optional[int]:
    """Integer token: optional sign + digits after trim; must fit in int64."""
    t = token.strip()
    if not _INT_RE.match(t):
        return None
    v = int(t)
    if v < INT64_MIN or v > INT64_MAX:
        return None
    return v


def parse_float(token: str) -> Optional[float]:
    t = token.strip()
    if not t:
        return None
    # reject nan/inf spellings so non-finite values never enter a column
    if any(ch.isalpha() and ch not in "eE" for ch in t):
        return None
    try:
        v = float(t)
    except ValueError:
        return None
    if v != v or v in (float("inf"), float("-inf")):
        return None
    return v


_PARSERS = [
    (SemanticType.BOOLEAN, parse_bool),
    (SemanticType.INTEGER, parse_int),
    (SemanticType.FLOAT, parse_float),
    (SemanticType.TEMPORAL, parse_temporal),
]


def infer_semantic_type(raw: Iterable[Optional[str]]) -> SemanticType:
    """All-or-nothing inference over non-null tokens.

    Precedence boolean > integer > float > temporal > categorical; a single
    non-conforming token demotes the column. All-null -> categorical.
    """
    tokens = [t for t in raw if t is not None]
    if not tokens:
        return SemanticType.CATEGORICAL
    for stype, parser in _PARSERS:
        if all(parser(t) is not None for t in tokens):
            return stype
    return SemanticType.CATEGORICAL


def convert_tokens(raw: Sequence[Optional[str]], stype: SemanticType) -> list:
    """Convert raw tokens to typed cells under an already-inferred type."""
    parser = dict(_PARSERS).get(stype)
    if parser is None:
        return list(raw)
    return [None if t is None else parser(t) for t in raw]


def read_csv(path: str, options: CsvOptions = CsvOptions(), name: str = "") -> Table:
    """Load a headered CSV into a typed Table.

    NA tokens become null before inference; every column gets exactly one
    SemanticType via all-or-nothing inference.
    """
    na = set(options.na_tokens)
    try:
        f = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise IoError(f"cannot open {path}: {e.strerror or e}") from e
    with f:
        reader = csv.reader(f, delimiter=options.delimiter, quotechar='"', strict=True)
        try:
            try:
                header = next(reader)
            except StopIteration:
                raise CsvError("empty file, header row required", 1)
            raw_cols: list[list[Optional[str]]] = [[] for _ in header]
            for row in reader:
                if not row:
                    row = [""]  # a blank line is one empty field
                if len(row) != len(header):
                    raise CsvError(
                        f"expected {len(header)} fields, got {len(row)}",
                        reader.line_num,
                    )
                for i, cell in enumerate(row):
                    raw_cols[i].append(None if cell in na else cell)
        except csv.Error as e:
            raise CsvError(str(e), reader.line_num) from e
    if len(set(header)) != len(header):
        raise CsvError("duplicate column names in header", 1)
    columns = []
    for cname, raw in zip(header, raw_cols):
        stype = infer_semantic_type(raw)
        columns.append(Column(cname, stype, convert_tokens(raw, stype)))
    return Table(name=name, columns=columns)


def render_cell(value, stype: SemanticType) -> str:
    """Canonical string rendering of a non-null cell."""
    if stype == SemanticType.BOOLEAN:
        return "true" if value else "false"
    if stype == SemanticType.TEMPORAL:
        return format_temporal(value)
    if stype == SemanticType.FLOAT:
        return repr(float(value))
    return str(value)


def write_csv(table: Table, path: str, options: CsvOptions = CsvOptions()) -> None:
    """Write a Table back to CSV; nulls become the first NA token."""
    na = options.na_tokens[0] if options.na_tokens else ""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, delimiter=options.delimiter, quotechar='"')
        w.writerow([c.name for c in table.columns])
        for i in range(table.nrows):
            w.writerow(
                [
                    na if c.values[i] is None else render_cell(c.values[i], c.stype)
                    for c in table.columns
                ]
            )


_STYPE_TAG = {
    SemanticType.BOOLEAN: b"b",
    SemanticType.INTEGER: b"i",
    SemanticType.FLOAT: b"f",
    SemanticType.TEMPORAL: b"t",
    SemanticType.CATEGORICAL: b"c",
}


def _hash_str(h, s: str) -> None:
    b = s.encode("utf-8")
    h.update(struct.pack(">I", len(b)))
    h.update(b)


def fingerprint(table: Table) -> Fingerprint:
    """Streaming 64-bit content hash over schema then cells, column-major.

    Deterministic across runs and platforms; a dedicated marker byte keeps
    null distinct from every typed value.
    """
    h = hashlib.blake2b(digest_size=8)
    _hash_str(h, table.name)
    h.update(struct.pack(">II", table.nrows, table.ncols))
    for col in table.columns:
        _hash_str(h, col.name)
        h.update(_STYPE_TAG[col.stype])
        for v in col.values:
            if v is None:
                h.update(b"\x00")
            elif col.stype == SemanticType.BOOLEAN:
                h.update(b"B\x01" if v else b"B\x00")
            elif col.stype == SemanticType.INTEGER:
                if INT64_MIN <= v <= INT64_MAX:
                    h.update(b"I" + struct.pack(">q", v))
                else:
                    # mutate arithmetic can exceed int64; hash the decimal form
                    h.update(b"J")
                    _hash_str(h, str(v))
            elif col.stype == SemanticType.FLOAT:
                x = float(v)
                if x == 0.0:
                    x = 0.0  # normalize -0.0
                h.update(b"F" + struct.pack(">d", x))
            elif col.stype == SemanticType.TEMPORAL:
                h.update(b"D" + struct.pack(">q", v))
            else:
                h.update(b"S")
                _hash_str(h, v)
    return Fingerprint(
        hash=int.from_bytes(h.digest(), "big"),
        nrows=table.nrows,
        ncols=table.ncols,
    )
