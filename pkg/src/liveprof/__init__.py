"""liveprof: a continuous data-profiling workbench.

Load and transform named tabular datasets through a small command language
while a profiling engine reactively recomputes per-column visual summaries
after every execution and pushes them to subscribers.
"""

from .table import (
    Column,
    CsvOptions,
    Fingerprint,
    SemanticType,
    Table,
    fingerprint,
    infer_semantic_type,
    read_csv,
    write_csv,
)
from .profiler import (
    ColumnProfile,
    Histogram,
    TableProfile,
    profile_table,
    to_canonical_json,
)
from .session import ExecResult, SessionState
from .exports import Snippet
from .server import OrderingPolicy, SyncEngine, create_app

__version__ = "0.1.0"

__all__ = [
    "Column",
    "ColumnProfile",
    "CsvOptions",
    "ExecResult",
    "Fingerprint",
    "Histogram",
    "OrderingPolicy",
    "SemanticType",
    "SessionState",
    "Snippet",
    "SyncEngine",
    "Table",
    "TableProfile",
    "create_app",
    "fingerprint",
    "infer_semantic_type",
    "profile_table",
    "read_csv",
    "to_canonical_json",
    "write_csv",
]
