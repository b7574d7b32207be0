"""Static profile reports: canonical JSON, or a self-contained HTML page with
matplotlib-rendered distribution figures.

The JSON report is byte-identical to the live server's ``/snapshot`` payload
for the same data; the HTML report renders the same fields once, with no
script-driven interactivity.
"""

from __future__ import annotations

import base64
import html
import io
import os
import re
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .server import SyncEngine
from .session import SessionState
from .table import format_temporal


def table_name_for_path(path: str) -> str:
    """Derive a DSL identifier from a file name (stem, non-ident chars -> _)."""
    stem = os.path.splitext(os.path.basename(path))[0]
    name = re.sub(r"[^0-9A-Za-z_]", "_", stem)
    if not name or name[0].isdigit():
        name = "t_" + name
    return name


def build_snapshot(data_path: str) -> tuple[SessionState, SyncEngine, str]:
    """Load one CSV into a fresh session the same way the live path would."""
    session = SessionState(base_dir=os.getcwd())
    engine = SyncEngine(session)
    name = table_name_for_path(data_path)
    res = session.execute(f'load "{os.path.abspath(data_path)}" as {name}')
    if not res.ok:
        raise RuntimeError(f"{res.error.kind}: {res.error.message}")
    return session, engine, name


# ---------------------------------------------------------------------------
# Figures


def _fig_to_png(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=110, bbox_inches="tight")
    plt.close(fig)
    return buf.getvalue()


def histogram_figure(hist: dict, title: str, temporal: bool = False) -> bytes:
    edges = hist["bin_edges"]
    counts = hist["counts"]
    fig, ax = plt.subplots(figsize=(4.6, 2.2))
    if counts:
        if len(edges) == 2 and edges[0] == edges[1]:
            ax.bar([0], counts, width=0.8, color="#4c78a8")
            ax.set_xticks([0])
            label = format_temporal(int(edges[0])) if temporal else f"{edges[0]:g}"
            ax.set_xticklabels([label])
        else:
            widths = [b - a for a, b in zip(edges, edges[1:])]
            ax.bar(edges[:-1], counts, width=widths, align="edge",
                   color="#4c78a8", edgecolor="white", linewidth=0.5)
            if temporal:
                ticks = [edges[0], edges[-1]]
                ax.set_xticks(ticks)
                ax.set_xticklabels([format_temporal(int(t)) for t in ticks], fontsize=7)
    ax.set_title(title, fontsize=9)
    ax.tick_params(labelsize=7)
    return _fig_to_png(fig)


def topk_figure(top_values: list, title: str) -> bytes:
    labels = [v for v, _ in top_values][::-1]
    counts = [c for _, c in top_values][::-1]
    fig, ax = plt.subplots(figsize=(4.6, 0.35 * max(len(labels), 2) + 0.8))
    ax.barh(range(len(labels)), counts, color="#f58518")
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels([l if len(l) <= 24 else l[:21] + "..." for l in labels],
                       fontsize=7)
    ax.set_title(title, fontsize=9)
    ax.tick_params(labelsize=7)
    return _fig_to_png(fig)


def column_figure(col: dict) -> Optional[bytes]:
    stype = col["stype"]
    if stype in ("integer", "float"):
        return histogram_figure(col["histogram"], col["name"])
    if stype == "temporal":
        return histogram_figure(col["histogram"], col["name"], temporal=True)
    top = col["summary"]["top_values"]
    if not top:
        return None
    return topk_figure(top, col["name"])


# ---------------------------------------------------------------------------
# HTML


_PAGE = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>Profile: {title}</title>
<style>
body {{ font-family: system-ui, sans-serif; margin: 2em auto; max-width: 920px; color: #222; }}
h1 {{ font-size: 1.4em; }} h2 {{ font-size: 1.05em; border-bottom: 1px solid #ddd; padding-bottom: 4px; }}
table.stats {{ border-collapse: collapse; font-size: 0.85em; }}
table.stats td {{ border: 1px solid #e0e0e0; padding: 3px 8px; }}
table.stats td:first-child {{ color: #666; }}
.col {{ margin-bottom: 2.2em; }}
.meta {{ color: #666; font-size: 0.9em; }}
img {{ max-width: 100%; }}
</style></head><body>
<h1>Profile: {title}</h1>
<p class="meta">{nrows} rows &times; {ncols} columns &middot; fingerprint {fp}</p>
{sections}
</body></html>
"""


def _stat_rows(pairs) -> str:
    rows = "".join(
        f"<tr><td>{html.escape(str(k))}</td><td>{html.escape(_fmt(v))}</td></tr>"
        for k, v in pairs
    )
    return f'<table class="stats">{rows}</table>'


def _fmt(v) -> str:
    if v is None:
        return "–"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _column_section(col: dict, png: Optional[bytes], figure_ref: Optional[str]) -> str:
    s = col["summary"]
    stype = col["stype"]
    if stype in ("integer", "float"):
        pairs = [
            ("min", s["min"]), ("q1", s["q1"]), ("median", s["median"]),
            ("q3", s["q3"]), ("max", s["max"]), ("mean", s["mean"]),
            ("std", s["std"]), ("positive", s["n_pos"]), ("zero", s["n_zero"]),
            ("negative", s["n_neg"]), ("sorted", s["sortedness"]),
            ("outliers (3 sigma)", s["outliers_sigma"]),
            ("outliers (1.5 IQR)", s["outliers_iqr"]),
        ]
    elif stype == "temporal":
        pairs = [
            ("from", None if s["t_min"] is None else format_temporal(s["t_min"])),
            ("to", None if s["t_max"] is None else format_temporal(s["t_max"])),
            ("sorted", s["sortedness"]),
        ]
    else:
        pairs = [
            ("unique values", s["cardinality"]),
            ("duplicate rows", s["duplicate_rows"]),
            ("unique", s["is_unique"]),
            ("string length min/mean/max",
             f'{_fmt(s["strlen_min"])} / {_fmt(s["strlen_mean"])} / {_fmt(s["strlen_max"])}'),
        ]
    img = ""
    if figure_ref is not None:
        img = f'<img src="{html.escape(figure_ref)}" alt="{html.escape(col["name"])}">'
    elif png is not None:
        b64 = base64.b64encode(png).decode("ascii")
        img = f'<img src="data:image/png;base64,{b64}" alt="{html.escape(col["name"])}">'
    return (
        f'<div class="col"><h2>{html.escape(col["name"])} '
        f'<small class="meta">{stype} &middot; '
        f'{col["null_fraction"] * 100:.1f}% null</small></h2>'
        f"{img}{_stat_rows(pairs)}</div>"
    )


def render_html(
    profile: dict, figures_dir: Optional[str] = None, out_path: Optional[str] = None
) -> str:
    """Render one TableProfile dict to a static HTML page.

    With ``figures_dir`` the matplotlib figures are written as PNG files next
    to the report and referenced; otherwise they are embedded base64.
    """
    sections = []
    for col in profile["columns"]:
        png = column_figure(col)
        ref = None
        if figures_dir is not None and png is not None:
            os.makedirs(figures_dir, exist_ok=True)
            safe = re.sub(r"[^0-9A-Za-z_.-]", "_", col["name"])
            fname = os.path.join(figures_dir, f"{safe}.png")
            with open(fname, "wb") as f:
                f.write(png)
            base = os.path.dirname(out_path) if out_path else "."
            ref = os.path.relpath(fname, base or ".")
        sections.append(_column_section(col, png, ref))
    return _PAGE.format(
        title=html.escape(profile["table_name"]),
        nrows=profile["nrows"],
        ncols=profile["ncols"],
        fp=profile["fingerprint"]["hash"],
        sections="\n".join(sections),
    )
