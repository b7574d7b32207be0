"""Command-line entry points: serve, repl, run, report."""

from __future__ import annotations

import json
import os
import sys

import click

from .profiler import to_canonical_json
from .server import SyncEngine, create_app
from .session import SessionState

DEFAULT_PORT = 8787


@click.group()
def main():
    """Continuous data-profiling workbench."""


@main.command()
@click.option("--port", type=int, default=None, help="TCP port (default $LIVEPROF_PORT or 8787).")
@click.option("--open", "open_browser", is_flag=True, help="Open the UI in a browser.")
def serve(port, open_browser):
    """Serve the live workbench (WebSocket protocol + static UI)."""
    import uvicorn

    if port is None:
        port = int(os.environ.get("LIVEPROF_PORT", DEFAULT_PORT))
    static_dir = _find_static_dir()
    engine = SyncEngine(SessionState(base_dir=os.getcwd()))
    app = create_app(engine, static_dir=static_dir)
    if open_browser:
        import webbrowser

        webbrowser.open(f"http://127.0.0.1:{port}/")
    try:
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    except SystemExit:
        raise
    except OSError as e:
        click.echo(f"error: cannot bind port {port}: {e}", err=True)
        sys.exit(1)


def _find_static_dir():
    here = os.path.dirname(os.path.abspath(__file__))
    for candidate in (
        os.path.join(here, "static"),
        os.path.join(here, "..", "..", "..", "frontend", "dist"),
    ):
        if os.path.isdir(candidate):
            return os.path.abspath(candidate)
    return None


@main.command()
@click.argument("script", required=False, type=click.Path())
def repl(script):
    """Interactive session; optionally run SCRIPT first."""
    session = SessionState(base_dir=os.getcwd())
    if script:
        with open(script, "r", encoding="utf-8") as f:
            _print_result(session, session.execute(f.read()))
    while True:
        try:
            line = input("liveprof> ")
        except EOFError:
            click.echo("")
            return
        except KeyboardInterrupt:
            click.echo("")
            continue
        if not line.strip():
            continue
        if line.strip() in ("exit", "quit"):
            return
        _print_result(session, session.execute(line))


def _print_result(session: SessionState, res) -> None:
    if not res.ok:
        loc = ""
        if res.error.span is not None:
            loc = f" (line {res.error.span.line})"
        click.echo(f"{res.error.kind}{loc}: {res.error.message}", err=True)
    for name in res.changed:
        t = session.get_table(name)
        click.echo(f"{name}: {t.nrows} rows × {t.ncols} cols")
    for table, column, kind in res.plots:
        _print_plot(session, table, column, kind)
    for name in res.removed:
        click.echo(f"removed: {name}")


def _print_plot(session, table, column, kind) -> None:
    from .profiler import profile_column

    t = session.get_table(table)
    prof = profile_column(t.column(column), t.nrows).to_dict()
    click.echo(f"plot {table}.{column} ({kind})")
    if kind == "topk":
        rows = prof["summary"]["top_values"]
        width = max((c for _, c in rows), default=1)
        for value, count in rows:
            bar = "#" * max(1, round(24 * count / width))
            click.echo(f"  {value[:20]:<20} {bar} {count}")
    else:
        hist = prof.get("histogram") or {}
        counts = hist.get("counts", [])
        peak = max(counts, default=1) or 1
        edges = hist.get("bin_edges", [])
        for i, count in enumerate(counts):
            bar = "#" * max(0, round(24 * count / peak))
            click.echo(f"  [{edges[i]:>12.4g}) {bar} {count}")


@main.command()
@click.argument("script", type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Profile output directory.")
def run(script, out_dir):
    """Execute a script headlessly and write final table profiles as JSON."""
    session = SessionState(base_dir=os.getcwd())
    engine = SyncEngine(session)
    try:
        with open(script, "r", encoding="utf-8") as f:
            source = f.read()
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    res = session.execute(source)
    os.makedirs(out_dir, exist_ok=True)
    for prof in engine.ordered_profiles():
        fname = os.path.join(out_dir, f"{prof['table_name']}.json")
        with open(fname, "w", encoding="utf-8") as f:
            f.write(to_canonical_json(prof))
    if not res.ok:
        loc = ""
        if res.error.span is not None:
            loc = f" at line {res.error.span.line}"
        click.echo(f"{res.error.kind}{loc}: {res.error.message}", err=True)
        sys.exit(1)


@main.command()
@click.argument("csv_path", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["json", "html"]), default="json")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--figures-dir", type=click.Path(), default=None,
              help="With --format html, write figure PNGs here instead of embedding.")
def report(csv_path, fmt, out_path, figures_dir):
    """One-shot static profile report for a CSV file."""
    from .report import build_snapshot, render_html

    try:
        session, engine, _name = build_snapshot(csv_path)
    except RuntimeError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    if fmt == "json":
        body = engine.snapshot_json()
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(body)
    else:
        payload = engine.snapshot_payload()
        page = render_html(payload["profiles"][0], figures_dir, out_path)
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(page)
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
