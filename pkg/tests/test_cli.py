import json
import os

import pytest
from click.testing import CliRunner

from liveprof.cli import main
from liveprof.server import SyncEngine
from liveprof.session import SessionState


APTS = (
    "price,county,when\n"
    "100,Alameda,2012-01-05\n"
    "-5,---,2012-06-01\n"
    "250,Alameda,2013-02-01\n"
)


@pytest.fixture
def runner():
    return CliRunner()


class TestReport:
    def test_json_report_deterministic(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        outs = []
        for i in range(2):
            out = tmp_path / f"r{i}.json"
            res = runner.invoke(main, ["report", str(csv), "--format", "json", "--out", str(out)])
            assert res.exit_code == 0, res.output
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_json_report_equals_live_snapshot(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        out = tmp_path / "r.json"
        runner.invoke(main, ["report", str(csv), "--format", "json", "--out", str(out)])
        session = SessionState()
        engine = SyncEngine(session)
        res = session.execute(f'load "{csv}" as apts')
        assert res.ok
        assert out.read_text() == engine.snapshot_json()

    def test_report_column_sections(self, runner, tmp_path):
        header = ",".join(f"c{i}" for i in range(13))
        rows = [",".join(str(i + j) for j in range(13)) for i in range(20)]
        csv = tmp_path / "wide.csv"
        csv.write_text(header + "\n" + "\n".join(rows) + "\n")
        out = tmp_path / "wide.json"
        res = runner.invoke(main, ["report", str(csv), "--format", "json", "--out", str(out)])
        assert res.exit_code == 0
        payload = json.loads(out.read_text())
        assert len(payload["profiles"][0]["columns"]) == 13

    def test_html_report_renders_all_columns(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        out = tmp_path / "r.html"
        res = runner.invoke(main, ["report", str(csv), "--format", "html", "--out", str(out)])
        assert res.exit_code == 0
        page = out.read_text()
        for col in ("price", "county", "when"):
            assert f"<h2>{col} " in page
        assert "data:image/png;base64," in page  # embedded matplotlib figures

    def test_html_report_figure_files(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        out = tmp_path / "r.html"
        figs = tmp_path / "figs"
        res = runner.invoke(
            main,
            ["report", str(csv), "--format", "html", "--out", str(out), "--figures-dir", str(figs)],
        )
        assert res.exit_code == 0
        assert sorted(p.name for p in figs.iterdir()) == ["county.png", "price.png", "when.png"]
        assert "figs/price.png" in out.read_text()

    def test_empty_headered_csv(self, runner, tmp_path):
        csv = tmp_path / "empty.csv"
        csv.write_text("a,b\n")
        out = tmp_path / "e.json"
        res = runner.invoke(main, ["report", str(csv), "--format", "json", "--out", str(out)])
        assert res.exit_code == 0
        payload = json.loads(out.read_text())
        assert payload["profiles"][0]["nrows"] == 0

    def test_io_error_exit_1(self, runner, tmp_path):
        res = runner.invoke(
            main, ["report", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o.json")]
        )
        assert res.exit_code == 1
        assert "error" in res.output or res.stderr


class TestRun:
    def test_run_writes_profiles(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        script = tmp_path / "s.lp"
        script.write_text(
            f'load "{csv}" as df\n'
            "df2 = dedupe filter df where price > 0 by county\n"
        )
        out = tmp_path / "out"
        res = runner.invoke(main, ["run", str(script), "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert sorted(p.name for p in out.iterdir()) == ["df.json", "df2.json"]

    def test_run_error_partial_outputs_and_exit(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        script = tmp_path / "s.lp"
        script.write_text(
            f'load "{csv}" as df\n'
            "df2 = head df 2\n"
            "x = filter nosuch where a > 0\n"
        )
        out = tmp_path / "out"
        res = runner.invoke(main, ["run", str(script), "--out", str(out)])
        assert res.exit_code != 0
        assert "line 3" in res.output
        assert sorted(p.name for p in out.iterdir()) == ["df.json", "df2.json"]

    def test_run_deterministic(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        script = tmp_path / "s.lp"
        script.write_text(f'load "{csv}" as df\n')
        blobs = []
        for d in ("o1", "o2"):
            out = tmp_path / d
            runner.invoke(main, ["run", str(script), "--out", str(out)])
            blobs.append((out / "df.json").read_bytes())
        assert blobs[0] == blobs[1]


class TestRepl:
    def test_eof_exits_zero(self, runner):
        res = runner.invoke(main, ["repl"], input="")
        assert res.exit_code == 0

    def test_load_prints_shape(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        res = runner.invoke(main, ["repl"], input=f'load "{csv}" as df\n')
        assert res.exit_code == 0
        assert "df: 3 rows × 3 cols" in res.output

    def test_error_printed_and_loop_continues(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        res = runner.invoke(
            main, ["repl"], input=f'x = head bogus 1\nload "{csv}" as df\n'
        )
        assert res.exit_code == 0
        assert "NameError" in res.output
        assert "df: 3 rows" in res.output

    def test_plot_renders_text_chart(self, runner, tmp_path):
        csv = tmp_path / "apts.csv"
        csv.write_text(APTS)
        res = runner.invoke(
            main, ["repl"], input=f'load "{csv}" as df\nplot df.county as topk\n'
        )
        assert "plot df.county (topk)" in res.output
        assert "Alameda" in res.output
