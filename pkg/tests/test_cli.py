"""CLI tests: simulate/analyze pipeline, content round-trip, stats table."""
from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from tutorweb.cli import main
from tutorweb.content import ContentTree
from tutorweb.eventlog import EventLog, LogEntry
from tutorweb.items import ItemBank
from tutorweb.store import Store


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def make_content_file(path: Path) -> None:
    tree = ContentTree()
    dept = tree.add_node(None, "department", "Math", "")
    course = tree.add_node(dept, "course", "Stats", "")
    tut = tree.add_node(course, "tutorial", "Regression", "")
    tree.add_node(tut, "lecture", "Intro", "", node_id="lec")
    bank = ItemBank(tree)
    bank.add_question(
        "lec", "pick one",
        [("right", True), ("wrong", False)],
        question_id="q001",
    )
    bank.add_template(
        "lec", "add {a} and {b}",
        {"a": {"min": 1, "max": 5, "step": 1},
         "b": {"min": 1, "max": 5, "step": 1}},
        [{"expression": "a + b", "correct": True},
         {"expression": "a - b", "correct": False}],
        template_id="t001",
    )
    document = {"content": tree.to_document(), "items": bank.to_records()}
    path.write_text(json.dumps(document), "utf-8")


class TestSimulateAnalyze:
    def test_pipeline(self, runner, tmp_path):
        data = tmp_path / "d.rec"
        result = runner.invoke(main, [
            "simulate", "--students", "184", "--seed", "1",
            "--out", str(data),
        ])
        assert result.exit_code == 0, result.output
        assert data.exists()
        assert Path(f"{data}.manifest.json").exists()
        lines = data.read_text().strip().split("\n")
        assert len(lines) == 184 * 4
        first = json.loads(lines[0])
        assert set(first) == {"student", "treatment", "math", "exam", "score"}

        out_json = tmp_path / "result.json"
        result = runner.invoke(main, [
            "analyze", "--in", str(data), "--out", str(out_json),
        ])
        assert result.exit_code == 0, result.output
        for term in ("treatment", "math", "treatment:math", "exam",
                     "student", "Residuals"):
            assert term in result.output
        record = json.loads(out_json.read_text())
        by_term = {r["term"]: r for r in record["initial"]["rows"]}
        assert by_term["treatment"]["df"] == 1
        assert by_term["math"]["df"] == 1
        assert by_term["treatment:math"]["df"] == 1
        assert by_term["exam"]["df"] == 3
        assert by_term["student"]["df"] == 182

    def test_machine_and_text_outputs_agree(self, runner, tmp_path):
        data = tmp_path / "d.rec"
        runner.invoke(main, [
            "simulate", "--students", "30", "--seed", "3", "--out", str(data),
        ])
        out_json = tmp_path / "r.json"
        result = runner.invoke(main, [
            "analyze", "--in", str(data), "--out", str(out_json),
        ])
        record = json.loads(out_json.read_text())
        for row in record["initial"]["rows"]:
            assert row["term"] in result.output
            text_line = next(
                line for line in result.output.splitlines()
                if line.startswith(row["term"] + " ")
                or line.split() and line.split()[0] == row["term"]
            )
            assert str(row["df"]) in text_line.split()

    def test_simulate_deterministic(self, runner, tmp_path):
        a, b = tmp_path / "a.rec", tmp_path / "b.rec"
        for out in (a, b):
            runner.invoke(main, [
                "simulate", "--students", "12", "--seed", "7",
                "--out", str(out),
            ])
        assert a.read_text() == b.read_text()

    def test_simulate_reps_summary(self, runner, tmp_path):
        out = tmp_path / "calib.json"
        result = runner.invoke(main, [
            "simulate", "--students", "16", "--seed", "2", "--reps", "5",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        summary = json.loads(out.read_text())
        assert summary["reps"] == 5
        assert "treatment" in summary["rejection_rate"]
        assert 0.0 <= summary["rejection_rate"]["treatment"] <= 1.0

    def test_analyze_missing_file(self, runner, tmp_path):
        result = runner.invoke(main, [
            "analyze", "--in", str(tmp_path / "missing.rec"),
        ])
        assert result.exit_code == 1

    def test_unknown_verb(self, runner):
        assert runner.invoke(main, ["frobnicate"]).exit_code == 2

    def test_unknown_option(self, runner):
        assert runner.invoke(main, ["simulate", "--what"]).exit_code == 2


class TestImportExport:
    def test_round_trip(self, runner, tmp_path):
        source = tmp_path / "content.json"
        make_content_file(source)
        data_dir = tmp_path / "data"
        result = runner.invoke(main, [
            "import", "--data-dir", str(data_dir), "--in", str(source),
        ])
        assert result.exit_code == 0, result.output
        assert "4 nodes" in result.output

        exported = tmp_path / "exported.json"
        result = runner.invoke(main, [
            "export", "--data-dir", str(data_dir), "--out", str(exported),
        ])
        assert result.exit_code == 0

        # importing the export again reproduces it byte for byte
        data_dir2 = tmp_path / "data2"
        runner.invoke(main, [
            "import", "--data-dir", str(data_dir2), "--in", str(exported),
        ])
        exported2 = tmp_path / "exported2.json"
        runner.invoke(main, [
            "export", "--data-dir", str(data_dir2), "--out", str(exported2),
        ])
        assert exported.read_text() == exported2.read_text()

    def test_import_rejects_garbage(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"content": [
            {"id": "x", "kind": "slide", "title": "floating", "body": ""}
        ], "items": []}))
        result = runner.invoke(main, [
            "import", "--data-dir", str(tmp_path / "d"), "--in", str(bad),
        ])
        assert result.exit_code == 1


class TestStats:
    def test_ranked_table(self, runner, tmp_path):
        source = tmp_path / "content.json"
        make_content_file(source)
        data_dir = tmp_path / "data"
        runner.invoke(main, [
            "import", "--data-dir", str(data_dir), "--in", str(source),
        ])
        log = Store(data_dir).open_log()
        log.append(LogEntry(1, 1.0, "alice", "lec", "q001", "allocated"))
        log.append(LogEntry(
            2, 2.0, "alice", "lec", "q001", "answered",
            correct=True, points=1.0, grade_after=1.0,
        ))
        result = runner.invoke(main, [
            "stats", "lec", "--data-dir", str(data_dir),
        ])
        assert result.exit_code == 0, result.output
        line = next(
            l for l in result.output.splitlines() if "q001" in l
        )
        fields = line.split()
        assert fields[2:5] == ["1", "1", "1"]
        assert fields[5] == "0.0000"

    def test_unknown_lecture(self, runner, tmp_path):
        result = runner.invoke(main, [
            "stats", "nope", "--data-dir", str(tmp_path / "d"),
        ])
        assert result.exit_code == 1
