import json
import subprocess
import sys
from pathlib import Path

import pytest

from waltzrv.cli import EXIT_IO, EXIT_SPEC, EXIT_USAGE, EXIT_VIOLATED, main
from waltzrv.lang import load_spec
from waltzrv.monitor import compile_monitor, run_monitor
from waltzrv.trace import read_trace

PHI = str(Path(__file__).resolve().parent.parent / "specs" / "phi.waltz")


class TestCheck:
    def test_ok(self, capsys):
        assert main(["check", PHI]) == 0
        out, err = capsys.readouterr()
        assert out == "" and "ok" in err

    def test_bad_spec(self, tmp_path, capsys):
        bad = tmp_path / "bad.waltz"
        bad.write_text("omega( send a -> b {X} : Y > 0 )")
        assert main(["check", str(bad)]) == EXIT_SPEC
        assert "Y" in capsys.readouterr().err
        bad.write_text("omega( send a -> )")
        assert main(["check", str(bad)]) == EXIT_SPEC

    def test_missing_file(self, tmp_path):
        assert main(["check", str(tmp_path / "none.waltz")]) == EXIT_IO


class TestRun:
    def test_bug_exits_3_and_logs_step_1(self, tmp_path):
        log = tmp_path / "v.jsonl"
        code = main(["run", "arithmetic", "--clients", "1", "--requests", "100", "--spec", PHI,
                     "--bug", "add_decrements", "--trace-out", str(tmp_path / "t.jsonl"),
                     "--verdict-log", str(log)])
        assert code == EXIT_VIOLATED
        first = json.loads(log.read_text().splitlines()[0])
        assert first["verdict"] == "violated" and first["step"] == 1

    def test_clean_run(self, tmp_path):
        code = main(["run", "counter", "--clients", "3", "--requests", "4",
                     "--trace-out", str(tmp_path / "t.jsonl"), "--verdict-log", str(tmp_path / "v.jsonl"),
                     "--report", str(tmp_path / "r.json")])
        assert code == 0
        assert json.loads((tmp_path / "r.json").read_text())["messages"] == 24

    def test_default_output_paths(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["run", "chat", "--clients", "2", "--requests", "2"]) == 0
        assert (tmp_path / "chat-trace.jsonl").exists() and (tmp_path / "chat-verdicts.jsonl").exists()

    @pytest.mark.parametrize("argv", [
        ["run", "arithmetic", "--bug", "stale_query"],
        ["run", "arithmetic", "--clients", "0"],
        ["run", "nosuch"],
        ["frobnicate"],
        [],
        ["bench", "chat", "--out", "x.md", "--config", "garbage"],
    ])
    def test_usage_errors(self, argv):
        assert main(argv) == EXIT_USAGE


class TestOracle:
    @pytest.mark.parametrize("bug, expected", [(None, "true"), ("add_decrements", "false")])
    def test_matches_monitor(self, tmp_path, capsys, bug, expected):
        trace = tmp_path / "t.jsonl"
        argv = ["run", "arithmetic", "--clients", "3", "--requests", "10", "--trace-out", str(trace),
                "--verdict-log", str(tmp_path / "v.jsonl")]
        main(argv + (["--bug", bug] if bug else []))
        capsys.readouterr()
        assert main(["oracle", str(trace), PHI, "--mode", "first-match"]) == 0
        printed = capsys.readouterr().out.strip()
        assert printed == expected
        events, tree = read_trace(trace)
        verdict, _ = run_monitor(compile_monitor(load_spec(PHI)), events, tree)
        assert (verdict.kind.value == "satisfied") == (printed == "true")

    def test_existential_mode(self, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        main(["run", "arithmetic", "--requests", "3", "--trace-out", str(trace),
              "--verdict-log", str(tmp_path / "v.jsonl")])
        capsys.readouterr()
        assert main(["oracle", str(trace), PHI, "--mode", "existential"]) == 0
        assert capsys.readouterr().out.strip() == "true"


def test_bench_writes_report(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["bench", "counter", "--config", "4x3", "--reps", "2", "--warmup", "0",
                 "--out", str(out), "--format", "csv"]) == 0
    assert out.read_text().startswith("system,config,base_ms")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "waltzrv", "check", PHI], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == ""
