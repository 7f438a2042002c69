import json

import pytest

from atomfix.benchmarks import corpus_dir, corpus_programs
from atomfix.cli import main
from atomfix.lang import instrument, parse
from atomfix.pipeline import RunConfig, repair
from atomfix.verifier import verify
from conftest import corpus_ids

BANKING = str(corpus_dir() / "banking.mc")


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fix_strong_banking(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = run_cli(["fix", "--mode", "strong", BANKING, "--report", str(report)], capsys)
    assert code == 0
    assert out.count("satomic {") == 1
    assert "// --> context switch allowed" in out
    data = json.loads(report.read_text())
    assert data["status"] == "fixed" and data["fix"]["chosen"] == [2, 5]
    assert set(data["stats"]) == {"algorithm", "queries", "traces", "fix_size", "elapsed_ms"}


def test_fix_weak_banking_wraps_seize(capsys):
    code, out, _ = run_cli(["fix", "--mode", "weak", BANKING], capsys)
    assert code == 0
    seize = out[out.index("void seize"):out.index("void thread1")]
    assert "watomic {" in seize
    assert "satomic" not in out


def test_fix_correct_program(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = run_cli(["fix", str(corpus_dir() / "correct.mc"), "--report", str(report)], capsys)
    assert code == 0 and "already correct" in out
    assert json.loads(report.read_text())["status"] == "already correct"


def test_sequential_bug_exit_code(tmp_path, capsys):
    src = tmp_path / "seq.mc"
    src.write_text("int x;\nvoid main() {\n  x = 1;\n  assert(x == 2);\n}\n")
    report = tmp_path / "r.json"
    code, _, err = run_cli(["fix", str(src), "--report", str(report)], capsys)
    assert code == 2 and "main:4" in err
    assert json.loads(report.read_text())["status"] == "sequential bug"


def test_budget_exit_code(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, _, _ = run_cli(["fix", BANKING, "--step-cap", "100", "--report", str(report)], capsys)
    assert code == 3
    assert json.loads(report.read_text())["status"] == "budget exceeded"


def test_parse_error_exit_code(tmp_path, capsys):
    src = tmp_path / "bad.mc"
    src.write_text("int x = ;\n")
    report = tmp_path / "r.json"
    code, _, err = run_cli(["fix", str(src), "--report", str(report)], capsys)
    assert code == 1 and "line 1" in err
    assert json.loads(report.read_text())["status"] == "parse error"


def test_dump_trace_and_replay(tmp_path, capsys):
    traces = tmp_path / "traces"
    code, _, _ = run_cli(["fix", BANKING, "--dump-trace", str(traces), "--dump-cfg", str(tmp_path / "g.dot")], capsys)
    assert code == 0
    dumped = sorted(traces.glob("*.jsonl"))
    assert dumped and (tmp_path / "g.dot").read_text().startswith("digraph")
    code, out, _ = run_cli(["replay", BANKING, str(dumped[0])], capsys)
    assert code == 2 and "bug: assertion" in out


def test_verify_subcommand(tmp_path, capsys):
    code, out, _ = run_cli(["verify", str(corpus_dir() / "correct.mc")], capsys)
    assert code == 0 and out.startswith("correct")
    code, _, _ = run_cli(["verify", BANKING, "--dump-trace", str(tmp_path / "t.jsonl")], capsys)
    assert code == 2 and (tmp_path / "t.jsonl").exists()


def test_mhs_solve(tmp_path, capsys):
    inst = tmp_path / "inst.txt"
    inst.write_text("1 2\n2 3\n# comment\n4\n")
    code, out, _ = run_cli(["mhs", "solve", str(inst)], capsys)
    assert code == 0 and out.strip() == "2 4"


def test_instrument_subcommand(capsys):
    code, out, _ = run_cli(["instrument", BANKING], capsys)
    assert code == 0 and "if (cs0) { yield; }" in out and "const bool cs0" in out


def test_bench_empty_suite(tmp_path, capsys):
    code, out, _ = run_cli(["bench", str(tmp_path)], capsys)
    assert code == 0 and out.startswith("Example")


def test_bench_reports_errors_and_continues(tmp_path, capsys):
    (tmp_path / "a_bad.mc").write_text("int x = ;\n")
    (tmp_path / "b_ok.mc").write_text((corpus_dir() / "param_0_1_0.mc").read_text())
    (tmp_path / "b_ok.expected.json").write_text(json.dumps({"strong": {"size": 99}}))
    code, out, _ = run_cli(["bench", str(tmp_path), "--report", str(tmp_path / "b.json")], capsys)
    assert code == 1
    assert "ERROR ParseError" in out and "S fix size 1 != expected 99" in out
    rows = json.loads((tmp_path / "b.json").read_text())
    assert [r["name"] for r in rows] == ["a_bad", "b_ok"]


@pytest.mark.parametrize("path", corpus_programs(), ids=corpus_ids())
@pytest.mark.parametrize("mode", ["strong", "weak"])
def test_rendered_fix_verifies(path, mode):
    """The printed repaired program, parsed back, has no reachable bug."""
    outcome = repair(path.read_text(), RunConfig(mode=mode))
    assert not verify(instrument(parse(outcome.text))).is_bug


@pytest.mark.parametrize("path", corpus_programs(), ids=corpus_ids())
def test_lexical_regions_contain_raw_regions(path):
    raw = repair(path.read_text())
    lex = repair(path.read_text(), RunConfig(lexical=True))
    raw_locs = {loc for r in raw.report["fix"]["regions"] for loc in r["locations"]}
    lex_locs = {loc for r in lex.report["fix"]["regions"] for loc in r["locations"]}
    assert raw_locs <= lex_locs
    assert not verify(instrument(parse(lex.text))).is_bug


def test_run_config_validates():
    with pytest.raises(ValueError):
        RunConfig(mode="medium")
