"""Command-line entry point: records, exit codes and files."""

import json
import subprocess
import sys

import pytest

from qcw.harness import transcript
from qcw.harness.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def record(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    return code, json.loads(out)


def test_ot_batch_record(capsys):
    code, rec = record(capsys, "--seed", "3", "ot", "--trials", "3")
    assert code == 0
    assert rec["protocol"] == "ot" and rec["trials"] == 3 and rec["accepted"] == 3
    assert [r["session"] for r in rec["runs"]] == [0, 1, 2]


def test_records_are_deterministic(capsys):
    a = record(capsys, "--seed", "5", "ssscommit", "--trials", "4", "--strategy", "corrupt", "--values")
    b = record(capsys, "--seed", "5", "ssscommit", "--trials", "4", "--strategy", "corrupt", "--values")
    assert a == b


def test_expectation_sets_the_exit_code(capsys):
    code, _, _ = run(capsys, "ot", "--strategy", "delayed", "--phi-prime", "0.02")
    assert code == 1
    code, _, _ = run(capsys, "ot", "--strategy", "delayed", "--phi-prime", "0.02", "--expect", "reject")
    assert code == 0


def test_usage_errors_exit_with_two(capsys):
    assert run(capsys, "ot", "--strategy", "nobody")[0] == 2
    assert run(capsys, "ot", "--trials", "0")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    code, _, err = run(capsys, "coin", "force", "--target", "zz", "--side", "bob")
    assert code == 2 and "qcw:" in err


def test_environment_seed_overrides(capsys, monkeypatch):
    monkeypatch.setenv("QCW_SEED", "9")
    _, rec = record(capsys, "--seed", "1", "id")
    assert rec["seed"] == 9
    monkeypatch.setenv("QCW_SEED", "nine")
    assert run(capsys, "id")[0] == 2


def test_identification_commands(capsys):
    assert record(capsys, "id", "--w-a", "3", "--w-b", "3")[1]["accepted"] == 1
    assert run(capsys, "id", "--w-a", "3", "--w-b", "4", "--expect", "reject", "--trials", "3")[0] == 0
    code, rec = record(capsys, "idplus", "--eve", "tamper", "--w-a", "2", "--w-b", "2", "--expect", "reject")
    assert code == 0 and rec["accepted"] == 0


def test_transcript_and_out_files(capsys, tmp_path):
    tpath = tmp_path / "t.jsonl"
    opath = tmp_path / "r.json"
    code, out, _ = run(capsys, "--out", str(opath), "commit", "--transcript", str(tpath))
    assert code == 0
    assert [r.msg_type for r in transcript.import_transcript(tpath)] == ["commit", "open"]
    assert json.loads(opath.read_text())["protocol"] == "commit"
    assert out and not out.lstrip().startswith("{")


def test_coin_commands(capsys):
    code, rec = record(capsys, "coin", "flip", "--bits", "8", "--trials", "2")
    assert code == 0
    code, rec = record(capsys, "coin", "force", "--target", "a5", "--side", "alice", "--sigma", "4")
    assert code == 0 and rec["hits"] == 1 and rec["records"][0]["outcome"] == "a5"


def test_zkpk_commands(capsys, tmp_path):
    graph = tmp_path / "g.json"
    graph.write_text(json.dumps({"adjacency": {"0": [1, 2], "1": [0, 2], "2": [0, 1]}, "cycle": [0, 1, 2]}))
    code, rec = record(capsys, "zkpk", "run", "--graph", str(graph), "--sigma", "2", "--preset", "small")
    assert code == 0 and rec["accepted"] == 1
    code, _ = record(capsys, "zkpk", "run", "--cheat", "--sigma", "8", "--preset", "small", "--expect", "reject")
    assert code in (0, 1)
    assert run(capsys, "iqzk")[0] == 0


def test_pa_command(capsys):
    code, rec = record(capsys, "pa", "--n", "6", "--ell", "2", "--leak", "1")
    assert code == 0 and rec["holds"]


def test_suite_command(capsys):
    code, out, _ = run(capsys, "suite", "--only", "1,5", "--scale", "0.01", "--quiet")
    assert code == 0
    assert run(capsys, "suite", "--only", "99")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qcw", "--json", "commit"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["protocol"] == "commit"


@pytest.mark.parametrize("argv", [["--help"], ["ot", "--help"], ["coin", "force", "--help"]])
def test_help_exits_cleanly(capsys, argv):
    assert run(capsys, *argv)[0] == 0
