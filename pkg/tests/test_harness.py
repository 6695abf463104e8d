"""Sessions, wire encoding, transcripts, batches, statistics and the suite runner."""

import hashlib
import json
import re
import struct
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcw.errors import ConfigurationError, ScheduleError, TranscriptParseError
from qcw.harness import transcript, wire
from qcw.harness.batch import batch_reports, run_batch
from qcw.harness.session import Outcome, Protocol, Schedule, derive_seed, run_session
from qcw.harness.stats import (chi_square_uniform, exact_report, lower_report, mean_with_se, proportion, rate_lower,
                               rate_upper, strict_upper_report, upper_report, within_report)
from qcw.harness.suite import CRITERIA, run_suite

SRC = Path(__file__).resolve().parents[1] / "src" / "qcw"


def test_derive_seed_matches_direct_hash():
    digest = hashlib.sha256(struct.pack("<Q", 7) + b"A").digest()
    assert derive_seed(7, "A") == int.from_bytes(digest[:8], "little")
    digest = hashlib.sha256(struct.pack("<Q", 7) + struct.pack("<Q", 3)).digest()
    assert derive_seed(7, 3) == int.from_bytes(digest[:8], "little")
    assert derive_seed(7, "A") != derive_seed(7, "B") != derive_seed(8, "B")


# ---------------------------------------------------------------------------
# wire format

leaves = st.one_of(st.integers(-2 ** 70, 2 ** 70), st.text(max_size=8), st.binary(max_size=8), st.none())
payloads = st.recursive(leaves, lambda inner: st.one_of(
    st.lists(inner, max_size=4), st.dictionaries(st.text(max_size=4), inner, max_size=4)), max_leaves=12)


def _normal(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _normal(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_normal(x) for x in v]
    return v


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.text(max_size=6), payloads, max_size=5))
def test_wire_roundtrip(payload):
    data = wire.encode(payload)
    assert _normal(wire.decode(data)) == _normal(payload)
    assert wire.encode(wire.decode(data)) == data


def test_wire_is_canonical_and_strict():
    assert wire.encode({"b": 1, "a": [1, 2]}) == wire.encode({"a": np.array([1, 2]), "b": np.int64(1)})
    with pytest.raises(TypeError):
        wire.encode({"x": 1.5})
    with pytest.raises(TypeError):
        wire.encode({"x": np.zeros(2)})
    with pytest.raises(ValueError):
        wire.decode(wire.encode({"x": 1}) + b"\0")


# ---------------------------------------------------------------------------
# sessions

def _toy(order):
    def driver(session, cfg, parties):
        for sender, t in order:
            session.send(sender, t, {"v": 1})
        return Outcome(True)
    return Protocol("toy", lambda cfg: Schedule([("A", "x"), ("B", "y")]), driver, {"A": {"honest": None}})


def test_schedule_is_enforced():
    out, session = run_session(_toy([("A", "x"), ("B", "y")]))
    assert out.accepted and len(session.transcript()) == 2
    with pytest.raises(ScheduleError) as info:
        run_session(_toy([("B", "y")]))
    assert info.value.round_index == 0
    with pytest.raises(ScheduleError):
        run_session(_toy([("A", "x"), ("B", "y"), ("A", "z")]))
    with pytest.raises(ScheduleError):
        run_session(_toy([("C", "x")]))


def test_configuration_errors():
    with pytest.raises(ConfigurationError):
        run_session("nope")
    with pytest.raises(ConfigurationError):
        run_session("ot", {"A": "evil"})
    with pytest.raises(ConfigurationError):
        run_session("ot", {"E": "tamper"})
    with pytest.raises(ConfigurationError):
        run_session("ot", {"C": "honest"})


def test_sessions_are_deterministic():
    a, sa = run_session("ssscommit", seed=11)
    b, sb = run_session("ssscommit", seed=11)
    assert sa.transcript_bytes() == sb.transcript_bytes()
    assert a.values == b.values


# ---------------------------------------------------------------------------
# transcripts

def test_transcript_roundtrip(tmp_path):
    _, session = run_session("idplus", {"E": "tamper"}, {"w_A": 1, "w_B": 1}, seed=2)
    path = tmp_path / "t.jsonl"
    transcript.export_transcript(session.transcript(), path)
    raw = path.read_bytes()
    assert raw.endswith(b"\n") and b"\r" not in raw
    assert transcript.import_transcript(path) == session.transcript()
    assert any(r.sender == "E" for r in session.transcript())


@pytest.mark.parametrize("text,line", [
    ('{"round":0,"sender":"A","msg_type":"x","payload":"00"}', 1),
    ('{"round":0,"sender":"A","msg_type":"x","payload":"00"}\r\n', 1),
    ('{"round":0,"sender":"A","msg_type":"x","payload":"00"}\n{"round":2,"sender":"A","msg_type":"x","payload":""}\n',
     2),
    ('{"round":0,"sender":"Q","msg_type":"x","payload":"00"}\n', 1),
    ('{"round":0,"sender":"A","msg_type":"","payload":"00"}\n', 1),
    ('{"round":0,"sender":"A","msg_type":"x","payload":"0G"}\n', 1),
    ('{"round":0,"sender":"A","msg_type":"x"}\n', 1),
    ('not json\n', 1),
])
def test_transcript_parse_errors_name_the_line(text, line):
    with pytest.raises(TranscriptParseError) as info:
        transcript.loads(text)
    assert info.value.line_number == line


def test_transcript_rejects_bad_utf8(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_bytes(b'{"round":0}\n\xff\n')
    with pytest.raises(TranscriptParseError) as info:
        transcript.import_transcript(path)
    assert info.value.line_number == 2


# ---------------------------------------------------------------------------
# batches and statistics

def test_batch_does_not_depend_on_parallelism():
    one = run_batch("ssscommit", {"A": "corrupt"}, None, 60, 1, 5, summarize=lambda o: o.accepted)
    four = run_batch("ssscommit", {"A": "corrupt"}, None, 60, 4, 5, summarize=lambda o: o.accepted)
    assert one == four
    assert one.trials == 60 and one.accepted == one.values[True]
    reports = batch_reports(one, accept_bound=0.0)
    assert reports[0].passed


def test_three_standard_error_rules():
    assert upper_report("m", 0.13, 0.01, 0.1).passed
    assert not upper_report("m", 0.131, 0.01, 0.1).passed
    assert lower_report("m", 0.07, 0.01, 0.1).passed
    assert not lower_report("m", 0.069, 0.01, 0.1).passed
    assert within_report("m", 0.5, 0.1, 0.8).passed and not within_report("m", 0.5, 0.1, 0.81).passed
    assert exact_report("m", 3, 3).passed and not exact_report("m", 2, 3).passed
    assert not strict_upper_report("m", 0.05, 0.05).passed
    assert rate_upper("m", 0, 100, 0.0).passed
    assert rate_lower("m", 100, 100, 1.0).passed
    assert proportion(1, 4) == (0.25, pytest.approx(np.sqrt(0.25 * 0.75 / 4)))
    assert mean_with_se([1.0])[1] == 0.0
    with pytest.raises(ValueError):
        proportion(0, 0)


def test_chi_square():
    assert chi_square_uniform("u", [100, 100, 100, 100]).passed
    assert not chi_square_uniform("u", [400, 0, 0, 0]).passed
    with pytest.raises(ValueError):
        chi_square_uniform("u", [0, 0])


def test_report_serialisation_is_stable():
    r = upper_report("m", 1 / 3, 0.1, 0.5).to_dict()
    assert r["estimate"] == float(f"{1 / 3:.12g}")
    assert json.dumps(r, sort_keys=True) == json.dumps(upper_report("m", 1 / 3, 0.1, 0.5).to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# suite runner

def test_suite_registry_covers_every_criterion():
    assert sorted(CRITERIA) == list(range(1, 15))


def test_small_suite_is_reproducible():
    a = run_suite(3, 0.01, only=[1, 3, 5])
    b = run_suite(3, 0.01, only=[1, 3, 5])
    assert a.to_json() == b.to_json()
    assert all(r.passed for r in a.results)
    assert "elapsed" not in a.to_json()


# ---------------------------------------------------------------------------
# isolation: the prepared states are only read through the test hook

def test_only_the_test_hook_reads_prepared_states():
    users = [p.relative_to(SRC).as_posix() for p in SRC.rglob("*.py") if re.search(r"\b_inspect\b", p.read_text())]
    assert sorted(users) == ["qchannel.py", "testing.py"]
    importer = re.compile(r"^\s*(from|import)\s+(qcw\.testing|\.+testing|\.+\s+import\s+testing)", re.M)
    assert not any(importer.search(p.read_text()) for p in SRC.rglob("*.py"))
