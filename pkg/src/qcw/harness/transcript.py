"""Transcript files: JSON lines, one record per line, UTF-8 with LF endings."""

from __future__ import annotations

import json
import re
from pathlib import Path

from ..errors import TranscriptParseError
from .session import SENDERS, TranscriptRecord

_FIELDS = ("round", "sender", "msg_type", "payload")
_HEX = re.compile(r"^(?:[0-9a-f]{2})*$")


def dumps(records: list[TranscriptRecord]) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":")) + "\n" for r in records)


def export_transcript(records: list[TranscriptRecord], path: str | Path) -> None:
    Path(path).write_bytes(dumps(records).encode("utf-8"))


def loads(text: str) -> list[TranscriptRecord]:
    """Parse and validate; errors name the offending line."""
    records: list[TranscriptRecord] = []
    if text and not text.endswith("\n"):
        # a final line without its terminator was cut off
        raise TranscriptParseError(text.count("\n") + 1, "truncated record (missing line terminator)")
    for number, line in enumerate(text.split("\n")[:-1] if text else [], start=1):
        if line.endswith("\r"):
            raise TranscriptParseError(number, "CR line endings are not allowed")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TranscriptParseError(number, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict) or set(obj) != set(_FIELDS):
            raise TranscriptParseError(number, f"record must have exactly the fields {list(_FIELDS)}")
        rnd, sender, msg_type, payload = (obj[f] for f in _FIELDS)
        if not isinstance(rnd, int) or isinstance(rnd, bool) or rnd != len(records):
            raise TranscriptParseError(number, f"round must be {len(records)}, got {rnd!r}")
        if sender not in SENDERS:
            raise TranscriptParseError(number, f"unknown sender {sender!r}")
        if not isinstance(msg_type, str) or not msg_type:
            raise TranscriptParseError(number, "msg_type must be a non-empty string")
        if not isinstance(payload, str) or not _HEX.match(payload):
            raise TranscriptParseError(number, "payload must be lower-case hex")
        records.append(TranscriptRecord(rnd, sender, msg_type, payload))
    return records


def import_transcript(path: str | Path) -> list[TranscriptRecord]:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[:exc.start].count(b"\n") + 1
        raise TranscriptParseError(line, "not valid UTF-8") from None
    return loads(text)
