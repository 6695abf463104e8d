"""Two-party sessions with a fixed message schedule and a recorded transcript.

A protocol is driven by a function that calls :meth:`Session.send` for
every classical message and :meth:`Session.send_qubits` for the quantum
transmission.  Each call is checked against the protocol's schedule,
logged, passed through the optional eavesdropper tap and only then handed
back to the driver for delivery.
"""

from __future__ import annotations

import copy
import hashlib
import struct
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ConfigurationError, ParameterError, ScheduleError
from ..qchannel import QubitBatch
from . import wire

SENDERS = ("A", "B", "E")


@dataclass(frozen=True)
class TranscriptRecord:
    round: int
    sender: str
    msg_type: str
    payload: str  # hex of the canonical encoding

    def to_dict(self) -> dict:
        return {"round": self.round, "sender": self.sender, "msg_type": self.msg_type, "payload": self.payload}


def derive_seed(parent: int, label: int | str) -> int:
    """64-bit child seed: first 8 bytes of SHA-256(parent || label)."""
    tail = struct.pack("<Q", label) if isinstance(label, int) else label.encode()
    digest = hashlib.sha256(struct.pack("<Q", parent & 0xFFFFFFFFFFFFFFFF) + tail).digest()
    return int.from_bytes(digest[:8], "little")


def party_rng(session_seed: int, role: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(session_seed, role))


class EveTap:
    """Pass-through man in the middle; subclasses override the hooks."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def on_message(self, round_index: int, sender: str, msg_type: str, payload: dict) -> dict | None:
        """Return a replacement payload, or ``None`` to forward unchanged."""
        return None

    def on_qubits(self, batch: QubitBatch) -> QubitBatch:
        return batch


class Aborted(Exception):
    """Raised inside a driver to end the session with an abort outcome."""

    def __init__(self, reason: str, by: str):
        super().__init__(f"{by} aborted: {reason}")
        self.reason = reason
        self.by = by


@dataclass
class Schedule:
    """Expected (sender, msg_type) pairs in order."""

    steps: list[tuple[str, str]]

    def expect(self, round_index: int, sender: str, msg_type: str) -> None:
        if round_index >= len(self.steps):
            raise ScheduleError(round_index, f"unexpected {msg_type!r} from {sender} after the schedule ended")
        want = self.steps[round_index]
        if want != (sender, msg_type):
            raise ScheduleError(round_index, f"expected {want[1]!r} from {want[0]}, got {msg_type!r} from {sender}")


class Session:
    def __init__(self, session_id: str, schedule: Schedule, seed: int, eve: EveTap | None = None,
                 keep_views: bool = False):
        self.session_id = session_id
        self.schedule = schedule
        self.seed = seed
        self.eve = eve
        self.records: list[TranscriptRecord] = []
        self._raw: list[tuple[int, str, str, bytes]] = []
        self._round = 0
        self.keep_views = keep_views
        # each party's view: bytes of messages as sent by it or delivered to it
        self.views: dict[str, list[bytes]] = {"A": [], "B": []}

    def rng(self, role: str) -> np.random.Generator:
        return party_rng(self.seed, role)

    @property
    def round(self) -> int:
        return self._round

    def send(self, sender: str, msg_type: str, payload: dict) -> dict:
        """Log and deliver a classical message; returns what the receiver gets."""
        if sender not in ("A", "B"):
            raise ScheduleError(self._round, f"unknown sender {sender!r}")
        self.schedule.expect(self._round, sender, msg_type)
        data = wire.encode(payload)
        self._log(sender, msg_type, data)
        receiver = "B" if sender == "A" else "A"
        if self.keep_views:
            self.views[sender].append(data)
        delivered = payload
        if self.eve is not None:
            replaced = self.eve.on_message(self._round, sender, msg_type, copy.deepcopy(payload))
            if replaced is not None:
                new = wire.encode(replaced)
                if new != data:
                    self._log("E", msg_type, new)
                    data = new
                    delivered = wire.decode(new)
        if self.keep_views:
            self.views[receiver].append(data)
        self._round += 1
        return delivered

    def send_qubits(self, sender: str, batch: QubitBatch) -> QubitBatch:
        self.schedule.expect(self._round, sender, "qubits")
        self._log(sender, "qubits", wire.encode({"count": len(batch)}))
        self._round += 1
        if self.eve is not None:
            return self.eve.on_qubits(batch)
        return batch

    def _log(self, sender: str, msg_type: str, data: bytes) -> None:
        self._raw.append((len(self._raw), sender, msg_type, data))

    def transcript(self) -> list[TranscriptRecord]:
        return [TranscriptRecord(r, s, t, d.hex()) for r, s, t, d in self._raw]

    def transcript_bytes(self) -> bytes:
        h = hashlib.sha256()
        for r, s, t, d in self._raw:
            h.update(struct.pack("<I", r) + s.encode() + t.encode() + struct.pack("<I", len(d)) + d)
        return h.digest()


@dataclass
class Outcome:
    accepted: bool
    reason: str | None = None
    aborted_by: str | None = None
    values: dict = field(default_factory=dict)


@dataclass
class Protocol:
    """A registered protocol: schedule builder, driver and strategy tables."""

    name: str
    schedule: Callable[[dict], Schedule]
    driver: Callable[["Session", dict, dict], Outcome]
    strategies: dict[str, dict[str, Callable]]  # role -> name -> factory
    supports_eve: bool = False
    defaults: dict = field(default_factory=dict)


PROTOCOLS: dict[str, Protocol] = {}


def register(protocol: Protocol) -> Protocol:
    PROTOCOLS[protocol.name] = protocol
    return protocol


def get_protocol(name: str) -> Protocol:
    _load_builtin()
    if name not in PROTOCOLS:
        raise ConfigurationError(f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS)}")
    return PROTOCOLS[name]


def _load_builtin() -> None:
    from . import registry  # noqa: F401  registers the built-in protocols


def run_session(protocol: Protocol | str, strategies: dict[str, str] | None = None, config: dict | None = None,
                seed: int = 0, session_id: str | None = None) -> tuple[Outcome, Session]:
    """Run one session; deterministic in ``seed``."""
    if isinstance(protocol, str):
        protocol = get_protocol(protocol)
    cfg = dict(protocol.defaults)
    cfg.update(config or {})
    strategies = dict(strategies or {})
    for role in strategies:
        if role == "E":
            if not protocol.supports_eve:
                raise ConfigurationError(f"protocol {protocol.name!r} has no eavesdropper support")
        elif role not in protocol.strategies:
            raise ConfigurationError(f"protocol {protocol.name!r} has no role {role!r}")
    built = {}
    for role, table in protocol.strategies.items():
        if role == "E":
            continue
        name = strategies.get(role, "honest")
        if name not in table:
            raise ConfigurationError(f"no strategy {name!r} for role {role} of {protocol.name!r}; choose from {sorted(table)}")
        built[role] = (name, table[name])
    session = Session(session_id or f"{protocol.name}-{seed:016x}", protocol.schedule(cfg), seed,
                      keep_views=cfg.get("keep_views", False))
    if "E" in strategies:
        eve_table = protocol.strategies.get("E", {})
        name = strategies["E"]
        if name not in eve_table:
            raise ConfigurationError(f"no eavesdropper strategy {name!r}; choose from {sorted(eve_table)}")
        session.eve = eve_table[name](session.rng("E"), cfg)
    parties = {role: factory for role, (name, factory) in built.items()}
    try:
        outcome = protocol.driver(session, cfg, parties)
    except Aborted as exc:
        outcome = Outcome(False, exc.reason, exc.by)
    except (ParameterError, ValueError, IndexError, KeyError) as exc:
        # a message altered in transit may be malformed; honest parties reject it
        if not any(r[1] == "E" for r in session._raw):
            raise
        outcome = Outcome(False, "malformed-message", None, {"error": str(exc)})
    return outcome, session
