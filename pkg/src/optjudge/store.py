"""Durable persistence: append-only event log plus content-addressed blobs.

On-disk layout (stable format):

    <data_dir>/events.log       one JSON record per line:
                                {"seq": n, "ts": ms, "kind": "...",
                                 "payload": {...}, "check": "<sha256>"}
                                where check covers the canonical JSON of
                                {seq, ts, kind, payload}
    <data_dir>/blobs/ab/abcd…   blob contents, addressed by sha256 hex
    <data_dir>/.lock            single-writer advisory lock

Large byte payloads (test inputs, submission payloads, captured stdout) live
in the blob store and are referenced from events by hash.  Every append is
flushed before it returns; replaying the log rebuilds the full state.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .types import (
    BlobIntegrityError,
    CorruptLog,
    DataDirLocked,
    SchemaViolation,
    StorageFull,
    ValidationError,
)

EVENT_KINDS = {
    "PROBLEM_CREATED",
    "TEST_ADDED",
    "SUBMISSION_RECEIVED",
    "JOB_DONE",
    "REPORT_EMITTED",
    "BEST_KNOWN_CHANGED",
    "FINALIZED",
}


@dataclass(frozen=True)
class Event:
    seq: int
    ts: int  # UTC milliseconds
    kind: str
    payload: dict


def _canonical(seq: int, ts: int, kind: str, payload: dict) -> bytes:
    doc = {"seq": seq, "ts": ts, "kind": kind, "payload": payload}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def _checksum(seq: int, ts: int, kind: str, payload: dict) -> str:
    return hashlib.sha256(_canonical(seq, ts, kind, payload)).hexdigest()


class BlobStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, digest: str) -> Path:
        return self.root / digest[:2] / digest

    def put(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        path = self._path(digest)
        if path.exists():  # identical blobs stored once
            return digest
        path.parent.mkdir(parents=True, exist_ok=True)
        # unique temp per call: concurrent writers of the same content must
        # not share a temp name, the last rename simply wins
        tmp = path.parent / f".{digest}.{uuid.uuid4().hex}.tmp"
        tmp.write_bytes(data)
        tmp.replace(path)
        return digest

    def get(self, digest: str) -> bytes:
        try:
            data = self._path(digest).read_bytes()
        except OSError as e:
            raise BlobIntegrityError(f"blob {digest} unreadable: {e}")
        if hashlib.sha256(data).hexdigest() != digest:
            raise BlobIntegrityError(f"blob {digest} fails hash verification")
        return data


class Store:
    """Single-writer event log.  Callers serialize append() themselves."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        try:
            # one level only: a missing parent is a misconfiguration, not a
            # directory tree to conjure up
            self.data_dir.mkdir(exist_ok=True)
        except FileNotFoundError:
            raise ValidationError(f"data dir parent does not exist: {self.data_dir}") from None
        self.blobs = BlobStore(self.data_dir / "blobs")
        self.log_path = self.data_dir / "events.log"
        self._lock_fd = os.open(self.data_dir / ".lock", os.O_CREAT | os.O_RDWR, 0o644)
        try:
            fcntl.flock(self._lock_fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            os.close(self._lock_fd)
            raise DataDirLocked(f"data dir already served: {self.data_dir}")
        self._fd = os.open(self.log_path, os.O_CREAT | os.O_WRONLY | os.O_APPEND, 0o644)
        self.last_seq = self._recover_tail()

    def close(self):
        for fd in (self._fd, self._lock_fd):
            try:
                os.close(fd)
            except OSError:
                pass

    def _recover_tail(self) -> int:
        """Scan the log; truncate a torn final record left by a crash."""
        last_seq = 0
        good_end = 0
        raw = self.log_path.read_bytes()
        pos = 0
        while pos < len(raw):
            nl = raw.find(b"\n", pos)
            if nl == -1:
                break  # partial tail, no newline
            line = raw[pos:nl]
            try:
                ev = self._decode_line(line, last_seq + 1)
            except CorruptLog:
                if nl == len(raw) - 1:
                    break  # torn final record
                raise
            last_seq = ev.seq
            good_end = nl + 1
            pos = nl + 1
        if good_end != len(raw):
            os.truncate(self.log_path, good_end)
        return last_seq

    @staticmethod
    def _decode_line(line: bytes, expect_seq: int) -> Event:
        try:
            doc = json.loads(line)
            seq, ts, kind, payload, check = (
                doc["seq"],
                doc["ts"],
                doc["kind"],
                doc["payload"],
                doc["check"],
            )
        except (json.JSONDecodeError, KeyError, TypeError):
            raise CorruptLog(
                f"unreadable record after seq {expect_seq - 1}", expect_seq - 1
            ) from None
        if check != _checksum(seq, ts, kind, payload):
            raise CorruptLog(f"checksum mismatch at seq {seq}", expect_seq - 1)
        if seq != expect_seq:
            raise CorruptLog(f"sequence gap: expected {expect_seq}, got {seq}", expect_seq - 1)
        return Event(seq, ts, kind, payload)

    def append(self, ts: int, kind: str, payload: dict) -> int:
        if kind not in EVENT_KINDS:
            raise SchemaViolation(f"unknown event kind {kind}")
        try:
            json.dumps(payload)
        except (TypeError, ValueError) as e:
            raise SchemaViolation(f"payload not JSON-serializable: {e}")
        seq = self.last_seq + 1
        check = _checksum(seq, ts, kind, payload)
        doc = {"seq": seq, "ts": ts, "kind": kind, "payload": payload, "check": check}
        line = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode() + b"\n"
        try:
            os.write(self._fd, line)
            os.fdatasync(self._fd)  # durable before return
        except OSError as e:
            raise StorageFull(f"append failed: {e}")
        self.last_seq = seq
        return seq

    def replay(self, from_seq: int = 1) -> Iterator[Event]:
        """Stream events in order; raises CorruptLog on a damaged record."""
        expect = 1
        try:
            with open(self.log_path, "rb") as f:
                for line in f:
                    if not line.endswith(b"\n"):
                        raise CorruptLog(f"truncated record after seq {expect - 1}", expect - 1)
                    ev = self._decode_line(line.rstrip(b"\n"), expect)
                    expect += 1
                    if ev.seq >= from_seq:
                        yield ev
        except FileNotFoundError:
            return

    def snapshot_state(self):
        """Materialize the full state from the log (import here avoids a cycle)."""
        from .state import JudgeState

        state = JudgeState()
        for ev in self.replay():
            state.apply(ev)
        return state
