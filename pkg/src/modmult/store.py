"""Append-only JSONL certificate store with a single-writer lock."""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator

import mpmath

from .errors import DomainError, LockHeld, ReplayMismatch

__all__ = ["CertificateRecord", "Store", "register_kind", "replay_record"]


@dataclass
class CertificateRecord:
    """One self-contained result: ``inputs`` and ``bits`` re-derive ``verdict``."""

    kind: str
    inputs: dict
    result: dict
    verdict: object
    bits: int
    replay: list = field(default_factory=list)
    created: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "CertificateRecord":
        return cls(**json.loads(line))


# kind -> callable(inputs, bits) -> (result, verdict)
_KINDS: dict[str, Callable] = {}


def register_kind(kind: str):
    def deco(fn):
        def run(inputs, bits):
            with mpmath.workprec(bits + 32):
                return fn(inputs, bits)
        _KINDS[kind] = run
        return fn
    return deco


def _normalize(v):
    return json.loads(json.dumps(v, sort_keys=True))


def replay_record(rec: CertificateRecord, bits: int | None = None) -> object:
    """Re-run a record (default: doubled precision); ReplayMismatch on a different verdict."""
    if rec.kind not in _KINDS:
        from . import cli  # noqa: F401  registers the command kinds
    if rec.kind not in _KINDS:
        raise DomainError(f"no replay rule for kind {rec.kind!r}")
    bits = bits or 2 * rec.bits
    _, verdict = _KINDS[rec.kind](rec.inputs, bits)
    if _normalize(verdict) != _normalize(rec.verdict):
        raise ReplayMismatch(f"{rec.kind}: stored {rec.verdict!r}, replay gave {verdict!r}")
    return verdict


class Store:
    """JSONL file; writers hold ``<path>.lock`` for the lifetime of the context."""

    def __init__(self, path: str):
        self.path = path
        self.lock_path = path + ".lock"
        self._locked = False

    def __enter__(self) -> "Store":
        try:
            fd = os.open(self.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as exc:
            raise LockHeld(f"{self.lock_path} exists: another writer holds the store") from exc
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        self._locked = True
        return self

    def __exit__(self, *exc):
        if self._locked:
            os.unlink(self.lock_path)
            self._locked = False

    def append(self, rec: CertificateRecord) -> None:
        if not self._locked:
            raise LockHeld("append needs the writer lock; use the store as a context manager")
        if not rec.created:
            rec.created = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        with open(self.path, "a") as fh:
            fh.write(rec.to_json() + "\n")

    def records(self) -> Iterator[CertificateRecord]:
        if not os.path.exists(self.path):
            return
        with open(self.path) as fh:
            for line in fh:
                if line.strip():
                    yield CertificateRecord.from_json(line)
