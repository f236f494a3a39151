"""Run configuration, stored as TOML."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace

import toml

from .balls import PrecisionCtx
from .errors import DomainError

__all__ = ["RunConfig", "CONFIG_ENV"]

CONFIG_ENV = "MODMULT_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    bits: int = 128
    tol: float | None = None
    box_cap: int = 50
    cn: float = 1.0
    max_disc: int = 100
    max_order: int = 100
    nmax: int = 5
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        for name in ("bits", "box_cap", "max_disc", "max_order", "nmax", "workers"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be positive")
        if self.bits < 64:
            raise DomainError("bits must be at least 64")
        if not self.cn > 0 or (self.tol is not None and not self.tol > 0):
            raise DomainError("cn and tol must be positive")

    @property
    def ctx(self) -> PrecisionCtx:
        return PrecisionCtx(self.bits, self.tol)

    def with_bits(self, bits: int) -> "RunConfig":
        return replace(self, bits=bits)

    def to_toml(self) -> str:
        return toml.dumps({k: v for k, v in asdict(self).items() if v is not None})

    @classmethod
    def from_toml(cls, text: str) -> "RunConfig":
        data = toml.loads(text)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise DomainError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | None = None, **overrides) -> "RunConfig":
        """Defaults, then the config file (argument or environment), then overrides."""
        path = path or os.environ.get(CONFIG_ENV)
        base = cls()
        if path:
            try:
                with open(path) as fh:
                    base = cls.from_toml(fh.read())
            except OSError as exc:
                raise DomainError(f"cannot read config {path}: {exc}") from exc
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(base, **clean)
