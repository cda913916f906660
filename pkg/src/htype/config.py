"""Run configuration read from flat ``key = value`` files.

Blank lines and lines starting with ``#`` are ignored.  Values are kept as
strings by :func:`read_kv` and converted by :class:`RunConfig`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .heatkernel import QuadratureConfig


def parse_kv(text: str, source: str = "<string>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_kv(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_kv(fh.read(), str(path))


@dataclass(frozen=True)
class RunConfig:
    """Settings of a sweep campaign.

    Tolerance fields mirror :class:`~htype.heatkernel.QuadratureConfig`.
    """

    n: int = 1
    m: int = 1
    t: float = 1.0
    target: str = "kernel"
    d_lo: float = 3.0
    d_hi: float = 8.0
    n_points: int = 200
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 4000
    truncation_safety: float = 1.0
    b1: float = 4.0
    output: str = "-"
    format: str = "csv"

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.t <= 0:
            raise ValueError("t must be positive")
        if self.n_points < 1:
            raise ValueError("n_points must be positive")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        self.quadrature()

    @property
    def dims(self) -> tuple[int, int]:
        return self.n, self.m

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(
            rel_tol=self.rel_tol, abs_tol=self.abs_tol,
            max_subdivisions=self.max_subdivisions,
            truncation_safety=self.truncation_safety, b1=self.b1,
        )

    @classmethod
    def from_mapping(cls, values: dict, base: "RunConfig | None" = None) -> "RunConfig":
        """Build from string or typed values, on top of ``base``.

        Unknown keys raise ``ValueError``; ``None`` values are skipped so
        that unset command line flags do not override file values.
        """
        base = base or cls()
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        changes = {}
        for key, value in values.items():
            if key not in types:
                raise ValueError(f"unknown configuration key {key!r}")
            if value is None:
                continue
            kind = {"int": int, "float": float, "str": str}[types[key]]
            try:
                changes[key] = kind(value)
            except (TypeError, ValueError):
                raise ValueError(f"bad value for {key}: {value!r}") from None
        return dataclasses.replace(base, **changes)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_mapping(read_kv(path))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)
