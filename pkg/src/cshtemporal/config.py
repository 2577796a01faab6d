"""Run configuration: flat ``key = value`` text, one key per line, ``#`` comments."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

from .dynamics import FORMULATIONS, GROUPINGS, REFORMULATED, GROUP_PRODUCT, Potential
from .spectral import Grid


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _opt_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


def _opt_str(text: str) -> Optional[str]:
    return None if text.strip().lower() in ("", "none") else text.strip()


@dataclass
class RunConfig:
    n: int = 64
    period: float = 16 * math.pi
    s: float = 0.3
    dt: float = 2.0**-6
    t_end: float = 1.0
    potential: tuple[float, ...] = (1.0,)
    seed: int = 0
    amplitude: float = 1.0
    kmax: Optional[float] = None
    formulation: str = REFORMULATED
    grouping: str = GROUP_PRODUCT
    record_every: int = 1
    output: Optional[str] = None
    report: Optional[str] = None

    _PARSERS = {
        "n": int, "period": float, "s": float, "dt": float, "t_end": float, "potential": _floats,
        "seed": int, "amplitude": float, "kmax": _opt_float, "formulation": str.strip,
        "grouping": str.strip, "record_every": int, "output": _opt_str, "report": _opt_str,
    }

    def __post_init__(self):
        self.validate()

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    def validate(self):
        if not self.s > 0:
            raise ConfigError(f"s must be positive, got {self.s}")
        try:
            Grid(self.n, self.period)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ConfigError(f"t_end must be non-negative, got {self.t_end}")
        if self.formulation not in FORMULATIONS:
            raise ConfigError(f"formulation must be one of {FORMULATIONS}")
        if self.grouping not in GROUPINGS:
            raise ConfigError(f"grouping must be one of {GROUPINGS}")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if self.kmax is not None and not self.kmax > 0:
            raise ConfigError("kmax must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        try:
            Potential(tuple(self.potential))
        except ValueError as e:
            raise ConfigError(str(e)) from None

    @property
    def grid(self) -> Grid:
        return Grid(self.n, self.period)

    @property
    def potential_fn(self) -> Potential:
        return Potential(tuple(self.potential))

    def updated(self, **values) -> "RunConfig":
        unknown = set(values) - set(self.keys())
        if unknown:
            raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **values)

    @classmethod
    def parse_value(cls, key: str, text: str):
        if key not in cls._PARSERS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            return cls._PARSERS[key](text)
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {text!r} ({e})") from None

    @classmethod
    def parse(cls, text: str, base: Optional["RunConfig"] = None) -> "RunConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, val = (p.strip() for p in line.split("=", 1))
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            values[key] = cls.parse_value(key, val)
        return (base or cls()).updated(**values)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def dumps(self) -> str:
        lines = []
        for key in self.keys():
            v = getattr(self, key)
            if isinstance(v, tuple):
                v = ", ".join(repr(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{key} = {'none' if v is None else v}")
        return "\n".join(lines) + "\n"

