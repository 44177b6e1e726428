"""Run configuration shared by the CLI commands."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .analysis.dp import BlowupThresholds
from .errors import InvalidSpec
from .funcspace import C0Tolerance


@dataclass
class ToleranceBlock:
    tier: str = "discrete"
    eps_tail: float = 1e-3
    eps_zero: float | None = None
    eps_eq: float | None = None
    lipschitz: float = 1.5
    alpha_hi: float = 0.5
    alpha_lo: float = 0.25
    ratio_hi: float = 10.0
    ratio_lo: float = 2.0

    def c0(self):
        base = 1e-9 if self.tier == "discrete" else 1e-6
        return C0Tolerance(self.eps_tail,
                           base if self.eps_zero is None else self.eps_zero,
                           base if self.eps_eq is None else self.eps_eq)

    def thresholds(self):
        return BlowupThresholds(self.alpha_hi, self.alpha_lo, self.ratio_hi, self.ratio_lo)


@dataclass
class GridBlock:
    R: float = 50.0
    n: int = 2000
    levels: int = 8
    K: int = 5


@dataclass
class CorpusBlock:
    seed: int = 0
    size: int = 64


@dataclass
class RunConfig:
    tolerance: ToleranceBlock = field(default_factory=ToleranceBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    corpus: CorpusBlock = field(default_factory=CorpusBlock)
    io: dict = field(default_factory=dict)

    def __post_init__(self):
        t = self.tolerance
        if t.tier not in ("discrete", "continuum"):
            raise InvalidSpec(f"unknown tier {t.tier!r}")
        if not (t.eps_tail > 0 and t.lipschitz > 0):
            raise InvalidSpec("tolerances must be positive")
        self.tolerance.c0()  # validates eps ordering

    @classmethod
    def from_dict(cls, doc):
        doc = doc or {}
        unknown = set(doc) - {"tolerance", "grid", "corpus", "io"}
        if unknown:
            raise InvalidSpec(f"unknown config blocks: {sorted(unknown)}")

        def block(kind, key):
            raw = doc.get(key) or {}
            names = {f.name for f in dataclasses.fields(kind)}
            bad = set(raw) - names
            if bad:
                raise InvalidSpec(f"unknown keys in {key!r}: {sorted(bad)}")
            return kind(**raw)

        return cls(block(ToleranceBlock, "tolerance"), block(GridBlock, "grid"),
                   block(CorpusBlock, "corpus"), dict(doc.get("io") or {}))

    def to_dict(self):
        return dataclasses.asdict(self)
