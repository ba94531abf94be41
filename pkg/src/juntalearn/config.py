"""Explicit constants behind every O(.) sample bound.

Library functions take these as arguments; the defaults come from the shipped
``constants.json`` (written by ``juntalearn calibrate``) and can be replaced
with a file passed via ``--config`` or the ``JUNTALEARN_CONFIG`` variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path

CONFIG_ENV = "JUNTALEARN_CONFIG"


@dataclass(frozen=True)
class Constants:
    tester: float = 4.0  # m = C eps^-2 (s + ln 1/delta)
    fourier: float = 1.0  # m = C eps^-2 (d + ln 1/delta); single coefficient: C eps^-2 ln 1/delta
    learner: float = 8.0  # m = C (k/eps^2)(2^k + ln n)
    rounds: float = 4.0  # FindHeavyFourier repetitions: C k 2^(2k)
    search: float = 1.0  # per-round m in the unknown-noise candidate search
    lpn: float = 8.0  # brute-force LPN: m = C ln(#subsets/delta) / gap^2
    queries: float = 4.0  # votes per coordinate: C ln(n/delta) / (1-4 eps)^2
    cert: float = 8.0  # certification: m = C ln(1/delta) / gap^2

    def with_updates(self, **kw) -> "Constants":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Constants":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


def _shipped() -> dict:
    try:
        text = resources.files("juntalearn").joinpath("constants.json").read_text()
    except FileNotFoundError:
        return {}
    return json.loads(text).get("constants", {})


def load_constants(path: str | os.PathLike | None = None) -> Constants:
    """Shipped defaults, overridden by ``path`` or $JUNTALEARN_CONFIG when given."""
    data = _shipped()
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        doc = json.loads(Path(path).read_text())
        data.update(doc.get("constants", doc))
    return Constants.from_dict(data)


DEFAULT_CONSTANTS = Constants.from_dict(_shipped())
