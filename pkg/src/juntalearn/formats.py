"""Distribution spec files (JSON) and sample files (0/1 lines, optional tab + label).

Coordinates are 1-based on disk and 0-based in memory.  Character j of a
sample line is coordinate j + 1; '1' means x_j = -1.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .dist import (
    DensePmf,
    Distribution,
    JuntaDistribution,
    LabeledSampleBatch,
    NoisyParityDistribution,
    SampleBatch,
)


def _to_zero_based(coords, n: int) -> tuple[int, ...]:
    out = tuple(sorted(int(c) - 1 for c in coords))
    if out and (out[0] < 0 or out[-1] >= n):
        raise ValueError(f"coordinates must lie in 1..{n}")
    return out


def dist_to_doc(d: Distribution, truth: dict | None = None) -> dict[str, Any]:
    if isinstance(d, NoisyParityDistribution):
        doc = {"type": "noisy_parity", "n": d.n, "J": [c + 1 for c in d.J], "sign": d.sign, "eta": d.eta}
    elif isinstance(d, JuntaDistribution):
        doc = {"type": "junta", "n": d.n, "relevant": [c + 1 for c in d.relevant], "core": d.core.probs.tolist()}
    elif isinstance(d, DensePmf):
        doc = {"type": "junta", "n": d.d, "relevant": list(range(1, d.d + 1)), "core": d.probs.tolist()}
    else:
        raise TypeError(f"not a distribution: {type(d).__name__}")
    if truth is not None:
        doc["truth"] = truth
    return doc


def dist_from_doc(doc: dict[str, Any]) -> Distribution:
    n = int(doc["n"])
    kind = doc.get("type", "junta")
    if kind == "noisy_parity":
        return NoisyParityDistribution(n, _to_zero_based(doc["J"], n), int(doc.get("sign", 1)), float(doc["eta"]))
    if kind in ("junta", "uniform"):
        rel = _to_zero_based(doc.get("relevant", []), n)
        core = doc.get("core")
        if core is None:
            if rel:
                raise ValueError("a junta spec with relevant coordinates needs a core")
            core = [1.0]
        probs = np.asarray(core, dtype=np.float64)
        if probs.size != 1 << len(rel):
            raise ValueError(f"core needs {1 << len(rel)} entries, got {probs.size}")
        return JuntaDistribution(n, rel, DensePmf(probs))
    raise ValueError(f"unknown distribution type {kind!r}")


def write_dist(path, d: Distribution, truth: dict | None = None) -> None:
    Path(path).write_text(json.dumps(dist_to_doc(d, truth), indent=2) + "\n")


def read_dist(path) -> Distribution:
    return dist_from_doc(json.loads(Path(path).read_text()))


def write_samples(path, batch: SampleBatch) -> None:
    rows = ["".join("01"[b] for b in row) for row in batch.bits.tolist()]
    if isinstance(batch, LabeledSampleBatch):
        rows = [f"{r}\t{int(y):+d}" for r, y in zip(rows, batch.labels.tolist())]
    Path(path).write_text("".join(r + "\n" for r in rows))


def read_samples(path) -> SampleBatch:
    points, labels = [], []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        point, _, label = line.partition("\t")
        if set(point) - {"0", "1"}:
            raise ValueError(f"line {lineno}: points are strings of 0 and 1")
        points.append([1 if ch == "1" else 0 for ch in point])
        if label:
            labels.append(int(label))
        if points and len(points[-1]) != len(points[0]):
            raise ValueError(f"line {lineno}: inconsistent point length")
    if labels and len(labels) != len(points):
        raise ValueError("either every line or no line carries a label")
    bits = np.array(points, dtype=np.uint8).reshape(len(points), -1)
    if labels:
        return LabeledSampleBatch(bits, bits.shape[1], np.array(labels, dtype=np.int8))
    return SampleBatch(bits)
