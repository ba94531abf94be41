"""High-confidence tolerant identity tester.

The statistic is the L1 distance between the empirical histogram and the
reference pmf; the test answers Close iff it is at most alpha + eps/2.  The
sample bound m = C eps^-2 (s + ln 1/delta) pays only additively for delta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dist import DensePmf, SampleBatch, empirical_counts
from .errors import ContractError, DimensionError


class Verdict(str, enum.Enum):
    CLOSE = "close"
    FAR = "far"


@dataclass(frozen=True)
class TesterConfig:
    alpha: float
    eps: float
    delta: float
    sample_constant: float

    __test__ = False

    def __post_init__(self):
        if self.alpha < 0 or self.eps <= 0:
            raise ValueError("need alpha >= 0 and eps > 0")
        if self.alpha + self.eps > 2:
            raise ValueError("alpha + eps exceeds the largest possible L1 distance")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.sample_constant <= 0:
            raise ValueError("sample constant must be positive")

    @property
    def threshold(self) -> float:
        return self.alpha + self.eps / 2


@dataclass(frozen=True)
class TestVerdict:
    verdict: Verdict
    statistic: float
    threshold: float

    __test__ = False  # not a pytest class

    @property
    def close(self) -> bool:
        return self.verdict is Verdict.CLOSE


def _ceil(x: float) -> int:
    # guard against ln/exp round-off pushing an exact integer up by one
    return math.ceil(round(x, 9))


def required_samples(cfg: TesterConfig, s: int) -> int:
    if s < 1:
        raise ValueError("support size must be >= 1")
    return _ceil(cfg.sample_constant * cfg.eps ** -2 * (s + math.log(1 / cfg.delta)))


def l1_statistic(counts: np.ndarray, m: int, reference: np.ndarray) -> float:
    """S_P(X) = sum_i |X_i/m - P(i)|."""
    return float(np.abs(counts / m - reference).sum())


def decide(statistic: float, cfg: TesterConfig) -> TestVerdict:
    v = Verdict.CLOSE if statistic <= cfg.threshold else Verdict.FAR
    return TestVerdict(v, statistic, cfg.threshold)


def tolerant_identity_test(
    reference: DensePmf, batch: SampleBatch, cfg: TesterConfig, strict: bool = True
) -> TestVerdict:
    """(alpha, alpha + eps)-tolerant identity test of ``batch`` against ``reference``.

    With ``strict`` (the default) a batch smaller than the required sample
    count is a ContractError.
    """
    if batch.n != reference.d:
        raise DimensionError(f"samples live in dimension {batch.n}, reference in {reference.d}")
    s = reference.probs.size
    if strict:
        need = required_samples(cfg, s)
        if batch.m < need:
            raise ContractError(f"tester needs {need} samples, got {batch.m}")
    if batch.m == 0:
        raise ContractError("tester got an empty batch")
    stat = l1_statistic(empirical_counts(batch), batch.m, reference.probs)
    return decide(stat, cfg)
