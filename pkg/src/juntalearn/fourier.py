"""Fourier-side estimators over the hypercube.

All accuracies here are in normalized units, i.e. on c(A) = E_D[chi_A] rather
than on D^(A) = 2^-d c(A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .boolcube import chi_batch
from .dist import DensePmf, SampleBatch, bias_spectrum, empirical_pmf
from .errors import ContractError, NoCandidate
from .rng import Rng
from .tester import _ceil

GAP_FLOOR = 2.0 ** -40

Source = Callable[[Rng, int], SampleBatch]


@dataclass(frozen=True)
class CoefficientEstimate:
    A: int
    c_hat: float
    half_width: float


@dataclass
class NoiseSearchState:
    gap: float = 0.5
    round: int = 0

    @property
    def bar_eta(self) -> float:
        return (1.0 - self.gap) / 2.0

    def advance(self) -> None:
        self.gap /= 2.0
        self.round += 1


def fourier_samples(d: int, eps: float, delta: float, C: float) -> int:
    """Samples for sup-norm accuracy eps on all 2^d normalized coefficients."""
    return _ceil(C * eps ** -2 * (d + math.log(1 / delta)))


def single_coefficient_samples(eps: float, delta: float, C: float) -> int:
    return _ceil(C * eps ** -2 * math.log(1 / delta))


def learn_fourier_coefficients(
    batch: SampleBatch, eps: float, delta: float, C: float, strict: bool = True
) -> DensePmf:
    """Pmf Q whose normalized spectrum is within eps of the truth in sup norm.

    The empirical histogram already has the empirical Fourier estimates as its
    spectrum and is a valid pmf, so it is returned directly.
    """
    if strict:
        need = fourier_samples(batch.n, eps, delta, C)
        if batch.m < need:
            raise ContractError(f"Fourier learner needs {need} samples, got {batch.m}")
    return empirical_pmf(batch)


def sup_bias_distance(p: DensePmf, q: DensePmf) -> float:
    return float(np.abs(bias_spectrum(p).c - bias_spectrum(q).c).max())


def estimate_single_coefficient(
    batch: SampleBatch, J: int, eps: float, delta: float, C: float, strict: bool = True
) -> CoefficientEstimate:
    """c_hat = (1/m) sum chi_J(x_i); within eps of c_D(J) w.p. 1 - delta."""
    if strict:
        need = single_coefficient_samples(eps, delta, C)
        if batch.m < need:
            raise ContractError(f"coefficient estimate needs {need} samples, got {batch.m}")
    if batch.m == 0:
        raise ContractError("empty batch")
    c_hat = float(chi_batch(J, batch.bits).mean(dtype=np.float64))
    return CoefficientEstimate(J, c_hat, eps)


def candidate_biases(bits: np.ndarray, candidates: Sequence[int]) -> np.ndarray:
    return np.array([chi_batch(J, bits).mean(dtype=np.float64) for J in candidates])


@dataclass
class CandidateSearch:
    J: int
    estimates: list[CoefficientEstimate]
    state: NoiseSearchState
    samples: int = 0
    history: list[dict] = field(default_factory=list)

    def __iter__(self):
        # allows ``J, estimates = estimate_candidates_unknown_noise(...)``
        return iter((self.J, self.estimates))


def estimate_candidates_unknown_noise(
    source: Source,
    candidates: Sequence[int],
    eps: float,
    delta: float,
    rng: Rng,
    C: float,
    min_gap: float = GAP_FLOOR,
    max_round_samples: int = 4_000_000,
) -> CandidateSearch:
    """Find the relevant set among ``candidates`` without knowing the noise rate.

    Searches over the noise guess by halving the gap 1 - 2 bar_eta, drawing a
    fresh batch of C s eps^-2 gap^-2 ln(s/delta) samples per round, and halts
    once some | |y_i| - eps gap | >= gap.  Raises NoCandidate when the gap
    falls below ``min_gap`` or a round would exceed ``max_round_samples``.
    """
    cands = list(dict.fromkeys(candidates))
    if not cands:
        raise NoCandidate("empty candidate list")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    s = len(cands)
    state = NoiseSearchState()
    used = 0
    history = []
    while state.gap >= min_gap:
        m = _ceil(C * s * eps ** -2 * state.gap ** -2 * math.log(max(s, 1) / delta))
        m = max(m, 1)
        if m > max_round_samples:
            break
        batch = source(rng.fork(state.round), m)
        used += m
        y = candidate_biases(batch.bits, cands)
        history.append({"round": state.round, "gap": state.gap, "m": m, "y": y.tolist()})
        if np.any(np.abs(np.abs(y) - eps * state.gap) >= state.gap):
            above = np.flatnonzero(np.abs(y) > eps * state.gap)
            best = above[np.argmax(np.abs(y[above]))]
            ests = [CoefficientEstimate(J, float(v), eps * state.gap) for J, v in zip(cands, y)]
            return CandidateSearch(cands[best], ests, state, used, history)
        state.advance()
    raise NoCandidate(f"no candidate cleared the search (gap={state.gap:.3g}, samples={used})")


def heavy_subsets(spectrum: np.ndarray, threshold: float) -> list[int]:
    """Local subset masks A with |c(A)| > threshold (strict), A nonempty."""
    return [A for A in range(1, spectrum.size) if abs(spectrum[A]) > threshold]
