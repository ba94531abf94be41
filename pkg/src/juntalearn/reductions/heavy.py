"""Heavy Fourier coefficients of a junta through noise injection, and the junta learner built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..boolcube import MAX_DENSE_DIM, F2Matrix, chi_batch, coords_from_mask, mask_from_coords
from ..config import Constants, DEFAULT_CONSTANTS
from ..dist import DensePmf, JuntaDistribution, pmf_from_bias
from ..errors import DimensionError, InvalidPmfError
from ..fourier import Source, single_coefficient_samples
from ..rng import Rng
from ..tester import _ceil
from .lpdn import LpdnSolver, lpdn_via_lpn
from .noise import injected_source, isolates


@dataclass(frozen=True)
class HeavyFourierHit:
    J: int
    z: float
    round: int
    half_width: float = 0.0


@dataclass
class SparseSpectrum:
    """Normalized coefficients on a few subsets; the empty set always maps to 1."""

    entries: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        self.entries = {int(A): float(v) for A, v in self.entries.items()}
        self.entries[0] = 1.0

    @property
    def support(self) -> int:
        """Union L of every mask present."""
        out = 0
        for A in self.entries:
            out |= A
        return out

    def dense(self) -> tuple[tuple[int, ...], np.ndarray]:
        """(L, c) with c indexed by local masks over L."""
        L = coords_from_mask(self.support)
        if len(L) > MAX_DENSE_DIM:
            raise DimensionError(f"spectrum support of size {len(L)} above dense limit")
        c = np.zeros(1 << len(L))
        for A, v in self.entries.items():
            local = 0
            for b, coord in enumerate(L):
                if (A >> coord) & 1:
                    local |= 1 << b
            c[local] = v
        return L, c


def round_to_pmf(Z: SparseSpectrum, n: int) -> JuntaDistribution:
    """Clip the negative part of the function Z describes, then renormalize."""
    L, c = Z.dense()
    f = pmf_from_bias(c)
    f = np.clip(f, 0.0, None)
    total = f.sum()
    if total <= 0:
        raise InvalidPmfError("every cell is non-positive; nothing to renormalize")
    return JuntaDistribution(n, L, DensePmf(f / total))


def heavy_gap(eps: float, k: int) -> float:
    return eps * 2.0 ** (-k / 2)


def find_heavy_fourier(
    source: Source,
    n: int,
    k: int,
    eps: float,
    lpdn_solver: LpdnSolver,
    rng: Rng,
    round_index: int = 0,
    constants: Constants = DEFAULT_CONSTANTS,
) -> Optional[HeavyFourierHit]:
    """One round: random (k+1) x n injection, LPDN solve, clean re-estimate.

    Returns a hit when the re-estimated coefficient clears (2 eps / 3) 2^(-k/2),
    otherwise None.
    """
    A = F2Matrix.random(k + 1, n, rng.fork(0).gen)
    found = lpdn_solver(injected_source(source, A), rng.fork(1))
    if found is None:
        return None
    J = found[0]
    if J == 0:
        return None
    acc = heavy_gap(eps, k) / 3.0
    m = single_coefficient_samples(acc, 2.0 ** (-2 * k), constants.fourier)
    z = float(chi_batch(J, source(rng.fork(2), m).bits).mean(dtype=np.float64))
    if abs(z) >= 2.0 * acc:
        return HeavyFourierHit(J, z, round_index, acc)
    return None


def outer_rounds(k: int, C: float) -> int:
    return _ceil(C * k * 4 ** k)


@dataclass
class LjdResult:
    hypothesis: JuntaDistribution
    spectrum: SparseSpectrum
    hits: list[HeavyFourierHit]
    rounds: int


def reduce_ljd_via_lpdn(
    source: Source,
    n: int,
    k: int,
    eps: float,
    rng: Rng,
    lpdn_solver: LpdnSolver | None = None,
    constants: Constants = DEFAULT_CONSTANTS,
    rounds: int | None = None,
) -> LjdResult:
    """Learn a k-junta from repeated heavy-coefficient rounds.

    The default LPDN solver is the brute-force LPN chain promised the
    heavy-coefficient gap eps 2^(-k/2).
    """
    if lpdn_solver is None:
        lpdn_solver = lpdn_via_lpn(n, k, heavy_gap(eps, k), constants)
    R = outer_rounds(k, constants.rounds) if rounds is None else rounds
    best: dict[int, HeavyFourierHit] = {}
    hits = []
    for r in range(R):
        hit = find_heavy_fourier(source, n, k, eps, lpdn_solver, rng.fork(r), r, constants)
        if hit is None:
            continue
        hits.append(hit)
        prev = best.get(hit.J)
        if prev is None or hit.half_width < prev.half_width:
            best[hit.J] = hit
    Z = SparseSpectrum({J: h.z for J, h in best.items()})
    return LjdResult(round_to_pmf(Z, n), Z, hits, R)


def ljd_transcript(res: LjdResult) -> dict:
    one = lambda A: [c + 1 for c in coords_from_mask(A)]  # noqa: E731
    return {
        "rounds": res.rounds,
        "hits": [{"round": h.round, "J": one(h.J), "z": h.z} for h in res.hits],
        "spectrum": [{"J": one(A), "c": v} for A, v in sorted(res.spectrum.entries.items())],
        "relevant": [c + 1 for c in res.hypothesis.relevant],
    }


# -- the survival event -------------------------------------------------------


def survival_frequency(n: int, k: int, J, J_star, trials: int, rng: Rng) -> float:
    """Fraction of random (k+1) x n matrices that keep J and kill every other subset of J_star."""
    J = J if isinstance(J, int) else mask_from_coords(J)
    J_star = J_star if isinstance(J_star, int) else mask_from_coords(J_star)
    if J & ~J_star:
        raise ValueError("J must lie inside J_star")
    gen = rng.gen
    hits = sum(isolates(F2Matrix.random(k + 1, n, gen), J, J_star) for _ in range(trials))
    return hits / trials


def isolating_matrix(n: int, k: int, J: int, J_star: int, rng: Rng, max_tries: int = 100_000) -> F2Matrix:
    """A random (k+1) x n matrix conditioned on isolating J inside J_star."""
    for _ in range(max_tries):
        A = F2Matrix.random(k + 1, n, rng.gen)
        if isolates(A, J, J_star):
            return A
    raise RuntimeError("no isolating matrix found")


def survival_lower_bound(k: int) -> float:
    return 2.0 ** -(k + 2)

