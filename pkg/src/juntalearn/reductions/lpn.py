"""Learning parity with noise: instances, a brute-force solver, and query-based parity recovery."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..boolcube import chi_batch, coords_from_mask, mask_from_coords, pack_index, unpack_index
from ..dist import LabeledSampleBatch
from ..rng import Rng
from ..tester import _ceil

LabeledSource = Callable[[Rng, int], LabeledSampleBatch]
QueryOracle = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LpnInstance:
    """An LPN stream over {+-1}^n with sparsity bound k.

    ``eta`` is the noise-rate bound the solver may assume (the true rate is
    at most this).
    """

    n: int
    k: int
    eta: float
    source: LabeledSource

    def draw(self, rng: Rng, m: int) -> LabeledSampleBatch:
        return self.source(rng, m)


def planted_lpn(n: int, k: int, secret, eta: float) -> LpnInstance:
    """x uniform, y = chi_S(x) flipped with probability eta."""
    S = tuple(sorted(secret))

    def source(rng: Rng, m: int) -> LabeledSampleBatch:
        bits = rng.bits(m, n)
        y = chi_batch(S, bits)
        flip = rng.gen.random(m) < eta
        y = np.where(flip, -y, y).astype(np.int8)
        return LabeledSampleBatch(bits, n, y)

    return LpnInstance(n, k, eta, source)


def independent_labels(n: int, k: int, eta: float) -> LpnInstance:
    """Labels uniform and independent of x; no parity explains them."""

    def source(rng: Rng, m: int) -> LabeledSampleBatch:
        bits = rng.bits(m, n)
        y = np.where(rng.gen.random(m) < 0.5, 1, -1).astype(np.int8)
        return LabeledSampleBatch(bits, n, y)

    return LpnInstance(n, k, eta, source)


def low_degree_masks(n: int, k: int) -> list[int]:
    """All subsets of size <= k, by degree then lexicographically."""
    out = []
    for j in range(k + 1):
        out.extend(mask_from_coords(c) for c in itertools.combinations(range(n), j))
    return out


def parity_correlations(bits: np.ndarray, labels: np.ndarray, k: int) -> tuple[list[int], np.ndarray]:
    """sum_i chi_A(x_i) y_i for every |A| <= k, in low_degree_masks order."""
    m, n = bits.shape
    # float32 sums of +-1 terms stay exact below 2^24
    ft = np.float32 if m < (1 << 24) else np.float64
    y = labels.astype(ft)
    signs = (1 - 2 * bits.astype(np.int8)).astype(ft)  # (m, n) +-1
    masks = low_degree_masks(n, k)
    sums = [y.sum()]
    if k >= 1:
        yS = signs * y[:, None]
        sums.extend(yS.sum(axis=0))
    if k >= 2:
        gram = yS.T @ signs
        ia, ib = np.triu_indices(n, k=1)
        sums.extend(gram[ia, ib])
    for j in range(3, k + 1):
        for c in itertools.combinations(range(n), j):
            sums.append(float(chi_batch(c, bits).astype(np.float64) @ y))
    return masks, np.rint(np.asarray(sums)).astype(np.int64)


def lpn_sample_size(n: int, k: int, eta: float, delta: float, C: float) -> int:
    """C ln(#candidates / delta) / (1 - 2 eta)^2."""
    count = sum(math.comb(n, j) for j in range(k + 1))
    return _ceil(C * math.log(count / delta) / (1.0 - 2.0 * eta) ** 2)


def lpn_bruteforce_solve(inst: LpnInstance, m: int, rng: Rng) -> Optional[int]:
    """Best-correlated parity of degree <= k, or None if none clears m (1 - 2 eta)/2."""
    batch = inst.draw(rng, m)
    return bruteforce_on_batch(batch, inst.k, inst.eta)


def bruteforce_on_batch(batch: LabeledSampleBatch, k: int, eta: float) -> Optional[int]:
    masks, sums = parity_correlations(batch.bits, batch.labels, k)
    best = int(np.argmax(np.abs(sums)))
    if abs(sums[best]) > batch.m * (1.0 - 2.0 * eta) / 2.0:
        return masks[best]
    return None


def bruteforce_solver(C: float, delta: float) -> Callable[[LpnInstance, Rng], Optional[int]]:
    """Solver with its sample size fixed by the instance's (n, k, eta)."""

    def solve(inst: LpnInstance, rng: Rng) -> Optional[int]:
        return lpn_bruteforce_solve(inst, lpn_sample_size(inst.n, inst.k, inst.eta, delta, C), rng)

    return solve


# -- parity from queries ----------------------------------------------------


def query_trials(n: int, eps: float, delta: float, C: float) -> int:
    if not 0 <= eps < 0.25:
        raise ValueError("closeness must be below 1/4")
    return _ceil(C * math.log(max(n, 2) / delta) / (1.0 - 4.0 * eps) ** 2)


def find_parity_with_queries(f: QueryOracle, n: int, rng: Rng, trials_per_coord: int) -> int:
    """Recover S from query access to f close to chi_S.

    Coordinate l joins the answer when f(w) f(w + e_l) is -1 for a strict
    majority of uniform w.
    """
    t = trials_per_coord
    w = rng.bits(n * t, n)
    flipped = w.copy()
    rows = np.arange(n * t)
    flipped[rows, rows // t] ^= 1
    prod = (np.asarray(f(w)) * np.asarray(f(flipped))).reshape(n, t)
    votes = (prod < 0).sum(axis=1)
    return mask_from_coords(np.flatnonzero(2 * votes > t).tolist())


def parity_oracle(S, sign: int = 1) -> QueryOracle:
    coords = tuple(S) if not isinstance(S, int) else coords_from_mask(S)
    return lambda bits: sign * chi_batch(coords, bits)


def table_oracle(values: np.ndarray) -> QueryOracle:
    """Oracle backed by an explicit table of 2^n signs."""
    values = np.asarray(values)
    return lambda bits: values[pack_index(bits)]


def corrupted_parity_table(n: int, S, rate: float, rng: Rng) -> np.ndarray:
    """chi_S as a table, with each entry flipped independently with probability ``rate``."""
    idx = np.arange(1 << n, dtype=np.int64)
    vals = chi_batch(tuple(S), unpack_index(idx, n)).astype(np.int64)
    flip = rng.gen.random(idx.size) < rate
    return np.where(flip, -vals, vals)
