"""Learning noisy parity distributions through an LPN solver.

For a guess j, a sample x' ~ D has bit j re-randomized; the label is -1 iff
the bit was flipped.  When j is in J the result is an LPN stream for chi_J
(times the sign of D) with D's noise rate; otherwise the labels carry no
information.  Each solver answer becomes a candidate via parity-from-queries,
and the unknown-noise search certifies one of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..config import Constants, DEFAULT_CONSTANTS
from ..dist import LabeledSampleBatch
from ..errors import NoCandidate
from ..fourier import CandidateSearch, Source, estimate_candidates_unknown_noise
from ..rng import Rng
from .lpn import (
    LpnInstance,
    bruteforce_solver,
    find_parity_with_queries,
    lpn_sample_size,
    parity_correlations,
    parity_oracle,
    query_trials,
)

LpnSolver = Callable[[LpnInstance, Rng], Optional[int]]
# (source, rng) -> (J, normalized coefficient), or None on a miss
LpdnSolver = Callable[[Source, Rng], Optional[tuple[int, float]]]


@dataclass
class LpdnResult:
    J: int
    c: float
    candidates: list[int]
    search: CandidateSearch
    log: list[dict] = field(default_factory=list)

    def __iter__(self):
        return iter((self.J, self.c))


class _SharedBase:
    """Fresh D samples drawn once and extended on demand.

    The n per-coordinate LPN streams reuse these points with independent bit
    flips; each stream is still exactly distributed, which is all the union
    bound over coordinates needs.
    """

    def __init__(self, source: Source, rng: Rng):
        self.source = source
        self.rng = rng
        self.bits = np.zeros((0, 0), dtype=np.uint8)
        self._draws = 0

    def head(self, m: int) -> np.ndarray:
        if self.bits.shape[0] < m:
            extra = self.source(self.rng.fork(self._draws), m - self.bits.shape[0]).bits
            self._draws += 1
            self.bits = extra if self.bits.size == 0 else np.vstack([self.bits, extra])
        return self.bits[:m]


def flip_stream(base: _SharedBase, n: int, j: int) -> Callable[[Rng, int], LabeledSampleBatch]:
    def draw(rng: Rng, m: int) -> LabeledSampleBatch:
        x = base.head(m).copy()
        flip = rng.gen.random(m) < 0.5
        x[flip, j] ^= 1
        y = np.where(flip, -1, 1).astype(np.int8)
        return LabeledSampleBatch(x, n, y)

    return draw


def reduce_lpdn_to_lpn(
    source: Source,
    n: int,
    k: int,
    lpn_solver: LpnSolver,
    eps: float,
    rng: Rng,
    noise_bound: float = 0.0,
    delta: float = 0.01,
    constants: Constants = DEFAULT_CONSTANTS,
    search_gap_floor: float | None = None,
    max_round_samples: int = 4_000_000,
) -> LpdnResult:
    """Learn a noisy parity distribution: its relevant set and normalized coefficient.

    ``noise_bound`` is the rate the LPN solver is told to tolerate; the final
    coefficient search does not need it.  Raises NoCandidate when no guess j
    yields a parity or no candidate certifies.
    """
    base = _SharedBase(source, rng.fork(0))
    trials = query_trials(n, 0.0, delta, constants.queries)
    candidates: list[int] = []
    log = []
    for j in range(n):
        inst = LpnInstance(n, k, noise_bound, flip_stream(base, n, j))
        A = lpn_solver(inst, rng.fork(1).fork(j))
        if A is None:
            continue
        # the brute-force hypothesis is +-chi_A; recover its set through queries
        cand = find_parity_with_queries(parity_oracle(A), n, rng.fork(2).fork(j), trials)
        log.append({"j": j, "hypothesis": A, "candidate": cand})
        if cand not in candidates:
            candidates.append(cand)
    if not candidates:
        raise NoCandidate("no coordinate guess produced a parity")
    floor = search_gap_floor if search_gap_floor is not None else 2.0 ** -40
    search = estimate_candidates_unknown_noise(
        source, candidates, eps, delta, rng.fork(3), constants.search,
        min_gap=floor, max_round_samples=max_round_samples,
    )
    c = next(e.c_hat for e in search.estimates if e.A == search.J)
    return LpdnResult(search.J, c, candidates, search, log)


def lpdn_via_lpn(
    n: int,
    k: int,
    gap: float,
    constants: Constants = DEFAULT_CONSTANTS,
    delta: float = 0.01,
    coefficient_eps: float = 1.0 / 3.0,
) -> LpdnSolver:
    """The full chain: coordinate guesses, brute-force LPN, unknown-noise certification.

    Promises |c(J)| >= gap.  The certification search stops a little below
    that gap, so promise violations cost a bounded number of samples and end
    in a miss (None) instead of an exhaustive search.
    """
    eta = (1.0 - gap) / 2.0
    solver = bruteforce_solver(constants.lpn, delta)

    def solve(source: Source, rng: Rng):
        try:
            res = reduce_lpdn_to_lpn(
                source, n, k, solver, coefficient_eps, rng, noise_bound=eta, delta=delta,
                constants=constants, search_gap_floor=gap / 4,
            )
        except NoCandidate:
            return None
        return res.J, res.c

    return solve


def scan_lpdn_solver(n: int, k: int, gap: float, delta: float, C: float) -> LpdnSolver:
    """Direct scan of all |A| <= k coefficients; a fast stand-in for the LPN chain."""

    def solve(source: Source, rng: Rng):
        m = lpn_sample_size(n, k, (1 - gap) / 2, delta, C)
        batch = source(rng, m)
        masks, sums = parity_correlations(batch.bits, np.ones(m, dtype=np.int8), k)
        sums[0] = 0  # c(empty) = 1 always
        best = int(np.argmax(np.abs(sums)))
        if abs(sums[best]) > m * gap / 2:
            return masks[best], float(sums[best]) / m
        return None

    return solve
