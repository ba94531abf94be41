"""Solving LPN with a junta-distribution learner.

Keeping x exactly when y = +1 turns an LPN stream for chi_S with noise eta
into the distribution (1 - 2 eta) P + 2 eta U, where P is uniform on
{chi_S = +1}.  Its pmf is 2^-n (1 + (1 - 2 eta) chi_S(x)), so a learned
evaluator thresholded at 2^-n gives query access to something close to chi_S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..boolcube import chi_batch, coords_from_mask
from ..config import Constants, DEFAULT_CONSTANTS
from ..dist import DensePmf, JuntaDistribution, SampleBatch, pmf_from_bias
from ..errors import SearchFloorReached
from ..fourier import NoiseSearchState, Source
from ..learner import LearnerConfig, learn_junta
from ..rng import Rng
from ..tester import _ceil
from .lpn import LpnInstance, find_parity_with_queries, query_trials

# (source, n, k, eps, rng) -> learned junta, used as an evaluator
LjdLearner = Callable[[Source, int, int, float, Rng], JuntaDistribution]


@dataclass
class FilteredSource:
    """Rejection filter over an LPN stream; counts the labeled samples it consumes."""

    inst: LpnInstance
    consumed: int = 0

    def __call__(self, rng: Rng, m: int) -> SampleBatch:
        n = self.inst.n
        parts, have, i = [], 0, 0
        while have < m:
            want = max(16, int(1.1 * 2 * (m - have)) + 16)
            lb = self.inst.draw(rng.fork(i), want)
            self.consumed += want
            kept = lb.bits[lb.labels == 1]
            parts.append(kept)
            have += kept.shape[0]
            i += 1
        bits = np.vstack(parts)[:m] if parts else np.zeros((0, n), dtype=np.uint8)
        return SampleBatch(bits, n)


def filtered_mixture(n: int, S, eta: float) -> JuntaDistribution:
    """Exact law of the accepted samples."""
    S = tuple(sorted(S))
    if not S:
        return JuntaDistribution.uniform(n)
    c = np.zeros(1 << len(S))
    c[0] = 1.0
    c[-1] = 1.0 - 2.0 * eta
    return JuntaDistribution(n, S, DensePmf(pmf_from_bias(c)))


def junta_ljd_learner(constants: Constants = DEFAULT_CONSTANTS, strict: bool = True) -> LjdLearner:
    """learn_junta on a fresh batch of its own budget size."""

    def learn(source: Source, n: int, k: int, eps: float, rng: Rng) -> JuntaDistribution:
        cfg = LearnerConfig(n, k, eps, constants, strict=strict)
        Q, _ = learn_junta(source(rng, cfg.sample_budget), cfg)
        return Q

    return learn


def rounded_evaluator(F: JuntaDistribution):
    """f(x) = +1 iff 2^n F(x) >= 1, the midpoint between the two levels of the filtered pmf."""

    def f(bits: np.ndarray) -> np.ndarray:
        return np.where(F.ratio_to_uniform(bits) >= 1.0, 1, -1).astype(np.int8)

    return f


def certification_statistic(S: int, batch) -> float:
    """I_S = mean chi_S(x) y over labeled samples."""
    return float((chi_batch(S, batch.bits).astype(np.float64) * batch.labels).mean())


def cert_samples(gap: float, delta: float, C: float) -> int:
    return _ceil(C * math.log(1.0 / delta) / gap ** 2)


@dataclass
class LpnToLjdResult:
    S: int
    gap: float
    rounds: list[dict] = field(default_factory=list)
    lpn_samples: int = 0


def reduce_lpn_to_ljd(
    inst: LpnInstance,
    ljd_learner: LjdLearner,
    eps: float,
    rng: Rng,
    constants: Constants = DEFAULT_CONSTANTS,
    delta: float = 0.01,
    min_gap: float = 2.0 ** -8,
    max_learner_eps_floor: float = 1e-4,
) -> LpnToLjdResult:
    """Recover the LPN secret S, searching over the noise guess by halving 1 - 2 bar_eta.

    Each round learns the filtered distribution at accuracy eps * gap, rounds
    the evaluator to a sign function, extracts a candidate S~ by queries, and
    certifies S~ or the empty set when I > 2 gap on fresh labeled samples.
    Raises SearchFloorReached when the gap falls below ``min_gap``.
    """
    n, k = inst.n, inst.k
    filt = FilteredSource(inst)
    state = NoiseSearchState()
    rounds = []
    certify_used = 0
    trials = query_trials(n, min(2 * eps, 0.2), delta, constants.queries)
    while state.gap >= min_gap and eps * state.gap >= max_learner_eps_floor:
        r = state.round
        gap = state.gap
        F = ljd_learner(filt, n, k, eps * gap, rng.fork(r).fork(0))
        S_tilde = find_parity_with_queries(rounded_evaluator(F), n, rng.fork(r).fork(1), trials)
        m_cert = cert_samples(gap, delta, constants.cert)
        lb = inst.draw(rng.fork(r).fork(2), m_cert)
        certify_used += m_cert
        record = {
            "round": r,
            "gap": gap,
            "bar_eta": state.bar_eta,
            "relevant": list(F.relevant),
            "candidate": S_tilde,
            "m_cert": m_cert,
            "I": {},
            "certified": None,
        }
        for cand in dict.fromkeys((S_tilde, 0)):
            I = certification_statistic(cand, lb)
            record["I"][cand] = I
            if record["certified"] is None and I > 2.0 * gap:
                record["certified"] = cand
        rounds.append(record)
        if record["certified"] is not None:
            return LpnToLjdResult(record["certified"], gap, rounds, filt.consumed + certify_used)
        state.advance()
    raise SearchFloorReached(f"no certification down to gap {state.gap:.3g}")


def transcript(res: LpnToLjdResult) -> dict:
    one = lambda A: [c + 1 for c in coords_from_mask(A)]  # noqa: E731
    return {
        "S": one(res.S),
        "gap": res.gap,
        "lpn_samples": res.lpn_samples,
        "rounds": [
            {
                "round": r["round"],
                "gap": r["gap"],
                "bar_eta": r["bar_eta"],
                "relevant": [c + 1 for c in r["relevant"]],
                "candidate": one(r["candidate"]),
                "m_cert": r["m_cert"],
                "I": {",".join(map(str, one(A))) or "-": v for A, v in r["I"].items()},
                "certified": None if r["certified"] is None else one(r["certified"]),
            }
            for r in res.rounds
        ],
    }
