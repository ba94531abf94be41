"""Seeded trials for the three reduction pipelines; each returns (csv row, transcript)."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .boolcube import mask_from_coords
from .config import Constants, DEFAULT_CONSTANTS
from .dist import NoisyParityDistribution, SampleBatch, junta_l1, random_junta
from .errors import NoCandidate, SearchFloorReached
from .experiments import coords_str, echo_constants, mask_str
from .reductions.filtering import junta_ljd_learner, reduce_lpn_to_ljd, transcript
from .reductions.heavy import heavy_gap, ljd_transcript, reduce_ljd_via_lpdn
from .reductions.lpdn import reduce_lpdn_to_lpn, scan_lpdn_solver
from .reductions.lpn import bruteforce_solver, planted_lpn
from .rng import Rng


@dataclass(frozen=True)
class ReduceSetup:
    n: int = 10
    k: int = 2
    eps: float = 0.1
    eta: float = 0.0
    S: tuple[int, ...] | None = None  # None: k random coordinates per trial
    solver: str = "lpn"
    rounds: int | None = None
    constants: Constants = DEFAULT_CONSTANTS


def _planted_set(opts: ReduceSetup, rng: Rng) -> tuple[int, ...]:
    if opts.S is not None:
        return tuple(sorted(opts.S))
    return tuple(sorted(rng.gen.choice(opts.n, size=opts.k, replace=False).tolist()))


def _base_row(opts: ReduceSetup, seed: int, i: int) -> dict:
    return {"trial": i, "seed_path": f"{seed}/{i}", "n": opts.n, "k": opts.k, "eps": opts.eps, "eta": opts.eta}


def lpn_to_ljd_trial(opts: ReduceSetup, seed: int, i: int):
    t0 = time.perf_counter()
    r = Rng(seed).fork(i)
    S = _planted_set(opts, r.fork(0))
    k = max(opts.k, len(S), 1)
    inst = planted_lpn(opts.n, k, S, opts.eta)
    row = _base_row(opts, seed, i)
    row["S"] = coords_str(S)
    try:
        res = reduce_lpn_to_ljd(inst, junta_ljd_learner(opts.constants), opts.eps, r.fork(1), opts.constants)
        row.update({"S_hat": mask_str(res.S), "success": int(res.S == mask_from_coords(S)), "gap": res.gap,
                    "rounds": len(res.rounds), "lpn_samples": res.lpn_samples,
                    "I_certified": res.rounds[-1]["I"][res.S]})
        trans = transcript(res)
    except SearchFloorReached as e:
        row.update({"S_hat": "fail", "success": 0, "gap": 0.0, "rounds": -1, "lpn_samples": -1,
                    "I_certified": 0.0})
        trans = {"error": str(e)}
    echo_constants(row, opts.constants)
    row["wall_time"] = round(time.perf_counter() - t0, 4)
    trans["trial"] = i
    return row, trans


def ljd_to_lpn_trial(opts: ReduceSetup, seed: int, i: int):
    t0 = time.perf_counter()
    r = Rng(seed).fork(i)
    J = _planted_set(opts, r.fork(0))
    D = random_junta(opts.n, opts.k, r.fork(1), J)

    def source(rr: Rng, m: int) -> SampleBatch:
        return SampleBatch(D.sample(rr, m), opts.n)

    solver = None
    if opts.solver == "scan":
        solver = scan_lpdn_solver(opts.n, opts.k, heavy_gap(opts.eps, opts.k), 0.01, opts.constants.lpn)
    res = reduce_ljd_via_lpdn(source, opts.n, opts.k, opts.eps, r.fork(2), solver, opts.constants, opts.rounds)
    tv = junta_l1(res.hypothesis, D) / 2
    row = _base_row(opts, seed, i)
    row.update({"truth": coords_str(J), "relevant": coords_str(res.hypothesis.relevant), "tv": tv,
                "success": int(tv <= 2 * opts.eps), "rounds": res.rounds, "hits": len(res.hits),
                "distinct_hits": len(res.spectrum.entries) - 1, "solver": opts.solver})
    echo_constants(row, opts.constants)
    row["wall_time"] = round(time.perf_counter() - t0, 4)
    trans = ljd_transcript(res)
    trans["trial"] = i
    trans["truth_biases"] = [{"J": [c + 1 for c in A], "c": v} for A, v in D.nonzero_biases().items() if A]
    return row, trans


def lpdn_to_lpn_trial(opts: ReduceSetup, seed: int, i: int):
    t0 = time.perf_counter()
    r = Rng(seed).fork(i)
    J = _planted_set(opts, r.fork(0))
    sign = 1 if r.fork(1).gen.random() < 0.5 else -1
    D = NoisyParityDistribution(opts.n, J, sign, opts.eta)

    def source(rr: Rng, m: int) -> SampleBatch:
        return SampleBatch(D.sample(rr, m), opts.n)

    row = _base_row(opts, seed, i)
    row.update({"J": coords_str(J), "sign": sign})
    try:
        res = reduce_lpdn_to_lpn(source, opts.n, opts.k, bruteforce_solver(opts.constants.lpn, 0.01), opts.eps,
                                 r.fork(2), noise_bound=opts.eta, constants=opts.constants)
        ok = res.J == mask_from_coords(J) and (res.c > 0) == (sign > 0)
        row.update({"J_hat": mask_str(res.J), "c_hat": res.c, "success": int(ok),
                    "candidates": len(res.candidates), "search_samples": res.search.samples})
        trans = {"candidates": [mask_str(A) for A in res.candidates], "log": [
            {"j": e["j"] + 1, "hypothesis": mask_str(e["hypothesis"]), "candidate": mask_str(e["candidate"])}
            for e in res.log], "search": res.search.history}
    except NoCandidate as e:
        row.update({"J_hat": "fail", "c_hat": 0.0, "success": 0, "candidates": 0, "search_samples": -1})
        trans = {"error": str(e)}
    echo_constants(row, opts.constants)
    row["wall_time"] = round(time.perf_counter() - t0, 4)
    trans["trial"] = i
    return row, trans

