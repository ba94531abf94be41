"""Seeded trial runners, calibration and sample-complexity sweeps.

Every trial i runs on ``Rng(seed).fork(i)``, so rows do not depend on trial
order or thread count.  Rows are plain dicts; ``wall_time`` is the only
column that is not a function of (config, seed).
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .boolcube import coords_from_mask
from .config import Constants, DEFAULT_CONSTANTS
from .dist import (
    DensePmf,
    Distribution,
    JuntaDistribution,
    NoisyParityDistribution,
    SampleBatch,
    as_junta,
    bias_spectrum,
    junta_l1,
    random_junta,
    sample,
)
from .fourier import fourier_samples, learn_fourier_coefficients
from .learner import LearnerConfig, learn_junta
from .rng import Rng
from .tester import TesterConfig, required_samples, tolerant_identity_test

PLANTS = ("uniform", "noisy-parity", "junta")


def coords_str(coords: Iterable[int]) -> str:
    """1-based, ';'-separated; empty set is '-'."""
    c = [str(i + 1) for i in coords]
    return ";".join(c) if c else "-"


def mask_str(A: int) -> str:
    return coords_str(coords_from_mask(A))


def run_trials(fn: Callable[[int], dict], trials: int, threads: int = 1, start: int = 0) -> list[dict]:
    """fn(i) for i in [start, start + trials), ordered by i."""
    idx = range(start, start + trials)
    if threads <= 1:
        return [fn(i) for i in idx]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, idx))


def _timed(fn: Callable[[], dict]) -> dict:
    t0 = time.perf_counter()
    row = fn()
    row["wall_time"] = round(time.perf_counter() - t0, 4)
    return row


def rows_to_csv(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def strip_wall_time(text: str) -> list[list[str]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return rows
    drop = [i for i, name in enumerate(rows[0]) if name == "wall_time"]
    return [[v for i, v in enumerate(r) if i not in drop] for r in rows]


def echo_constants(row: dict, constants: Constants) -> dict:
    row.update({f"C_{k}": v for k, v in constants.to_dict().items()})
    return row


# -- plants -------------------------------------------------------------------


def plant(kind: str, n: int, k: int, rng: Rng, eta: float = 0.1) -> Distribution:
    """A planted truth: uniform, a noisy parity on k random coordinates, or a random k-junta."""
    if kind == "uniform":
        return JuntaDistribution.uniform(n)
    J = tuple(sorted(rng.gen.choice(n, size=k, replace=False).tolist()))
    if kind == "noisy-parity":
        sign = 1 if rng.gen.random() < 0.5 else -1
        return NoisyParityDistribution(n, J, sign, eta)
    if kind == "junta":
        return random_junta(n, k, rng, J)
    raise ValueError(f"unknown plant {kind!r}")


def plant_for_trial(kind: str, i: int) -> str:
    """'mixed' cycles through the plant families by trial index."""
    return PLANTS[i % len(PLANTS)] if kind == "mixed" else kind


def as_junta_biases(D: Distribution) -> dict:
    """Nonzero normalized coefficients on nonempty sets."""
    return {A: c for A, c in as_junta(D).nonzero_biases().items() if A}


def truth_set(D: Distribution) -> tuple[int, ...]:
    if isinstance(D, NoisyParityDistribution):
        return D.J
    return tuple(D.relevant)


# -- learner ------------------------------------------------------------------


@dataclass(frozen=True)
class LearnSetup:
    n: int
    k: int
    eps: float
    plant: str = "mixed"
    eta: float = 0.1
    samples: int | None = None  # None: the learner budget
    strict: bool = True
    constants: Constants = DEFAULT_CONSTANTS

    def config(self) -> LearnerConfig:
        return LearnerConfig(self.n, self.k, self.eps, self.constants, strict=self.strict)

    def m(self) -> int:
        return self.config().sample_budget if self.samples is None else self.samples


def score_learner(Q: JuntaDistribution, D: Distribution, eps: float) -> dict:
    l1 = junta_l1(Q, D)
    # an early return only certifies L1 below the 2.5 eps tester threshold, so the L1 <= 2 eps
    # rate plateaus; the bench bisects on the TV <= 2 eps rate instead
    return {"l1": l1, "tv": l1 / 2, "success": int(l1 <= 2 * eps), "tv_success": int(l1 / 2 <= 2 * eps)}


def learn_trial(setup: LearnSetup, seed: int, i: int, truth: Distribution | None = None) -> dict:
    def body():
        r = Rng(seed).fork(i)
        kind = "spec" if truth is not None else plant_for_trial(setup.plant, i)
        D = truth if truth is not None else plant(kind, setup.n, setup.k, r.fork(0), setup.eta)
        cfg = setup.config()
        m = setup.m()
        Q, tr = learn_junta(sample(D, r.fork(1), m), cfg)
        Jstar = set(truth_set(D))
        row = {"trial": i, "seed_path": f"{seed}/{i}", "plant": kind, "n": setup.n, "k": setup.k,
               "eps": setup.eps, "m": m}
        row.update(score_learner(Q, D, setup.eps))
        row.update({
            "truth": coords_str(sorted(Jstar)),
            "N": coords_str(tr.final_N),
            "returned": tr.returned,
            "N_subset_truth": int(set(tr.final_N) <= Jstar),
            "N_grew": int(tr.N_grew()),
            "tester_calls": tr.tester_calls,
            "fourier_calls": tr.fourier_calls,
        })
        return echo_constants(row, setup.constants)

    return _timed(body)


# -- tester -------------------------------------------------------------------


def far_pmf(P: DensePmf, dist: float) -> DensePmf:
    """A pmf at L1 distance exactly ``dist`` from P, moving mass onto P's lightest cell."""
    if dist == 0:
        return P
    target = int(np.argmin(P.probs))
    Q = np.zeros_like(P.probs)
    Q[target] = 1.0
    full = float(np.abs(Q - P.probs).sum())
    lam = dist / full
    if lam > 1:
        raise ValueError(f"no pmf at distance {dist} along this direction (max {full:.3f})")
    return DensePmf((1 - lam) * P.probs + lam * Q)


@dataclass(frozen=True)
class TesterSetup:
    s: int = 16
    alpha: float = 0.0
    eps: float = 0.25
    delta: float = 0.05
    dist: float = 0.0  # true L1 distance of D from the reference
    reference: str = "random"  # random (flat Dirichlet) or uniform
    samples: int | None = None
    strict: bool = True
    constants: Constants = DEFAULT_CONSTANTS

    @property
    def d(self) -> int:
        d = int(round(math.log2(self.s)))
        if 1 << d != self.s:
            raise ValueError("support size must be a power of two")
        return d

    def config(self) -> TesterConfig:
        return TesterConfig(self.alpha, self.eps, self.delta, self.constants.tester)

    def m(self) -> int:
        return required_samples(self.config(), self.s) if self.samples is None else self.samples


def _reference(kind: str, d: int, rng: Rng) -> DensePmf:
    if kind == "uniform":
        return DensePmf.uniform(d)
    p = rng.gen.dirichlet(np.ones(1 << d))
    return DensePmf(p / p.sum())


def tester_trial(setup: TesterSetup, seed: int, i: int) -> dict:
    def body():
        r = Rng(seed).fork(i)
        P = _reference(setup.reference, setup.d, r.fork(0))
        D = far_pmf(P, setup.dist)
        m = setup.m()
        v = tolerant_identity_test(P, sample(D, r.fork(1), m), setup.config(), strict=setup.strict)
        row = {"trial": i, "seed_path": f"{seed}/{i}", "s": setup.s, "alpha": setup.alpha, "eps": setup.eps,
               "delta": setup.delta, "m": m, "truth_l1": float(np.abs(D.probs - P.probs).sum()),
               "statistic": v.statistic, "threshold": v.threshold, "verdict": v.verdict.value}
        return echo_constants(row, setup.constants)

    return _timed(body)


def tester_correct(verdict: str, truth_l1: float, alpha: float, eps: float, tol: float = 1e-9) -> int:
    """Close is required at distance <= alpha, Far at >= alpha + eps; in between either answer is right."""
    if truth_l1 <= alpha + tol:
        return int(verdict == "close")
    if truth_l1 >= alpha + eps - tol:
        return int(verdict == "far")
    return 1


def mean_statistic(s: int, m: int, trials: int, seed: int) -> float:
    """Monte-Carlo E[S_D(X)] for D uniform over s cells (the statistic against the truth)."""
    d = int(round(math.log2(s)))
    P = DensePmf.uniform(d)
    stats = []
    for i in range(trials):
        counts = np.bincount(P.sample_index(Rng(seed).fork(i), m), minlength=s)
        stats.append(np.abs(counts / m - P.probs).sum())
    return float(np.mean(stats))


# -- calibration --------------------------------------------------------------


def bisect_constant(ok: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    """Smallest C in [lo, hi] (to within tol) with ok(C); assumes ok is monotone."""
    if not ok(hi):
        raise RuntimeError(f"target not reached even at C={hi}")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def tester_pool(s: int, eps: float, m_max: int, trials: int, seed: int) -> list:
    """Per trial: a random reference P, m_max draws from P and m_max from a pmf at L1 distance eps."""
    d = int(round(math.log2(s)))
    pool = []
    for i in range(trials):
        r = Rng(seed).fork(i)
        P = _reference("random", d, r.fork(0))
        D = far_pmf(P, eps)
        pool.append((P, P.sample_index(r.fork(1), m_max), D.sample_index(r.fork(2), m_max)))
    return pool


def tester_error_rates(C: float, s: int, eps: float, delta: float, pool: list) -> tuple[float, float]:
    """(P[Far | D = P], P[Close | ||D - P||_1 = eps]) at alpha = 0, on prefixes of the pooled draws."""
    cfg = TesterConfig(0.0, eps, delta, C)
    m = required_samples(cfg, s)
    errs = [0, 0]
    for P, xs, ys in pool:
        for j, idx in enumerate((xs, ys)):
            close = np.abs(np.bincount(idx[:m], minlength=s) / m - P.probs).sum() <= cfg.threshold
            errs[j] += close != (j == 0)
    return float(errs[0]) / len(pool), float(errs[1]) / len(pool)


def calibrate_tester(s: int = 16, eps: float = 0.25, delta: float = 0.05, trials: int = 400, seed: int = 0,
                     lo: float = 0.25, hi: float = 32.0, tol: float = 0.05) -> dict:
    """Smallest C with both error rates <= delta, testing at the contract boundary ||D - P||_1 = eps."""
    pool = tester_pool(s, eps, required_samples(TesterConfig(0.0, eps, delta, hi), s), trials, seed)
    rates = {}

    def ok(C):
        rates[C] = tester_error_rates(C, s, eps, delta, pool)
        return max(rates[C]) <= delta

    C = bisect_constant(ok, lo, hi, tol)
    return {"C": C, "grid": {"s": s, "eps": eps, "delta": delta, "alpha": 0.0, "trials": trials},
            "close_error": rates[C][0], "far_error": rates[C][1]}


def fourier_pool(k: int, m_max: int, trials: int, seed: int) -> list:
    """Alternating noisy-parity and flat-Dirichlet truths on k bits, with m_max draws each."""
    pool = []
    for i in range(trials):
        r = Rng(seed).fork(i)
        if i % 2:
            p = r.gen.dirichlet(np.ones(1 << k))
            P = DensePmf(p / p.sum())
        else:
            P = NoisyParityDistribution(k, tuple(range(k)), 1, 0.1).to_junta().to_dense()
        pool.append((P, P.sample(r.fork(1), m_max)))
    return pool


def fourier_failure_rate(C: float, k: int, eps: float, delta: float, pool: list) -> float:
    m = fourier_samples(k, eps, delta, C)
    fails = 0
    for P, bits in pool:
        Q = learn_fourier_coefficients(SampleBatch(bits[:m], k), eps, delta, C)
        fails += np.abs(bias_spectrum(Q).c - bias_spectrum(P).c).max() > eps
    return float(fails) / len(pool)


def calibrate_fourier(k: int = 3, eps: float = 0.1, delta: float = 0.05, trials: int = 400, seed: int = 0,
                      lo: float = 0.05, hi: float = 16.0, tol: float = 0.05) -> dict:
    """Smallest C with sup-norm failure rate <= delta at accuracy eps 2^(-k/2)."""
    eps_f = eps * 2.0 ** (-k / 2)
    pool = fourier_pool(k, fourier_samples(k, eps_f, delta, hi), trials, seed)
    rates = {}

    def ok(C):
        rates[C] = fourier_failure_rate(C, k, eps_f, delta, pool)
        return rates[C] <= delta

    C = bisect_constant(ok, lo, hi, tol)
    return {"C": C, "grid": {"k": k, "eps": eps, "eps_fourier": eps_f, "delta": delta, "trials": trials},
            "failure_rate": rates[C]}


def learner_contract_floor(C_tester: float, C_fourier: float, k_max: int = 24) -> float:
    """Smallest C_learner whose budget covers the tester and Fourier preconditions for every n >= 2, k <= k_max.

    The tester ratio is below 2 for all (n, k); the Fourier ratio peaks at small n.
    """
    worst_f = 0.0
    for k in range(1, k_max + 1):
        n = max(k, 2)
        ln_inv_delta = math.log(1 / min(k ** -2.0, 0.25))
        worst_f = max(worst_f, 2 ** k * (k + ln_inv_delta) / (k * (2 ** k + math.log(n))))
    return max(2.0 * C_tester, worst_f * C_fourier)


def learner_pool(setup: LearnSetup, trials: int, seed: int, m_max: int) -> list:
    pool = []
    for i in range(trials):
        r = Rng(seed).fork(i)
        D = plant(plant_for_trial(setup.plant, i), setup.n, setup.k, r.fork(0), setup.eta)
        pool.append((D, sample(D, r.fork(1), m_max).bits))
    return pool


def learner_success_rate(setup: LearnSetup, m: int, pool: list, key: str = "success") -> float:
    """Non-strict success rate at m samples, on prefixes of the pooled batches."""
    cfg = setup.config()
    wins = 0
    for D, bits in pool:
        Q, _ = learn_junta(SampleBatch(bits[:m], setup.n), cfg)
        wins += score_learner(Q, D, setup.eps)[key]
    return wins / len(pool)


def calibrate_learner(constants: Constants, n: int = 16, k: int = 3, eps: float = 0.1, trials: int = 100,
                      seed: int = 0, target: float = 0.9, tol: float = 0.1, hi: float = 16.0) -> dict:
    """Empirical minimum of C_learner for success >= target, and the contract floor; ships the larger."""
    setup = LearnSetup(n, k, eps, "mixed", strict=False, constants=constants)
    unit = LearnerConfig(n, k, eps, constants.with_updates(learner=1.0)).sample_budget
    pool = learner_pool(setup, trials, seed, math.ceil(hi * unit))
    rates = {}

    def ok(C):
        rates[C] = learner_success_rate(setup, max(1, round(C * unit)), pool)
        return rates[C] >= target

    empirical = bisect_constant(ok, tol, hi, tol)
    floor = learner_contract_floor(constants.tester, constants.fourier)
    return {"C": max(empirical, floor), "empirical": empirical, "contract_floor": floor,
            "grid": {"n": n, "k": k, "eps": eps, "trials": trials, "target": target},
            "success_rate": rates[empirical]}


def calibrate(which: Sequence[str], seed: int, base: Constants = DEFAULT_CONSTANTS, trials: dict | None = None,
              margin: float = 1.25) -> dict:
    """Run the requested calibrations in dependency order; returns a constants document.

    ``margin`` scales the tester and Fourier bisection results so that fresh
    seeds keep the target rates; the raw values are kept in the report.
    """
    trials = trials or {}
    report: dict = {"seed": seed, "margin": margin}
    consts = base
    if "tester" in which:
        r = calibrate_tester(trials=trials.get("tester", 400), seed=seed)
        report["tester"] = r
        consts = consts.with_updates(tester=round(margin * r["C"], 4))
    if "fourier" in which:
        r = calibrate_fourier(trials=trials.get("fourier", 400), seed=seed + 1)
        report["fourier"] = r
        consts = consts.with_updates(fourier=round(margin * r["C"], 4))
    if "learner" in which:
        r = calibrate_learner(consts, trials=trials.get("learner", 100), seed=seed + 2)
        report["learner"] = r
        consts = consts.with_updates(learner=round(r["C"], 4))
    return {"constants": consts.to_dict(), "calibration": report}


# -- bench --------------------------------------------------------------------


BENCH_SUCCESS = "tv_success"


def minimal_m(rate_at: Callable[[int], float], target: float, lo: int, hi: int, rel_tol: float = 0.02) -> int | None:
    """Smallest m in (lo, hi] with rate_at(m) >= target, by bisection; None if hi fails."""
    if rate_at(hi) < target:
        return None
    while hi - lo > max(1, int(rel_tol * hi)):
        mid = (lo + hi) // 2
        if rate_at(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def bench_point(setup: LearnSetup, trials: int, seed: int, target: float = 0.9, cap_factor: float = 4.0) -> dict:
    """Bisected minimal m reaching ``target`` success at one (n, k, eps)."""
    t0 = time.perf_counter()
    budget = LearnerConfig(setup.n, setup.k, setup.eps, setup.constants).sample_budget
    cap = int(cap_factor * budget)
    pool = learner_pool(setup, trials, seed, cap)
    rates: dict[int, float] = {}

    def rate_at(m):
        if m not in rates:
            rates[m] = learner_success_rate(setup, m, pool, BENCH_SUCCESS)
        return rates[m]

    m_min = minimal_m(rate_at, target, 0, cap)
    row = {"n": setup.n, "k": setup.k, "eps": setup.eps, "plant": setup.plant, "trials": trials,
           "success": BENCH_SUCCESS, "target": target,
           "m_min": m_min if m_min is not None else -1, "rate_at_m_min": rates.get(m_min, float("nan")),
           "budget": budget, "m_over_budget": (m_min / budget) if m_min else float("nan"),
           "evaluations": len(rates)}
    row = echo_constants(row, setup.constants)
    row["wall_time"] = round(time.perf_counter() - t0, 4)
    return row


def bench(sweep: str, values: Sequence, base: LearnSetup, trials: int, seed: int, target: float = 0.9) -> list[dict]:
    rows = []
    for j, v in enumerate(values):
        setup = LearnSetup(
            n=int(v) if sweep == "n" else base.n,
            k=int(v) if sweep == "k" else base.k,
            eps=float(v) if sweep == "eps" else base.eps,
            plant=base.plant, eta=base.eta, strict=False, constants=base.constants,
        )
        row = {"sweep": sweep}
        row.update(bench_point(setup, trials, seed + j, target))
        rows.append(row)
    return rows


def log_n_shape(rows: Sequence[dict], k: int, eps: float, C_learner: float) -> dict:
    """Additive-in-ln n check between the smallest and largest n of an n-sweep."""
    first, last = rows[0], rows[-1]
    diff = last["m_min"] - first["m_min"]
    allowed = 1.5 * C_learner * (k / eps ** 2) * math.log(last["n"] / first["n"])
    return {"m_first": first["m_min"], "m_last": last["m_min"], "diff": diff, "allowed": allowed,
            "ratio": last["m_min"] / first["m_min"]}

