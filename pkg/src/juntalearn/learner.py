"""Sample-optimal proper learner for k-junta distributions.

One batch serves every call.  Each iteration scans all size-k supersets S of
the current relevant set N with the (2 eps, 3 eps)-tolerant tester against the
current hypothesis; the first Far witness is Fourier-learned and its heavy
subsets join N, after which the hypothesis is re-learned on N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .boolcube import MAX_DENSE_DIM, coords_from_mask, pack_index
from .config import Constants, DEFAULT_CONSTANTS
from .dist import DensePmf, JuntaDistribution, SampleBatch, bias_spectrum, project_samples
from .errors import ContractError
from .fourier import fourier_samples, heavy_subsets, learn_fourier_coefficients
from .tester import TesterConfig, _ceil, l1_statistic, required_samples

BLOCK_CELLS = 1 << 22


def learner_budget(n: int, k: int, eps: float, C: float) -> int:
    """m = C (k / eps^2)(2^k + ln n)."""
    return _ceil(C * k / eps ** 2 * (2 ** k + math.log(n)))


@dataclass(frozen=True)
class LearnerConfig:
    n: int
    k: int
    eps: float
    constants: Constants = DEFAULT_CONSTANTS
    master_seed: int | None = None
    strict: bool = True

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        if self.k > MAX_DENSE_DIM:
            raise ContractError(f"k={self.k} above dense limit {MAX_DENSE_DIM}")
        if not 0 < self.eps <= 2 / 3:
            raise ValueError("eps must lie in (0, 2/3]")

    @property
    def tester_cfg(self) -> TesterConfig:
        delta = min(float(self.n) ** (-2 * self.k), 0.5)
        return TesterConfig(2 * self.eps, self.eps, delta, self.constants.tester)

    @property
    def fourier_eps(self) -> float:
        return self.eps * 2.0 ** (-self.k / 2)

    @property
    def fourier_delta(self) -> float:
        return min(self.k ** -2.0, 0.25)

    @property
    def sample_budget(self) -> int:
        return learner_budget(self.n, self.k, self.eps, self.constants.learner)

    def check_batch(self, m: int) -> None:
        if not self.strict:
            return
        needs = {
            "learner budget": self.sample_budget,
            "tester": required_samples(self.tester_cfg, 2 ** self.k),
            "Fourier learner": fourier_samples(self.k, self.fourier_eps, self.fourier_delta, self.constants.fourier),
        }
        for what, need in needs.items():
            if m < need:
                raise ContractError(f"{what} needs {need} samples, got {m}")


@dataclass
class IterationRecord:
    S: tuple[int, ...]
    tester_calls: int
    far_statistic: float
    N_before: tuple[int, ...]
    N_after: tuple[int, ...]
    heavy: list[tuple[int, ...]]


@dataclass
class LearnerTrace:
    iterations: list[IterationRecord] = field(default_factory=list)
    tester_calls: int = 0
    fourier_calls: int = 0
    returned: str = ""
    final_N: tuple[int, ...] = ()
    tester_delta: float = 0.0
    fourier_delta: float = 0.0

    @property
    def failure_bound(self) -> float:
        """Union bound on the failure mass of the calls actually made."""
        return self.tester_calls * self.tester_delta + self.fourier_calls * self.fourier_delta

    def N_grew(self) -> bool:
        return all(len(r.N_after) > len(r.N_before) for r in self.iterations)

    def to_dict(self) -> dict:
        one = lambda c: [i + 1 for i in c]  # noqa: E731
        return {
            "returned": self.returned,
            "final_N": one(self.final_N),
            "tester_calls": self.tester_calls,
            "fourier_calls": self.fourier_calls,
            "failure_bound": self.failure_bound,
            "iterations": [
                {
                    "S": one(r.S),
                    "tester_calls": r.tester_calls,
                    "far_statistic": r.far_statistic,
                    "N_before": one(r.N_before),
                    "N_after": one(r.N_after),
                    "heavy": [one(h) for h in r.heavy],
                }
                for r in self.iterations
            ],
        }


# -- the superset scan --------------------------------------------------------


def _cell_codes(bits: np.ndarray, coords) -> np.ndarray:
    return pack_index(bits[:, list(coords)]) if coords else np.zeros(bits.shape[0], dtype=np.int64)


def superset_counts(bits: np.ndarray, N: tuple[int, ...], k: int):
    """Histogram counts for every size-k superset S = N + T of N.

    Returns (T_list, counts) with counts[i, g, t]: samples whose N-cell is g
    and whose T-pattern is t (bit b of t is coordinate T_list[i][b]).  Order
    is lexicographic in the free coordinates.
    """
    m, n = bits.shape
    free = [c for c in range(n) if c not in set(N)]
    r = k - len(N)
    g = _cell_codes(bits, N)
    G = 1 << len(N)
    if r == 0:
        return [()], np.bincount(g, minlength=G).reshape(1, G, 1)
    onehot = np.zeros((G, m))
    onehot[g, np.arange(m)] = 1.0
    group_sizes = onehot.sum(axis=1)
    F = bits[:, free].astype(np.float64)
    if r == 1:
        s1 = onehot @ F  # (G, |free|)
        counts = np.stack([group_sizes[:, None] - s1, s1], axis=-1)  # (G, |free|, 2)
        T_list = [(c,) for c in free]
        return T_list, np.rint(counts.transpose(1, 0, 2)).astype(np.int64)
    if r == 2:
        ia, ib = np.triu_indices(len(free), k=1)
        s1 = onehot @ F
        out = np.empty((ia.size, G, 4), dtype=np.int64)
        for gi in range(G):
            rows = F[g == gi]
            gram = rows.T @ rows
            sab = gram[ia, ib]
            sa, sb = s1[gi, ia], s1[gi, ib]
            out[:, gi, 3] = np.rint(sab)
            out[:, gi, 1] = np.rint(sa - sab)
            out[:, gi, 2] = np.rint(sb - sab)
            out[:, gi, 0] = np.rint(group_sizes[gi] - sa - sb + sab)
        T_list = [(free[a], free[b]) for a, b in zip(ia.tolist(), ib.tolist())]
        return T_list, out
    return _superset_counts_generic(bits, N, k)


def _superset_counts_generic(bits: np.ndarray, N: tuple[int, ...], k: int):
    m, n = bits.shape
    free = [c for c in range(n) if c not in set(N)]
    r = k - len(N)
    g = _cell_codes(bits, N)
    G = 1 << len(N)
    cells = G << r
    T_list = list(itertools.combinations(free, r))
    out = np.empty((len(T_list), G, 1 << r), dtype=np.int64)
    block = max(1, BLOCK_CELLS // max(m, 1))
    base = (g << r)[:, None]
    for start in range(0, len(T_list), block):
        Tb = np.array(T_list[start:start + block], dtype=np.int64)  # (B, r)
        codes = np.zeros((m, Tb.shape[0]), dtype=np.int64)
        for b in range(r):
            codes |= bits[:, Tb[:, b]].astype(np.int64) << b
        codes += base + (np.arange(Tb.shape[0], dtype=np.int64) * cells)[None, :]
        cnt = np.bincount(codes.ravel(), minlength=cells * Tb.shape[0])
        out[start:start + Tb.shape[0]] = cnt.reshape(Tb.shape[0], G, 1 << r)
    return T_list, out


def scan_statistics(bits: np.ndarray, N: tuple[int, ...], core: np.ndarray, k: int):
    """Tester statistics of every size-k superset of N against the junta (N, core)."""
    m = bits.shape[0]
    T_list, counts = superset_counts(bits, N, k)
    r = k - len(N)
    ref = (core / 2.0 ** r)[None, :, None]
    stats = np.abs(counts / m - ref).sum(axis=(1, 2))
    S_list = [tuple(sorted(N + T)) for T in T_list]
    return S_list, stats


def _marginal_of_hypothesis(S: tuple[int, ...], N: tuple[int, ...], core: np.ndarray) -> np.ndarray:
    idx = np.arange(1 << len(S), dtype=np.int64)
    cell = np.zeros_like(idx)
    for b, c in enumerate(N):
        cell |= ((idx >> S.index(c)) & 1) << b
    return core[cell] / 2.0 ** (len(S) - len(N))


def scan_statistics_reference(bits: np.ndarray, N: tuple[int, ...], core: np.ndarray, k: int):
    """One tolerant-test statistic per superset, computed independently; test oracle for the scan."""
    m, n = bits.shape
    S_list, stats = [], []
    for S in itertools.combinations(range(n), k):
        if not set(N) <= set(S):
            continue
        sub = pack_index(bits[:, list(S)])
        counts = np.bincount(sub, minlength=1 << k)
        S_list.append(S)
        stats.append(l1_statistic(counts, m, _marginal_of_hypothesis(S, N, core)))
    return S_list, np.array(stats)


# -- the learner -------------------------------------------------------------


def learn_junta(batch: SampleBatch, cfg: LearnerConfig) -> tuple[JuntaDistribution, LearnerTrace]:
    """Learn a k-junta hypothesis Q with ||Q - P||_1 <= 2 eps (w.h.p.)."""
    if batch.n != cfg.n:
        raise ContractError(f"batch has dimension {batch.n}, config says {cfg.n}")
    cfg.check_batch(batch.m)
    tcfg = cfg.tester_cfg
    eps_f, delta_f, C_f = cfg.fourier_eps, cfg.fourier_delta, cfg.constants.fourier
    trace = LearnerTrace(tester_delta=tcfg.delta, fourier_delta=delta_f)

    N: tuple[int, ...] = ()
    core = np.ones(1)
    Q = JuntaDistribution.uniform(cfg.n)
    for _ in range(cfg.k):
        if len(N) == cfg.k:
            break
        S_list, stats = scan_statistics(batch.bits, N, core, cfg.k)
        far = np.flatnonzero(stats > tcfg.threshold)
        if far.size == 0:
            trace.tester_calls += len(S_list)
            trace.returned = "early"
            trace.final_N = N
            return Q, trace
        w = int(far[0])
        trace.tester_calls += w + 1
        S = S_list[w]
        R = learn_fourier_coefficients(project_samples(batch, S), eps_f, delta_f, C_f, strict=cfg.strict)
        trace.fourier_calls += 1
        heavy_local = heavy_subsets(bias_spectrum(R).c, eps_f)
        heavy = [tuple(S[b] for b in coords_from_mask(A)) for A in heavy_local]
        N_new = tuple(sorted(set(N).union(*heavy))) if heavy else N
        trace.iterations.append(IterationRecord(S, w + 1, float(stats[w]), N, N_new, heavy))
        N = N_new
        if N:
            core_pmf = learn_fourier_coefficients(project_samples(batch, N), eps_f, delta_f, C_f, strict=cfg.strict)
            trace.fourier_calls += 1
        else:
            core_pmf = DensePmf.uniform(0)
        core = core_pmf.probs
        Q = JuntaDistribution(cfg.n, N, core_pmf)
    trace.returned = "late"
    trace.final_N = N
    return Q, trace
