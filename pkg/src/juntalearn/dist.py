"""Distributions over the hypercube: dense pmfs, juntas, noisy parities, samples.

Fourier data is kept in normalized form: c(A) = E_{x~D}[chi_A(x)] = 2^d D^(A),
which lies in [-1, 1] and does not underflow for large ambient n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .boolcube import (
    MAX_DENSE_DIM,
    coords_from_mask,
    mask_from_coords,
    pack_index,
    popcount,
    unpack_index,
    wht_forward,
    wht_inverse,
)
from .errors import DimensionError, InvalidPmfError
from .rng import Rng

SUM_TOL = 1e-9
NEG_TOL = 1e-12


def _as_coords(S, n: int | None = None) -> tuple[int, ...]:
    if isinstance(S, (int, np.integer)):
        coords = coords_from_mask(int(S))
    else:
        coords = tuple(sorted(int(c) for c in S))
        if len(set(coords)) != len(coords):
            raise ValueError(f"repeated coordinates in {S}")
    if n is not None and coords and (coords[0] < 0 or coords[-1] >= n):
        raise DimensionError(f"coordinates {coords} outside [0, {n})")
    return coords


def _select_bits(idx: np.ndarray, positions) -> np.ndarray:
    """Re-pack the bits of ``idx`` found at ``positions`` into a dense index."""
    out = np.zeros_like(idx)
    for new, old in enumerate(positions):
        out |= ((idx >> old) & 1) << new
    return out


# -- pmfs -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensePmf:
    """Explicit pmf over {+-1}^d; entry i is the point whose mask is i."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size & (p.size - 1) or p.size == 0:
            raise InvalidPmfError(f"pmf length {p.size} is not a power of two")
        if p.size > 1 << MAX_DENSE_DIM:
            raise DimensionError(f"dense dimension above {MAX_DENSE_DIM}")
        if not np.all(np.isfinite(p)):
            raise InvalidPmfError("pmf has non-finite entries")
        if p.min() < -NEG_TOL:
            raise InvalidPmfError(f"negative mass {p.min():.3g}")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise InvalidPmfError(f"mass sums to {p.sum():.12g}")
        if p.min() < 0:
            p = np.clip(p, 0.0, None)
            p /= p.sum()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def d(self) -> int:
        return self.probs.size.bit_length() - 1

    @classmethod
    def uniform(cls, d: int) -> "DensePmf":
        return cls(np.full(1 << d, 2.0 ** -d))

    @classmethod
    def point_mass(cls, d: int, x: int) -> "DensePmf":
        p = np.zeros(1 << d)
        p[x] = 1.0
        return cls(p)

    @classmethod
    def parity(cls, d: int, J: int, sign: int = 1) -> "DensePmf":
        """Uniform over {x : chi_J(x) = sign}."""
        chis = np.array([-1 if popcount(J & x) & 1 else 1 for x in range(1 << d)])
        p = (chis == sign).astype(float)
        return cls(p / p.sum())

    def sample(self, rng: Rng, count: int) -> np.ndarray:
        """``count`` i.i.d. draws as an (count, d) 0/1 matrix (inverse CDF)."""
        return unpack_index(self.sample_index(rng, count), self.d)

    def sample_index(self, rng: Rng, count: int) -> np.ndarray:
        if count < 0:
            raise ValueError("count must be >= 0")
        cdf = np.cumsum(self.probs)
        u = rng.gen.random(count) * cdf[-1]
        idx = np.searchsorted(cdf, u, side="right")
        return np.minimum(idx, self.probs.size - 1).astype(np.int64)

    def __eq__(self, other):
        return isinstance(other, DensePmf) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())


@dataclass(frozen=True, eq=False)
class BiasSpectrum:
    """Normalized coefficients c(A) = E_D[chi_A], indexed by subset mask."""

    c: np.ndarray

    @property
    def d(self) -> int:
        return self.c.size.bit_length() - 1

    def __getitem__(self, A: int) -> float:
        return float(self.c[A])


def bias_spectrum(p: DensePmf) -> BiasSpectrum:
    return BiasSpectrum(wht_forward(p.probs) * p.probs.size)


def pmf_from_bias(c: np.ndarray) -> np.ndarray:
    """Inverse of bias_spectrum without the validity check."""
    c = np.asarray(c, dtype=np.float64)
    return wht_inverse(c) / c.size


# -- juntas -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JuntaDistribution:
    """Core pmf on the relevant coordinates, uniform on the rest.

    ``relevant`` holds sorted 0-based coordinates; bit b of a core index is
    coordinate ``relevant[b]``.
    """

    n: int
    relevant: tuple[int, ...]
    core: DensePmf

    def __post_init__(self):
        rel = _as_coords(self.relevant, self.n)
        object.__setattr__(self, "relevant", rel)
        if self.core.d != len(rel):
            raise DimensionError(f"core has dimension {self.core.d}, expected {len(rel)}")

    @property
    def mask(self) -> int:
        return mask_from_coords(self.relevant)

    @classmethod
    def uniform(cls, n: int) -> "JuntaDistribution":
        return cls(n, (), DensePmf.uniform(0))

    def evaluate(self, x: int) -> float:
        """P(x) = core(x restricted to J) * 2^-(n-|J|)."""
        if x < 0 or x >> self.n:
            raise DimensionError(f"point does not fit in {self.n} bits")
        idx = 0
        for b, c in enumerate(self.relevant):
            idx |= ((x >> c) & 1) << b
        return float(self.core.probs[idx]) * 2.0 ** -(self.n - len(self.relevant))

    def ratio_to_uniform(self, bits: np.ndarray) -> np.ndarray:
        """2^n P(x) for each row; scale-free form of the evaluator."""
        idx = pack_index(bits[:, list(self.relevant)])
        return self.core.probs[idx] * 2.0 ** len(self.relevant)

    def to_dense(self) -> DensePmf:
        if self.n > MAX_DENSE_DIM:
            raise DimensionError(f"n={self.n} above dense limit")
        idx = np.arange(1 << self.n, dtype=np.int64)
        core_idx = _select_bits(idx, self.relevant)
        return DensePmf(self.core.probs[core_idx] * 2.0 ** -(self.n - len(self.relevant)))

    def sample(self, rng: Rng, count: int) -> np.ndarray:
        bits = rng.bits(count, self.n)
        if self.relevant:
            core_bits = self.core.sample(rng, count)
            bits[:, list(self.relevant)] = core_bits
        return bits

    def bias(self, A) -> float:
        """Normalized coefficient c(A); zero unless A is inside J."""
        A = mask_from_coords(_as_coords(A, self.n))
        if A & ~self.mask:
            return 0.0
        local = 0
        for b, c in enumerate(self.relevant):
            if (A >> c) & 1:
                local |= 1 << b
        return float(bias_spectrum(self.core).c[local])

    def nonzero_biases(self, tol: float = 1e-12) -> dict[tuple[int, ...], float]:
        c = bias_spectrum(self.core).c
        out = {}
        for local in range(c.size):
            if abs(c[local]) > tol:
                coords = tuple(self.relevant[b] for b in coords_from_mask(local))
                out[coords] = float(c[local])
        return out


@dataclass(frozen=True)
class NoisyParityDistribution:
    """c(empty) = 1, c(J) = sign (1 - 2 eta), every other coefficient 0."""

    n: int
    J: tuple[int, ...]
    sign: int = 1
    eta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "J", _as_coords(self.J, self.n))
        if not self.J:
            raise ValueError("a noisy parity needs a nonempty relevant set")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not 0.0 <= self.eta < 0.5:
            raise ValueError("eta must lie in [0, 1/2)")

    @property
    def bias(self) -> float:
        return self.sign * (1.0 - 2.0 * self.eta)

    def to_junta(self) -> JuntaDistribution:
        k = len(self.J)
        full = (1 << k) - 1
        c = np.zeros(1 << k)
        c[0] = 1.0
        c[full] = self.bias
        return JuntaDistribution(self.n, self.J, DensePmf(pmf_from_bias(c)))

    def sample(self, rng: Rng, count: int) -> np.ndarray:
        """Uniform with probability 2 eta, otherwise uniform on {chi_J = sign}."""
        bits = rng.bits(count, self.n)
        parity_branch = rng.gen.random(count) >= 2.0 * self.eta
        cols = list(self.J)
        par = np.bitwise_xor.reduce(bits[:, cols], axis=1)
        want = 0 if self.sign == 1 else 1
        fix = parity_branch & (par != want)
        bits[fix, cols[-1]] ^= 1
        return bits


Distribution = Union[DensePmf, JuntaDistribution, NoisyParityDistribution]


def as_junta(d: Distribution) -> JuntaDistribution:
    if isinstance(d, JuntaDistribution):
        return d
    if isinstance(d, NoisyParityDistribution):
        return d.to_junta()
    if isinstance(d, DensePmf):
        return JuntaDistribution(d.d, tuple(range(d.d)), d)
    raise TypeError(f"not a distribution: {type(d).__name__}")


# -- samples ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """i.i.d. points as an (m, n) uint8 matrix, 1 meaning x_i = -1."""

    bits: np.ndarray
    n: int = field(default=-1)

    def __post_init__(self):
        b = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if b.ndim != 2:
            raise DimensionError("sample bits must be a 2-d array")
        n = b.shape[1] if self.n < 0 else self.n
        if b.shape[1] != n:
            raise DimensionError(f"points have {b.shape[1]} coordinates, expected {n}")
        object.__setattr__(self, "bits", b)
        object.__setattr__(self, "n", n)

    def __len__(self) -> int:
        return self.bits.shape[0]

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    def head(self, count: int) -> "SampleBatch":
        return SampleBatch(self.bits[:count], self.n)


@dataclass(frozen=True, eq=False)
class LabeledSampleBatch(SampleBatch):
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))

    def __post_init__(self):
        super().__post_init__()
        y = np.asarray(self.labels, dtype=np.int8)
        if y.shape != (self.bits.shape[0],):
            raise DimensionError("one label per point is required")
        if not np.all((y == 1) | (y == -1)):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "labels", y)


def sample(d: Distribution, rng: Rng, count: int) -> SampleBatch:
    if count < 0:
        raise ValueError("count must be >= 0")
    if isinstance(d, DensePmf):
        return SampleBatch(d.sample(rng, count), d.d)
    return SampleBatch(d.sample(rng, count), d.n)


def project_samples(batch: SampleBatch, S) -> SampleBatch:
    """Keep the coordinates of S, in increasing order."""
    coords = _as_coords(S, batch.n)
    return SampleBatch(batch.bits[:, list(coords)], len(coords))


def empirical_counts(batch: SampleBatch) -> np.ndarray:
    if batch.n > MAX_DENSE_DIM:
        raise DimensionError(f"dimension {batch.n} above dense limit")
    return np.bincount(pack_index(batch.bits), minlength=1 << batch.n)


def empirical_pmf(batch: SampleBatch) -> DensePmf:
    if batch.m == 0:
        raise ValueError("empty batch has no empirical pmf")
    return DensePmf(empirical_counts(batch) / batch.m)


# -- marginals and distances -------------------------------------------------


def _marginal_dense(probs: np.ndarray, d: int, keep: tuple[int, ...]) -> np.ndarray:
    idx = np.arange(1 << d, dtype=np.int64)
    return np.bincount(_select_bits(idx, keep), weights=probs, minlength=1 << len(keep))


def marginal(p: Distribution, S) -> DensePmf:
    """Exact marginal on the coordinates of S (sorted order).

    Juntas marginalize the core over J minus S and pad S minus J uniformly,
    never touching 2^n entries.
    """
    if isinstance(p, DensePmf):
        return DensePmf(_marginal_dense(p.probs, p.d, _as_coords(S, p.d)))
    p = as_junta(p)
    S = _as_coords(S, p.n)
    if len(S) > MAX_DENSE_DIM:
        raise DimensionError("marginal above dense limit")
    shared = [c for c in p.relevant if c in set(S)]
    core_pos = [p.relevant.index(c) for c in shared]
    core_marg = _marginal_dense(p.core.probs, p.core.d, tuple(core_pos))
    s_pos = [S.index(c) for c in shared]
    idx = np.arange(1 << len(S), dtype=np.int64)
    pad = len(S) - len(shared)
    return DensePmf(core_marg[_select_bits(idx, s_pos)] * 2.0 ** -pad)


def l1_distance(p: DensePmf, q: DensePmf) -> float:
    if p.d != q.d:
        raise DimensionError(f"dimensions {p.d} and {q.d} differ")
    return float(np.abs(p.probs - q.probs).sum())


def tv_distance(p: DensePmf, q: DensePmf) -> float:
    return 0.5 * l1_distance(p, q)


def junta_l1(p: Distribution, q: Distribution) -> float:
    """Exact L1 between two juntas through the marginal on their joint relevant set."""
    p, q = as_junta(p), as_junta(q)
    if p.n != q.n:
        raise DimensionError(f"dimensions {p.n} and {q.n} differ")
    union = tuple(sorted(set(p.relevant) | set(q.relevant)))
    return l1_distance(marginal(p, union), marginal(q, union))


def evaluate(d: Distribution, x: int) -> float:
    return as_junta(d).evaluate(x)


def mix(p: Distribution, q: Distribution, w: float) -> Distribution:
    """w p + (1 - w) q, pointwise."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("weight must lie in [0, 1]")
    if isinstance(p, DensePmf) and isinstance(q, DensePmf):
        if p.d != q.d:
            raise DimensionError(f"dimensions {p.d} and {q.d} differ")
        return DensePmf(w * p.probs + (1.0 - w) * q.probs)
    p, q = as_junta(p), as_junta(q)
    if p.n != q.n:
        raise DimensionError(f"dimensions {p.n} and {q.n} differ")
    union = tuple(sorted(set(p.relevant) | set(q.relevant)))
    core = w * marginal(p, union).probs + (1.0 - w) * marginal(q, union).probs
    return JuntaDistribution(p.n, union, DensePmf(core))


def random_junta(n: int, k: int, rng: Rng, relevant=None) -> JuntaDistribution:
    """Junta with a flat-Dirichlet core on k random (or given) coordinates."""
    if relevant is None:
        relevant = tuple(sorted(rng.gen.choice(n, size=k, replace=False).tolist()))
    core = rng.gen.dirichlet(np.ones(1 << len(relevant)))
    return JuntaDistribution(n, tuple(relevant), DensePmf(core / core.sum()))
