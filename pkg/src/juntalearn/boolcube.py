"""Bit-level primitives on the boolean hypercube {+1,-1}^n.

Encoding: bit i of a point mask is 1 iff x_i = -1, so the all-zero mask is the
all-(+1) point and XOR of masks is the coordinate-wise product.  Subsets of
[n] are masks too (bit i set iff i is in the set).  Coordinates are 0-based
internally; files and the CLI use 1-based coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError

MAX_DENSE_DIM = 24


def popcount(x: int) -> int:
    return bin(x).count("1")


def _check_fits(mask: int, n: int, what: str = "mask") -> None:
    if mask < 0 or mask >> n:
        raise DimensionError(f"{what} {mask:#x} does not fit in {n} bits")


def chi(A: int, x: int, n: int | None = None) -> int:
    """Parity character chi_A(x) = (-1)^popcount(A & x)."""
    if n is not None:
        _check_fits(A, n, "subset")
        _check_fits(x, n, "point")
    return -1 if popcount(A & x) & 1 else 1


def mask_from_coords(coords: Iterable[int]) -> int:
    mask = 0
    for c in coords:
        if c < 0:
            raise ValueError(f"negative coordinate {c}")
        mask |= 1 << c
    return mask


def coords_from_mask(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def chi_batch(A: int | Sequence[int], bits: np.ndarray) -> np.ndarray:
    """Evaluate chi_A on every row of an (m, n) 0/1 matrix; returns int8 signs."""
    coords = coords_from_mask(A) if isinstance(A, (int, np.integer)) else tuple(A)
    if coords and coords[-1] >= bits.shape[1]:
        raise DimensionError(f"subset reaches coordinate {coords[-1]} but points have n={bits.shape[1]}")
    if not coords:
        return np.ones(bits.shape[0], dtype=np.int8)
    parity = np.bitwise_xor.reduce(bits[:, list(coords)], axis=1)
    return (1 - 2 * parity.astype(np.int8)).astype(np.int8)


def pack_index(bits: np.ndarray) -> np.ndarray:
    """Map rows of an (m, d) 0/1 matrix to integers, column b -> bit b."""
    d = bits.shape[1]
    if d > 62:
        raise DimensionError(f"cannot pack {d} columns into a dense index")
    weights = np.left_shift(np.int64(1), np.arange(d, dtype=np.int64))
    return bits.astype(np.int64) @ weights if d else np.zeros(bits.shape[0], dtype=np.int64)


def unpack_index(idx: np.ndarray | int, d: int) -> np.ndarray:
    """Inverse of pack_index: integers -> (len, d) uint8 matrix."""
    idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
    return ((idx[:, None] >> np.arange(d, dtype=np.int64)) & 1).astype(np.uint8)


def points_to_bits(points: Iterable[int], n: int) -> np.ndarray:
    pts = list(points)
    out = np.zeros((len(pts), n), dtype=np.uint8)
    for r, p in enumerate(pts):
        _check_fits(p, n, "point")
        for c in coords_from_mask(p):
            out[r, c] = 1
    return out


def bits_to_points(bits: np.ndarray) -> list[int]:
    return [int("".join("1" if b else "0" for b in row[::-1]) or "0", 2) for row in bits]


# -- Walsh-Hadamard ---------------------------------------------------------


def _dim_of(length: int) -> int:
    if length < 1 or length & (length - 1):
        raise ValueError(f"length {length} is not a power of two")
    return length.bit_length() - 1


def _butterfly(a: np.ndarray) -> np.ndarray:
    # in-place unnormalized transform over the last axis
    n = a.shape[-1]
    h = 1
    while h < n:
        v = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        x = v[..., 0, :].copy()
        y = v[..., 1, :]
        v[..., 0, :] += y
        v[..., 1, :] = x - y
        h *= 2
    return a


def wht_forward(f: np.ndarray) -> np.ndarray:
    """Fourier coefficients fhat(A) = 2^-d sum_x f(x) chi_A(x), in O(d 2^d).

    Works on the last axis, so a stack of functions transforms at once.
    """
    a = np.array(f, dtype=np.float64, copy=True)
    d = _dim_of(a.shape[-1])
    _butterfly(a)
    a *= 2.0 ** -d
    return a


def wht_inverse(spec: np.ndarray) -> np.ndarray:
    """f(x) = sum_A fhat(A) chi_A(x); the butterfly without normalization."""
    a = np.array(spec, dtype=np.float64, copy=True)
    _dim_of(a.shape[-1])
    return _butterfly(a)


def wht_naive(f: np.ndarray) -> np.ndarray:
    """O(4^d) reference transform used as an oracle in tests."""
    f = np.asarray(f, dtype=np.float64)
    d = _dim_of(f.shape[-1])
    size = 1 << d
    out = np.empty(size)
    for A in range(size):
        out[A] = sum(f[x] * chi(A, x) for x in range(size)) / size
    return out


def character_matrix(d: int) -> np.ndarray:
    """H[A, x] = chi_A(x) as a dense +-1 matrix."""
    idx = np.arange(1 << d)
    par = np.zeros((1 << d, 1 << d), dtype=np.int64)
    for b in range(d):
        par ^= ((idx[:, None] >> b) & 1) & ((idx[None, :] >> b) & 1)
    return (1 - 2 * par).astype(np.float64)


# -- GF(2) -----------------------------------------------------------------


@dataclass(frozen=True)
class F2Matrix:
    """m x n matrix over GF(2), one int bitmask per row."""

    rows: tuple[int, ...]
    n: int

    def __post_init__(self):
        for r in self.rows:
            _check_fits(r, self.n, "row")

    @property
    def m(self) -> int:
        return len(self.rows)

    @classmethod
    def zeros(cls, m: int, n: int) -> "F2Matrix":
        return cls((0,) * m, n)

    @classmethod
    def random(cls, m: int, n: int, gen: np.random.Generator) -> "F2Matrix":
        bits = gen.integers(0, 2, size=(m, n), dtype=np.uint8)
        return cls.from_bits(bits)

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "F2Matrix":
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(tuple(mask_from_coords(np.flatnonzero(row)) for row in bits), bits.shape[1])

    def to_bits(self) -> np.ndarray:
        return points_to_bits(self.rows, self.n).reshape(self.m, self.n)

    def transpose(self) -> "F2Matrix":
        cols = []
        for j in range(self.n):
            col = 0
            for i, r in enumerate(self.rows):
                if (r >> j) & 1:
                    col |= 1 << i
            cols.append(col)
        return F2Matrix(tuple(cols), self.m)


def f2_matvec(A: F2Matrix, v: int) -> int:
    """(Av)_i = popcount(row_i & v) mod 2, returned as an m-bit mask."""
    _check_fits(v, A.n, "vector")
    out = 0
    for i, r in enumerate(A.rows):
        if popcount(r & v) & 1:
            out |= 1 << i
    return out


def f2_transpose_matvec(A: F2Matrix, p: int) -> int:
    """A^T p: XOR of the rows selected by the set bits of p."""
    _check_fits(p, A.m, "vector")
    out = 0
    for i, r in enumerate(A.rows):
        if (p >> i) & 1:
            out ^= r
    return out


# -- enumeration -----------------------------------------------------------


def enumerate_ksubsets(n: int, k: int, must_contain: int = 0) -> Iterator[int]:
    """Every size-k superset of ``must_contain`` inside [n], lexicographic in the free coordinates."""
    _check_fits(must_contain, n, "subset")
    base = popcount(must_contain)
    if base > k:
        raise ValueError(f"|must_contain|={base} exceeds k={k}")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    free = [i for i in range(n) if not (must_contain >> i) & 1]
    for combo in itertools.combinations(free, k - base):
        yield must_contain | mask_from_coords(combo)


def subsets_of(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` (including 0 and mask itself)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask
