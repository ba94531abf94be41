"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package: every quantity is recomputed from the
definitions by explicit loops over the hypercube.
"""

from __future__ import annotations

import itertools

import numpy as np


def parity_sign(A: int, x: int) -> int:
    return -1 if bin(A & x).count("1") % 2 else 1


def spectrum(f) -> np.ndarray:
    """fhat(A) = 2^-d sum_x f(x) chi_A(x)."""
    f = np.asarray(f, dtype=np.float64)
    size = f.size
    return np.array([sum(f[x] * parity_sign(A, x) for x in range(size)) / size for A in range(size)])


def biases(p) -> np.ndarray:
    """c(A) = sum_x p(x) chi_A(x)."""
    p = np.asarray(p, dtype=np.float64)
    return np.array([sum(p[x] * parity_sign(A, x) for x in range(p.size)) for A in range(p.size)])


def pmf_from_biases(c) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    return np.array([sum(c[A] * parity_sign(A, x) for A in range(c.size)) for x in range(c.size)]) / c.size


def junta_dense(n: int, relevant, core) -> np.ndarray:
    """Full 2^n table of a junta, point by point."""
    out = np.empty(1 << n)
    for x in range(1 << n):
        idx = sum(((x >> c) & 1) << b for b, c in enumerate(relevant))
        out[x] = core[idx] / 2 ** (n - len(relevant))
    return out


def marginal(p, n: int, S) -> np.ndarray:
    """Marginal on the sorted coordinates S; bit b of the result index is S[b]."""
    out = np.zeros(1 << len(S))
    for x in range(1 << n):
        idx = sum(((x >> c) & 1) << b for b, c in enumerate(S))
        out[idx] += p[x]
    return out


def noisy_parity_dense(n: int, J, sign: int, eta: float) -> np.ndarray:
    """2 eta U + (1 - 2 eta) U restricted to {chi_J = sign}."""
    mask = sum(1 << c for c in J)
    on = np.array([parity_sign(mask, x) == sign for x in range(1 << n)], dtype=float)
    return 2 * eta / (1 << n) + (1 - 2 * eta) * on / on.sum()


def injected(p, rows) -> np.ndarray:
    """D_A(x) = 2^-m sum_q D(x + A^T q), shifts built from the row list."""
    p = np.asarray(p, dtype=np.float64)
    m = len(rows)
    out = np.zeros_like(p)
    for q in range(1 << m):
        shift = 0
        for i in range(m):
            if (q >> i) & 1:
                shift ^= rows[i]
        for x in range(p.size):
            out[x] += p[x ^ shift]
    return out / (1 << m)


def matvec(rows, v: int) -> int:
    return sum((bin(r & v).count("1") % 2) << i for i, r in enumerate(rows))


def l1(p, q) -> float:
    return float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def ksubsets(n: int, k: int):
    return list(itertools.combinations(range(n), k))


def hist_l1(points, reference) -> float:
    """sum_i |count_i/m - P(i)| by an explicit count."""
    counts = np.zeros(len(reference))
    for x in points:
        counts[x] += 1
    return float(np.abs(counts / len(points) - np.asarray(reference)).sum())


def random_pmf(d: int, gen: np.random.Generator) -> np.ndarray:
    p = gen.random(1 << d) ** 2
    return p / p.sum()
