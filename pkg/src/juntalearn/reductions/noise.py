"""Linear noise injection: x -> x + A^T q with q uniform.

Injection keeps exactly the Fourier coefficients whose index lies in the
kernel {a : A a = 0} and zeroes the rest.
"""

from __future__ import annotations

import numpy as np

from ..boolcube import F2Matrix, f2_matvec, f2_transpose_matvec, subsets_of
from ..dist import DensePmf, SampleBatch
from ..errors import DimensionError
from ..fourier import Source
from ..rng import Rng


def noise_inject(batch: SampleBatch, A: F2Matrix, rng: Rng) -> SampleBatch:
    """Replace each x by x XOR A^T q for a fresh uniform q in {0,1}^m."""
    if A.n != batch.n:
        raise DimensionError(f"matrix has {A.n} columns, points have {batch.n}")
    if A.m == 0 or batch.m == 0:
        return SampleBatch(batch.bits.copy(), batch.n)
    q = rng.bits(batch.m, A.m)
    rows = A.to_bits()
    out = batch.bits.copy()
    for i in range(A.m):
        out ^= q[:, i:i + 1] & rows[i]
    return SampleBatch(out, batch.n)


def injected_source(source: Source, A: F2Matrix) -> Source:
    """Fresh samples from D pushed through the noise of A."""

    def draw(rng: Rng, m: int) -> SampleBatch:
        return noise_inject(source(rng.fork(0), m), A, rng.fork(1))

    return draw


def injected_pmf(p: DensePmf, A: F2Matrix) -> DensePmf:
    """D_A(x) = E_p D(x + A^T p), by enumerating all 2^m shifts."""
    if A.n != p.d:
        raise DimensionError(f"matrix has {A.n} columns, pmf has dimension {p.d}")
    idx = np.arange(p.probs.size, dtype=np.int64)
    acc = np.zeros_like(p.probs)
    for q in range(1 << A.m):
        acc += p.probs[idx ^ f2_transpose_matvec(A, q)]
    return DensePmf(acc / (1 << A.m))


def kernel_mask(A: F2Matrix) -> np.ndarray:
    """Boolean array over all 2^n subsets: True where A a = 0."""
    return np.array([f2_matvec(A, a) == 0 for a in range(1 << A.n)])


def isolates(A: F2Matrix, J: int, J_star: int) -> bool:
    """A 1_J = 0 and A 1_I != 0 for every other nonempty I inside J_star."""
    if f2_matvec(A, J) != 0:
        return False
    return all(f2_matvec(A, I) != 0 for I in subsets_of(J_star) if I and I != J)
