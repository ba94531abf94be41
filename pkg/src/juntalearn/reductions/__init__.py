"""Executable reductions between junta learning, noisy parity distributions and LPN."""

from .filtering import (
    FilteredSource,
    LpnToLjdResult,
    certification_statistic,
    filtered_mixture,
    junta_ljd_learner,
    reduce_lpn_to_ljd,
    rounded_evaluator,
)
from .heavy import (
    HeavyFourierHit,
    LjdResult,
    SparseSpectrum,
    find_heavy_fourier,
    heavy_gap,
    isolating_matrix,
    reduce_ljd_via_lpdn,
    round_to_pmf,
    survival_frequency,
    survival_lower_bound,
)
from .lpdn import LpdnResult, flip_stream, lpdn_via_lpn, reduce_lpdn_to_lpn, scan_lpdn_solver
from .lpn import (
    LpnInstance,
    bruteforce_solver,
    corrupted_parity_table,
    find_parity_with_queries,
    independent_labels,
    lpn_bruteforce_solve,
    lpn_sample_size,
    parity_correlations,
    parity_oracle,
    planted_lpn,
    query_trials,
    table_oracle,
)
from .noise import injected_pmf, injected_source, isolates, kernel_mask, noise_inject

__all__ = [name for name in dir() if not name.startswith("_")]
