import math

import numpy as np
import pytest

import oracles
from juntalearn.boolcube import F2Matrix, chi_batch, mask_from_coords, unpack_index
from juntalearn.config import DEFAULT_CONSTANTS as CONST
from juntalearn.dist import (
    DensePmf,
    JuntaDistribution,
    NoisyParityDistribution,
    SampleBatch,
    bias_spectrum,
    empirical_pmf,
    junta_l1,
    pmf_from_bias,
    random_junta,
    sample,
)
from juntalearn.errors import InvalidPmfError, NoCandidate
from juntalearn.reductions import (
    FilteredSource,
    SparseSpectrum,
    bruteforce_solver,
    certification_statistic,
    corrupted_parity_table,
    filtered_mixture,
    find_heavy_fourier,
    find_parity_with_queries,
    heavy_gap,
    independent_labels,
    injected_pmf,
    isolating_matrix,
    junta_ljd_learner,
    lpdn_via_lpn,
    LpnInstance,
    kernel_mask,
    lpn_bruteforce_solve,
    lpn_sample_size,
    noise_inject,
    parity_correlations,
    parity_oracle,
    planted_lpn,
    query_trials,
    reduce_ljd_via_lpdn,
    reduce_lpdn_to_lpn,
    reduce_lpn_to_ljd,
    round_to_pmf,
    scan_lpdn_solver,
    survival_frequency,
    survival_lower_bound,
    table_oracle,
)
from juntalearn.reductions.lpdn import _SharedBase, flip_stream
from juntalearn.reductions.lpn import bruteforce_on_batch
from juntalearn.rng import Rng


def _source(D):
    return lambda r, m: SampleBatch(D.sample(r, m), D.n)


def _random_S(n, k, gen):
    return tuple(sorted(gen.choice(n, size=k, replace=False).tolist()))


# -- LPN ----------------------------------------------------------------------


class TestLpn:
    def test_noiseless_recovery(self, gen):
        ok = 0
        for i in range(100):
            S = _random_S(10, 2, gen)
            ok += lpn_bruteforce_solve(planted_lpn(10, 2, S, 0.0), 200, Rng(1).fork(i)) == mask_from_coords(S)
        assert ok == 100

    def test_noisy_recovery(self, gen):
        m = lpn_sample_size(10, 2, 0.25, 0.01, CONST.lpn)
        ok = 0
        for i in range(100):
            S = _random_S(10, 2, gen)
            ok += lpn_bruteforce_solve(planted_lpn(10, 2, S, 0.25), m, Rng(2).fork(i)) == mask_from_coords(S)
        assert ok >= 95

    def test_independent_labels_fail(self):
        inst = independent_labels(10, 2, 0.25)
        m = lpn_sample_size(10, 2, 0.25, 0.01, CONST.lpn)
        fails = sum(lpn_bruteforce_solve(inst, m, Rng(3).fork(i)) is None for i in range(100))
        assert fails >= 95

    def test_sample_size_formula(self):
        assert lpn_sample_size(10, 2, 0.25, 0.01, 1.0) == math.ceil(math.log(56 / 0.01) / 0.25)

    def test_correlations_against_loops(self, gen):
        bits = gen.integers(0, 2, size=(60, 6), dtype=np.uint8)
        y = gen.choice([-1, 1], size=60).astype(np.int8)
        masks, sums = parity_correlations(bits, y, 3)
        assert len(masks) == 1 + 6 + 15 + 20
        pts = [int(sum(int(b) << j for j, b in enumerate(row))) for row in bits]
        for A, s in zip(masks, sums):
            assert s == sum(oracles.parity_sign(A, x) * int(v) for x, v in zip(pts, y))

    def test_negative_parity_is_found(self):
        inst = planted_lpn(8, 2, (2, 5), 0.0)
        batch = inst.draw(Rng(0), 100)
        flipped = type(batch)(batch.bits, 8, -batch.labels)
        assert bruteforce_on_batch(flipped, 2, 0.0) == mask_from_coords((2, 5))


class TestQueries:
    def test_exact_parity(self):
        assert find_parity_with_queries(parity_oracle((0, 2)), 4, Rng(0), 5) == mask_from_coords((0, 2))

    def test_constant(self):
        assert find_parity_with_queries(lambda b: np.ones(b.shape[0]), 4, Rng(0), 5) == 0

    def test_negated_parity(self):
        assert find_parity_with_queries(parity_oracle((1,), sign=-1), 4, Rng(0), 3) == 0b10

    def test_corrupted_table(self, gen):
        t = query_trials(10, 0.05, 0.01, CONST.queries)
        ok = 0
        for i in range(100):
            S = _random_S(10, int(gen.integers(0, 4)), gen)
            table = corrupted_parity_table(10, S, 0.05, Rng(5).fork(i).fork(0))
            ok += find_parity_with_queries(table_oracle(table), 10, Rng(5).fork(i).fork(1), t) == mask_from_coords(S)
        assert ok >= 95

    def test_trials_reject_far_closeness(self):
        with pytest.raises(ValueError):
            query_trials(10, 0.25, 0.01, 1.0)


# -- noise injection ------------------------------------------------------------


class TestNoiseInjection:
    def test_zero_matrix_is_identity(self, gen):
        b = SampleBatch(gen.integers(0, 2, size=(50, 6), dtype=np.uint8), 6)
        out = noise_inject(b, F2Matrix.zeros(3, 6), Rng(0))
        assert out.bits.tobytes() == b.bits.tobytes()

    def test_unit_rows_kill_touching_characters(self):
        D = DensePmf.point_mass(6, 0)
        A = F2Matrix((0b1, 0b10), 6)
        out = noise_inject(sample(D, Rng(1), 40_000), A, Rng(2))
        c = bias_spectrum(empirical_pmf(out)).c
        for S in range(64):
            if S & 0b11:
                assert abs(c[S]) < 0.03
            else:
                assert c[S] == pytest.approx(1.0)

    def test_spectrum_law_exact(self, gen):
        for _ in range(100):
            n = int(gen.integers(2, 9))
            p = oracles.random_pmf(n, gen)
            A = F2Matrix.random(int(gen.integers(1, 4)), n, gen)
            got = injected_pmf(DensePmf(p), A).probs
            np.testing.assert_allclose(got, oracles.injected(p, A.rows), atol=1e-14)
            want = oracles.biases(p) * np.array([oracles.matvec(A.rows, a) == 0 for a in range(1 << n)])
            np.testing.assert_allclose(bias_spectrum(DensePmf(got)).c, want, atol=1e-12)

    def test_sampled_spectrum_matches(self, gen):
        p = oracles.random_pmf(5, gen)
        A = F2Matrix.random(2, 5, gen)
        out = noise_inject(sample(DensePmf(p), Rng(3), 200_000), A, Rng(4))
        np.testing.assert_allclose(bias_spectrum(empirical_pmf(out)).c, oracles.biases(p) * kernel_mask(A), atol=0.012)

    def test_survival_frequency(self):
        n, k = 10, 2
        trials = 10_000
        freq = survival_frequency(n, k, (2, 7), (2, 5, 7), trials, Rng(6))
        bound = survival_lower_bound(k)
        assert freq >= bound - 3 * math.sqrt(bound * (1 - bound) / trials)

    def test_isolating_matrix_gives_noisy_parity(self, gen):
        for _ in range(20):
            n = 8
            Jstar = _random_S(n, 3, gen)
            D = JuntaDistribution(n, Jstar, DensePmf(oracles.random_pmf(3, gen)))
            J = mask_from_coords(Jstar[:2])
            A = isolating_matrix(n, 2, J, mask_from_coords(Jstar), Rng(int(gen.integers(1 << 30))))
            c = bias_spectrum(injected_pmf(D.to_dense(), A)).c
            cd = oracles.biases(D.to_dense().probs)
            assert c[J] == pytest.approx(cd[J], abs=1e-12)
            others = np.delete(np.abs(c), [0, J])
            assert others.max() < 1e-12


# -- heavy coefficients and the junta learner ---------------------------------


def _scan(n, k, eps):
    return scan_lpdn_solver(n, k, heavy_gap(eps, k), 0.01, CONST.lpn)


class TestFindHeavy:
    def test_parity_hit_frequency(self):
        D = NoisyParityDistribution(8, (0, 1), 1, 0.0)
        solver = _scan(8, 2, 0.1)
        hits = [find_heavy_fourier(_source(D), 8, 2, 0.1, solver, Rng(7).fork(r), r) for r in range(1024)]
        freq = sum(h is not None and h.J == 0b11 for h in hits) / len(hits)
        assert freq >= 0.04
        assert all(h is None or h.J == 0b11 for h in hits)

    def test_uniform_misses(self):
        U = JuntaDistribution.uniform(8)
        solver = _scan(8, 2, 0.1)
        misses = sum(find_heavy_fourier(_source(U), 8, 2, 0.1, solver, Rng(8).fork(r)) is None for r in range(200))
        assert misses >= 190

    def test_full_chain_round(self):
        D = NoisyParityDistribution(6, (1, 4), -1, 0.0)
        solver = _chain(6, 2, 0.2)
        seen = [find_heavy_fourier(_source(D), 6, 2, 0.2, solver, Rng(9).fork(r), r) for r in range(40)]
        hits = [h for h in seen if h is not None]
        assert hits and all(h.J == mask_from_coords((1, 4)) and h.z < -0.9 for h in hits)


def _chain(n, k, eps):
    return lpdn_via_lpn(n, k, heavy_gap(eps, k), CONST)


class TestRoundToPmf:
    def test_valid_spectrum_unchanged(self, gen):
        p = oracles.random_pmf(3, gen)
        c = oracles.biases(p)
        Z = SparseSpectrum({A << 2: v for A, v in enumerate(c) if A})
        Q = round_to_pmf(Z, 6)
        assert Q.relevant == (2, 3, 4)
        np.testing.assert_allclose(Q.core.probs, p, atol=1e-12)

    def test_dip_is_clipped(self):
        f = np.full(4, 0.25)
        dip = 0.01
        f[2] -= 0.25 + dip
        f[[0, 1, 3]] += (0.25 + dip) / 3
        c = oracles.biases(f)
        Q = round_to_pmf(SparseSpectrum({A: v for A, v in enumerate(c) if A}), 2)
        assert Q.core.probs.min() >= 0
        assert oracles.l1(Q.core.probs, f) <= 2 * dip + 1e-12

    def test_within_twice_the_error(self, gen):
        for _ in range(50):
            d = int(gen.integers(1, 7))
            p = oracles.random_pmf(d, gen)
            noise = gen.normal(size=1 << d) * 0.02 / (1 << d)
            noise -= noise.mean()
            f = p + noise
            c = oracles.biases(f)
            Q = round_to_pmf(SparseSpectrum({A: v for A, v in enumerate(c) if A}), d)
            assert oracles.l1(Q.core.probs, p) <= 2 * oracles.l1(f, p) + 1e-12

    def test_empty_spectrum_is_uniform(self):
        Q = round_to_pmf(SparseSpectrum(), 5)
        assert Q.relevant == ()


class TestLjdViaLpdn:
    def test_noisy_parity(self):
        D = NoisyParityDistribution(10, (2, 6), 1, 0.125)
        ok = 0
        for i in range(30):
            res = reduce_ljd_via_lpdn(_source(D), 10, 2, 0.1, Rng(10).fork(i), _scan(10, 2, 0.1))
            ok += junta_l1(res.hypothesis, D) / 2 <= 0.2
        assert ok >= 27

    def test_uniform(self):
        U = JuntaDistribution.uniform(10)
        res = reduce_ljd_via_lpdn(_source(U), 10, 2, 0.1, Rng(11), _scan(10, 2, 0.1))
        assert res.spectrum.entries == {0: 1.0}
        assert res.hypothesis.relevant == ()

    def test_two_coefficients(self):
        c = np.array([1.0, 0.6, 0.0, 0.3])
        D = JuntaDistribution(10, (0, 1), DensePmf(pmf_from_bias(c)))
        tol = heavy_gap(0.1, 2)
        ok = 0
        for i in range(30):
            Z = reduce_ljd_via_lpdn(_source(D), 10, 2, 0.1, Rng(12).fork(i), _scan(10, 2, 0.1)).spectrum.entries
            ok += abs(Z.get(0b1, 0) - 0.6) <= tol and abs(Z.get(0b11, 0) - 0.3) <= tol
        assert ok >= 27

    def test_dedup_keeps_smallest_half_width(self, monkeypatch):
        from juntalearn.reductions import heavy

        fake = iter([heavy.HeavyFourierHit(1, 0.5, 0, 0.1), heavy.HeavyFourierHit(1, 0.4, 1, 0.05),
                     heavy.HeavyFourierHit(1, 0.3, 2, 0.2)])
        monkeypatch.setattr(heavy, "find_heavy_fourier", lambda *a, **kw: next(fake))
        res = heavy.reduce_ljd_via_lpdn(None, 4, 1, 0.1, Rng(0), lambda s, r: None, rounds=3)
        assert res.spectrum.entries[1] == 0.4 and len(res.hits) == 3


# -- LPDN ---------------------------------------------------------------------


class TestLpdn:
    @pytest.mark.parametrize("sign", [1, -1])
    def test_clean_parity(self, sign):
        D = NoisyParityDistribution(8, (1, 4), sign, 0.0)
        ok = 0
        for i in range(30):
            res = reduce_lpdn_to_lpn(_source(D), 8, 2, bruteforce_solver(CONST.lpn, 0.01), 0.1, Rng(13).fork(i))
            ok += res.J == 0b10010 and abs(res.c - sign) <= 0.1
        assert ok >= 27

    def test_noisy(self):
        D = NoisyParityDistribution(8, (0, 3, 6), -1, 0.2)
        res = reduce_lpdn_to_lpn(_source(D), 8, 3, bruteforce_solver(CONST.lpn, 0.01), 0.1, Rng(14), noise_bound=0.2)
        assert res.J == mask_from_coords((0, 3, 6))
        assert res.c == pytest.approx(-0.6, abs=0.1 * 0.6)

    def test_uniform_has_no_candidate(self):
        U = JuntaDistribution.uniform(8)
        with pytest.raises(NoCandidate):
            reduce_lpdn_to_lpn(_source(U), 8, 2, bruteforce_solver(CONST.lpn, 0.01), 0.2, Rng(15), noise_bound=0.25,
                               search_gap_floor=0.1)

    def test_outside_coordinate_fails(self):
        D = NoisyParityDistribution(8, (1, 4), 1, 0.0)
        solve = bruteforce_solver(CONST.lpn, 0.01)
        fails = 0
        for i in range(100):
            base = _SharedBase(_source(D), Rng(16).fork(i))
            fails += solve(LpnInstance(8, 2, 0.25, flip_stream(base, 8, 6)), Rng(17).fork(i)) is None
        assert fails >= 95

    def test_construction_law_inside(self):
        # j in J: x uniform and y = s chi_J(x) with D's noise rate
        D = NoisyParityDistribution(8, (1, 4), -1, 0.15)
        lb = flip_stream(_SharedBase(_source(D), Rng(18)), 8, 4)(Rng(19), 200_000)
        c = bias_spectrum(empirical_pmf(SampleBatch(lb.bits, 8))).c
        assert np.abs(c[1:]).max() < 0.015
        agree = (chi_batch((1, 4), lb.bits) * lb.labels).mean()
        assert agree == pytest.approx(-(1 - 2 * 0.15), abs=0.01)


# -- LPN through a junta learner ----------------------------------------------


class TestFiltering:
    def test_stream_law(self):
        S, eta = (0, 3, 5), 0.2
        src = FilteredSource(planted_lpn(8, 3, S, eta))
        c = bias_spectrum(empirical_pmf(src(Rng(20), 100_000))).c
        want = bias_spectrum(filtered_mixture(8, S, eta).to_dense()).c
        assert want[mask_from_coords(S)] == pytest.approx(0.6)
        np.testing.assert_allclose(c, want, atol=0.015)
        assert src.consumed >= 100_000

    def test_certification_expectation(self):
        inst = planted_lpn(10, 2, (2, 8), 0.2)
        lb = inst.draw(Rng(21), 200_000)
        assert certification_statistic(mask_from_coords((2, 8)), lb) == pytest.approx(0.6, abs=0.01)
        assert abs(certification_statistic(mask_from_coords((2, 7)), lb)) < 0.01
        assert abs(certification_statistic(0, lb)) < 0.01

    def test_recovery_and_certified_statistic(self):
        ok = 0
        for i in range(8):
            inst = planted_lpn(12, 2, (0, 3), 0.2)
            res = reduce_lpn_to_ljd(inst, junta_ljd_learner(CONST), 0.1, Rng(22).fork(i))
            ok += res.S == 0b1001
            last = res.rounds[-1]
            assert last["certified"] == res.S
            assert last["I"][res.S] > 2 * res.gap
            for r in res.rounds[:-1]:
                assert all(I <= 2 * r["gap"] for I in r["I"].values())
        assert ok >= 7

    def test_empty_secret_certifies_empty(self):
        inst = planted_lpn(10, 1, (), 0.2)
        res = reduce_lpn_to_ljd(inst, junta_ljd_learner(CONST), 0.1, Rng(23))
        assert res.S == 0
        assert res.rounds[-1]["I"][0] > 2 * res.gap
        assert res.rounds[-1]["I"][0] == pytest.approx(0.6, abs=0.1)
