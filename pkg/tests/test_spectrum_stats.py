import numpy as np
import pytest
from scipy.integrate import quad

from rksign.spectrum_stats import (
    DEFAULT_BINS,
    DEFAULT_RMAX,
    GOE,
    GUE,
    POISSON,
    GapRatioPool,
    gap_ratios,
    histogram_table,
    kl_divergence,
    mean_rtilde,
    pool_from_ensemble,
    reference_bin_mass,
    reference_density,
)
from rksign.states import EnsembleParams


def pool_of(r_values):
    r = np.asarray(r_values, dtype=float)
    return GapRatioPool(ratios_r=r, ratios_rtilde=np.minimum(r, 1.0 / r))


class TestGapRatios:
    def test_hand_example(self):
        r, rt = gap_ratios(np.array([0.1, 0.2, 0.4, 0.7]))
        assert np.allclose(r, [2.0, 1.5])
        assert np.allclose(rt, [0.5, 2.0 / 3.0])

    def test_degenerate_pair_guard(self):
        # Zero gap inside: r = 0 kept, the infinite partner dropped, and
        # both rtilde entries (0 and 0) kept.
        r, rt = gap_ratios(np.array([0.1, 0.2, 0.2, 0.5]))
        assert np.allclose(r, [0.0])
        assert np.allclose(rt, [0.0, 0.0])

    def test_fully_degenerate_dropped(self):
        r, rt = gap_ratios(np.array([0.25, 0.25, 0.25, 0.25]))
        assert r.size == 0 and rt.size == 0

    def test_short_spectrum_empty(self):
        r, rt = gap_ratios(np.array([0.4, 0.6]))
        assert r.size == 0 and rt.size == 0

    def test_rtilde_is_min_of_r_and_inverse(self):
        rng = np.random.default_rng(3)
        spec = np.sort(rng.random(40))
        r, rt = gap_ratios(spec)
        assert np.array_equal(rt, np.minimum(r, 1.0 / r))
        assert np.all((rt >= 0) & (rt <= 1))


class TestReferenceDensities:
    def test_poisson_at_zero(self):
        assert reference_density(POISSON, 0.0) == 1.0

    def test_goe_at_one(self):
        assert abs(reference_density(GOE, 1.0) - np.sqrt(3.0) / 4.0) < 1e-14

    @pytest.mark.parametrize("kind", [GOE, GUE, POISSON])
    def test_normalization(self, kind):
        total, _ = quad(lambda r: reference_density(kind, r), 0, np.inf, limit=200)
        assert abs(total - 1.0) < 1e-6

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            reference_density("sp", 1.0)

    @pytest.mark.parametrize("kind", [GOE, GUE, POISSON])
    def test_bin_masses_sum_to_one(self, kind):
        edges = np.linspace(0, DEFAULT_RMAX, DEFAULT_BINS + 1)
        q = reference_bin_mass(kind, edges)
        assert q.size == DEFAULT_BINS + 1
        assert np.all(q > 0)
        assert abs(q.sum() - 1.0) < 1e-9


def sample_goe_ratios(n, seed):
    """Rejection-sample the GOE surmise using Poisson-form proposals."""
    rng = np.random.default_rng(seed)
    out = []
    # envelope constant: max over r of P_goe(r) (1+r)^2, found numerically
    grid = np.linspace(0, 200, 400_001)
    c = 1.05 * np.max(reference_density(GOE, grid) * (1 + grid) ** 2)
    while len(out) < n:
        u = rng.random(2 * n)
        r = u / (1 - u)  # inverse CDF of (1+r)^-2
        accept = rng.random(2 * n) * c / (1 + r) ** 2 < reference_density(GOE, r)
        out.extend(r[accept][: n - len(out)])
    return np.asarray(out)


class TestKlDivergence:
    def test_self_consistency_goe(self):
        pool = pool_of(sample_goe_ratios(1_000_000, seed=12))
        assert kl_divergence(pool, GOE) < 0.01

    def test_discriminates(self):
        pool = pool_of(sample_goe_ratios(100_000, seed=4))
        assert kl_divergence(pool, POISSON) > 10 * kl_divergence(pool, GOE)

    def test_binwise_identity_and_gibbs(self):
        from rksign.spectrum_stats import kl_from_masses

        rng = np.random.default_rng(5)
        p = rng.random(61)
        p /= p.sum()
        assert kl_from_masses(p, p) == 0.0
        for _ in range(20):
            q = rng.random(61) + 1e-3
            q /= q.sum()
            assert kl_from_masses(p, q) >= 0.0

    def test_nonnegative_and_deterministic(self):
        rng = np.random.default_rng(8)
        pool = pool_of(rng.exponential(size=5000) + 1e-6)
        d1 = kl_divergence(pool, GOE)
        d2 = kl_divergence(pool, GOE)
        assert d1 == d2
        assert d1 >= 0.0

    def test_empty_pool(self):
        with pytest.raises(ValueError):
            kl_divergence(pool_of([]), GOE)


class TestMeanRtilde:
    def test_poisson_limit_from_uniform_spectra(self):
        # Independent uniform eigenvalues follow Poisson gap statistics.
        rng = np.random.default_rng(21)
        pools = []
        for _ in range(400):
            from rksign.spectrum_stats import gap_ratios as gr

            _, rt = gr(np.sort(rng.random(200)))
            pools.append(rt)
        rt = np.concatenate(pools)
        pool = GapRatioPool(ratios_r=rt, ratios_rtilde=rt)
        mean, err = mean_rtilde(pool)
        assert abs(mean - (2 * np.log(2) - 1)) < 0.01
        assert 0 < err < 0.01

    def test_empty(self):
        with pytest.raises(ValueError):
            mean_rtilde(GapRatioPool(np.empty(0), np.empty(0)))


class TestEnsemblePool:
    def test_pool_and_merge(self):
        p = EnsembleParams(n_qubits=6, lam=0.0, n_samples=6, master_seed=5)
        pool = pool_from_ensemble(p)
        assert pool.n_samples == 6
        # 2^3 eigenvalues -> 7 gaps -> 6 ratio pairs per sample
        assert pool.ratios_rtilde.size == 6 * 6
        merged = pool.merge(pool)
        assert merged.ratios_r.size == 2 * pool.ratios_r.size
        assert merged.n_samples == 12

    def test_worker_invariance(self):
        p = EnsembleParams(n_qubits=6, lam=0.2, n_samples=4, master_seed=9)
        a = pool_from_ensemble(p, workers=1)
        b = pool_from_ensemble(p, workers=2)
        assert np.array_equal(a.ratios_r, b.ratios_r)
        assert np.array_equal(a.ratios_rtilde, b.ratios_rtilde)


class TestHistogramTable:
    def test_structure(self):
        pool = pool_of(sample_goe_ratios(20_000, seed=2))
        rows = histogram_table(pool)
        assert len(rows) == DEFAULT_BINS + 1
        assert rows[-1][1] == np.inf
        emp = sum(row[2] for row in rows)
        assert abs(emp - 1.0) < 1e-12
        for col in (3, 4, 5):
            assert abs(sum(row[col] for row in rows) - 1.0) < 1e-9
