from itertools import chain, combinations

import numpy as np
import pytest

from oracles import dense_rdm, random_state
from rksign.disentangle import CliffordGate, apply_gate
from rksign.entanglement import (
    Bipartition,
    EntanglementSpectrum,
    entropy_of_cut,
    half_bipartition,
    reduced_density_matrix,
    spectrum,
    von_neumann_entropy,
)
from rksign.states import EnsembleParams, build_state, draw_realization


def rk_state(n, lam, seed=5, index=0):
    p = EnsembleParams(n_qubits=n, lam=lam, n_samples=index + 1, master_seed=seed)
    return build_state(draw_realization(p, index), lam)


def proper_subsets(n):
    qubits = range(n)
    return chain.from_iterable(combinations(qubits, k) for k in range(1, n))


class TestBipartition:
    def test_sorts_indices(self):
        part = Bipartition((3, 1), 5)
        assert part.subset_a == (1, 3)
        assert part.subset_b == (0, 2, 4)
        assert part.complement().subset_a == (0, 2, 4)

    @pytest.mark.parametrize(
        "subset,n", [((), 3), ((0, 0), 3), ((3,), 3), ((-1,), 3), ((0, 1, 2), 3)]
    )
    def test_rejects_invalid(self, subset, n):
        with pytest.raises(ValueError):
            Bipartition(subset, n)


class TestReducedDensityMatrix:
    def test_all_zeros_state(self):
        psi = np.array([1.0, 0.0, 0.0, 0.0])
        rho = reduced_density_matrix(psi, Bipartition((0,), 2))
        assert np.allclose(rho, np.diag([1.0, 0.0]))

    def test_bell_state(self):
        psi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
        rho = reduced_density_matrix(psi, Bipartition((0,), 2))
        assert np.allclose(rho, np.eye(2) / 2)

    def test_matches_dense_oracle_all_subsets(self):
        for n in (2, 3, 4):
            psi = random_state(n, seed=n)
            for subset in proper_subsets(n):
                got = reduced_density_matrix(psi, Bipartition(subset, n))
                want = dense_rdm(psi, subset, n)
                assert np.allclose(got, want, atol=1e-12), (n, subset)

    def test_rk_state_subset(self):
        state = rk_state(4, 0.6)
        part = Bipartition((1, 3), 4)
        got = reduced_density_matrix(state, part)
        want = dense_rdm(state.amplitudes, (1, 3), 4)
        assert np.allclose(got, want, atol=1e-12)
        assert abs(np.trace(got) - 1.0) < 1e-12
        assert np.allclose(got, got.T, atol=1e-14)

    def test_complex_input(self):
        psi = random_state(3, seed=9, complex_valued=True)
        part = Bipartition((0, 2), 3)
        got = reduced_density_matrix(psi, part)
        assert np.allclose(got, dense_rdm(psi, (0, 2), 3), atol=1e-12)


class TestSpectrum:
    def test_product_state(self):
        psi = np.zeros(16)
        psi[0] = 1.0
        spec = spectrum(psi, half_bipartition(4))
        assert np.allclose(spec.eigenvalues, [0, 0, 0, 1], atol=1e-12)

    def test_ghz_half_cut(self):
        psi = np.zeros(16)
        psi[0] = psi[-1] = 1 / np.sqrt(2)
        spec = spectrum(psi, half_bipartition(4))
        assert np.allclose(spec.eigenvalues, [0, 0, 0.5, 0.5], atol=1e-12)

    def test_matches_dense_oracle(self):
        state = rk_state(4, 0.4, seed=8)
        for subset in proper_subsets(4):
            part = Bipartition(subset, 4)
            got = spectrum(state, part).eigenvalues
            want = np.sort(np.linalg.eigvalsh(dense_rdm(state.amplitudes, subset, 4)))
            want = want[-got.size:]  # larger side keeps extra zeros
            assert np.allclose(got, want, atol=1e-10), subset

    def test_properties(self):
        spec = spectrum(rk_state(6, 0.3), half_bipartition(6))
        eig = spec.eigenvalues
        assert np.all(np.diff(eig) >= 0)
        assert np.all(eig >= 0)
        assert abs(eig.sum() - 1.0) < 1e-10

    def test_swaps_to_smaller_side(self):
        psi = random_state(4, seed=3)
        spec = spectrum(psi, Bipartition((0, 1, 2), 4))
        assert spec.eigenvalues.size == 2


class TestEntropy:
    def test_bell_is_one_bit(self):
        psi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
        assert abs(entropy_of_cut(psi, Bipartition((0,), 2)) - 1.0) < 1e-12

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_uniform_spectrum(self, k):
        eig = np.full(2**k, 2.0**-k)
        spec = EntanglementSpectrum(eig, Bipartition(tuple(range(k)), 2 * k))
        assert abs(von_neumann_entropy(spec) - k) < 1e-12

    def test_zero_times_log_zero(self):
        assert von_neumann_entropy(np.array([0.0, 0.0, 1.0])) == 0.0

    def test_complementarity(self):
        for n, seed in ((5, 1), (6, 2)):
            psi = random_state(n, seed=seed, complex_valued=(seed == 2))
            for subset in [(0,), (1, 3), tuple(range(n // 2))]:
                part = Bipartition(subset, n)
                s_a = entropy_of_cut(psi, part)
                s_b = entropy_of_cut(psi, part.complement())
                assert abs(s_a - s_b) < 1e-9

    def test_bounds(self):
        for seed in range(4):
            psi = random_state(5, seed=seed)
            for subset in [(0,), (0, 4), (1, 2, 3)]:
                s = entropy_of_cut(psi, Bipartition(subset, 5))
                assert -1e-12 <= s <= min(len(subset), 5 - len(subset)) + 1e-9

    def test_local_unitary_invariance(self):
        psi = random_state(5, seed=7, complex_valued=True)
        part = Bipartition((0, 2), 5)
        base = spectrum(psi, part).eigenvalues
        for gate in (CliffordGate("h", (2,)), CliffordGate("s", (0,))):
            rotated = psi.copy()
            apply_gate(rotated, gate)
            assert np.allclose(spectrum(rotated, part).eigenvalues, base, atol=1e-10)

    def test_rk_entropy_volume_law_tendency(self):
        # Half-cut entropy at lam=0 is near-maximal, and drops at large lam.
        s_small = entropy_of_cut(rk_state(10, 0.0), half_bipartition(10))
        s_large = entropy_of_cut(rk_state(10, 1.5), half_bipartition(10))
        assert s_small > 3.5
        assert s_large < s_small

    def test_rk_entropy_density_frozen_value(self):
        # Ensemble mean at lam=0, N=14 sits a Page-like correction below
        # maximal: measured S = N/2 - 0.72 bits, i.e. S/N = 0.449.
        n, n_samples = 14, 24
        p = EnsembleParams(n_qubits=n, lam=0.0, n_samples=n_samples, master_seed=404)
        s = np.mean([
            entropy_of_cut(build_state(draw_realization(p, i), 0.0),
                           half_bipartition(n))
            for i in range(n_samples)
        ])
        assert abs(s / n - 0.449) < 0.005
