import numpy as np
import pytest

from oracles import (
    brute_force_m2,
    brute_force_purity_sum,
    dense_expectation,
    random_state,
)
from rksign.disentangle import random_clifford_state, random_gate, apply_gate
from rksign.errors import CapacityError
from rksign.magic import (
    MAGIC_QUBIT_CAP,
    PauliString,
    magic_scan,
    pauli_expectation,
    purity_sum,
    stabilizer_renyi_2,
)
from rksign.states import EnsembleParams, build_state, draw_realization


def zero_state(n):
    psi = np.zeros(2**n)
    psi[0] = 1.0
    return psi


class TestPauliExpectation:
    def test_identity(self):
        psi = random_state(3, seed=1)
        assert abs(pauli_expectation(psi, PauliString(0, 0)) - 1.0) < 1e-14

    def test_zero_state_z_and_x(self):
        psi = zero_state(4)
        for q in range(4):
            assert abs(pauli_expectation(psi, PauliString(0, 1 << q)) - 1.0) < 1e-14
            assert abs(pauli_expectation(psi, PauliString(1 << q, 0))) < 1e-14

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("complex_valued", [False, True])
    def test_matches_dense_kronecker_oracle(self, n, complex_valued):
        psi = random_state(n, seed=10 * n + complex_valued, complex_valued=complex_valued)
        for x in range(2**n):
            for z in range(2**n):
                got = pauli_expectation(psi, PauliString(x, z))
                want = dense_expectation(psi, x, z, n)
                assert abs(got - want) < 1e-12, (x, z)

    def test_mask_width_validation(self):
        with pytest.raises(ValueError):
            pauli_expectation(zero_state(2), PauliString(8, 0))


class TestStabilizerRenyi2:
    def test_zero_state_is_stabilizer(self):
        assert abs(stabilizer_renyi_2(zero_state(5))) < 1e-12

    def test_real_magic_single_qubit(self):
        # cos(pi/8)|0> + sin(pi/8)|1>: <Z> = <X> = 1/sqrt(2), <Y> = 0,
        # so sum <P>^4 = 1 + 1/4 + 1/4 and M2 = 2 - log2(3).
        psi = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
        expect = 2.0 - np.log2(3.0)
        assert abs(stabilizer_renyi_2(psi) - expect) < 1e-12
        assert abs(brute_force_m2(psi, 1) - expect) < 1e-12

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("complex_valued", [False, True])
    def test_matches_brute_force(self, n, complex_valued):
        psi = random_state(n, seed=5 * n + complex_valued, complex_valued=complex_valued)
        got = stabilizer_renyi_2(psi)
        assert abs(got - brute_force_m2(psi, n)) < 1e-10

    def test_purity_identity(self):
        for n in (2, 4, 6, 8):
            psi = random_state(n, seed=n)
            assert abs(purity_sum(psi) - 2.0**n) < 1e-8
        psi = random_state(3, seed=77, complex_valued=True)
        assert abs(purity_sum(psi) - 8.0) < 1e-10
        assert abs(brute_force_purity_sum(psi, 3) - 8.0) < 1e-10

    def test_odd_y_skip_equivalence(self):
        for n in (2, 4, 6):
            psi = random_state(n, seed=30 + n)
            a = stabilizer_renyi_2(psi, skip_odd_y=True)
            b = stabilizer_renyi_2(psi, skip_odd_y=False)
            assert abs(a - b) < 1e-12

    def test_clifford_invariance(self):
        rng = np.random.default_rng(2024)
        state = build_state(
            draw_realization(
                EnsembleParams(n_qubits=6, lam=0.0, n_samples=1, master_seed=8), 0
            ),
            0.3,
        )
        base = stabilizer_renyi_2(state)
        for _ in range(10):
            psi = state.amplitudes.astype(np.complex128)
            for _ in range(60):
                apply_gate(psi, random_gate(rng, 6))
            assert abs(stabilizer_renyi_2(psi) - base) < 1e-9

    def test_additivity_on_product_states(self):
        a = random_state(2, seed=3)
        b = random_state(3, seed=4)
        joint = np.kron(b, a)  # qubit 0..1 from a, 2..4 from b
        m_joint = stabilizer_renyi_2(joint)
        assert abs(m_joint - stabilizer_renyi_2(a) - stabilizer_renyi_2(b)) < 1e-9

    def test_bounds(self):
        for seed in range(5):
            psi = random_state(4, seed=seed, complex_valued=True)
            m2 = stabilizer_renyi_2(psi)
            assert -1e-9 <= m2 <= 4 + 1e-9

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            stabilizer_renyi_2(np.zeros(2**13), cap=MAGIC_QUBIT_CAP)

    def test_clifford_circuit_has_zero_magic(self):
        psi = random_clifford_state(5, 100, seed=12)
        assert abs(stabilizer_renyi_2(psi)) < 1e-10


class TestMagicScan:
    def test_structure_and_bounds(self):
        params = EnsembleParams(n_qubits=5, lam=0.0, n_samples=6, master_seed=21)
        results = magic_scan(params, [0.0, 0.4, 1.5])
        assert [r.lam for r in results] == [0.0, 0.4, 1.5]
        for r in results:
            assert len(r.per_sample) == 6
            assert all(-1e-9 <= m <= 5 + 1e-9 for m in r.per_sample)
            assert abs(r.m2_mean - np.mean(r.per_sample)) < 1e-12

    def test_flat_then_drop(self):
        # M2/N is nearly lambda-independent in the small-lambda regime and
        # drops well before lam = 1.5.
        params = EnsembleParams(n_qubits=8, lam=0.0, n_samples=12, master_seed=31)
        r0, r02, r15 = magic_scan(params, [0.0, 0.2, 1.5])
        assert abs(r0.m2_mean - r02.m2_mean) < 0.15
        assert r15.m2_mean < r0.m2_mean - 0.5
        # magic survives deep in the frozen phase, if no longer near-maximal
        assert r15.m2_mean > 0.2

    def test_scan_capacity(self):
        params = EnsembleParams(n_qubits=13, lam=0.0, n_samples=2, master_seed=1)
        with pytest.raises(CapacityError):
            magic_scan(params, [0.0])

    def test_worker_invariance(self):
        params = EnsembleParams(n_qubits=5, lam=0.0, n_samples=4, master_seed=2)
        a = magic_scan(params, [0.1], workers=1)
        b = magic_scan(params, [0.1], workers=2)
        assert a[0].per_sample == b[0].per_sample
