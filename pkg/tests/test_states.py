import numpy as np
import pytest

from rksign.ensembles import map_samples
from rksign.errors import CapacityError
from rksign.states import (
    DisorderRealization,
    EnsembleParams,
    RkState,
    build_state,
    draw_realization,
    load_state,
    overlap,
    save_state,
)


def params(n=4, lam=0.3, n_samples=10, seed=42):
    return EnsembleParams(n_qubits=n, lam=lam, n_samples=n_samples, master_seed=seed)


class TestDrawRealization:
    def test_deterministic_rerun(self):
        p = params(n=1, seed=123)
        a = draw_realization(p, 0)
        b = draw_realization(p, 0)
        assert np.array_equal(a.energies, b.energies)
        assert np.array_equal(a.signs, b.signs)
        assert a.seed == b.seed

    def test_samples_differ(self):
        p = params(n=6)
        a, b = draw_realization(p, 0), draw_realization(p, 1)
        assert not np.array_equal(a.energies, b.energies)

    def test_energy_distribution(self):
        # Law of large numbers over 10^4 realizations at N=8.
        p = params(n=8, n_samples=10_000, seed=7)
        pooled = np.concatenate(
            [draw_realization(p, i).energies for i in range(p.n_samples)]
        )
        assert abs(pooled.mean()) < 0.01
        assert abs(pooled.var() - 8.0) / 8.0 < 0.05

    def test_sign_distribution(self):
        p = params(n=8, n_samples=10_000, seed=11)
        pooled = np.concatenate(
            [draw_realization(p, i).signs for i in range(p.n_samples)]
        )
        assert set(np.unique(pooled)) == {-1.0, 1.0}
        frac_plus = (pooled > 0).mean()
        sigma = 0.5 / np.sqrt(pooled.size)
        assert abs(frac_plus - 0.5) < 3 * sigma

    def test_index_bounds(self):
        with pytest.raises(ValueError):
            draw_realization(params(n_samples=3), 3)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            EnsembleParams(n_qubits=21, lam=0.0, n_samples=1, master_seed=0)
        with pytest.raises(CapacityError):
            EnsembleParams(n_qubits=0, lam=0.0, n_samples=1, master_seed=0)

    def test_worker_count_invariance(self):
        p = params(n=5, n_samples=8)
        task_args = [(p, i) for i in range(p.n_samples)]
        serial = map_samples(_energies_of, task_args, workers=1)
        parallel = map_samples(_energies_of, task_args, workers=2)
        for a, b in zip(serial, parallel):
            assert np.array_equal(a, b)


def _energies_of(task):
    p, i = task
    return draw_realization(p, i).energies


class TestBuildState:
    def test_lambda_zero_is_uniform(self):
        real = draw_realization(params(n=5), 0)
        state = build_state(real, 0.0)
        assert np.allclose(np.abs(state.amplitudes), 2**-2.5, atol=1e-14)
        assert np.array_equal(np.sign(state.amplitudes), real.signs)

    def test_hand_evaluated_two_level(self):
        real = DisorderRealization(
            energies=np.array([-1.0, 1.0]), signs=np.array([1.0, 1.0]), seed=0
        )
        state = build_state(real, 0.5)
        expected = np.array([np.exp(0.5), np.exp(-0.5)])
        expected /= np.sqrt(np.e + np.exp(-1.0))
        assert np.allclose(state.amplitudes, expected, atol=1e-14)

    def test_large_lambda_concentrates(self):
        real = DisorderRealization(
            energies=np.array([2.0, -5.0, 1.0, 3.0]),
            signs=np.array([1.0, -1.0, 1.0, 1.0]),
            seed=0,
        )
        state = build_state(real, 10.0)
        assert abs(abs(state.amplitudes[1]) - 1.0) < 1e-12
        assert np.all(np.abs(np.delete(state.amplitudes, 1)) < 1e-12)

    @pytest.mark.parametrize("lam", [0.0, 0.7, 1.5, 50.0])
    def test_normalized_and_finite(self, lam):
        real = draw_realization(params(n=10), 2)
        state = build_state(real, lam)
        assert np.all(np.isfinite(state.amplitudes))
        assert abs(np.sum(state.amplitudes**2) - 1.0) < 1e-12

    def test_log_domain_at_depth(self):
        # lam * max|E| is ~ 300 here; naive exp would overflow.
        real = draw_realization(
            EnsembleParams(n_qubits=18, lam=0.0, n_samples=1, master_seed=3), 0
        )
        state = build_state(real, 1.5)
        assert np.all(np.isfinite(state.amplitudes))
        assert abs(np.sum(state.amplitudes**2) - 1.0) < 1e-12

    def test_sign_independence_of_magnitudes(self):
        real = draw_realization(params(n=6), 1)
        flipped = DisorderRealization(
            energies=real.energies, signs=-real.signs, seed=real.seed
        )
        a = build_state(real, 0.8).amplitudes
        b = build_state(flipped, 0.8).amplitudes
        assert np.array_equal(np.abs(a), np.abs(b))
        assert np.array_equal(a, -b)


class TestOverlap:
    def test_self_overlap(self):
        state = build_state(draw_realization(params(n=7), 0), 0.4)
        assert abs(overlap(state, state) - 1.0) < 1e-12

    def test_equal_lambda_same_realization(self):
        real = draw_realization(params(n=7), 0)
        a, b = build_state(real, 0.4), build_state(real, 0.4)
        assert abs(overlap(a, b) - 1.0) < 1e-12

    def test_closed_form(self):
        # Signs cancel for a shared realization; small lambdas keep the
        # raw exponentials finite for a direct check.
        real = draw_realization(params(n=6), 3)
        lam1, lam2 = 0.2, 0.5
        a, b = build_state(real, lam1), build_state(real, lam2)
        num = np.sum(np.exp(-(lam1 + lam2) * real.energies))
        z1 = np.sum(np.exp(-2 * lam1 * real.energies))
        z2 = np.sum(np.exp(-2 * lam2 * real.energies))
        assert abs(overlap(a, b) - num / np.sqrt(z1 * z2)) < 1e-12

    def test_symmetry_exact(self):
        real = draw_realization(params(n=6), 0)
        a, b = build_state(real, 0.1), build_state(real, 0.9)
        assert overlap(a, b) == overlap(b, a)

    def test_bound(self):
        r1 = draw_realization(params(n=6, seed=1), 0)
        r2 = draw_realization(params(n=6, seed=2), 0)
        v = overlap(build_state(r1, 0.3), build_state(r2, 0.3))
        assert abs(v) <= 1.0 + 1e-12

    def test_dimension_mismatch(self):
        a = build_state(draw_realization(params(n=3), 0), 0.0)
        b = build_state(draw_realization(params(n=4), 0), 0.0)
        with pytest.raises(ValueError):
            overlap(a, b)


class TestStateFile:
    def test_roundtrip(self, tmp_path):
        state = build_state(draw_realization(params(n=6), 1), 0.7)
        path = tmp_path / "state.rks"
        save_state(path, state)
        back = load_state(path)
        assert back.n_qubits == state.n_qubits
        assert back.lam == state.lam
        assert back.realization_seed == state.realization_seed
        assert np.array_equal(back.amplitudes, state.amplitudes)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.rks"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            load_state(path)

    def test_header_layout(self, tmp_path):
        state = RkState(
            n_qubits=1,
            amplitudes=np.array([1.0, 0.0]),
            lam=0.25,
            realization_seed=7,
        )
        path = tmp_path / "one.rks"
        save_state(path, state)
        raw = path.read_bytes()
        assert raw[:4] == b"RKS1"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert np.frombuffer(raw[8:16], dtype="<f8")[0] == 0.25
        assert int.from_bytes(raw[16:24], "little") == 7
        assert len(raw) == 24 + 16
