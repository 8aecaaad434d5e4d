"""Disorder realizations and RK-sign state vectors.

An RK-sign state on N qubits assigns every computational basis
configuration sigma the amplitude

    psi_sigma = W_sigma * exp(-lambda * E_sigma) / sqrt(Z(lambda)),
    Z(lambda) = sum_sigma exp(-2 * lambda * E_sigma),

where the energies E_sigma are i.i.d. normal with mean 0 and variance N
and the signs W_sigma are i.i.d. uniform over {+1, -1}.  Amplitudes are
always assembled in the log domain so that Z never overflows or loses the
dominant terms, and are stored as real 64-bit floats.

Reproducibility contract
------------------------
Randomness comes from numpy's counter-based Philox generator.  The stream
for sample ``i`` of a given ensemble is keyed by
``SeedSequence(entropy=master_seed, spawn_key=(i,))``; energies are drawn
first (inverse-CDF transform of 53-bit open-interval uniforms, i.e.
``ndtri``), then signs.  The same (master_seed, sample_index) therefore
yields bit-identical realizations on every platform and under any degree
of outer parallelism.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import CapacityError

# 2**20 amplitudes (8 MiB) per state keeps a desk-scale ensemble in memory.
HARD_QUBIT_CAP = 20

_MAGIC = b"RKS1"


def _check_capacity(n_qubits: int, cap: int = HARD_QUBIT_CAP) -> None:
    if not 1 <= n_qubits <= cap:
        raise CapacityError(
            f"n_qubits={n_qubits} outside supported range [1, {cap}]"
        )


@dataclass(frozen=True)
class EnsembleParams:
    """Defining data of a disorder ensemble at one control parameter."""

    n_qubits: int
    lam: float
    n_samples: int
    master_seed: int

    def __post_init__(self):
        _check_capacity(self.n_qubits)
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")


@dataclass(frozen=True)
class DisorderRealization:
    """Frozen random data (energies, signs) of one ensemble member.

    Reusable across lambda: the realization is drawn once and states at
    any number of control-parameter values are built from it.
    """

    energies: np.ndarray
    signs: np.ndarray
    seed: int

    @property
    def n_qubits(self) -> int:
        return int(self.energies.size).bit_length() - 1


@dataclass(frozen=True)
class RkState:
    """Normalized real amplitude vector with its provenance."""

    n_qubits: int
    amplitudes: np.ndarray
    lam: float
    realization_seed: int


def sample_rng(master_seed: int, sample_index: int):
    """Philox generator plus 64-bit fingerprint for one sample stream."""
    ss = np.random.SeedSequence(
        entropy=int(master_seed) & (2**64 - 1), spawn_key=(int(sample_index),)
    )
    key = ss.generate_state(2, np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng, int(key[0])


def _open_uniform(rng, size: int) -> np.ndarray:
    # 53-bit integers offset by 1/2: uniform on the open interval (0, 1),
    # so ndtri never sees 0 or 1.
    return (rng.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) * 2.0**-53


def draw_realization(params: EnsembleParams, sample_index: int) -> DisorderRealization:
    """Draw the frozen (energies, signs) data for one ensemble member."""
    if not 0 <= sample_index < params.n_samples:
        raise ValueError(
            f"sample_index {sample_index} outside [0, {params.n_samples})"
        )
    _check_capacity(params.n_qubits)
    dim = 1 << params.n_qubits
    rng, fingerprint = sample_rng(params.master_seed, sample_index)
    energies = np.sqrt(params.n_qubits) * ndtri(_open_uniform(rng, dim))
    signs = 1.0 - 2.0 * rng.integers(0, 2, size=dim, dtype=np.int64)
    return DisorderRealization(energies=energies, signs=signs, seed=fingerprint)


def build_state(realization: DisorderRealization, lam: float) -> RkState:
    """Assemble the normalized RK-sign state at control parameter ``lam``.

    Log-domain construction: the largest exponent of -lam*E is subtracted
    before exponentiating, so the state is finite for any lam >= 0 even
    when lam*max|E| is far beyond the float64 exponent range.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    log_w = -lam * realization.energies
    mags = np.exp(log_w - log_w.max())
    mags /= np.linalg.norm(mags)
    return RkState(
        n_qubits=realization.n_qubits,
        amplitudes=realization.signs * mags,
        lam=float(lam),
        realization_seed=realization.seed,
    )


def overlap(state_a: RkState, state_b: RkState) -> float:
    """Inner product <a|b> of two real states of equal size."""
    if state_a.n_qubits != state_b.n_qubits:
        raise ValueError(
            f"qubit count mismatch: {state_a.n_qubits} vs {state_b.n_qubits}"
        )
    return float(np.dot(state_a.amplitudes, state_b.amplitudes))


def save_state(path, state: RkState) -> None:
    """Binary dump: b"RKS1", N (u32), lambda (f64), seed (u64), amplitudes.

    All fields little-endian; amplitudes are 2**N float64 values.  Used to
    feed external tools and the disentangler CLI.
    """
    header = _MAGIC + struct.pack(
        "<Id Q", state.n_qubits, state.lam, state.realization_seed & (2**64 - 1)
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.amplitudes, dtype="<f8").tobytes())


def load_state(path) -> RkState:
    """Read a state written by :func:`save_state`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        n_qubits, lam, seed = struct.unpack("<Id Q", fh.read(20))
        _check_capacity(n_qubits)
        amps = np.frombuffer(fh.read((1 << n_qubits) * 8), dtype="<f8").copy()
    if amps.size != 1 << n_qubits:
        raise ValueError("truncated amplitude block")
    return RkState(
        n_qubits=n_qubits, amplitudes=amps, lam=lam, realization_seed=seed
    )
