"""Reduced density matrices over arbitrary qubit subsets and their spectra.

Convention: basis configuration ``sigma`` is an integer whose bit ``q`` is
the value of qubit ``q`` (qubit 0 = least significant bit).  A subsystem
index is assembled the same way: bit ``j`` of the subsystem index is the
value of the subset's j-th qubit in ascending order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EigensolverError

_LOG2 = np.log(2.0)


@dataclass(frozen=True)
class Bipartition:
    """A nonempty proper subset of the qubits of an N-qubit register."""

    subset_a: tuple
    n_qubits: int

    def __post_init__(self):
        subset = tuple(sorted(int(q) for q in self.subset_a))
        object.__setattr__(self, "subset_a", subset)
        if not subset:
            raise ValueError("subset_a must be nonempty")
        if len(set(subset)) != len(subset):
            raise ValueError(f"duplicate qubit indices in {subset}")
        if subset[0] < 0 or subset[-1] >= self.n_qubits:
            raise ValueError(f"qubit indices {subset} out of range [0, {self.n_qubits})")
        if len(subset) >= self.n_qubits:
            raise ValueError("subset_a must be a proper subset")

    @property
    def subset_b(self) -> tuple:
        in_a = set(self.subset_a)
        return tuple(q for q in range(self.n_qubits) if q not in in_a)

    def complement(self) -> "Bipartition":
        return Bipartition(self.subset_b, self.n_qubits)


def half_bipartition(n_qubits: int) -> Bipartition:
    """The fixed half cut {0, ..., floor(N/2) - 1}."""
    return Bipartition(tuple(range(n_qubits // 2)), n_qubits)


@dataclass(frozen=True)
class EntanglementSpectrum:
    """Ascending eigenvalues of a reduced density matrix plus provenance."""

    eigenvalues: np.ndarray
    bipartition: Bipartition
    lam: float = float("nan")
    seed: int = 0


@lru_cache(maxsize=64)
def _gather_index(subset_a: tuple, n_qubits: int) -> np.ndarray:
    """Index remap: position (a << |B|) | b  ->  source configuration sigma."""
    subset_b = tuple(
        q for q in range(n_qubits) if q not in set(subset_a)
    )
    k_a, k_b = len(subset_a), len(subset_b)
    pos = np.arange(1 << n_qubits, dtype=np.int64)
    a_idx = pos >> k_b
    b_idx = pos & ((1 << k_b) - 1)
    sigma = np.zeros_like(pos)
    for j, q in enumerate(subset_a):
        sigma |= ((a_idx >> j) & 1) << q
    for j, q in enumerate(subset_b):
        sigma |= ((b_idx >> j) & 1) << q
    return sigma


def _amplitudes(state) -> np.ndarray:
    return state.amplitudes if hasattr(state, "amplitudes") else np.asarray(state)


def subsystem_matrix(state, part: Bipartition) -> np.ndarray:
    """Amplitudes reshaped to 2^|A| x 2^|B| with subset-A bits leading."""
    psi = _amplitudes(state)
    if psi.size != 1 << part.n_qubits:
        raise ValueError(
            f"state has {psi.size} amplitudes, bipartition expects {1 << part.n_qubits}"
        )
    k_b = part.n_qubits - len(part.subset_a)
    return psi[_gather_index(part.subset_a, part.n_qubits)].reshape(
        1 << len(part.subset_a), 1 << k_b
    )


def reduced_density_matrix(state, part: Bipartition) -> np.ndarray:
    """rho_A = Tr_B |psi><psi| for the requested subset A."""
    m = subsystem_matrix(state, part)
    return m @ m.conj().T


def spectrum(state, part: Bipartition, clamp: float = 1e-10) -> EntanglementSpectrum:
    """Ascending eigenvalues of rho_A (negatives within ``clamp`` zeroed).

    The Gram matrix of the smaller side of the cut is diagonalized, which
    gives the identical nonzero spectrum at half the eigensolver cost.
    """
    if len(part.subset_a) > part.n_qubits - len(part.subset_a):
        part = part.complement()
    m = subsystem_matrix(state, part)
    seed = getattr(state, "realization_seed", 0)
    try:
        eig = np.linalg.eigvalsh(m @ m.conj().T)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc), seed=seed) from exc
    if eig.min() < -clamp:
        raise EigensolverError(
            f"eigenvalue {eig.min():.3e} below -{clamp:.0e}", seed=seed
        )
    np.clip(eig, 0.0, None, out=eig)
    return EntanglementSpectrum(
        eigenvalues=eig,
        bipartition=part,
        lam=getattr(state, "lam", float("nan")),
        seed=seed,
    )


def von_neumann_entropy(spec) -> float:
    """S = -sum a_i log2 a_i in bits, with 0 log 0 := 0."""
    a = spec.eigenvalues if isinstance(spec, EntanglementSpectrum) else np.asarray(spec)
    a = a[a > 0.0]
    return float(-(a * np.log(a)).sum() / _LOG2)


def entropy_of_cut(state, part: Bipartition) -> float:
    """Convenience: half-cut (or any-cut) entropy of a state in bits."""
    return von_neumann_entropy(spectrum(state, part))
