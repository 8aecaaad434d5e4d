"""Metropolis entanglement annealing over random Clifford circuits.

A proposed gate (Hadamard, phase S, or CNOT, drawn uniformly) is kept
whenever it does not increase the entanglement cost; a cost increase
Delta is kept with probability exp(-beta(t) * Delta), where beta(t) is
the annealing schedule.  The cost is the mean von Neumann entropy over
the N contiguous half-size qubit blocks {i, ..., i + floor(N/2) - 1 mod N}
(for even N complementary blocks carry identical entropy, so only the
N/2 distinct ones are evaluated); an alternative exhaustive mode averages
over every half-size subset and is tractable for N <= 8.

States in this module are complex (the S gate leaves the reals), and a
rejected proposal is undone exactly: CNOT is its own inverse and S is
reverted by a direct S-dagger, both pure data movement; the Hadamard
pair rotation rounds, so rejected Hadamards restore a snapshot instead.

Efficiency of a run is 1 - S_final/S_initial on the fixed half cut
{0..floor(N/2)-1}; an ensemble's disentangling performance is
eta = 1 - mean(S_f/S_i), with S_i ~ 0 inputs excluded from the mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import os

import numpy as np
from scipy.special import xlogy

from .ensembles import map_samples
from .entanglement import Bipartition, entropy_of_cut, half_bipartition
from .states import EnsembleParams, build_state, draw_realization

# torch's batched small-matrix eigensolver is ~2x faster than numpy's on
# the annealer's 2^(N/2) Gram stacks; purely optional (RKSIGN_NO_TORCH=1
# or a missing install selects numpy).  Results on one installation are
# bit-reproducible either way.
_torch = None
if os.environ.get("RKSIGN_NO_TORCH", "") not in ("1", "true", "yes"):
    try:
        import torch as _torch
    except ImportError:
        _torch = None
_torch_ready = False

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_DEGENERATE_ENTROPY = 1e-6  # bits; below this S_f/S_i is meaningless

HADAMARD = "h"
PHASE_S = "s"
CNOT = "cnot"
_KINDS = (HADAMARD, PHASE_S, CNOT)


@dataclass(frozen=True)
class CliffordGate:
    """One gate of the {H, S, CNOT} generating set."""

    kind: str
    qubits: tuple

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == CNOT:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"CNOT needs two distinct qubits, got {self.qubits}")
        elif len(self.qubits) != 1:
            raise ValueError(f"{self.kind} acts on one qubit, got {self.qubits}")


def _check_qubits(gate: CliffordGate, n: int) -> None:
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")


def apply_gate(psi: np.ndarray, gate: CliffordGate) -> np.ndarray:
    """Apply the gate in place to a complex amplitude vector."""
    n = psi.size.bit_length() - 1
    _check_qubits(gate, n)
    if gate.kind == HADAMARD:
        q = gate.qubits[0]
        v = psi.reshape(-1, 2, 1 << q)
        a = v[:, 0, :].copy()
        b = v[:, 1, :]
        v[:, 0, :] = (a + b) * _INV_SQRT2
        v[:, 1, :] = (a - b) * _INV_SQRT2
    elif gate.kind == PHASE_S:
        q = gate.qubits[0]
        psi.reshape(-1, 2, 1 << q)[:, 1, :] *= 1j
    else:
        _cnot(psi, *gate.qubits)
    return psi


def apply_gate_inverse(psi: np.ndarray, gate: CliffordGate) -> np.ndarray:
    """Undo a gate; exact (rounding-free) for S and CNOT."""
    if gate.kind == PHASE_S:
        q = gate.qubits[0]
        psi.reshape(-1, 2, 1 << q)[:, 1, :] *= -1j
        return psi
    return apply_gate(psi, gate)


def _cnot(psi: np.ndarray, control: int, target: int) -> None:
    hi, lo = (control, target) if control > target else (target, control)
    v = psi.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    if control == hi:
        src, dst = (slice(None), 1, slice(None), 0, slice(None)), (
            slice(None), 1, slice(None), 1, slice(None))
    else:
        src, dst = (slice(None), 0, slice(None), 1, slice(None)), (
            slice(None), 1, slice(None), 1, slice(None))
    tmp = v[src].copy()
    v[src] = v[dst]
    v[dst] = tmp


def random_gate(rng, n: int) -> CliffordGate:
    """Uniform kind; uniform qubit(s); CNOT pair uniform over ordered pairs."""
    kind = _KINDS[rng.integers(0, 3)]
    if kind == CNOT:
        control = int(rng.integers(0, n))
        target = int(rng.integers(0, n - 1))
        if target >= control:
            target += 1
        return CliffordGate(CNOT, (control, target))
    return CliffordGate(kind, (int(rng.integers(0, n)),))


@dataclass(frozen=True)
class AnnealSchedule:
    """beta(t) profile over t in [0, t_max)."""

    kind: str  # "const" | "power" | "quad"
    t_max: int
    beta0: float
    exponent: float = 0.1
    coeff: float = 0.0

    def __post_init__(self):
        if self.kind not in ("const", "power", "quad"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")
        if self.beta(0) < 0 or self.beta(self.t_max - 1) < 0:
            raise ValueError("schedule produces negative beta")

    def beta(self, t: int) -> float:
        if self.kind == "const":
            return self.beta0
        if self.kind == "power":
            return self.beta0 * (t + 1.0) ** self.exponent
        return self.beta0 + self.coeff * float(t) ** 2

    def describe(self) -> str:
        if self.kind == "const":
            return f"const(beta0={self.beta0:g})"
        if self.kind == "power":
            return f"power(beta0={self.beta0:g},exp={self.exponent:g})"
        return f"quad(beta0={self.beta0:g},coeff={self.coeff:g})"


@lru_cache(maxsize=16)
def _ring_permutations(n: int) -> np.ndarray:
    """Row i: left-rotation by i of every configuration index (n bits)."""
    k = n // 2
    n_blocks = n // 2 if n % 2 == 0 else n
    mask = (1 << n) - 1
    pos = np.arange(1 << n, dtype=np.int64)
    rows = [((pos << i) & mask) | (pos >> (n - i)) for i in range(n_blocks)]
    return np.stack(rows)


def _batched_eigvalsh(gram: np.ndarray) -> np.ndarray:
    global _torch_ready
    if _torch is None:
        return np.linalg.eigvalsh(gram)
    if not _torch_ready:
        _torch.set_num_threads(1)  # sample-level parallelism owns the cores
        _torch_ready = True
    return _torch.linalg.eigvalsh(_torch.from_numpy(gram)).numpy()


def _block_entropies(psi: np.ndarray, perms: np.ndarray, rows=None) -> np.ndarray:
    """Entropies (bits) of the ring blocks selected by ``rows`` (all if None)."""
    n = psi.size.bit_length() - 1
    k = n // 2
    sel = perms if rows is None else perms[list(rows)]
    m = psi[sel].reshape(sel.shape[0], 1 << (n - k), 1 << k)
    gram = np.ascontiguousarray(np.conj(m).transpose(0, 2, 1) @ m)
    eig = _batched_eigvalsh(gram)
    np.clip(eig, 0.0, None, out=eig)
    return -xlogy(eig, eig).sum(axis=1) / np.log(2.0)


def ring_block_cost(psi: np.ndarray) -> float:
    """Mean half-size-block entropy (bits) over the contiguous ring blocks."""
    n = psi.size.bit_length() - 1
    return float(_block_entropies(psi, _ring_permutations(n)).mean())


def _separating_blocks(gate: CliffordGate, n: int) -> tuple:
    """Ring blocks whose entropy the gate can change.

    A single-qubit unitary never alters any reduced spectrum, and a CNOT
    alters a cut's spectrum only when the cut separates control from
    target (otherwise the gate acts entirely inside one side).  This is
    an identity, not an approximation, so skipping the other blocks is
    exact.
    """
    if gate.kind != CNOT:
        return ()
    k = n // 2
    n_blocks = n // 2 if n % 2 == 0 else n
    c, t = gate.qubits
    return tuple(
        s for s in range(n_blocks) if ((c - s) % n < k) != ((t - s) % n < k)
    )


def full_subset_cost(psi: np.ndarray) -> float:
    """Mean entropy over all half-size subsets (exhaustive; N <= 8)."""
    n = psi.size.bit_length() - 1
    if n > 8:
        raise ValueError("exhaustive bipartition average is limited to N <= 8")
    k = n // 2
    subsets = [
        c for c in combinations(range(n), k)
        if n % 2 == 1 or 0 in c  # drop complement duplicates for even N
    ]
    total = sum(entropy_of_cut(psi, Bipartition(c, n)) for c in subsets)
    return total / len(subsets)


@dataclass(frozen=True)
class AnnealOutcome:
    """Result of one annealing chain."""

    s_initial: float
    s_final: float
    accepted_gates: tuple
    n_proposals: int
    cost_trace: tuple = ()

    @property
    def ratio(self):
        """S_f/S_i, or None for a degenerate (product-state) input."""
        if self.s_initial < _DEGENERATE_ENTROPY:
            return None
        return self.s_final / self.s_initial


def anneal(state, schedule: AnnealSchedule, seed, cost_mode: str = "ring",
           record_cost: bool = False) -> AnnealOutcome:
    """Run one Metropolis chain; fully reproducible from the seed.

    The acceptance uniform is drawn lazily (only for cost-increasing
    proposals), and a rejected proposal leaves the amplitude vector
    bit-identical to its pre-proposal value.

    In ring mode the per-block entropies are cached and only the blocks a
    CNOT actually separates are rediagonalized (single-qubit proposals
    leave every spectrum invariant and are accepted outright); see
    ``_separating_blocks`` for why this is exact.
    """
    amps = state.amplitudes if hasattr(state, "amplitudes") else np.asarray(state)
    psi = np.array(amps, dtype=np.complex128)
    n = psi.size.bit_length() - 1
    half = half_bipartition(n)
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.Philox(seed))

    s_initial = entropy_of_cut(psi, half)
    accepted = []
    if cost_mode == "ring":
        perms = _ring_permutations(n)
        blocks = _block_entropies(psi, perms)
        cost = float(blocks.mean())
        trace = [cost] if record_cost else None
        for t in range(schedule.t_max):
            gate = random_gate(rng, n)
            affected = _separating_blocks(gate, n)
            if not affected:
                apply_gate(psi, gate)  # no spectrum can change: free move
                accepted.append(gate)
            else:
                apply_gate(psi, gate)
                updated = _block_entropies(psi, perms, rows=affected)
                delta = (updated.sum() - blocks[list(affected)].sum()) / blocks.size
                if delta <= 0.0 or rng.random() < np.exp(-schedule.beta(t) * delta):
                    blocks[list(affected)] = updated
                    cost += delta
                    accepted.append(gate)
                else:
                    apply_gate_inverse(psi, gate)  # CNOT: exact self-inverse
            if trace is not None:
                trace.append(cost)
    else:
        cost = full_subset_cost(psi)
        trace = [cost] if record_cost else None
        for t in range(schedule.t_max):
            gate = random_gate(rng, n)
            snapshot = psi.copy() if gate.kind == HADAMARD else None
            apply_gate(psi, gate)
            new_cost = full_subset_cost(psi)
            delta = new_cost - cost
            if delta <= 0.0 or rng.random() < np.exp(-schedule.beta(t) * delta):
                cost = new_cost
                accepted.append(gate)
            elif snapshot is not None:
                psi = snapshot
            else:
                apply_gate_inverse(psi, gate)
            if trace is not None:
                trace.append(cost)
    return AnnealOutcome(
        s_initial=s_initial,
        s_final=entropy_of_cut(psi, half),
        accepted_gates=tuple(accepted),
        n_proposals=schedule.t_max,
        cost_trace=tuple(trace) if trace is not None else (),
    )


def replay(state, gates) -> np.ndarray:
    """Apply an accepted-gate trace to a fresh copy of the input state."""
    amps = state.amplitudes if hasattr(state, "amplitudes") else np.asarray(state)
    psi = np.array(amps, dtype=np.complex128)
    for gate in gates:
        apply_gate(psi, gate)
    return psi


def random_clifford_state(n_qubits: int, n_gates: int, seed) -> np.ndarray:
    """|0...0> evolved by a random circuit drawn from the proposal measure."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    psi = np.zeros(1 << n_qubits, dtype=np.complex128)
    psi[0] = 1.0
    for _ in range(n_gates):
        apply_gate(psi, random_gate(rng, n_qubits))
    return psi


def _anneal_seed(master_seed: int, sample_index: int, lam: float) -> np.random.SeedSequence:
    lam_bits = int(np.float64(lam).view(np.uint64))
    return np.random.SeedSequence(
        entropy=int(master_seed) & (2**64 - 1),
        spawn_key=(int(sample_index), lam_bits),
    )


def efficiency_scan(params: EnsembleParams, lambda_grid, schedule: AnnealSchedule,
                    cost_mode: str = "ring", workers: int = 1,
                    state_paths=None) -> list:
    """eta(lambda) = 1 - mean(S_f/S_i) with standard errors.

    Returns rows ``(lam, eta, eta_std_error, n_used, n_excluded)``;
    samples whose initial entropy is degenerate are excluded and counted.
    ``state_paths`` optionally maps a lambda value to a list of state-dump
    files to anneal instead of freshly built ensemble members; annealing
    chains stay seeded by (master_seed, sample index, lambda) either way.
    """
    rows = []
    for lam in lambda_grid:
        lam = float(lam)
        paths = None if state_paths is None else state_paths[lam]
        n_inputs = params.n_samples if paths is None else len(paths)
        args = [
            (params.n_qubits, params.master_seed, params.n_samples, i, lam,
             schedule, cost_mode, None if paths is None else str(paths[i]))
            for i in range(n_inputs)
        ]
        ratios = [r for r in map_samples(_anneal_sample, args, workers=workers)
                  if r is not None]
        excluded = n_inputs - len(ratios)
        if not ratios:
            raise ValueError(f"all samples degenerate at lambda={lam}")
        ratios = np.asarray(ratios)
        eta = 1.0 - float(ratios.mean())
        err = float(ratios.std(ddof=1) / np.sqrt(ratios.size)) if ratios.size > 1 else 0.0
        rows.append((lam, eta, err, int(ratios.size), int(excluded)))
    return rows


def _anneal_sample(task):
    n, seed, n_samples, index, lam, schedule, cost_mode, path = task
    if path is None:
        params = EnsembleParams(n_qubits=n, lam=0.0, n_samples=n_samples,
                                master_seed=seed)
        state = build_state(draw_realization(params, index), lam)
    else:
        from .states import load_state

        state = load_state(path)
        if state.n_qubits != n:
            raise ValueError(f"{path}: expected {n} qubits, found {state.n_qubits}")
    outcome = anneal(state, schedule, _anneal_seed(seed, index, lam), cost_mode=cost_mode)
    return outcome.ratio
