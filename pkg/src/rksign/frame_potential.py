"""State-ensemble frame potentials and the projective-design benchmark.

For an ensemble {psi_1 .. psi_K} of states in dimension d = 2^N the t-th
frame potential is

    Phi_t = (1/K^2) sum_{j,k} |<psi_j|psi_k>|^{2t}

(ordered pairs, diagonal included, so Phi_t >= 1/K always).  The
off-diagonal part Phi~_t = Phi_t - 1/K converges rapidly with K.  A
projective t-design attains Phi_t = 1/D_t with D_t = binom(d+t-1, t), so
log(Phi~_t * D_t) near 0 marks an approximate design and large positive
values mark low ensemble randomness.  All logs here are natural logs;
D_t is evaluated through log-gamma, never as a raw binomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma

import numpy as np

from .ensembles import map_samples
from .states import EnsembleParams, build_state, draw_realization

# Below this magnitude |o|^{2t} goes through exp(2t log|o|) instead of
# direct powering.
_POWER_GUARD = 1e-150


@dataclass(frozen=True)
class FramePotentialResult:
    """log(Phi~_t D_t) at one (N, lambda, t) point, with its sampling error."""

    t: int
    log_phi_tilde_dt: float
    log_std_error: float
    k_states: int
    n_qubits: int
    lam: float


def overlap_matrix(amplitude_rows: np.ndarray) -> np.ndarray:
    """K x K Gram matrix of an ensemble stacked as rows."""
    a = np.asarray(amplitude_rows)
    if a.ndim != 2:
        raise ValueError("expected a (K, 2^N) array of amplitude rows")
    return a @ a.conj().T


def _pair_powers(overlaps: np.ndarray, t: int) -> np.ndarray:
    """|o|^{2t} over the distinct off-diagonal pairs (j < k)."""
    k = overlaps.shape[0]
    iu = np.triu_indices(k, k=1)
    mag = np.abs(overlaps[iu])
    small = mag < _POWER_GUARD
    out = np.empty_like(mag)
    with np.errstate(divide="ignore"):
        out[small] = np.exp(2.0 * t * np.log(mag[small]))
    out[~small] = mag[~small] ** (2 * t)
    return out


def frame_potential(states, t: int) -> tuple:
    """(Phi_t, Phi~_t) of an ensemble of same-size states."""
    if t < 1:
        raise ValueError(f"moment index must be >= 1, got {t}")
    rows = _stack(states)
    phi, phi_tilde, _ = moment_stats(overlap_matrix(rows), t)
    return phi, phi_tilde


def moment_stats(overlaps: np.ndarray, t: int) -> tuple:
    """(Phi_t, Phi~_t, stderr of Phi~_t) from a precomputed Gram matrix.

    The off-diagonal overlaps are computed once and reused for every t;
    each symmetric pair is counted twice.  The standard error treats the
    K(K-1)/2 distinct pair values as the sample.
    """
    k = overlaps.shape[0]
    if k == 0:
        raise ValueError("empty ensemble")
    if k == 1:
        return 1.0, 0.0, 0.0
    powers = _pair_powers(overlaps, t)
    scale = 2.0 / k**2
    phi_tilde = scale * float(powers.sum())
    # Phi~ = scale * n_pairs * mean(pairs)  =>  err = scale * sqrt(n_pairs) * std.
    stderr = 0.0
    if powers.size > 1:
        stderr = scale * np.sqrt(powers.size) * float(powers.std(ddof=1))
    return phi_tilde + 1.0 / k, phi_tilde, stderr


def _stack(states) -> np.ndarray:
    rows = [s.amplitudes if hasattr(s, "amplitudes") else np.asarray(s) for s in states]
    sizes = {r.size for r in rows}
    if len(sizes) != 1:
        raise ValueError(f"states of mixed dimension: {sorted(sizes)}")
    return np.stack(rows)


def log_design_benchmark(n_qubits: int, t: int) -> float:
    """log D_t = log binom(2^N + t - 1, t) via log-gamma."""
    if t < 1:
        raise ValueError(f"moment index must be >= 1, got {t}")
    d = float(2**n_qubits)
    return lgamma(d + t) - lgamma(t + 1.0) - lgamma(d)


def design_scan(params: EnsembleParams, lambda_grid, t_list=(1, 2, 3, 4),
                workers: int = 1) -> list:
    """log(Phi~_t D_t) per (lambda, t), with K = n_samples states per point."""
    if params.n_samples < 2:
        raise ValueError("need at least K = 2 states for off-diagonal overlaps")
    results = []
    for lam in lambda_grid:
        lam = float(lam)
        args = [(params.n_qubits, params.master_seed, params.n_samples, i, lam)
                for i in range(params.n_samples)]
        rows = np.stack(map_samples(_state_sample, args, workers=workers))
        overlaps = overlap_matrix(rows)
        for t in t_list:
            _, phi_tilde, stderr = moment_stats(overlaps, t)
            log_dt = log_design_benchmark(params.n_qubits, t)
            results.append(
                FramePotentialResult(
                    t=int(t),
                    log_phi_tilde_dt=float(np.log(phi_tilde) + log_dt),
                    log_std_error=stderr / phi_tilde if phi_tilde > 0 else float("nan"),
                    k_states=params.n_samples,
                    n_qubits=params.n_qubits,
                    lam=lam,
                )
            )
    return results


def _state_sample(task):
    n, seed, n_samples, index, lam = task
    params = EnsembleParams(n_qubits=n, lam=0.0, n_samples=n_samples, master_seed=seed)
    return build_state(draw_realization(params, index), lam).amplitudes
