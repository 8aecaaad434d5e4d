"""Gap-ratio statistics of entanglement spectra.

For an ascending spectrum {a_i} the gaps are delta_j = a_{j+1} - a_j and
the two adjacent-gap ratios are

    r_k      = delta_{k+1} / delta_k,
    rtilde_k = min(delta_{k+1}, delta_k) / max(delta_{k+1}, delta_k).

Pooled over an ensemble, the distribution of r is compared against the
closed-form Wigner-Dyson surmises (GOE, GUE) and the Poisson form; the
average of rtilde is approximately 0.53 for GOE level repulsion and
2 ln 2 - 1 ~= 0.39 for Poisson statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .ensembles import map_samples, mean_and_stderr
from .entanglement import half_bipartition, spectrum
from .states import EnsembleParams, build_state, draw_realization

GOE = "goe"
GUE = "gue"
POISSON = "poisson"

# Smallest gap pair considered resolvable; guards the 0/0 case only.
_GAP_FLOOR = 1e-300

# Default histogram for the Kullback-Leibler comparison: 60 uniform bins
# on [0, 6] plus one overflow bin holding all ratios above 6.
DEFAULT_BINS = 60
DEFAULT_RMAX = 6.0


@dataclass
class GapRatioPool:
    """Pooled adjacent-gap ratios with their provenance."""

    ratios_r: np.ndarray
    ratios_rtilde: np.ndarray
    lam: float = float("nan")
    n_qubits: int = 0
    n_samples: int = 0

    def merge(self, other: "GapRatioPool") -> "GapRatioPool":
        return GapRatioPool(
            ratios_r=np.concatenate([self.ratios_r, other.ratios_r]),
            ratios_rtilde=np.concatenate([self.ratios_rtilde, other.ratios_rtilde]),
            lam=self.lam,
            n_qubits=self.n_qubits,
            n_samples=self.n_samples + other.n_samples,
        )


def gap_ratios(spec) -> tuple:
    """(r, rtilde) arrays contributed by one spectrum.

    Pairs whose larger gap is below the resolvable floor are dropped;
    a zero smaller gap with a finite larger one yields r = 0 on one side
    and an infinite ratio on the other, and the infinite entry is
    excluded from the r pool (its rtilde partner is 0 and is kept).
    """
    a = spec.eigenvalues if hasattr(spec, "eigenvalues") else np.asarray(spec)
    if a.size < 3:
        return np.empty(0), np.empty(0)
    gaps = np.diff(a)
    lo, hi = gaps[:-1], gaps[1:]
    keep = np.maximum(lo, hi) >= _GAP_FLOOR
    lo, hi = lo[keep], hi[keep]
    with np.errstate(divide="ignore"):
        r = hi / lo
        rtilde = np.minimum(r, 1.0 / r)  # == min(gaps)/max(gaps), exact in r
    return r[np.isfinite(r)], rtilde


def pool_from_ensemble(params, lam=None, workers: int = 1) -> GapRatioPool:
    """Half-cut gap-ratio pool over a full disorder ensemble."""
    lam = params.lam if lam is None else lam
    args = [(params.n_qubits, params.master_seed, params.n_samples, i, lam)
            for i in range(params.n_samples)]
    parts = map_samples(_pool_sample, args, workers=workers)
    return GapRatioPool(
        ratios_r=np.concatenate([p[0] for p in parts]),
        ratios_rtilde=np.concatenate([p[1] for p in parts]),
        lam=lam,
        n_qubits=params.n_qubits,
        n_samples=params.n_samples,
    )


def _pool_sample(task):
    n, seed, n_samples, index, lam = task
    params = EnsembleParams(n_qubits=n, lam=lam, n_samples=n_samples, master_seed=seed)
    state = build_state(draw_realization(params, index), lam)
    return gap_ratios(spectrum(state, half_bipartition(n)))


def reference_density(kind: str, r) -> np.ndarray:
    """Closed-form gap-ratio density P(r) on [0, inf)."""
    r = np.asarray(r, dtype=float)
    if kind == GOE:
        return (27.0 / 8.0) * (r + r**2) / (1.0 + r + r**2) ** 2.5
    if kind == GUE:
        z = 4.0 * np.pi / (81.0 * np.sqrt(3.0))
        return (r + r**2) ** 2 / (z * (1.0 + r + r**2) ** 4)
    if kind == POISSON:
        return (1.0 + r) ** -2.0
    raise ValueError(f"unknown reference kind {kind!r}")


def reference_bin_mass(kind: str, edges) -> np.ndarray:
    """Reference probability mass per histogram bin plus the tail bin.

    ``edges`` are the interior bin edges; the returned array has
    ``len(edges) - 1`` finite-bin masses followed by the mass above the
    last edge, obtained by quadrature of the closed-form density.
    """
    edges = np.asarray(edges, dtype=float)
    masses = [
        quad(lambda r: reference_density(kind, r), lo, hi, epsabs=1e-12)[0]
        for lo, hi in zip(edges[:-1], edges[1:])
    ]
    tail = quad(lambda r: reference_density(kind, r), edges[-1], np.inf, epsabs=1e-12)[0]
    return np.append(masses, tail)


def histogram(pool: GapRatioPool, bins: int = DEFAULT_BINS, rmax: float = DEFAULT_RMAX):
    """(edges, empirical probabilities incl. overflow bin) for the r pool."""
    if pool.ratios_r.size == 0:
        raise ValueError("empty gap-ratio pool")
    edges = np.linspace(0.0, rmax, bins + 1)
    below = pool.ratios_r[pool.ratios_r < rmax]
    counts, _ = np.histogram(below, bins=edges)
    overflow = pool.ratios_r.size - below.size
    p = np.append(counts, overflow) / pool.ratios_r.size
    return edges, p


def kl_from_masses(p, q) -> float:
    """D_KL(p || q) in bits for two binned mass vectors.

    Empty empirical bins contribute nothing (p log p/q -> 0); reference
    masses are strictly positive on every bin, so no smoothing is needed.
    Identical vectors give exactly zero.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def kl_divergence(pool: GapRatioPool, kind: str,
                  bins: int = DEFAULT_BINS, rmax: float = DEFAULT_RMAX) -> float:
    """D_KL(empirical || reference) in bits over the fixed histogram."""
    edges, p = histogram(pool, bins=bins, rmax=rmax)
    return kl_from_masses(p, reference_bin_mass(kind, edges))


def mean_rtilde(pool: GapRatioPool) -> tuple:
    """(mean, standard error) of the pooled rtilde values."""
    if pool.ratios_rtilde.size == 0:
        raise ValueError("empty gap-ratio pool")
    return mean_and_stderr(pool.ratios_rtilde)


def histogram_table(pool: GapRatioPool, bins: int = DEFAULT_BINS,
                    rmax: float = DEFAULT_RMAX) -> list:
    """Rows (bin_low, bin_high, empirical_p, goe_q, gue_q, poisson_q).

    The final row is the overflow bin, reported as [rmax, inf).
    """
    edges, p = histogram(pool, bins=bins, rmax=rmax)
    q = {kind: reference_bin_mass(kind, edges) for kind in (GOE, GUE, POISSON)}
    lows = np.append(edges[:-1], edges[-1])
    highs = np.append(edges[1:], np.inf)
    return [
        (lows[b], highs[b], p[b], q[GOE][b], q[GUE][b], q[POISSON][b])
        for b in range(p.size)
    ]
