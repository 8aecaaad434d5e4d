"""Exact numerical laboratory for sign-random Rokhsar-Kivelson wavefunctions.

Generates disorder ensembles of N-qubit RK-sign states at a control
parameter lambda and measures entanglement-complexity diagnostics on them:
fidelity metric, entanglement spectra and their gap-ratio statistics,
ensemble entropy fluctuations, stabilizer 2-Renyi entropy, Clifford
entanglement annealing, and state-ensemble frame potentials.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    disentangle,
    entanglement,
    fidelity,
    frame_potential,
    magic,
    scaling,
    spectrum_stats,
    states,
)
