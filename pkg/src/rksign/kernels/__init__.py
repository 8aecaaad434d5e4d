"""Hot numerical kernels with a compiled core and a numpy fallback.

The Cython extension ``rksign.kernels._core`` is preferred when it was
built; setting ``RKSIGN_PURE_PYTHON=1`` in the environment forces the
numpy fallback.  Both backends implement identical contracts and agree
to rounding noise; ``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback

_ext = None
if os.environ.get("RKSIGN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _ext
    except ImportError:
        _ext = None

HAVE_EXT = _ext is not None


def backend_name() -> str:
    return "compiled" if HAVE_EXT else "numpy"


def wht_inplace(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis, in place."""
    if HAVE_EXT and a.ndim == 1 and a.flags.c_contiguous:
        if a.dtype == np.float64:
            _ext.wht_inplace_f64(a)
            return a
        if a.dtype == np.complex128:
            _ext.wht_inplace_c128(a)
            return a
    return _fallback.wht_inplace(a)


def pauli_moment_sums(psi: np.ndarray, skip_odd_y: bool = True) -> tuple:
    """(sum <P>^2, sum <P>^4) over all Pauli strings of one pure state."""
    psi = np.ascontiguousarray(psi)
    if HAVE_EXT:
        if psi.dtype == np.float64:
            return _ext.pauli_moment_sums_f64(psi, skip_odd_y)
        if psi.dtype == np.complex128:
            return _ext.pauli_moment_sums_c128(psi)
    return _fallback.pauli_moment_sums(psi, skip_odd_y=skip_odd_y)
