"""Pure-numpy implementations of the hot kernels.

Selected automatically when the compiled extension is unavailable (or
when RKSIGN_PURE_PYTHON=1).  Same contracts as ``_core``:

* ``wht_inplace``      unnormalized Walsh-Hadamard transform of the last
                       axis, WHT(u)[z] = sum_s (-1)^{popcount(s & z)} u_s.
* ``pauli_moment_sums`` sums of <P>^2 and <P>^4 over all 4^N Pauli
                       strings of a state, in O(N 4^N): for each X-mask x
                       the product vector u_s = conj(psi_{s xor x}) psi_s
                       is transformed once and the transform value at
                       position z is the (unphased) expectation of the
                       string (x, z).
"""

from __future__ import annotations

import numpy as np

_CHUNK = 64


def wht_inplace(a: np.ndarray) -> np.ndarray:
    """In-place fast Walsh-Hadamard transform along the last axis."""
    n = a.shape[-1]
    if n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    flat = a.reshape(-1, n)
    h = 1
    while h < n:
        b = flat.reshape(flat.shape[0], -1, 2 * h)
        top = b[:, :, :h] + b[:, :, h:]
        bot = b[:, :, :h] - b[:, :, h:]
        b[:, :, :h] = top
        b[:, :, h:] = bot
        h *= 2
    return a


def pauli_moment_sums(psi: np.ndarray, skip_odd_y: bool = True) -> tuple:
    """(sum of <P>^2, sum of <P>^4) over the full Pauli group.

    For real input with ``skip_odd_y`` the strings with an odd number of
    Y factors are masked out; their expectations vanish identically on
    real states, so this only removes rounding noise.
    """
    psi = np.ascontiguousarray(psi)
    dim = psi.size
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise ValueError(f"state length {dim} is not a power of two")
    is_real = not np.iscomplexobj(psi)
    sigma = np.arange(dim, dtype=np.int64)
    part2 = np.zeros(dim)
    part4 = np.zeros(dim)
    for start in range(0, dim, _CHUNK):
        xs = sigma[start:start + _CHUNK]
        block = psi[sigma[None, :] ^ xs[:, None]]
        if is_real:
            block = block * psi[None, :]
        else:
            block = np.conj(block) * psi[None, :]
        wht_inplace(block)
        if is_real:
            w2 = block * block
            if skip_odd_y:
                odd = (np.bitwise_count(sigma[None, :] & xs[:, None]) & 1).astype(bool)
                w2[odd] = 0.0
        else:
            w2 = block.real**2 + block.imag**2
        part2[xs] = w2.sum(axis=1)
        part4[xs] = (w2 * w2).sum(axis=1)
    return float(part2.sum()), float(part4.sum())
