"""Pure-numpy fallback for the compiled Pauli kernels.

Semantics are identical to hamsim._pauli_kernels; see that module for the
mask conventions.  Kept dependency-free so the package runs anywhere the
extension failed to build (at roughly 20-50x the kernel cost).
"""

import numpy as np

BACKEND = "numpy"

_I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


def _parity(values):
    return (np.bitwise_count(values) & np.uint64(1)).astype(bool)


def _row_phases(x, z, dim):
    """Vector p with p[a] = P[a, a^x] for the dense Pauli realization."""
    idx = np.arange(dim, dtype=np.uint64)
    base = _I_POWERS[int(np.bitwise_count(np.uint64(x & z))) & 3]
    signs = np.where(_parity((idx ^ np.uint64(x)) & np.uint64(z)), -1.0, 1.0)
    return base * signs


def apply_pauli_exp_sequence(u, xs, zs, angles):
    """In place, u <- E_0 E_1 ... E_{M-1} u with E_m = exp(-i*angles[m]*P_m)."""
    if not (len(xs) == len(zs) == len(angles)):
        raise ValueError("xs, zs, angles must have equal length")
    dim = u.shape[0]
    if u.shape[1] != dim:
        raise ValueError("u must be square")
    idx = np.arange(dim, dtype=np.uint64)
    for m in range(len(xs) - 1, -1, -1):
        x, z, theta = int(xs[m]), int(zs[m]), float(angles[m])
        c, s = np.cos(theta), np.sin(theta)
        if x == 0:
            odd = _parity(idx & np.uint64(z))
            u *= np.where(odd, c + 1j * s, c - 1j * s)[:, None]
        else:
            perm = (idx ^ np.uint64(x)).astype(np.intp)
            phases = _row_phases(x, z, dim)
            u[:] = c * u - (1j * s) * (phases[:, None] * u[perm])


def accumulate_pauli_terms(out, xs, zs, coeffs):
    """In place, out += sum_m coeffs[m] * P_m (dense)."""
    if not (len(xs) == len(zs) == len(coeffs)):
        raise ValueError("xs, zs, coeffs must have equal length")
    dim = out.shape[0]
    if out.shape[1] != dim:
        raise ValueError("out must be square")
    rows = np.arange(dim, dtype=np.uint64)
    for m in range(len(xs)):
        x = int(xs[m])
        cols = (rows ^ np.uint64(x)).astype(np.intp)
        out[rows.astype(np.intp), cols] += coeffs[m] * _row_phases(x, int(zs[m]), dim)
