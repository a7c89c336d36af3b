"""Backend selection for the Pauli hot kernels.

Prefers the compiled Cython extension; falls back to the numpy
implementation when the extension is missing or when the environment
variable HAMSIM_PURE_PYTHON is set (to any non-empty value).
"""

import os

import numpy as np

from hamsim import _kernels_np

if os.environ.get("HAMSIM_PURE_PYTHON"):
    _impl = _kernels_np
else:
    try:
        from hamsim import _pauli_kernels as _impl
    except ImportError:
        _impl = _kernels_np


def backend_name() -> str:
    return _impl.BACKEND


def as_mask_array(values) -> np.ndarray:
    return np.ascontiguousarray(values, dtype=np.uint64)


def apply_pauli_exp_sequence(u, xs, zs, angles):
    """In place, u <- E_0 E_1 ... E_{M-1} u with E_m = exp(-i*angles[m]*P_m)."""
    _impl.apply_pauli_exp_sequence(
        u, as_mask_array(xs), as_mask_array(zs),
        np.ascontiguousarray(angles, dtype=np.float64))


def accumulate_pauli_terms(out, xs, zs, coeffs):
    """In place, out += sum_m coeffs[m] * P_m (dense)."""
    _impl.accumulate_pauli_terms(
        out, as_mask_array(xs), as_mask_array(zs),
        np.ascontiguousarray(coeffs, dtype=np.float64))
