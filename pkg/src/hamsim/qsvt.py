"""Jacobi-Anger polynomial machinery and qubitization-walk QSVT output.

The QSVT output is modeled as the Chebyshev-coefficient-weighted sum of
walk-power blocks: for an exact LCU encoding W (Hermitian, W^2 = I) the
ancilla-zero block of (RW)^k is exactly T_k of the encoded operator, so the
model agrees with direct polynomial evaluation in the eigenbasis; for a
perturbed or stochastic encoding the block error propagates through every
power, which is precisely the quantity the error-amplification bound
controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev

from hamsim.blockenc import BlockEncoding, block_encode, sparse_estimator
from hamsim.dynamics import SparsePlan, exact_evolution, spectral_error
from hamsim.pauli import Hamiltonian

BESSEL_MAX_ORDER = 10_000
BESSEL_MAX_ARG = 1_000.0
# walk-power accumulation refuses above this dimension; use the eigenbasis
# route for exact encodings instead
WALK_DIM_LIMIT = 1 << 12

_RESCALE = 1e250


def bessel_j_all(k_max: int, x: float) -> np.ndarray:
    """J_0(x) .. J_{k_max}(x) by Miller downward recurrence.

    Normalized with J_0 + 2 sum_m J_{2m} = 1; accurate to ~1e-12 absolute
    over the supported range.
    """
    if not 0 <= k_max <= BESSEL_MAX_ORDER:
        raise ValueError(f"order must be in 0..{BESSEL_MAX_ORDER}")
    if not abs(x) <= BESSEL_MAX_ARG:
        raise ValueError(f"|x| must be <= {BESSEL_MAX_ARG}")
    if x == 0.0:
        out = np.zeros(k_max + 1)
        out[0] = 1.0
        return out
    ax = abs(x)
    top = max(k_max, int(math.ceil(ax)))
    # start at top + ceil(10 + 2 sqrt(top)) and grow the margin until two
    # successive runs agree, which certifies the downward recurrence depth
    margin = int(math.ceil(10.0 + 2.0 * math.sqrt(top)))
    previous = None
    for _ in range(12):
        values = _miller_pass(top + margin, ax)[:k_max + 1]
        if previous is not None and np.abs(values - previous).max() < 1e-14:
            break
        previous = values
        margin = margin * 2
    out = values.copy()
    if x < 0:
        out[1::2] *= -1.0
    return out


def _miller_pass(start: int, ax: float) -> np.ndarray:
    start += start & 1  # even start keeps the normalization sum aligned
    values = np.zeros(start + 1)
    values[start - 1] = 1e-30
    for m in range(start - 1, 0, -1):
        values[m - 1] = (2.0 * m / ax) * values[m] - values[m + 1]
        if abs(values[m - 1]) > _RESCALE:
            values[m - 1:] /= _RESCALE
    norm = values[0] + 2.0 * values[2::2].sum()
    return values / norm


def bessel_j(k: int, x: float) -> float:
    """Bessel function of the first kind J_k(x)."""
    return float(bessel_j_all(k, x)[k])


def poly_error(t_eff: float, degree: int) -> float:
    """Truncation bound (t_eff/d)^d, valid on the decreasing branch d > t_eff."""
    if degree <= t_eff:
        raise ValueError("bound requires degree > t_eff")
    if t_eff <= 0:
        return 0.0
    return math.exp(degree * (math.log(t_eff) - math.log(degree)))


def truncation_degree(eps_poly: float, t_eff: float) -> int:
    """Smallest integer d on the decreasing branch with (t_eff/d)^d <= eps_poly.

    The scan starts just above t_eff, where the bound drops below one and
    decreases monotonically; this branch choice also keeps the returned
    degree within the Theta(t_eff + log(1/eps)/log(e + log(1/eps)/t_eff))
    asymptotic form.
    """
    if not 0.0 < eps_poly < 1.0:
        raise ValueError("eps_poly must be in (0, 1)")
    if t_eff <= 0.0:
        raise ValueError("t_eff must be positive")
    degree = int(math.floor(t_eff)) + 1
    log_eps = math.log(eps_poly)
    while degree * (math.log(t_eff) - math.log(degree)) > log_eps + 1e-9:
        degree += 1
    return degree


@dataclass(frozen=True)
class JacobiAngerSeries:
    """Chebyshev expansion of e^{-i x t_eff} truncated at polynomial degree d.

    cos_coeffs holds the T_0, T_2, ... coefficients of cos(x t_eff) and
    sin_coeffs the T_1, T_3, ... coefficients of sin(x t_eff):
    J_0 and 2 (-1)^k J_{2k} even, 2 (-1)^k J_{2k+1} odd.
    """

    t_eff: float
    degree: int
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    @classmethod
    def build(cls, t_eff: float, degree: int) -> "JacobiAngerSeries":
        if degree < 1:
            raise ValueError("degree must be >= 1")
        bessel = bessel_j_all(degree, t_eff)
        ks = np.arange(degree + 1)
        signs = (-1.0) ** (ks // 2)
        cos_coeffs = 2.0 * signs[0::2] * bessel[0::2]
        cos_coeffs[0] = bessel[0]
        sin_coeffs = 2.0 * signs[1::2] * bessel[1::2]
        return cls(t_eff, degree, cos_coeffs, sin_coeffs)

    def full_coefficients(self) -> np.ndarray:
        """Complex Chebyshev coefficients of cos - i sin, degree-indexed."""
        coeffs = np.zeros(self.degree + 1, dtype=np.complex128)
        coeffs[0::2] = self.cos_coeffs
        coeffs[1::2] = -1j * self.sin_coeffs
        return coeffs


def eval_exponential_poly(x, series: JacobiAngerSeries):
    """Clenshaw evaluation of the truncated series at x in [-1, 1]."""
    return chebyshev.chebval(x, series.full_coefficients())


def apply_series_to_hermitian(matrix: np.ndarray,
                              series: JacobiAngerSeries) -> np.ndarray:
    """Evaluate the series on a Hermitian matrix with spectrum in [-1, 1]."""
    evals, evecs = np.linalg.eigh(matrix)
    if np.abs(evals).max() > 1.0 + 1e-9:
        raise ValueError("spectrum outside [-1, 1]")
    transformed = eval_exponential_poly(np.clip(evals, -1.0, 1.0), series)
    return (evecs * transformed) @ evecs.conj().T


def apply_poly_eigenbasis(h: Hamiltonian, t: float, degree: int) -> np.ndarray:
    """Ideal-QSVT output: the truncated series of H/lambda at t_eff = lambda t."""
    lam = h.one_norm
    series = JacobiAngerSeries.build(lam * t, degree)
    return apply_series_to_hermitian(h.to_dense() / lam, series)


def walk_operator(be: BlockEncoding, herm_tol: float = 1e-8) -> np.ndarray:
    """R W with R the reflection about the ancilla-zero subspace."""
    block = be.encoded_block()
    if np.abs(block - block.conj().T).max() > herm_tol:
        raise ValueError("encoded block is not Hermitian within tolerance")
    walk = be.w.copy()
    walk[be.system_dim:, :] *= -1.0
    return walk


def walk_block_powers(be: BlockEncoding, k_max: int,
                      herm_tol: float = 1e-8) -> list[np.ndarray]:
    """Ancilla-zero blocks of (RW)^k for k = 0..k_max.

    herm_tol=inf admits perturbed encodings, whose blocks are deliberately
    not Hermitian; the Chebyshev identity then holds only approximately.
    """
    if be.dim > WALK_DIM_LIMIT:
        raise ValueError(
            f"walk dimension {be.dim} exceeds {WALK_DIM_LIMIT}; "
            "use the eigenbasis route for exact encodings")
    walk = walk_operator(be, herm_tol)
    d = be.system_dim
    power = np.eye(be.dim, dtype=np.complex128)
    blocks = [power[:d, :d].copy()]
    for _ in range(k_max):
        power = power @ walk
        blocks.append(power[:d, :d].copy())
    return blocks


def _sum_blocks(blocks, series: JacobiAngerSeries) -> np.ndarray:
    coeffs = series.full_coefficients()
    out = np.zeros_like(blocks[0])
    for coeff, block in zip(coeffs, blocks):
        out += coeff * block
    return out


def qsvt_simulate(be: BlockEncoding, t: float, degree: int,
                  method: str = "auto", t_eff: float | None = None) -> np.ndarray:
    """Modeled QSVT simulation output (system-dimension matrix).

    method "walk" accumulates walk powers and faithfully propagates any
    block-encoding error through all of them; "eigen" evaluates the series
    on the encoded block directly and is only meaningful for exact
    encodings (the two agree to ~1e-8 in that case).  t_eff defaults to
    normalization * t.
    """
    if t_eff is None:
        t_eff = be.normalization * t
    series = JacobiAngerSeries.build(t_eff, degree)
    if method == "auto":
        method = "walk" if be.dim <= WALK_DIM_LIMIT else "eigen"
    if method == "walk":
        # the propagation model applies the walk to perturbed encodings
        # too, so no Hermiticity gate here
        return _sum_blocks(walk_block_powers(be, degree, np.inf), series)
    if method == "eigen":
        return apply_series_to_hermitian(be.encoded_block(), series)
    raise ValueError(f"unknown method {method!r}")


def qsvt_simulate_sweep(be: BlockEncoding, t: float, degrees,
                        t_eff: float | None = None,
                        method: str = "auto") -> dict[int, np.ndarray]:
    """qsvt_simulate at several degrees, sharing the walk-power pass."""
    degrees = sorted(set(int(d) for d in degrees))
    if not degrees or degrees[0] < 1:
        raise ValueError("degrees must be positive")
    if t_eff is None:
        t_eff = be.normalization * t
    if method == "auto":
        method = "walk" if be.dim <= WALK_DIM_LIMIT else "eigen"
    if method == "eigen":
        return {d: qsvt_simulate(be, t, d, "eigen", t_eff) for d in degrees}
    d_max = degrees[-1]
    series = JacobiAngerSeries.build(t_eff, d_max)
    coeffs = series.full_coefficients()
    blocks = walk_block_powers(be, d_max, np.inf)
    out: dict[int, np.ndarray] = {}
    acc = coeffs[0] * blocks[0]
    for k in range(1, d_max + 1):
        acc = acc + coeffs[k] * blocks[k]
        if k in degrees:
            out[k] = acc.copy()
    return out


def walk_power_errors(be: BlockEncoding, reference: BlockEncoding,
                      degrees) -> dict[int, float]:
    """Spectral distance of the d-use walk products, per degree.

    ||(R W~)^d - (R W)^d|| grows with every use of the encoding (at most
    linearly, by telescoping over the d uses) and is the accumulation the
    degree-d error-amplification bound controls; unlike the series output
    it does not saturate when the expansion coefficients decay.
    """
    degrees = sorted(set(int(d) for d in degrees))
    walk_pert = walk_operator(be, np.inf)
    walk_ref = walk_operator(reference, np.inf)
    power_pert = np.eye(be.dim, dtype=np.complex128)
    power_ref = np.eye(reference.dim, dtype=np.complex128)
    out = {}
    for k in range(1, degrees[-1] + 1):
        power_pert = power_pert @ walk_pert
        power_ref = power_ref @ walk_ref
        if k in degrees:
            out[k] = float(np.linalg.svd(power_pert - power_ref,
                                         compute_uv=False)[0])
    return out


def qsvt_error_decomposition(h: Hamiltonian, be: BlockEncoding, t: float,
                             degree: int):
    """(eps_poly analytic, eps_BE contribution, eps_total) for one encoding.

    eps_poly is the analytic truncation bound at the exact effective time
    (nan on the d <= t_eff branch where the bound is invalid); the BE
    contribution compares against the same model built on the exact
    encoding; eps_total compares against exact evolution.
    """
    exact_be = block_encode(h)
    t_eff = exact_be.normalization * t
    eps_poly = poly_error(t_eff, degree) if degree > t_eff else float("nan")
    reference = qsvt_simulate(exact_be, t, degree)
    output = qsvt_simulate(be, t, degree)
    eps_be = spectral_error(output, reference)
    eps_total = spectral_error(output, exact_evolution(h, t))
    return eps_poly, eps_be, eps_total


def sparse_qsvt_evolution(h: Hamiltonian, plan: SparsePlan, t: float,
                          degree: int, rng: np.random.Generator,
                          survivors=None, norm_mode: str = "realized",
                          empty_policy: str = "force_largest"):
    """Sparse-QSVT output for one estimator draw, at system dimension.

    One draw serves the whole call (worst-case correlated model).  The
    estimator is encoded with its realized one-norm; norm_mode picks the
    effective time, "realized" (lambda_hat * t, default) or "original"
    (lambda * t).  Returns (output matrix, survivor indices).
    """
    estimator, indices = sparse_estimator(h, plan, rng, survivors, empty_policy)
    lam_hat = estimator.one_norm
    lam = lam_hat if norm_mode == "realized" else h.one_norm
    if norm_mode not in ("realized", "original"):
        raise ValueError(f"unknown norm_mode {norm_mode!r}")
    series = JacobiAngerSeries.build(lam * t, degree)
    out = apply_series_to_hermitian(estimator.to_dense() / lam_hat, series)
    return out, indices


def sparse_qsvt_sweep(h: Hamiltonian, plan: SparsePlan, t: float, degrees,
                      rng: np.random.Generator, survivors=None,
                      norm_mode: str = "realized",
                      empty_policy: str = "force_largest"):
    """sparse_qsvt_evolution over a degree grid, one shared draw.

    Returns ({degree: output}, survivor indices).  Sharing the draw keeps
    the whole error-vs-degree curve on one stochastic realization.
    """
    degrees = sorted(set(int(d) for d in degrees))
    estimator, indices = sparse_estimator(h, plan, rng, survivors, empty_policy)
    lam_hat = estimator.one_norm
    lam = lam_hat if norm_mode == "realized" else h.one_norm
    evals, evecs = np.linalg.eigh(estimator.to_dense() / lam_hat)
    evals = np.clip(evals, -1.0, 1.0)
    out = {}
    for d in degrees:
        series = JacobiAngerSeries.build(lam * t, d)
        transformed = eval_exponential_poly(evals, series)
        out[d] = (evecs * transformed) @ evecs.conj().T
    return out, indices


def sparse_qsvt_per_power(h: Hamiltonian, plan: SparsePlan, t: float,
                          degree: int, rng: np.random.Generator,
                          empty_policy: str = "force_largest") -> np.ndarray:
    """Alternative model: a fresh estimator draw for every walk power.

    Probes the independence assumption neglected by the worst-case bound.
    All draws are encoded on the full-size ancilla register so dimensions
    match across powers, and the effective time uses the plan-average
    normalization (= lambda, since the estimator is unbiased).  Only
    feasible at small term counts.
    """
    from hamsim.blockenc import ancilla_count, sparse_block_encode

    n_anc = ancilla_count(len(h))
    if (1 << (n_anc + h.n_qubits)) > WALK_DIM_LIMIT:
        raise ValueError("per-power resampling needs a dense-size register")
    d_sys = 1 << h.n_qubits
    series = JacobiAngerSeries.build(h.one_norm * t, degree)
    coeffs = series.full_coefficients()
    power = np.eye(1 << (n_anc + h.n_qubits), dtype=np.complex128)
    acc = coeffs[0] * power[:d_sys, :d_sys]
    for k in range(1, degree + 1):
        be = sparse_block_encode(h, plan, rng, empty_policy=empty_policy,
                                 n_ancilla=n_anc)
        power = power @ walk_operator(be)
        acc = acc + coeffs[k] * power[:d_sys, :d_sys]
    return acc


def sparse_qsvt_error_model(degree: int, var_coeff: float, eps_poly: float,
                            constant: float = 1.0) -> float:
    """Modeled total error C * d * sqrt(var_coeff) + eps_poly."""
    if degree < 0 or var_coeff < 0 or eps_poly < 0:
        raise ValueError("inputs must be nonnegative")
    return constant * degree * math.sqrt(var_coeff) + eps_poly
