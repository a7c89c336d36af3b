"""Exact evolution, product formulas, qDRIFT, and stochastic sparsification.

All evolutions return dense unitaries built from exact per-term
exponentials, so stochastic products stay unitary to floating point.  The
error metric is the maximum eigenvalue modulus of the operator difference,
computed with a general (non-Hermitian) eigensolver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hamsim import kernels
from hamsim.pauli import Hamiltonian

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class EvolutionConfig:
    """Time plus the discretization knob of one simulation method."""

    t: float
    steps: int | None = None      # product formulas
    samples: int | None = None    # qDRIFT
    order: int = 1

    def __post_init__(self):
        if not np.isfinite(self.t):
            raise ValueError("time must be finite")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        for name, value in (("steps", self.steps), ("samples", self.samples)):
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1")


def exact_evolution_dense(h_matrix: np.ndarray, t: float) -> np.ndarray:
    """e^{-i H t} for a dense Hermitian matrix via eigendecomposition."""
    scale = max(1.0, np.abs(h_matrix).max()) if h_matrix.size else 1.0
    if np.abs(h_matrix - h_matrix.conj().T).max() > HERMITICITY_TOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    energies, basis = np.linalg.eigh(h_matrix)
    return (basis * np.exp(-1j * energies * t)) @ basis.conj().T


def exact_evolution(h: Hamiltonian, t: float) -> np.ndarray:
    return exact_evolution_dense(h.to_dense(), t)


def spectral_error(u: np.ndarray, reference: np.ndarray) -> float:
    """Maximum |eigenvalue| of u - reference (general eigensolver)."""
    if u.shape != reference.shape:
        raise ValueError("operand dimensions differ")
    return float(np.abs(np.linalg.eigvals(u - reference)).max())


def _step_sequence(h: Hamiltonian, dt: float, order: int, permutation=None):
    """(xs, zs, angles) of one product-formula step, leftmost factor first."""
    perm = np.arange(len(h)) if permutation is None else np.asarray(permutation)
    if order == 1:
        xs = h.x_masks[perm]
        zs = h.z_masks[perm]
        angles = h.coefficients[perm] * dt
    elif order == 2:
        both = np.concatenate([perm, perm[::-1]])
        xs = h.x_masks[both]
        zs = h.z_masks[both]
        angles = h.coefficients[both] * (dt / 2.0)
    else:
        raise ValueError("order must be 1 or 2")
    return xs, zs, angles


def trotter_step(h: Hamiltonian, dt: float, order: int = 1,
                 permutation=None) -> np.ndarray:
    """One product-formula step S_p(dt) as a dense unitary."""
    dim = 1 << h.n_qubits
    u = np.eye(dim, dtype=np.complex128)
    xs, zs, angles = _step_sequence(h, dt, order, permutation)
    kernels.apply_pauli_exp_sequence(u, xs, zs, angles)
    return u


def trotter_evolution(h: Hamiltonian, t: float, steps: int, order: int = 1,
                      permutation=None) -> np.ndarray:
    """S_p(t/steps)^steps."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    step = trotter_step(h, t / steps, order, permutation)
    return np.linalg.matrix_power(step, steps)


def qdrift_probabilities(h: Hamiltonian) -> np.ndarray:
    return np.abs(h.coefficients) / h.one_norm


def qdrift_evolution(h: Hamiltonian, t: float, samples: int,
                     rng: np.random.Generator):
    """qDRIFT product; returns (unitary, sampled index sequence).

    Each factor is exp(-i sign(c_j) lambda H_j t/samples) for an index drawn
    with probability |c_j|/lambda, so c_j/p_j = sign(c_j) lambda.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    lam = h.one_norm
    indices = rng.choice(len(h), size=samples, p=qdrift_probabilities(h))
    angles = np.sign(h.coefficients[indices]) * lam * t / samples
    dim = 1 << h.n_qubits
    u = np.eye(dim, dtype=np.complex128)
    kernels.apply_pauli_exp_sequence(
        u, h.x_masks[indices], h.z_masks[indices], angles)
    return u, indices


def qdrift_bound(lam: float, t: float, samples: int,
                 constant: float = 2.0) -> float:
    """Modeled spectral-error bound constant * lambda^2 t^2 / samples."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return constant * lam * lam * t * t / samples


@dataclass(frozen=True)
class SparsePlan:
    """Term-survival plan: dominant set kept, tail Bernoulli-thinned.

    probabilities[j] = 1 on the deterministic set, min(1, tail_scale*|c_j|)
    elsewhere; variance_vector[j] = (1/p_j - 1) c_j^2.
    """

    probabilities: np.ndarray
    deterministic_mask: np.ndarray
    threshold: float
    tail_scale: float
    variance_vector: np.ndarray

    @property
    def n_terms(self) -> int:
        return len(self.probabilities)

    @property
    def expected_terms(self) -> float:
        """mu, the mean surviving-term count per draw."""
        return float(self.probabilities.sum())

    @property
    def coefficient_variance(self) -> float:
        """||u||_1, the scalar variance proxy of the estimator."""
        return float(self.variance_vector.sum())


def make_sparse_plan(h: Hamiltonian, threshold: float) -> SparsePlan:
    """Greedy dominant set up to threshold*lambda, maximal tail scale."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    if len(h) == 0:
        raise ValueError("empty Hamiltonian")
    mags = np.abs(h.coefficients)
    lam = h.one_norm
    order = np.lexsort((np.arange(len(h)), -mags))
    budget = threshold * lam * (1.0 + 1e-12)
    cumulative = np.cumsum(mags[order])
    n_kept = int(np.searchsorted(cumulative, budget, side="right"))
    deterministic = np.zeros(len(h), dtype=bool)
    deterministic[order[:n_kept]] = True

    probabilities = np.ones(len(h))
    if n_kept < len(h):
        tail_scale = 1.0 / mags[~deterministic].max()
        probabilities[~deterministic] = np.minimum(
            1.0, tail_scale * mags[~deterministic])
    else:
        tail_scale = np.inf
    variance = (1.0 / probabilities - 1.0) * h.coefficients ** 2
    return SparsePlan(probabilities, deterministic, threshold,
                      tail_scale, variance)


def draw_survivors(plan: SparsePlan, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli survival mask, one independent draw per term."""
    return rng.random(plan.n_terms) < plan.probabilities


def sparse_draw_mask(coefficients, plan: SparsePlan, rng: np.random.Generator,
                     survivors=None, empty_policy: str = "force_largest"):
    """Survivor mask for a stochastic estimator, never empty.

    empty_policy picks the recovery when a draw drops every term:
    "force_largest" keeps the largest-|c| term, "resample" redraws,
    "error" raises.
    """
    if empty_policy not in ("force_largest", "resample", "error"):
        raise ValueError(f"unknown empty_policy {empty_policy!r}")
    if survivors is not None:
        mask = np.asarray(survivors, dtype=bool)
        if not mask.any():
            raise ValueError("explicit survivor mask is empty")
        return mask
    while True:
        mask = draw_survivors(plan, rng)
        if mask.any():
            return mask
        if empty_policy == "force_largest":
            mask = np.zeros(plan.n_terms, dtype=bool)
            mask[int(np.abs(np.asarray(coefficients)).argmax())] = True
            return mask
        if empty_policy == "error":
            raise RuntimeError("all terms dropped by the sparsification draw")


def sparsto_evolution(h: Hamiltonian, t: float, steps: int, plan: SparsePlan,
                      rng: np.random.Generator) -> np.ndarray:
    """Per slice: fresh Bernoulli draw, reweighted survivors, first-order step."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if plan.n_terms != len(h):
        raise ValueError("plan does not match Hamiltonian")
    dt = t / steps
    dim = 1 << h.n_qubits
    u = np.eye(dim, dtype=np.complex128)
    reweighted = h.coefficients / plan.probabilities
    for _ in range(steps):
        survivors = draw_survivors(plan, rng)
        kernels.apply_pauli_exp_sequence(
            u, h.x_masks[survivors], h.z_masks[survivors],
            reweighted[survivors] * dt)
    return u


def sparsto_bound_leading(t: float, expected_terms: float, gate_budget: float,
                          variance_vector, higher_order: float = 0.0) -> float:
    """Leading diamond-norm bound 2 t^2 mu ||u||_1 / G (+ optional K term)."""
    if gate_budget < 1:
        raise ValueError("gate budget must be >= 1")
    u1 = float(np.abs(np.asarray(variance_vector)).sum())
    return 2.0 * t * t * expected_terms * u1 / gate_budget + higher_order
