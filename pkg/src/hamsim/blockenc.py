"""Dense LCU block-encodings: Prepare, Select, their product, and
controlled perturbations for error-propagation experiments.

Coefficient signs are absorbed into Select so Prepare amplitudes stay
nonnegative real; the encoded top-left block is then H / lambda exactly.
Stochastic (sparse) encodings block-encode the Bernoulli-thinned,
reweighted estimator with its own realized normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hamsim.dynamics import SparsePlan, sparse_draw_mask
from hamsim.pauli import Hamiltonian

# matrices larger than this are refused by the dense constructors
DENSE_DIM_LIMIT = 1 << 13


@dataclass(frozen=True)
class BlockEncoding:
    """Unitary w of dimension 2^(n_ancilla + n_qubits) whose top-left
    system block equals encoded / normalization."""

    w: np.ndarray
    n_ancilla: int
    n_qubits: int
    normalization: float
    survivors: np.ndarray | None = field(default=None, compare=False)

    @property
    def system_dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def dim(self) -> int:
        return 1 << (self.n_ancilla + self.n_qubits)

    def encoded_block(self) -> np.ndarray:
        d = self.system_dim
        return self.w[:d, :d]

    def ancilla_zero_projector(self) -> np.ndarray:
        """Marker of the flagged subspace: |0..0><0..0| on the ancillas."""
        proj = np.zeros((self.dim, self.dim))
        d = self.system_dim
        proj[:d, :d] = np.eye(d)
        return proj


def ancilla_count(n_terms: int) -> int:
    """ceil(log2 L); 0 for a single term."""
    if n_terms < 1:
        raise ValueError("need at least one term")
    return max(int(math.ceil(math.log2(n_terms))), 0)


def prepare_state(coefficients) -> np.ndarray:
    """Amplitudes sqrt(|c_j| / lambda), zero-padded to the ancilla register."""
    coeffs = np.asarray(coefficients, dtype=float)
    if coeffs.size == 0:
        raise ValueError("empty coefficient vector")
    lam = np.abs(coeffs).sum()
    if lam == 0:
        raise ValueError("all-zero coefficients")
    amps = np.zeros(1 << ancilla_count(len(coeffs)))
    amps[:len(coeffs)] = np.sqrt(np.abs(coeffs) / lam)
    return amps


def prepare_unitary(coefficients) -> np.ndarray:
    """Real orthogonal completion with first column prepare_state(c).

    Uses the Householder reflection mapping e0 to the target state, so the
    construction is deterministic and exactly orthogonal.
    """
    target = prepare_state(coefficients)
    dim = len(target)
    w = np.zeros(dim)
    w[0] = 1.0
    w -= target
    norm2 = w @ w
    if norm2 < 1e-28:
        return np.eye(dim)
    return np.eye(dim) - (2.0 / norm2) * np.outer(w, w)


def select_matrix(h: Hamiltonian, n_ancilla: int) -> np.ndarray:
    """Block diagonal of sign(c_j) * P_j, identity in padding blocks."""
    n_terms = len(h)
    if n_terms > (1 << n_ancilla):
        raise ValueError("ancilla register too small for the term count")
    sys_dim = 1 << h.n_qubits
    dim = (1 << n_ancilla) * sys_dim
    if dim > DENSE_DIM_LIMIT:
        raise ValueError(f"select matrix dimension {dim} exceeds the dense limit")
    sel = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(1 << n_ancilla):
        lo = j * sys_dim
        if j < n_terms:
            block = math.copysign(1.0, h.coefficients[j]) \
                * h.terms[j].string.to_dense()
        else:
            block = np.eye(sys_dim)
        sel[lo:lo + sys_dim, lo:lo + sys_dim] = block
    return sel


def lcu_unitary(prepare: np.ndarray, select: np.ndarray,
                n_qubits: int) -> np.ndarray:
    """(V^dag x I) S (V x I) for a given Prepare V and Select S."""
    expanded = np.kron(prepare, np.eye(1 << n_qubits))
    return expanded.conj().T @ select @ expanded


def block_encode(h: Hamiltonian, n_ancilla: int | None = None) -> BlockEncoding:
    """Standard LCU block-encoding of H with normalization lambda."""
    n_anc = ancilla_count(len(h)) if n_ancilla is None else n_ancilla
    if len(h) > (1 << n_anc):
        raise ValueError("ancilla register too small for the term count")
    prep = prepare_unitary(h.coefficients)
    if prep.shape[0] != (1 << n_anc):
        full = np.eye(1 << n_anc)
        full[:prep.shape[0], :prep.shape[0]] = prep
        prep = full
    sel = select_matrix(h, n_anc)
    w = lcu_unitary(prep, sel, h.n_qubits)
    return BlockEncoding(w, n_anc, h.n_qubits, h.one_norm)


def lcu_error(w: np.ndarray, w_tilde: np.ndarray) -> float:
    """Spectral-norm distance ||W - W~|| (largest singular value)."""
    if w.shape != w_tilde.shape:
        raise ValueError("operand dimensions differ")
    return float(np.linalg.svd(w - w_tilde, compute_uv=False)[0])


def perturb_unitary(u: np.ndarray, eps_target: float,
                    rng: np.random.Generator,
                    rel_tol: float = 1e-3) -> np.ndarray:
    """U~ = U e^{i delta K}, K random Hermitian with unit spectral norm.

    delta is calibrated by bisection so that ||U - U~|| = eps_target within
    rel_tol relative error (the distance 2 max|sin(delta w_i / 2)| is
    monotone on [0, pi] since max|w_i| = 1).
    """
    if not 0.0 <= eps_target <= 2.0:
        raise ValueError("eps_target must be in [0, 2]")
    if eps_target == 0.0:
        return u.copy()
    dim = u.shape[0]
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    herm = (raw + raw.conj().T) / 2.0
    evals, evecs = np.linalg.eigh(herm)
    evals = evals / np.abs(evals).max()

    def distance(delta: float) -> float:
        return 2.0 * np.abs(np.sin(delta * evals / 2.0)).max()

    lo, hi = 0.0, math.pi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if distance(mid) < eps_target:
            lo = mid
        else:
            hi = mid
        if eps_target > 0 and abs(distance(mid) - eps_target) <= rel_tol * eps_target:
            lo = hi = mid
            break
    delta = 0.5 * (lo + hi)
    if abs(distance(delta) - eps_target) > 10 * rel_tol * max(eps_target, 1e-300):
        raise ValueError(f"could not reach eps_target={eps_target}")
    rotation = (evecs * np.exp(1j * delta * evals)) @ evecs.conj().T
    return u @ rotation


def sparse_estimator(h: Hamiltonian, plan: SparsePlan,
                     rng: np.random.Generator,
                     survivors: np.ndarray | None = None,
                     empty_policy: str = "force_largest"):
    """(reweighted survivor Hamiltonian, survivor indices) for one draw."""
    if plan.n_terms != len(h):
        raise ValueError("plan does not match Hamiltonian")
    mask = sparse_draw_mask(h.coefficients, plan, rng, survivors, empty_policy)
    indices = np.flatnonzero(mask)
    reweighted = h.coefficients[indices] / plan.probabilities[indices]
    return h.subset(indices, reweighted), indices


def sparse_block_encode(h: Hamiltonian, plan: SparsePlan,
                        rng: np.random.Generator,
                        survivors: np.ndarray | None = None,
                        empty_policy: str = "force_largest",
                        n_ancilla: int | None = None) -> BlockEncoding:
    """Block-encode one Bernoulli draw of the sparsified estimator.

    Survivor terms carry reweighted coefficients c_j / p_j; the realized
    normalization is their one-norm.  ``n_ancilla`` can pin the register
    size (padding blocks are identities), e.g. to keep dimensions fixed
    across draws.
    """
    estimator, indices = sparse_estimator(h, plan, rng, survivors, empty_policy)
    be = block_encode(estimator, n_ancilla)
    return BlockEncoding(be.w, be.n_ancilla, be.n_qubits, be.normalization,
                         survivors=indices)
