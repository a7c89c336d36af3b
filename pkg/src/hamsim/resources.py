"""Clifford+T resource accounting with explicit, configurable cost models.

Rotation synthesis uses an affine-in-log2 T-count model standing in for
gridsynth output (a lookup table can override it); Select uses a declared
binary-tree walk model.  Randomized methods keep expected fractional
counts at full precision and round only when asked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from hamsim.dynamics import SparsePlan
from hamsim.pauli import Hamiltonian, PauliString


@dataclass(frozen=True)
class ResourceTally:
    """Gate counts for one algorithm configuration.

    Counts are stored as floats so probability-weighted expectations stay
    unbiased; ancillas is the transient workspace maximum, set explicitly
    by the composite cost functions.
    """

    t_count: float = 0.0
    cnot_count: float = 0.0
    rz_count: float = 0.0
    clifford_1q: float = 0.0
    ancillas: float = 0.0

    def __post_init__(self):
        for name in ("t_count", "cnot_count", "rz_count", "clifford_1q",
                     "ancillas"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def __add__(self, other: "ResourceTally") -> "ResourceTally":
        return ResourceTally(
            self.t_count + other.t_count,
            self.cnot_count + other.cnot_count,
            self.rz_count + other.rz_count,
            self.clifford_1q + other.clifford_1q,
            self.ancillas + other.ancillas)

    def scaled(self, factor: float) -> "ResourceTally":
        """Gate counts scaled by a repetition or probability factor;
        the workspace maximum is unchanged."""
        if factor < 0:
            raise ValueError("factor must be nonnegative")
        return ResourceTally(
            self.t_count * factor,
            self.cnot_count * factor,
            self.rz_count * factor,
            self.clifford_1q * factor,
            self.ancillas)

    def with_ancillas(self, ancillas: float) -> "ResourceTally":
        return replace(self, ancillas=ancillas)

    def rounded(self) -> "ResourceTally":
        """Presentation form: every count rounded to the nearest integer."""
        return ResourceTally(*(float(round(v)) for v in (
            self.t_count, self.cnot_count, self.rz_count, self.clifford_1q,
            self.ancillas)))


@dataclass(frozen=True)
class SynthesisModel:
    """T-count of one R_z at accuracy eps: ceil(slope*log2(1/eps) + offset),
    unless a lookup table provides the exact value."""

    slope: float = 3.0
    offset: float = 0.0
    table: dict[float, int] | None = None

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError("slope must be positive")
        if self.table and any(v <= 0 for v in self.table.values()):
            raise ValueError("table entries must be positive")


def rz_tcount(eps_deco: float, model: SynthesisModel = SynthesisModel()) -> int:
    """T gates for one R_z synthesized to accuracy eps_deco."""
    if not 0.0 < eps_deco < 1.0:
        raise ValueError("eps_deco must be in (0, 1)")
    if model.table:
        for key, value in model.table.items():
            if math.isclose(key, eps_deco, rel_tol=1e-9):
                return int(value)
    return int(math.ceil(model.slope * math.log2(1.0 / eps_deco) + model.offset))


def deco_budget(eps_total: float, n_rotations: float) -> float:
    """Per-rotation accuracy so that n_rotations * eps_deco = eps_total."""
    if n_rotations < 1:
        raise ValueError("need at least one rotation")
    return eps_total / n_rotations


def pauli_exp_cost(string_or_weight) -> ResourceTally:
    """Clifford+CNOT+Rz cost of exp(-i theta P), excluding Rz synthesis.

    CNOT ladder down and up gives 2(K-1); basis changes cost 2 per X site
    and 4 per Y site when the site types are known, else worst-case 4K.
    """
    if isinstance(string_or_weight, PauliString):
        p = string_or_weight
        k = p.weight()
        n_y = (p.x_mask & p.z_mask).bit_count()
        n_x = (p.x_mask & ~p.z_mask).bit_count()
        clifford = 2 * n_x + 4 * n_y
    else:
        k = int(string_or_weight)
        clifford = 4 * k
    if k < 1:
        raise ValueError("weight must be >= 1")
    return ResourceTally(cnot_count=2 * (k - 1), rz_count=1,
                         clifford_1q=clifford)


def _weighted_step_tally(h: Hamiltonian, probabilities) -> ResourceTally:
    """Probability-weighted sum of per-term exponential costs (vectorized;
    matches summing pauli_exp_cost over terms)."""
    probs = np.asarray(probabilities, dtype=float)
    weights = h.weights()
    n_y = np.bitwise_count(h.x_masks & h.z_masks).astype(np.int64)
    n_x = np.bitwise_count(h.x_masks & ~h.z_masks).astype(np.int64)
    return ResourceTally(
        cnot_count=float(probs @ (2 * (weights - 1))),
        rz_count=float(probs.sum()),
        clifford_1q=float(probs @ (2 * n_x + 4 * n_y)))


def trotter_cost(h: Hamiltonian, t: float, steps: int, order: int,
                 eps_total: float,
                 model: SynthesisModel = SynthesisModel()) -> ResourceTally:
    """Product-formula tally: L (order 1) or 2L (order 2) exponentials per
    step, times steps, with the synthesis budget spread over all rotations."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    reps = 1 if order == 1 else 2
    per_step = _weighted_step_tally(h, np.full(len(h), float(reps)))
    total = per_step.scaled(steps)
    eps_deco = deco_budget(eps_total, total.rz_count)
    t_gates = total.rz_count * rz_tcount(eps_deco, model)
    return replace(total, t_count=t_gates, ancillas=0.0)


def qdrift_cost(h: Hamiltonian, samples: int, eps_total: float,
                model: SynthesisModel = SynthesisModel()) -> ResourceTally:
    """Expected qDRIFT tally: one probability-weighted exponential per step."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    probs = np.abs(h.coefficients) / h.one_norm
    total = _weighted_step_tally(h, probs).scaled(samples)
    eps_deco = deco_budget(eps_total, samples)
    t_gates = samples * rz_tcount(eps_deco, model)
    return replace(total, t_count=t_gates, rz_count=float(samples),
                   ancillas=0.0)


def sparsto_cost(h: Hamiltonian, plan: SparsePlan, steps: int,
                 eps_total: float,
                 model: SynthesisModel = SynthesisModel()) -> ResourceTally:
    """Expected sparsified tally: survival-weighted exponentials per step,
    budgeted over the expected steps * mu rotations."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if plan.n_terms != len(h):
        raise ValueError("plan does not match Hamiltonian")
    total = _weighted_step_tally(h, plan.probabilities).scaled(steps)
    expected_rotations = steps * plan.expected_terms
    eps_deco = deco_budget(eps_total, expected_rotations)
    t_gates = expected_rotations * rz_tcount(eps_deco, model)
    return replace(total, t_count=t_gates, ancillas=0.0)


def toffoli_cost() -> ResourceTally:
    """One Toffoli in Clifford+T: 6 CNOTs, 2 Hadamards, 7 T gates."""
    return ResourceTally(t_count=7, cnot_count=6, clifford_1q=2)


def mcx_cost(n_controls: int) -> ResourceTally:
    """Multi-controlled X via the standard Toffoli chain.

    1 control: a CNOT; 2: one Toffoli; a >= 3: (2a - 3) Toffolis with a - 2
    transient work ancillas.
    """
    if n_controls < 1:
        raise ValueError("need at least one control")
    if n_controls == 1:
        return ResourceTally(cnot_count=1)
    if n_controls == 2:
        return toffoli_cost()
    chain = toffoli_cost().scaled(2 * n_controls - 3)
    return chain.with_ancillas(n_controls - 2)


def mottonen_cost(n_qubits: int) -> ResourceTally:
    """Real-nonnegative-amplitude state preparation on n_qubits:
    2^a - 1 rotations (Ry, synthesized like Rz) and 2^a - 2 CNOTs."""
    if n_qubits < 0:
        raise ValueError("qubit count must be nonnegative")
    if n_qubits == 0:
        return ResourceTally()
    size = 1 << n_qubits
    return ResourceTally(rz_count=size - 1,
                         cnot_count=size - 2 if n_qubits >= 1 else 0)


@dataclass(frozen=True)
class SelectCostModel:
    """Declared Select model: tree-walk Toffolis per term boundary, CNOT
    fanout per Pauli weight, and optional extra CNOTs per term."""

    toffolis_per_term: float = 2.0
    fanout_cnots_per_weight: float = 1.0
    cnots_per_term: float = 0.0


def select_cost(n_terms: float, n_ancilla: int, weights,
                model: SelectCostModel = SelectCostModel()) -> ResourceTally:
    """Term-indexed controlled-Pauli application cost.

    Defaults: 2(L-1) Toffolis for the binary-tree walk (compute and
    uncompute of the Boolean products) plus sum(weights) controlled-Pauli
    fanout CNOTs; the L controlled applications themselves are
    ancilla-free.  Fractional n_terms encodes an expected survivor count.
    """
    if n_terms < 1:
        raise ValueError("need at least one term")
    if n_terms > (1 << n_ancilla):
        raise ValueError("ancilla register too small")
    tree = toffoli_cost().scaled(model.toffolis_per_term * max(n_terms - 1, 0.0))
    fanout = ResourceTally(
        cnot_count=model.fanout_cnots_per_weight * float(np.sum(weights))
        + model.cnots_per_term * n_terms)
    work = max(n_ancilla - 1, 0)
    return (tree + fanout).with_ancillas(work)


def qsvt_cost(n_terms_effective: float, degree: int, weights,
              eps_total: float, model: SynthesisModel = SynthesisModel(),
              select_model: SelectCostModel = SelectCostModel()) -> ResourceTally:
    """QSVT tally: per degree step one projector-controlled phase
    (2 multi-controlled X + 1 Rz) and one block-encoding use (2 Mottonen
    preparations + 1 Select).

    For the sparse variant pass the expected survivor count and the
    survival-weighted weights; the ancilla register is ceil(log2 mu), so
    counts drop discontinuously when mu crosses a power of two.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if n_terms_effective < 1:
        raise ValueError("need at least one effective term")
    n_anc = max(int(math.ceil(math.log2(n_terms_effective))), 0)
    phase = ResourceTally(rz_count=1)
    if n_anc >= 1:
        phase = phase + mcx_cost(n_anc).scaled(2.0)
    encoding = mottonen_cost(n_anc).scaled(2.0) \
        + select_cost(n_terms_effective, n_anc, weights, select_model)
    per_degree = phase + encoding
    total = per_degree.scaled(degree)
    eps_deco = deco_budget(eps_total, total.rz_count)
    t_gates = total.t_count + total.rz_count * rz_tcount(eps_deco, model)
    # register plus the larger of the tree-walk (a-1) and MCX (a-2) workspaces
    work = max(n_anc - 1, 0)
    return replace(total, t_count=t_gates, ancillas=float(n_anc + work))
