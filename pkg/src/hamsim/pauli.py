"""Pauli strings, weighted terms, and Hamiltonians as normalized term lists.

Strings use the symplectic mask encoding: bit q of ``x_mask`` is set where
X or Y acts on qubit q, bit q of ``z_mask`` where Z or Y acts.  Qubit 0 is
the leftmost letter of a Pauli word and the most significant bit of a dense
basis index, so ``to_dense`` equals the Kronecker product of the single
qubit matrices taken in qubit order.  The phase convention fixes
Y = i X Z, i.e. a factor i**popcount(x & z) on the dense realization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from hamsim import kernels

# dense realizations refuse to build above this many qubits unless the
# caller raises the limit explicitly
DENSE_QUBIT_LIMIT = 12

_LETTERS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class DenseLimitError(ValueError):
    """Requested dense matrix exceeds the configured qubit limit."""


class TermListParseError(ValueError):
    """Malformed term-list text; carries the offending line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def _check_dense_limit(n_qubits: int, max_qubits: int) -> None:
    if n_qubits > max_qubits:
        raise DenseLimitError(
            f"dense realization of {n_qubits} qubits exceeds the "
            f"{max_qubits}-qubit limit")


@dataclass(frozen=True)
class PauliString:
    """An N-qubit Pauli operator (no overall phase beyond the Y convention)."""

    n_qubits: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if not 0 <= self.x_mask <= full or not 0 <= self.z_mask <= full:
            raise ValueError("mask outside the qubit register")

    @classmethod
    def from_word(cls, word: str) -> "PauliString":
        """Build from a string over {I, X, Y, Z}; leftmost letter = qubit 0."""
        n = len(word)
        x = z = 0
        for i, letter in enumerate(word):
            try:
                bx, bz = _LETTERS[letter]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {letter!r}") from None
            bit = 1 << (n - 1 - i)
            x |= bx * bit
            z |= bz * bit
        return cls(n, x, z)

    def to_word(self) -> str:
        out = []
        for i in range(self.n_qubits):
            bit = 1 << (self.n_qubits - 1 - i)
            bx, bz = bool(self.x_mask & bit), bool(self.z_mask & bit)
            out.append("IXZY"[bx + 2 * bz])
        return "".join(out)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def weight(self) -> int:
        """Number of qubits acted on non-trivially."""
        return (self.x_mask | self.z_mask).bit_count()

    def commutes(self, other: "PauliString") -> bool:
        """True iff the count of locally anticommuting sites is even."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        anti = (self.x_mask & other.z_mask).bit_count() \
            + (self.z_mask & other.x_mask).bit_count()
        return anti % 2 == 0

    def to_dense(self, max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
        _check_dense_limit(self.n_qubits, max_qubits)
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=np.complex128)
        kernels.accumulate_pauli_terms(
            out, [self.x_mask], [self.z_mask], [1.0])
        return out


def weight(string: PauliString) -> int:
    return string.weight()


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    string: PauliString

    def __post_init__(self):
        if not math.isfinite(self.coefficient) or self.coefficient == 0.0:
            raise ValueError("coefficient must be finite and nonzero")


class Hamiltonian:
    """Ordered list of distinct Pauli terms on a fixed register.

    Internally stored as coefficient/mask arrays so the hot kernels can
    consume it directly; ``terms`` materializes the object view on demand.
    """

    def __init__(self, terms: Iterable[PauliTerm], n_qubits: int | None = None):
        terms = tuple(terms)
        if n_qubits is None:
            if not terms:
                raise ValueError("n_qubits required for an empty Hamiltonian")
            n_qubits = terms[0].string.n_qubits
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        for t in terms:
            if t.string.n_qubits != n_qubits:
                raise ValueError("mixed qubit counts in term list")
        self._init_arrays(
            np.array([t.coefficient for t in terms], dtype=np.float64),
            np.array([t.string.x_mask for t in terms], dtype=np.uint64),
            np.array([t.string.z_mask for t in terms], dtype=np.uint64),
            n_qubits)

    @classmethod
    def from_arrays(cls, coefficients, x_masks, z_masks, n_qubits: int) -> "Hamiltonian":
        self = cls.__new__(cls)
        self._init_arrays(
            np.asarray(coefficients, dtype=np.float64),
            kernels.as_mask_array(x_masks),
            kernels.as_mask_array(z_masks),
            n_qubits)
        return self

    def _init_arrays(self, coefficients, x_masks, z_masks, n_qubits):
        if not (len(coefficients) == len(x_masks) == len(z_masks)):
            raise ValueError("array lengths differ")
        if len(coefficients) and (
                not np.all(np.isfinite(coefficients)) or np.any(coefficients == 0.0)):
            raise ValueError("coefficients must be finite and nonzero")
        pairs = set(zip(x_masks.tolist(), z_masks.tolist()))
        if len(pairs) != len(x_masks):
            raise ValueError("duplicate Pauli strings in term list")
        self.n_qubits = int(n_qubits)
        self.coefficients = coefficients
        self.x_masks = x_masks
        self.z_masks = z_masks

    def __len__(self) -> int:
        return len(self.coefficients)

    @cached_property
    def terms(self) -> tuple[PauliTerm, ...]:
        return tuple(
            PauliTerm(float(c), PauliString(self.n_qubits, int(x), int(z)))
            for c, x, z in zip(self.coefficients, self.x_masks, self.z_masks))

    @cached_property
    def one_norm(self) -> float:
        """Sum of absolute coefficients; sets the lambda*t time scale."""
        if len(self) == 0:
            raise ValueError("one_norm of an empty Hamiltonian")
        return float(np.abs(self.coefficients).sum())

    def weights(self) -> np.ndarray:
        """Per-term Pauli weights."""
        return np.bitwise_count(self.x_masks | self.z_masks).astype(np.int64)

    def to_dense(self, max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
        _check_dense_limit(self.n_qubits, max_qubits)
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=np.complex128)
        kernels.accumulate_pauli_terms(
            out, self.x_masks, self.z_masks, self.coefficients)
        return out

    def subset(self, indices, coefficients=None) -> "Hamiltonian":
        """New Hamiltonian from selected terms, optionally reweighted."""
        idx = np.asarray(indices)
        coeffs = self.coefficients[idx] if coefficients is None \
            else np.asarray(coefficients, dtype=np.float64)
        return Hamiltonian.from_arrays(
            coeffs, self.x_masks[idx], self.z_masks[idx], self.n_qubits)


def one_norm(hamiltonian: Hamiltonian) -> float:
    return hamiltonian.one_norm


def hamiltonian_dense(hamiltonian: Hamiltonian,
                      max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    return hamiltonian.to_dense(max_qubits)


# --- term-list text format ---------------------------------------------
# one term per line: "<coefficient> <pauli-word>"; '#' starts a comment


def parse_term_list(lines: Iterable[str]) -> Hamiltonian:
    coeffs: list[float] = []
    words: list[str] = []
    n_qubits = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TermListParseError(
                f"expected '<coefficient> <pauli-word>', got {line!r}", lineno)
        try:
            coeff = float(parts[0])
        except ValueError:
            raise TermListParseError(
                f"bad coefficient {parts[0]!r}", lineno) from None
        word = parts[1].upper()
        if n_qubits is None:
            n_qubits = len(word)
        elif len(word) != n_qubits:
            raise TermListParseError(
                f"word length {len(word)} != {n_qubits} of first term", lineno)
        if any(ch not in _LETTERS for ch in word):
            raise TermListParseError(f"invalid Pauli word {word!r}", lineno)
        coeffs.append(coeff)
        words.append(word)
    if n_qubits is None:
        raise TermListParseError("no terms found", 0)
    strings = [PauliString.from_word(w) for w in words]
    try:
        return Hamiltonian.from_arrays(
            coeffs,
            [s.x_mask for s in strings],
            [s.z_mask for s in strings],
            n_qubits)
    except ValueError as exc:
        raise TermListParseError(str(exc), 0) from None


def read_term_list(path) -> Hamiltonian:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_term_list(handle)


def format_term_list(hamiltonian: Hamiltonian) -> str:
    lines = [
        f"{t.coefficient!r} {t.string.to_word()}"
        for t in hamiltonian.terms
    ]
    return "\n".join(lines) + "\n"


def write_term_list(hamiltonian: Hamiltonian, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(format_term_list(hamiltonian))
