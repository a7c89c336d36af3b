import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamsim.pauli import (DenseLimitError, Hamiltonian, PauliString,
                          PauliTerm, TermListParseError, commutes,
                          format_term_list, hamiltonian_dense, one_norm,
                          parse_term_list, weight)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
SINGLE = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_word(word):
    """Independent dense oracle: explicit Kronecker product."""
    out = np.array([[1.0 + 0j]])
    for letter in word:
        out = np.kron(out, SINGLE[letter])
    return out


def all_words(n):
    return ("".join(w) for w in itertools.product("IXYZ", repeat=n))


class TestWeight:
    def test_identity_has_weight_zero(self):
        assert weight(PauliString.from_word("I" * 8)) == 0

    def test_two_site_string(self):
        assert weight(PauliString.from_word("XIZ")) == 2

    def test_full_weight(self):
        assert weight(PauliString.from_word("Y" * 6)) == 6


class TestCommutes:
    def test_two_anticommuting_sites_commute(self):
        assert commutes(PauliString.from_word("XZ"), PauliString.from_word("ZX"))

    def test_single_anticommuting_site(self):
        assert not commutes(PauliString.from_word("X"), PauliString.from_word("Z"))

    def test_self_commutation(self):
        p = PauliString.from_word("XYZI")
        assert commutes(p, p)

    def test_mismatched_register_raises(self):
        with pytest.raises(ValueError):
            commutes(PauliString.from_word("X"), PauliString.from_word("XX"))

    @pytest.mark.parametrize("n", [1, 2])
    def test_exhaustive_against_dense(self, n):
        for wa in all_words(n):
            for wb in all_words(n):
                a, b = PauliString.from_word(wa), PauliString.from_word(wb)
                da, db = kron_word(wa), kron_word(wb)
                dense_commute = np.allclose(da @ db, db @ da)
                assert commutes(a, b) == dense_commute, (wa, wb)


class TestToDense:
    def test_z(self):
        assert np.allclose(PauliString.from_word("Z").to_dense(), Z)

    def test_y_phase_convention(self):
        assert np.allclose(PauliString.from_word("Y").to_dense(), Y)

    def test_xx_against_kron_oracle(self):
        assert np.allclose(PauliString.from_word("XX").to_dense(),
                           kron_word("XX"))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_all_words_match_kron(self, n):
        for word in all_words(n):
            assert np.allclose(PauliString.from_word(word).to_dense(),
                               kron_word(word)), word

    def test_dense_limit(self):
        with pytest.raises(DenseLimitError):
            PauliString(13, 0, 0).to_dense()

    def test_involution_on_random_strings(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 7))
            x = int(rng.integers(0, 1 << n))
            z = int(rng.integers(0, 1 << n))
            dense = PauliString(n, x, z).to_dense()
            dim = 1 << n
            assert np.abs(dense @ dense - np.eye(dim)).max() < 1e-12
            assert np.abs(dense - dense.conj().T).max() < 1e-12


@given(st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1),
                        st.integers(0, (1 << n) - 1))))
@settings(max_examples=60, deadline=None)
def test_word_roundtrip_and_weight(params):
    n, x, z = params
    p = PauliString(n, x, z)
    assert PauliString.from_word(p.to_word()) == p
    assert p.weight() == bin(x | z).count("1")


class TestHamiltonian:
    def test_one_norm(self):
        h = Hamiltonian([PauliTerm(0.6, PauliString.from_word("X")),
                         PauliTerm(0.4, PauliString.from_word("Z"))])
        assert one_norm(h) == pytest.approx(1.0)

    def test_one_norm_absorbs_sign(self):
        h = Hamiltonian([PauliTerm(-0.3, PauliString.from_word("Z"))])
        assert one_norm(h) == pytest.approx(0.3)

    def test_empty_one_norm_raises(self):
        h = Hamiltonian([], n_qubits=2)
        with pytest.raises(ValueError):
            one_norm(h)

    def test_empty_dense_is_zero(self):
        h = Hamiltonian([], n_qubits=2)
        assert np.abs(hamiltonian_dense(h)).max() == 0.0

    def test_single_term_dense(self):
        h = Hamiltonian([PauliTerm(0.5, PauliString.from_word("Z"))])
        assert np.allclose(hamiltonian_dense(h), np.diag([0.5, -0.5]))

    def test_two_term_spectrum(self):
        h = Hamiltonian([PauliTerm(0.6, PauliString.from_word("X")),
                         PauliTerm(0.4, PauliString.from_word("Z"))])
        expected = np.sqrt(0.36 + 0.16)
        assert np.allclose(np.linalg.eigvalsh(hamiltonian_dense(h)),
                           [-expected, expected])

    def test_duplicate_strings_rejected(self):
        with pytest.raises(ValueError):
            Hamiltonian([PauliTerm(0.5, PauliString.from_word("X")),
                         PauliTerm(0.2, PauliString.from_word("X"))])

    def test_zero_coefficient_rejected(self):
        with pytest.raises(ValueError):
            PauliTerm(0.0, PauliString.from_word("X"))

    def test_dense_is_hermitian_and_linear(self, rng):
        from tests.conftest import random_hamiltonian
        base = random_hamiltonian(n_qubits=3, n_terms=10, k=3, seed=1)
        c1 = rng.normal(size=10)
        c2 = rng.normal(size=10)
        h1 = base.subset(np.arange(10), c1)
        h2 = base.subset(np.arange(10), c2)
        combined = base.subset(np.arange(10), 2.0 * c1 - 0.5 * c2)
        d1, d2 = hamiltonian_dense(h1), hamiltonian_dense(h2)
        assert np.abs(d1 - d1.conj().T).max() < 1e-12
        assert np.abs(hamiltonian_dense(combined) - (2.0 * d1 - 0.5 * d2)).max() \
            < 1e-12

    def test_dense_matches_kron_sum_oracle(self):
        h = parse_term_list(["0.25 XY", "-0.5 ZI", "0.125 YY"])
        oracle = 0.25 * kron_word("XY") - 0.5 * kron_word("ZI") \
            + 0.125 * kron_word("YY")
        assert np.abs(hamiltonian_dense(h) - oracle).max() < 1e-15


class TestTermListFormat:
    def test_parse_basic(self):
        h = parse_term_list(["# comment", "0.5 XI  # inline", "", "-0.25 ZY"])
        assert len(h) == 2 and h.n_qubits == 2
        assert h.coefficients.tolist() == [0.5, -0.25]

    def test_roundtrip(self):
        h = parse_term_list(["0.5 XI", "-0.25 ZY", "1e-3 YY"])
        again = parse_term_list(format_term_list(h).splitlines())
        assert np.array_equal(again.coefficients, h.coefficients)
        assert np.array_equal(again.x_masks, h.x_masks)
        assert np.array_equal(again.z_masks, h.z_masks)

    @pytest.mark.parametrize("line,lineno", [
        ("0.5", 1), ("abc XY", 1), ("0.5 XQ", 1)])
    def test_parse_errors_carry_line_numbers(self, line, lineno):
        with pytest.raises(TermListParseError) as err:
            parse_term_list([line])
        assert err.value.line_number == lineno

    def test_length_mismatch_reports_line(self):
        with pytest.raises(TermListParseError) as err:
            parse_term_list(["0.5 XY", "0.5 XYZ"])
        assert err.value.line_number == 2
