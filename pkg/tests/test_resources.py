import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamsim.dynamics import make_sparse_plan
from hamsim.pauli import PauliString
from hamsim.resources import (ResourceTally, SelectCostModel, SynthesisModel,
                              deco_budget, mcx_cost, mottonen_cost,
                              pauli_exp_cost, qdrift_cost, qsvt_cost,
                              rz_tcount, select_cost, sparsto_cost,
                              toffoli_cost, trotter_cost)
from tests.conftest import random_hamiltonian


def enumerate_exponential_gates(word: str):
    """Brute-force gate list of exp(-i theta P) compiled the standard way:
    basis changes to Z, a CNOT ladder, one Rz, then uncompute."""
    gates = []
    sites = [i for i, letter in enumerate(word) if letter != "I"]
    for i in sites:
        if word[i] == "X":
            gates.append(("h", i))
        elif word[i] == "Y":
            gates.append(("sdg", i))
            gates.append(("h", i))
    for a, b in zip(sites, sites[1:]):
        gates.append(("cnot", a, b))
    gates.append(("rz", sites[-1]))
    for a, b in reversed(list(zip(sites, sites[1:]))):
        gates.append(("cnot", a, b))
    for i in reversed(sites):
        if word[i] == "X":
            gates.append(("h", i))
        elif word[i] == "Y":
            gates.append(("h", i))
            gates.append(("s", i))
    return gates


def count(gates, kind):
    return sum(1 for g in gates if g[0] == kind)


class TestRzTcount:
    def test_default_model_power_of_two(self):
        assert rz_tcount(2.0 ** -10) == 30

    def test_halving_adds_slope(self):
        model = SynthesisModel(slope=3.0)
        eps = 1e-3
        base = model.slope * math.log2(1.0 / eps)
        assert rz_tcount(eps / 2, model) \
            == math.ceil(base + model.slope)

    def test_table_override(self):
        model = SynthesisModel(table={1e-3: 44})
        assert rz_tcount(1e-3, model) == 44
        assert rz_tcount(1e-4, model) == math.ceil(3 * math.log2(1e4))

    def test_monotone_in_accuracy(self):
        values = [rz_tcount(eps) for eps in (1e-2, 1e-4, 1e-8, 1e-12)]
        assert values == sorted(values)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            rz_tcount(0.0)
        with pytest.raises(ValueError):
            rz_tcount(1.5)


class TestDecoBudget:
    def test_division(self):
        assert deco_budget(1e-3, 1000) == pytest.approx(1e-6)

    def test_single_rotation(self):
        assert deco_budget(0.05, 1) == 0.05

    def test_product_recovers_total(self):
        assert deco_budget(3e-4, 7) * 7 == pytest.approx(3e-4)

    def test_zero_rotations_rejected(self):
        with pytest.raises(ValueError):
            deco_budget(1e-3, 0)


class TestPauliExpCost:
    def test_single_z(self):
        tally = pauli_exp_cost(PauliString.from_word("Z"))
        assert tally.cnot_count == 0 and tally.rz_count == 1
        assert tally.clifford_1q == 0

    def test_ladder_for_weight_three(self):
        assert pauli_exp_cost(3).cnot_count == 4

    def test_all_y_clifford_count(self):
        assert pauli_exp_cost(PauliString.from_word("YYYYYY")).clifford_1q == 24

    def test_worst_case_weight_only(self):
        tally = pauli_exp_cost(5)
        assert tally.clifford_1q == 20  # assumes all-Y

    def test_matches_enumerator_on_words(self):
        for word in ("Z", "XZ", "YYY", "XYZIX", "ZIIIIY"):
            gates = enumerate_exponential_gates(word)
            tally = pauli_exp_cost(PauliString.from_word(word))
            assert tally.cnot_count == count(gates, "cnot")
            assert tally.rz_count == count(gates, "rz")
            one_q = count(gates, "h") + count(gates, "s") + count(gates, "sdg")
            assert tally.clifford_1q == one_q


class TestTallyAlgebra:
    def test_componentwise_addition(self):
        two = toffoli_cost() + toffoli_cost()
        assert (two.cnot_count, two.clifford_1q, two.t_count) == (12, 4, 14)
        assert two.rz_count == 0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ResourceTally(t_count=-1)

    def test_scaling_keeps_ancillas(self):
        tally = ResourceTally(t_count=7, ancillas=3)
        scaled = tally.scaled(10)
        assert scaled.t_count == 70 and scaled.ancillas == 3

    def test_rounding(self):
        tally = ResourceTally(t_count=6.6, cnot_count=1.2)
        assert tally.rounded() == ResourceTally(t_count=7, cnot_count=1)


@given(st.integers(1, 50), st.integers(1, 50))
@settings(max_examples=30, deadline=None)
def test_tally_addition_commutes(a, b):
    ta = ResourceTally(t_count=a, cnot_count=2 * a, rz_count=a % 7)
    tb = ResourceTally(t_count=b, cnot_count=b, rz_count=b % 5)
    assert ta + tb == tb + ta


class TestToffoliMcxMottonen:
    def test_toffoli_constants(self):
        tally = toffoli_cost()
        assert (tally.cnot_count, tally.clifford_1q, tally.t_count) == (6, 2, 7)
        assert tally.rz_count == 0

    def test_mcx_single_control(self):
        assert mcx_cost(1) == ResourceTally(cnot_count=1)

    def test_mcx_two_controls(self):
        assert mcx_cost(2) == toffoli_cost()

    def test_mcx_chain(self):
        tally = mcx_cost(4)
        assert tally.t_count == 5 * 7 and tally.ancillas == 2

    def test_mottonen_small(self):
        assert mottonen_cost(0) == ResourceTally()
        one = mottonen_cost(1)
        assert one.rz_count == 1 and one.cnot_count == 0
        four = mottonen_cost(4)
        assert four.rz_count == 15 and four.cnot_count == 14


class TestSelectCost:
    def test_single_term_is_fanout_only(self):
        tally = select_cost(1, 0, [3])
        assert tally.t_count == 0 and tally.cnot_count == 3

    def test_two_terms(self):
        tally = select_cost(2, 1, [1, 1])
        assert tally.t_count == 2 * 7
        assert tally.cnot_count == 2 * 6 + 2

    def test_weights_scale_only_fanout(self):
        base = select_cost(4, 2, [1, 1, 1, 1])
        doubled = select_cost(4, 2, [2, 2, 2, 2])
        assert doubled.cnot_count - base.cnot_count == 4
        assert doubled.t_count == base.t_count

    def test_custom_model(self):
        model = SelectCostModel(toffolis_per_term=1.0,
                                fanout_cnots_per_weight=2.0,
                                cnots_per_term=1.0)
        tally = select_cost(3, 2, [1, 2, 1], model)
        assert tally.t_count == 2 * 7
        assert tally.cnot_count == 2 * 6 + 2 * 4 + 3


class TestMethodCosts:
    def test_trotter_single_term(self):
        h = random_hamiltonian(n_terms=1, seed=0)
        tally = trotter_cost(h, 1.0, 1, 1, 1e-3)
        w = int(h.weights()[0])
        assert tally.rz_count == 1
        assert tally.cnot_count == 2 * (w - 1)

    def test_trotter_linear_in_steps(self):
        h = random_hamiltonian(n_terms=12, seed=1)
        one = trotter_cost(h, 1.0, 3, 1, 1e-3)
        two = trotter_cost(h, 1.0, 6, 1, 1e-3)
        assert two.cnot_count == 2 * one.cnot_count
        assert two.rz_count == 2 * one.rz_count

    def test_order2_doubles_rotations(self):
        h = random_hamiltonian(n_terms=9, seed=2)
        p1 = trotter_cost(h, 1.0, 4, 1, 1e-3)
        p2 = trotter_cost(h, 1.0, 4, 2, 1e-3)
        assert p2.rz_count == 2 * p1.rz_count

    def test_trotter_cnots_match_enumerator(self):
        # brute-force oracle over the realized term list
        for seed in range(20):
            h = random_hamiltonian(n_qubits=5, n_terms=20, k=4, seed=seed)
            steps = 3
            tally = trotter_cost(h, 1.0, steps, 1, 1e-3)
            gates = []
            for _ in range(steps):
                for term in h.terms:
                    gates.extend(
                        enumerate_exponential_gates(term.string.to_word()))
            assert tally.cnot_count == count(gates, "cnot")
            assert tally.rz_count == count(gates, "rz")

    def test_qdrift_expected_counts(self):
        h = random_hamiltonian(n_terms=15, seed=3)
        probs = np.abs(h.coefficients) / h.one_norm
        weights = h.weights()
        tally = qdrift_cost(h, 500, 1e-3)
        assert tally.rz_count == 500
        expected_cnot = 500 * float(probs @ (2 * (weights - 1)))
        assert tally.cnot_count == pytest.approx(expected_cnot)

    def test_qdrift_uniform_weight_mix(self):
        # weights {1,3} with probability 1/2 each: expected CNOTs/step = 2
        from hamsim.pauli import Hamiltonian, PauliTerm
        h = Hamiltonian([PauliTerm(0.5, PauliString.from_word("ZII")),
                         PauliTerm(0.5, PauliString.from_word("XYZ"))])
        tally = qdrift_cost(h, 1, 1e-3)
        assert tally.cnot_count == pytest.approx(2.0)

    def test_sparsto_full_plan_equals_trotter1(self):
        h = random_hamiltonian(n_terms=10, seed=4)
        plan = make_sparse_plan(h, 1.0)
        a = sparsto_cost(h, plan, 6, 1e-3)
        b = trotter_cost(h, 1.0, 6, 1, 1e-3)
        assert a == b

    def test_sparsto_expected_rz_is_mu(self):
        h = random_hamiltonian(n_terms=25, seed=5)
        plan = make_sparse_plan(h, 0.5)
        tally = sparsto_cost(h, plan, 1, 1e-3)
        assert tally.rz_count == pytest.approx(plan.expected_terms)


class TestQsvtCost:
    def test_trivial_encoding(self):
        tally = qsvt_cost(1, 1, [2], 1e-3)
        assert tally.rz_count == 1          # single projector phase
        assert tally.cnot_count == 2        # fanout only
        assert tally.ancillas == 0

    def test_monotone_in_degree(self):
        prev = None
        for d in (1, 2, 5, 9):
            tally = qsvt_cost(12, d, np.full(12, 3.0), 1e-3)
            if prev is not None:
                assert tally.t_count > prev.t_count
                assert tally.cnot_count > prev.cnot_count
            prev = tally

    def test_rotation_budget_structure(self):
        n_terms, degree = 12, 7
        a = math.ceil(math.log2(n_terms))
        tally = qsvt_cost(n_terms, degree, np.full(n_terms, 2.0), 1e-3)
        assert tally.rz_count == degree * (1 + 2 * (2 ** a - 1))

    def test_power_of_two_discontinuity(self):
        # counts drop discontinuously when mu crosses below a power of two
        w = 3.0
        above = qsvt_cost(16.5, 10, np.full(17, w), 1e-3)
        below = qsvt_cost(15.9, 10, np.full(16, w), 1e-3)
        assert above.ancillas - below.ancillas >= 1
        assert above.t_count > below.t_count + 100

    def test_tau_one_sparse_equals_dense(self):
        h = random_hamiltonian(n_terms=14, seed=6)
        plan = make_sparse_plan(h, 1.0)
        weights = h.weights().astype(float)
        dense = qsvt_cost(len(h), 9, weights, 1e-4)
        sparse = qsvt_cost(plan.expected_terms, 9,
                           plan.probabilities * weights, 1e-4)
        assert dense == sparse
