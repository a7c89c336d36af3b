import numpy as np
import pytest

from hamsim.ensembles import EnsembleSpec, ParetoII, WeightMode, \
    sample_hamiltonian


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def random_hamiltonian(n_qubits=4, n_terms=16, k=4, seed=0, dist=None,
                       mode=WeightMode.UP_TO_K):
    spec = EnsembleSpec(n_qubits, n_terms, k, mode,
                        dist or ParetoII(0.9), seed=seed)
    return sample_hamiltonian(spec)
