"""Numerical laboratory for deterministic and randomized Hamiltonian
simulation: product formulas, qDRIFT, stochastic sparsification, LCU
block-encodings, walk-based QSVT, and Clifford+T resource models."""

__version__ = "0.1.0"
