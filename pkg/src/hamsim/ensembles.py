"""Random Hamiltonian ensembles and coefficient-magnitude fitting.

Instances are sums of L distinct random Pauli strings of bounded (or fixed)
weight with coefficients drawn from a lognormal or Pareto-II (Lomax)
distribution, given independent uniform signs and rescaled to unit one-norm.
The fitting side recovers the dispersion parameters from magnitude samples
(exact MLE in both families).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hamsim.pauli import Hamiltonian

# fit_pareto2 reports this instead of a diverging shape estimate
PARETO_SHAPE_CAP = 1e6


@dataclass(frozen=True)
class LogNormal:
    """log|c| ~ Normal(mu_log, sigma2); sigma2 controls dispersion."""

    mu_log: float
    sigma2: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    def sample_magnitudes(self, rng: np.random.Generator, size=None):
        return np.exp(rng.normal(self.mu_log, math.sqrt(self.sigma2), size))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        from scipy.stats import norm
        out[pos] = norm.cdf((np.log(x[pos]) - self.mu_log) / math.sqrt(self.sigma2))
        return out

    def label(self) -> str:
        return f"lognormal:{self.sigma2:g}"


@dataclass(frozen=True)
class ParetoII:
    """Lomax density a (1 + x)^-(a+1) on x >= 0 with unit scale."""

    a: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("shape a must be positive")

    def sample_magnitudes(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        return (1.0 - u) ** (-1.0 / self.a) - 1.0

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.a * (1.0 + x) ** (-(self.a + 1.0))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, 1.0 - (1.0 + np.maximum(x, 0.0)) ** (-self.a), 0.0)

    def label(self) -> str:
        return f"pareto:{self.a:g}"


CoefficientDistribution = LogNormal | ParetoII


def parse_distribution(label: str) -> CoefficientDistribution:
    """Parse 'lognormal:<sigma2>' or 'pareto:<a>' (mu_log fixed to 0)."""
    kind, _, param = label.partition(":")
    kind = kind.strip().lower()
    if not param:
        raise ValueError(f"distribution {label!r} needs a parameter")
    value = float(param)
    if kind == "lognormal":
        return LogNormal(0.0, value)
    if kind == "pareto":
        return ParetoII(value)
    raise ValueError(f"unknown distribution kind {kind!r}")


def sample_coefficient(dist: CoefficientDistribution,
                       rng: np.random.Generator) -> float:
    """One positive draw from the magnitude distribution."""
    return float(dist.sample_magnitudes(rng))


class WeightMode(enum.Enum):
    UP_TO_K = "upto_k"
    EXACTLY_K = "exactly_k"


@dataclass(frozen=True)
class EnsembleSpec:
    n_qubits: int
    n_terms: int
    max_weight: int
    mode: WeightMode
    dist: CoefficientDistribution
    seed: int
    random_signs: bool = True

    def __post_init__(self):
        if not 1 <= self.max_weight <= self.n_qubits:
            raise ValueError("weight bound must be in 1..n_qubits")
        cap = max_terms(self.n_qubits, self.max_weight, self.mode)
        if not 1 <= self.n_terms <= cap:
            raise ValueError(
                f"n_terms={self.n_terms} outside 1..{cap} for this register")


def max_terms(n_qubits: int, k: int, mode: WeightMode) -> int:
    """Count of distinct non-identity strings admissible at weight k."""
    if not 1 <= k <= n_qubits:
        raise ValueError("k must be in 1..n_qubits")
    if mode is WeightMode.EXACTLY_K:
        return math.comb(n_qubits, k) * 3 ** k
    return sum(math.comb(n_qubits, j) * 3 ** j for j in range(1, k + 1))


def _masks_from_sites(sites, letters, n_qubits) -> tuple[int, int]:
    x = z = 0
    for site, letter in zip(sites, letters):
        bit = 1 << (n_qubits - 1 - int(site))
        if letter == 0:        # X
            x |= bit
        elif letter == 1:      # Y
            x |= bit
            z |= bit
        else:                  # Z
            z |= bit
    return x, z


def _enumerate_strings(n_qubits: int, weights: Sequence[int]):
    for k in weights:
        for sites in itertools.combinations(range(n_qubits), k):
            for letters in itertools.product(range(3), repeat=k):
                yield _masks_from_sites(sites, letters, n_qubits)


def sample_strings(n_qubits: int, k: int, mode: WeightMode, n_terms: int,
                   rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """n_terms distinct strings, uniform over the admissible set."""
    if mode is WeightMode.EXACTLY_K:
        admissible_weights = [k]
    else:
        admissible_weights = list(range(1, k + 1))
    cap = max_terms(n_qubits, k, mode)
    if n_terms > cap:
        raise ValueError("n_terms exceeds the admissible string count")

    if n_terms > cap // 2:
        # dense regime: enumerate everything and shuffle
        pool = list(_enumerate_strings(n_qubits, admissible_weights))
        order = rng.permutation(len(pool))[:n_terms]
        chosen = [pool[i] for i in order]
    else:
        # sparse regime: rejection against a hash set
        counts = np.array(
            [math.comb(n_qubits, j) * 3 ** j for j in admissible_weights],
            dtype=float)
        probs = counts / counts.sum()
        seen: set[tuple[int, int]] = set()
        chosen = []
        while len(chosen) < n_terms:
            j = admissible_weights[rng.choice(len(admissible_weights), p=probs)]
            sites = rng.choice(n_qubits, size=j, replace=False)
            letters = rng.integers(0, 3, size=j)
            masks = _masks_from_sites(sites, letters, n_qubits)
            if masks in seen:
                continue
            seen.add(masks)
            chosen.append(masks)
    xs = np.array([m[0] for m in chosen], dtype=np.uint64)
    zs = np.array([m[1] for m in chosen], dtype=np.uint64)
    return xs, zs


def sample_hamiltonian(spec: EnsembleSpec) -> Hamiltonian:
    """Draw one ensemble instance; deterministic given spec.seed."""
    rng = np.random.default_rng(spec.seed)
    xs, zs = sample_strings(
        spec.n_qubits, spec.max_weight, spec.mode, spec.n_terms, rng)
    mags = np.asarray(spec.dist.sample_magnitudes(rng, spec.n_terms))
    if spec.random_signs:
        signs = np.where(rng.random(spec.n_terms) < 0.5, -1.0, 1.0)
    else:
        signs = np.ones(spec.n_terms)
    coeffs = signs * mags
    coeffs /= np.abs(coeffs).sum()
    return Hamiltonian.from_arrays(coeffs, xs, zs, spec.n_qubits)


def _checked_magnitudes(magnitudes) -> np.ndarray:
    mags = np.asarray(magnitudes, dtype=float)
    if mags.ndim != 1 or len(mags) < 2:
        raise ValueError("need at least 2 magnitude samples")
    if np.any(mags <= 0) or not np.all(np.isfinite(mags)):
        raise ValueError("magnitudes must be strictly positive and finite")
    return mags


def fit_lognormal(magnitudes) -> tuple[float, float]:
    """(mu_log, sigma2): mean and unbiased variance of log-magnitudes."""
    logs = np.log(_checked_magnitudes(magnitudes))
    return float(logs.mean()), float(logs.var(ddof=1))


def fit_pareto2(magnitudes, tail_quantile: float | None = None) -> float:
    """Unit-scale Lomax MLE a = n / sum(log1p(x)).

    Not scale invariant by design: magnitudes are expected to be normalized
    to unit one-norm first.  ``tail_quantile`` (in (0,1)) optionally
    restricts the fit to the upper tail of the sample.
    """
    mags = _checked_magnitudes(magnitudes)
    if tail_quantile is not None:
        if not 0.0 < tail_quantile < 1.0:
            raise ValueError("tail_quantile must be in (0,1)")
        cut = np.quantile(mags, tail_quantile)
        tail = mags[mags >= cut]
        if len(tail) >= 2:
            mags = tail
    denom = np.log1p(mags).sum()
    if denom <= 0 or len(mags) / denom > PARETO_SHAPE_CAP:
        raise OverflowError(
            f"fitted shape exceeds the {PARETO_SHAPE_CAP:g} cap")
    return float(len(mags) / denom)
