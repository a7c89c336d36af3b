"""Experiment runners: sweeps, Monte Carlo averaging, crossover detection,
ingestion, and deterministic CSV emission.

Every task derives its random streams from (base_seed, task indices) via
numpy SeedSequence spawn keys, and output rows are emitted in sorted task
order, so a rerun with the same config and seed is bitwise identical
regardless of worker count.
"""

from __future__ import annotations

import dataclasses
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from hamsim import blockenc, dynamics, qsvt, resources
from hamsim.config import ExperimentConfig, config_metadata
from hamsim.ensembles import EnsembleSpec, WeightMode, parse_distribution, \
    fit_lognormal, fit_pareto2, sample_hamiltonian
from hamsim.pauli import Hamiltonian, read_term_list

# spectral errors are clamped into this range before being used as the
# rotation-synthesis budget of a tally
EPS_BUDGET_RANGE = (1e-12, 0.5)

_STREAM_QDRIFT = 1
_STREAM_SPARSTO = 2
_STREAM_SPARSE_QSVT = 3
_STREAM_PERTURB = 4


# --- records -------------------------------------------------------------


@dataclass(frozen=True)
class SweepRecord:
    experiment: str
    ensemble: str
    term_count: int
    weight_k: int
    instance: int
    instance_seed: int
    method: str
    order_p: int | None
    steps_r: int | None
    samples_n: int | None
    degree_d: int | None
    threshold_tau: float | None
    spectral_error: float
    error_stderr: float
    t_count: float
    cnot_count: float
    rz_count: float
    ancillas: float
    wall_time: float


@dataclass(frozen=True)
class PropagationRecord:
    experiment: str
    instance: int
    instance_seed: int
    eps_oracle: float
    degree_d: int | None
    eps_poly: float
    eps_be: float          # series-output contribution (saturates with d)
    eps_be_duse: float     # d-use walk-product accumulation (grows with d)
    eps_total: float
    bound: float
    wall_time: float


@dataclass(frozen=True)
class CrossoverRecord:
    experiment: str
    ensemble: str
    term_count: int
    instance: int
    instance_seed: int
    method_a: str
    method_b: str
    cost: float
    error: float
    degenerate: bool


@dataclass(frozen=True)
class FitRecord:
    source: str
    term_count: int
    n_qubits: int
    sigma2_log: float
    pareto_shape: float


# --- deterministic seeding ----------------------------------------------


def seed_sequence(base_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(base_seed, spawn_key=tuple(key))


def derived_seed(base_seed: int, *key: int) -> int:
    return int(seed_sequence(base_seed, *key).generate_state(1, np.uint64)[0])


def derived_rng(base_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(base_seed, *key))


# --- CSV emission --------------------------------------------------------


def _render_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_csv(records, metadata) -> str:
    """Deterministic CSV: '#' metadata lines, header, one row per record."""
    lines = [f"# {key} = {value}" for key, value in metadata]
    if records:
        names = [f.name for f in dataclasses.fields(records[0])]
        lines.append(",".join(names))
        for record in records:
            lines.append(",".join(
                _render_value(getattr(record, name)) for name in names))
    return "\n".join(lines) + "\n"


def write_csv(path, records, metadata) -> None:
    text = render_csv(records, metadata)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


# --- common helpers ------------------------------------------------------


def _weight_mode(config: ExperimentConfig) -> WeightMode:
    return WeightMode(config.weight_mode)


def _instance_spec(config: ExperimentConfig, ens_idx: int, inst: int,
                   dist_label: str, term_count: int,
                   weight_k: int | None = None,
                   mode: WeightMode | None = None) -> EnsembleSpec:
    return EnsembleSpec(
        n_qubits=config.n_qubits,
        n_terms=term_count,
        max_weight=config.weight_k if weight_k is None else weight_k,
        mode=_weight_mode(config) if mode is None else mode,
        dist=parse_distribution(dist_label),
        seed=derived_seed(config.base_seed, ens_idx, inst, 0),
        random_signs=config.random_signs)


def _eps_budget(error: float) -> float:
    lo, hi = EPS_BUDGET_RANGE
    return min(max(error, lo), hi)


def _auto_d_grid(config: ExperimentConfig, t_eff: float) -> list[int]:
    if config.d_grid:
        return sorted(set(config.d_grid))
    base = int(math.ceil(t_eff))
    if config.experiment == "qsvt-propagation":
        return list(range(base, base + 61))
    start = max(1, base - 2)
    return list(range(start, base + 61, 2))


class _BlockTimer:
    """Average wall time per record of one method block (0 when disabled)."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.started = time.perf_counter() if enabled else 0.0

    def per_record(self, n_records: int) -> float:
        if not self.enabled or n_records == 0:
            return 0.0
        return (time.perf_counter() - self.started) / n_records


# --- method sweep (Figs. 3/5/6 structure) --------------------------------


def _sweep_task(config: ExperimentConfig, ens_idx: int, inst: int,
                dist_label: str, term_count: int,
                weight_k: int | None = None,
                mode: WeightMode | None = None,
                with_product_methods: bool = True,
                with_qsvt_methods: bool = False) -> list[SweepRecord]:
    spec = _instance_spec(config, ens_idx, inst, dist_label, term_count,
                          weight_k, mode)
    h = sample_hamiltonian(spec)
    lam = h.one_norm
    t = config.t_multiplier / lam
    exact = dynamics.exact_evolution(h, t)
    model = config.synthesis_model()
    select_model = config.select_model()
    k_value = spec.max_weight
    records: list[SweepRecord] = []

    def emit(method, tally, error, stderr=0.0, order=None, steps=None,
             samples=None, degree=None, tau=None, wall=0.0):
        records.append(SweepRecord(
            experiment=config.experiment, ensemble=dist_label,
            term_count=term_count, weight_k=k_value, instance=inst,
            instance_seed=spec.seed, method=method, order_p=order,
            steps_r=steps, samples_n=samples, degree_d=degree,
            threshold_tau=tau, spectral_error=error, error_stderr=stderr,
            t_count=tally.t_count, cnot_count=tally.cnot_count,
            rz_count=tally.rz_count, ancillas=tally.ancillas,
            wall_time=wall))

    if with_product_methods:
        for order in config.trotter_orders:
            timer = _BlockTimer(config.record_wall_time)
            block = []
            for steps in config.r_grid:
                u = dynamics.trotter_evolution(h, t, steps, order)
                err = dynamics.spectral_error(u, exact)
                tally = resources.trotter_cost(
                    h, t, steps, order, _eps_budget(err), model)
                block.append((f"trotter-{order}", tally, err, order, steps))
            wall = timer.per_record(len(block))
            for method, tally, err, order_, steps in block:
                emit(method, tally, err, order=order_, steps=steps, wall=wall)

        timer = _BlockTimer(config.record_wall_time)
        block = []
        for samples in config.n_grid:
            errs = []
            for real in range(config.n_realizations):
                rng = derived_rng(config.base_seed, ens_idx, inst,
                                  _STREAM_QDRIFT, samples, real)
                u, _ = dynamics.qdrift_evolution(h, t, samples, rng)
                errs.append(dynamics.spectral_error(u, exact))
            mean_err = float(np.mean(errs))
            stderr = float(np.std(errs, ddof=1) / math.sqrt(len(errs))) \
                if len(errs) > 1 else 0.0
            tally = resources.qdrift_cost(h, samples, _eps_budget(mean_err),
                                          model)
            block.append((tally, mean_err, stderr, samples))
        wall = timer.per_record(len(block))
        for tally, err, stderr, samples in block:
            emit("qdrift", tally, err, stderr, samples=samples, wall=wall)

        for tau in config.thresholds:
            plan = dynamics.make_sparse_plan(h, tau)
            timer = _BlockTimer(config.record_wall_time)
            block = []
            for steps in config.sparsto_r_grid:
                errs = []
                for real in range(config.n_realizations):
                    rng = derived_rng(config.base_seed, ens_idx, inst,
                                      _STREAM_SPARSTO, steps, real)
                    u = dynamics.sparsto_evolution(h, t, steps, plan, rng)
                    errs.append(dynamics.spectral_error(u, exact))
                mean_err = float(np.mean(errs))
                stderr = float(np.std(errs, ddof=1) / math.sqrt(len(errs))) \
                    if len(errs) > 1 else 0.0
                tally = resources.sparsto_cost(
                    h, plan, steps, _eps_budget(mean_err), model)
                block.append((tally, mean_err, stderr, steps))
            wall = timer.per_record(len(block))
            for tally, err, stderr, steps in block:
                emit("sparsto", tally, err, stderr, steps=steps, tau=tau,
                     wall=wall)

    if with_qsvt_methods:
        t_eff = lam * t
        degrees = _auto_d_grid(config, t_eff)
        weights = h.weights().astype(float)

        timer = _BlockTimer(config.record_wall_time)
        block = []
        for degree in degrees:
            out = qsvt.apply_poly_eigenbasis(h, t, degree)
            err = dynamics.spectral_error(out, exact)
            tally = resources.qsvt_cost(len(h), degree, weights,
                                        _eps_budget(err), model, select_model)
            block.append((tally, err, degree))
        wall = timer.per_record(len(block))
        for tally, err, degree in block:
            emit("qsvt", tally, err, degree=degree, wall=wall)

        for tau in config.thresholds:
            plan = dynamics.make_sparse_plan(h, tau)
            eff_terms = max(plan.expected_terms, 1.0)
            eff_weights = plan.probabilities * weights
            timer = _BlockTimer(config.record_wall_time)
            per_degree_errs = {d: [] for d in degrees}
            for real in range(config.n_realizations):
                rng = derived_rng(config.base_seed, ens_idx, inst,
                                  _STREAM_SPARSE_QSVT, real)
                outs, _ = qsvt.sparse_qsvt_sweep(
                    h, plan, t, degrees, rng,
                    norm_mode=config.qsvt_norm_mode)
                for degree, out in outs.items():
                    per_degree_errs[degree].append(
                        dynamics.spectral_error(out, exact))
            block = []
            for degree in degrees:
                errs = per_degree_errs[degree]
                mean_err = float(np.mean(errs))
                stderr = float(np.std(errs, ddof=1) / math.sqrt(len(errs))) \
                    if len(errs) > 1 else 0.0
                tally = resources.qsvt_cost(
                    eff_terms, degree, eff_weights, _eps_budget(mean_err),
                    model, select_model)
                block.append((tally, mean_err, stderr, degree))
            wall = timer.per_record(len(block))
            for tally, err, stderr, degree in block:
                emit("sparse-qsvt", tally, err, stderr, degree=degree,
                     tau=tau, wall=wall)

    return records


# --- error-propagation experiments (Figs. 1/2) ---------------------------


def _lcu_task(config: ExperimentConfig, inst: int) -> list[PropagationRecord]:
    spec = _instance_spec(config, 0, inst, config.distributions[0],
                          config.term_counts[0])
    h = sample_hamiltonian(spec)
    n_anc = blockenc.ancilla_count(len(h))
    prep = blockenc.prepare_unitary(h.coefficients)
    select = blockenc.select_matrix(h, n_anc)
    w = blockenc.lcu_unitary(prep, select, h.n_qubits)
    records = []
    timer = _BlockTimer(config.record_wall_time)
    for g, eps_prep in enumerate(config.eps_prep_grid):
        rng = derived_rng(config.base_seed, 0, inst, _STREAM_PERTURB, g)
        perturbed = blockenc.perturb_unitary(prep, eps_prep, rng)
        # the theorem premise is the achieved distance ||V - V~||
        achieved = blockenc.lcu_error(prep, perturbed)
        w_tilde = blockenc.lcu_unitary(perturbed, select, h.n_qubits)
        eps_lcu = blockenc.lcu_error(w, w_tilde)
        records.append(PropagationRecord(
            experiment=config.experiment, instance=inst,
            instance_seed=spec.seed, eps_oracle=achieved, degree_d=None,
            eps_poly=float("nan"), eps_be=eps_lcu,
            eps_be_duse=float("nan"), eps_total=float("nan"),
            bound=2.0 * achieved, wall_time=0.0))
    wall = timer.per_record(len(records))
    if wall:
        records = [dataclasses.replace(r, wall_time=wall) for r in records]
    return records


def _qsvt_propagation_task(config: ExperimentConfig,
                           inst: int) -> list[PropagationRecord]:
    spec = _instance_spec(config, 0, inst, config.distributions[0],
                          config.term_counts[0])
    h = sample_hamiltonian(spec)
    lam = h.one_norm
    t = config.t_multiplier / lam
    t_eff = lam * t
    degrees = _auto_d_grid(config, t_eff)
    n_anc = blockenc.ancilla_count(len(h))
    prep = blockenc.prepare_unitary(h.coefficients)
    select = blockenc.select_matrix(h, n_anc)
    w = blockenc.lcu_unitary(prep, select, h.n_qubits)
    exact_be = blockenc.BlockEncoding(w, n_anc, h.n_qubits, lam)
    exact_outputs = qsvt.qsvt_simulate_sweep(exact_be, t, degrees,
                                             method="walk")
    evolution = dynamics.exact_evolution(h, t)
    records = []
    timer = _BlockTimer(config.record_wall_time)
    for g, eps_sel in enumerate(config.eps_sel_grid):
        rng = derived_rng(config.base_seed, 0, inst, _STREAM_PERTURB, g)
        perturbed_sel = blockenc.perturb_unitary(select, eps_sel, rng)
        achieved = blockenc.lcu_error(select, perturbed_sel)
        w_tilde = blockenc.lcu_unitary(prep, perturbed_sel, h.n_qubits)
        be = blockenc.BlockEncoding(w_tilde, n_anc, h.n_qubits, lam)
        outputs = qsvt.qsvt_simulate_sweep(be, t, degrees, t_eff=t_eff,
                                           method="walk")
        duse = qsvt.walk_power_errors(be, exact_be, degrees)
        for degree in degrees:
            eps_poly = qsvt.poly_error(t_eff, degree) \
                if degree > t_eff else float("nan")
            eps_be = dynamics.spectral_error(outputs[degree],
                                             exact_outputs[degree])
            eps_total = dynamics.spectral_error(outputs[degree], evolution)
            bound = degree * achieved + eps_poly
            records.append(PropagationRecord(
                experiment=config.experiment, instance=inst,
                instance_seed=spec.seed, eps_oracle=achieved,
                degree_d=degree, eps_poly=eps_poly, eps_be=eps_be,
                eps_be_duse=duse[degree],
                eps_total=eps_total, bound=bound, wall_time=0.0))
    wall = timer.per_record(len(records))
    if wall:
        records = [dataclasses.replace(r, wall_time=wall) for r in records]
    return records


# --- crossover detection (Fig. 5) ----------------------------------------


def find_crossover(points_a, points_b):
    """Intersection of two piecewise-linear log-log error-vs-cost curves.

    points_* are (cost, error) sequences with at least 4 grid points each.
    Returns (cost, error, degenerate) or None when the curves do not cross
    inside the shared cost range; identical curves report their first
    point with the degenerate flag set.
    """
    a = sorted((float(c), float(e)) for c, e in points_a)
    b = sorted((float(c), float(e)) for c, e in points_b)
    if len(a) < 4 or len(b) < 4:
        raise ValueError("need at least 4 grid points per method")
    if a == b:
        return a[0][0], a[0][1], True

    def to_log(points):
        arr = np.array(points)
        return np.log(arr[:, 0]), np.log(np.maximum(arr[:, 1], 1e-300))

    ca, ea = to_log(a)
    cb, eb = to_log(b)
    lo = max(ca[0], cb[0])
    hi = min(ca[-1], cb[-1])
    if lo > hi:
        return None
    grid = np.unique(np.concatenate([
        ca[(ca >= lo) & (ca <= hi)], cb[(cb >= lo) & (cb <= hi)], [lo, hi]]))
    fa = np.interp(grid, ca, ea)
    fb = np.interp(grid, cb, eb)
    diff = fa - fb
    for i in range(len(grid)):
        if diff[i] == 0.0:
            return float(np.exp(grid[i])), float(np.exp(fa[i])), False
        if i + 1 < len(grid) and diff[i] * diff[i + 1] < 0.0:
            frac = diff[i] / (diff[i] - diff[i + 1])
            log_c = grid[i] + frac * (grid[i + 1] - grid[i])
            log_e = fa[i] + frac * (fa[i + 1] - fa[i])
            return float(np.exp(log_c)), float(np.exp(log_e)), False
    return None


def _crossover_records(config: ExperimentConfig,
                       sweep: list[SweepRecord]) -> list[CrossoverRecord]:
    records = []
    groups = sorted(set((r.ensemble, r.term_count, r.instance, r.instance_seed)
                        for r in sweep))
    for ensemble, term_count, inst, inst_seed in groups:
        rows = [r for r in sweep if r.ensemble == ensemble
                and r.term_count == term_count and r.instance == inst]
        trotter2 = [(r.t_count, r.spectral_error) for r in rows
                    if r.method == "trotter-2"]
        for tau in config.thresholds:
            sparsto = [(r.t_count, r.spectral_error) for r in rows
                       if r.method == "sparsto" and r.threshold_tau == tau]
            if len(trotter2) < 4 or len(sparsto) < 4:
                continue
            hit = find_crossover(sparsto, trotter2)
            if hit is None:
                continue
            cost, error, degenerate = hit
            records.append(CrossoverRecord(
                experiment=config.experiment, ensemble=ensemble,
                term_count=term_count, instance=inst, instance_seed=inst_seed,
                method_a=f"sparsto-{tau:g}", method_b="trotter-2",
                cost=cost, error=error, degenerate=degenerate))
    return records


# --- fitting (Table I / Appendix B structure) -----------------------------


def _fit_magnitudes(config: ExperimentConfig, h: Hamiltonian):
    mags = np.abs(h.coefficients)
    mags = mags / mags.sum()
    sigma2 = fit_lognormal(mags)[1]
    tail = config.tail_quantile if config.tail_quantile >= 0 else None
    shape = fit_pareto2(mags, tail_quantile=tail)
    return sigma2, shape


def run_fit(config: ExperimentConfig) -> list[FitRecord]:
    records = []
    if config.input_files:
        for path in config.input_files:
            h = read_term_list(path)
            sigma2, shape = _fit_magnitudes(config, h)
            records.append(FitRecord(path, len(h), h.n_qubits, sigma2, shape))
        return records
    for ens_idx, dist_label in enumerate(config.distributions):
        for term_count in config.term_counts:
            for inst in range(config.n_instances):
                spec = _instance_spec(config, ens_idx, inst, dist_label,
                                      term_count)
                h = sample_hamiltonian(spec)
                sigma2, shape = _fit_magnitudes(config, h)
                records.append(FitRecord(
                    f"{dist_label}[{inst}]", len(h), h.n_qubits, sigma2,
                    shape))
    return records


# --- dispatch -------------------------------------------------------------


def _sweep_tasks(config: ExperimentConfig):
    tasks = []
    if config.experiment == "locality-sweep":
        for k_idx, k in enumerate(config.locality_grid):
            for inst in range(config.n_instances):
                tasks.append(("sweep", k_idx, inst, config.distributions[0],
                              config.term_counts[0], k, "exactly_k",
                              True, False))
        return tasks
    with_qsvt = config.experiment == "qsvt-vs-sparse"
    ens_idx = 0
    for dist_label in config.distributions:
        for term_count in config.term_counts:
            for inst in range(config.n_instances):
                tasks.append(("sweep", ens_idx, inst, dist_label, term_count,
                              None, None, not with_qsvt, with_qsvt))
            ens_idx += 1
    return tasks


def _run_task(config: ExperimentConfig, task):
    kind = task[0]
    if kind == "sweep":
        _, ens_idx, inst, dist_label, term_count, k, mode, prod, qsvt_flag = task
        mode_obj = WeightMode(mode) if mode else None
        return _sweep_task(config, ens_idx, inst, dist_label, term_count,
                           k, mode_obj, prod, qsvt_flag)
    if kind == "lcu":
        return _lcu_task(config, task[1])
    if kind == "qsvt-prop":
        return _qsvt_propagation_task(config, task[1])
    raise ValueError(f"unknown task kind {kind!r}")


_WORKER_CONFIG: ExperimentConfig | None = None


def _limit_blas_threads():
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(1)
    except ImportError:
        pass


def _pool_init(config_values):
    global _WORKER_CONFIG
    _WORKER_CONFIG = ExperimentConfig(**config_values)
    # worker processes each pin BLAS to one thread; otherwise every dense
    # solve oversubscribes the cores and the pool runs slower than serial
    _limit_blas_threads()


def _pool_run(task):
    return _run_task(_WORKER_CONFIG, task)


def run_experiment(config: ExperimentConfig, jobs: int = 1):
    """Run the configured experiment; returns the record list."""
    config.validate()
    if config.experiment == "fit-coefficients":
        return run_fit(config)
    if config.experiment in ("lcu-propagation", "qsvt-propagation"):
        kind = "lcu" if config.experiment == "lcu-propagation" else "qsvt-prop"
        tasks = [(kind, inst) for inst in range(config.n_instances)]
    else:
        tasks = _sweep_tasks(config)

    if jobs > 1 and len(tasks) > 1:
        values = dataclasses.asdict(config)
        with ProcessPoolExecutor(max_workers=jobs, initializer=_pool_init,
                                 initargs=(values,)) as pool:
            results = list(pool.map(_pool_run, tasks))
    else:
        results = [_run_task(config, task) for task in tasks]

    records = [record for batch in results for record in batch]
    if config.experiment == "crossover":
        return _crossover_records(config, records)
    return records


def write_output(config: ExperimentConfig, records) -> str:
    path = config.output_path()
    write_csv(path, records, config_metadata(config))
    return path
