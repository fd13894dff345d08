"""
Thermal block stability study.

Generates a reduced space with the weak greedy algorithm, then for every
intermediate basis size evaluates on random test parameters:

* the maximum relative true reduction error (V-norm),
* the maximum relative error bound with the stable estimator,
* the maximum relative error bound with the traditional estimator,

and the maximum/minimum efficiencies (true error / bound) of both
estimators at selected basis sizes.
"""
import collections
import dataclasses
import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd

from .caching import solve_cached
from .conf import get_setting
from .estimators import (ESTIMATOR_KINDS, STABLE, TRADITIONAL, error_bound, estimate_stable,
                         estimate_traditional, residual_coefficients)
from .exceptions import ConfigurationError, ReducedBasisError
from .linops import SOLVER_METHODS, v_norm
from .rb_core import make_train_set, solve_high_dim, weak_greedy
from .thermal_block import THERMAL_BLOCK_SPACE, assemble_thermal_block, build_mesh

# Set up logging
logger = logging.getLogger(__name__)

CSV_COLUMNS = ['N', 'est_stable', 'est_trad', 'err']
EFFICIENCY_SIZES = (10, 15, 20, 25, 30, 35)
CSV_FLOAT_FORMAT = '%.10e'

ResultRow = collections.namedtuple('ResultRow', CSV_COLUMNS)


@dataclasses.dataclass
class ExperimentConfig:
    grid_n: int = 100
    train_points_per_axis: int = 5
    max_basis: int = 35
    greedy_tol: float = 0.0
    greedy_estimator: str = STABLE
    n_test_params: int = 20
    rng_seed: int = 0
    solver_tol: float = None
    solver_method: str = None
    output_path: str = None
    workers: int = None
    use_file_cache: bool = None

    def validate(self):
        """Raise ConfigurationError unless the configuration is usable."""
        problems = []
        if self.grid_n < 2 or self.grid_n % 2:
            problems.append(f"grid_n must be a positive even number, got {self.grid_n}")
        if self.train_points_per_axis < 2:
            problems.append(f"train_points_per_axis must be at least 2, got {self.train_points_per_axis}")
        if self.max_basis < 1:
            problems.append(f"max_basis must be at least 1, got {self.max_basis}")
        if self.greedy_tol < 0:
            problems.append(f"greedy_tol must be non-negative, got {self.greedy_tol}")
        if self.greedy_estimator not in ESTIMATOR_KINDS:
            problems.append(f"greedy_estimator must be one of {ESTIMATOR_KINDS}, got {self.greedy_estimator!r}")
        if self.n_test_params < 1:
            problems.append(f"n_test_params must be at least 1, got {self.n_test_params}")
        if self.solver_tol is not None and not self.solver_tol > 0:
            problems.append(f"solver_tol must be positive, got {self.solver_tol}")
        if self.solver_method is not None and self.solver_method not in SOLVER_METHODS:
            problems.append(f"solver_method must be one of {SOLVER_METHODS}, got {self.solver_method!r}")
        if problems:
            raise ConfigurationError('; '.join(problems))
        return self


class ExperimentResult:
    """
    Outcome of :func:`run_experiment`.

    ``rows`` has the CSV columns (one row per basis size), ``samples`` one row
    per (basis size, test parameter) with absolute and relative quantities,
    ``efficiencies`` the max/min efficiency table.
    """

    def __init__(self, config, rows, samples, efficiencies, greedy_log, timings):
        self.config = config
        self.rows = rows
        self.samples = samples
        self.efficiencies = efficiencies
        self.greedy_log = greedy_log
        self.timings = timings

    def result_rows(self):
        return [ResultRow(*values) for values in self.rows[CSV_COLUMNS].itertuples(index=False)]


def sample_test_parameters(count, seed=0):
    """I.i.d. uniform test parameters in [0.1, 1.0]^4, see ParameterSpace.sample_randomly."""
    if count < 1:
        raise ConfigurationError(f"Need at least one test parameter, got {count}")
    return THERMAL_BLOCK_SPACE.sample_randomly(count, seed)


def _relative(value, reference):
    if reference >= get_setting('RELATIVE_FLOOR'):
        return value / reference
    return value


class CsvRowWriter:
    """Writes the header once, then appends one row per basis size."""

    def __init__(self, path):
        self.path = path
        pd.DataFrame(columns=CSV_COLUMNS).to_csv(path, index=False)

    def append(self, row):
        pd.DataFrame([row], columns=CSV_COLUMNS).to_csv(
            self.path, mode='a', header=False, index=False, float_format=CSV_FLOAT_FORMAT
        )


def evaluate_sample(model, basis, rmodel, mu, truth, truth_norm):
    """True error and both bounds of ``rmodel`` at one test parameter."""
    u_coeffs = rmodel.solve(mu)
    alpha = residual_coefficients(rmodel, mu, u_coeffs)
    est_stable = estimate_stable(rmodel.estimator_stable, alpha)
    est_trad = estimate_traditional(rmodel.estimator_trad, alpha)
    bound_stable = error_bound(est_stable, mu, model.coercivity)
    bound_trad = error_bound(est_trad, mu, model.coercivity)
    reduced_norm = float(np.linalg.norm(u_coeffs))
    err = v_norm(model.product, truth - basis.reconstruct(u_coeffs))
    return {
        'est_stable': est_stable,
        'est_trad': est_trad,
        'bound_stable': bound_stable,
        'bound_trad': bound_trad,
        'err': err,
        'u_norm': truth_norm,
        'u_red_norm': reduced_norm,
        'bound_stable_rel': _relative(bound_stable, reduced_norm),
        'bound_trad_rel': _relative(bound_trad, reduced_norm),
        'err_rel': _relative(err, truth_norm),
    }


def _efficiency(err, bound):
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(bound > 0, err / bound, np.nan)


def efficiency_table(samples, sizes=EFFICIENCY_SIZES):
    """Max/min efficiencies of both estimators per basis size."""
    available = [size for size in sizes if size in set(samples['N'])]
    index = pd.MultiIndex.from_tuples(
        [('trad.', 'max'), ('trad.', 'min'), ('new', 'max'), ('new', 'min')]
    )
    table = pd.DataFrame(index=index, columns=available, dtype=float)
    for size in available:
        at_size = samples[samples['N'] == size]
        trad = _efficiency(at_size['err'].to_numpy(), at_size['bound_trad'].to_numpy())
        new = _efficiency(at_size['err'].to_numpy(), at_size['bound_stable'].to_numpy())
        table[size] = [np.nanmax(trad), np.nanmin(trad), np.nanmax(new), np.nanmin(new)]
    table.columns.name = 'basis size'
    return table


def format_efficiency_table(table):
    if table.empty or not len(table.columns):
        return 'No efficiency data (basis sizes 10-35 not reached)'
    return table.to_string(float_format=lambda value: f"{value:.1e}")


def run_experiment(config):
    """
    Run greedy basis generation and the error study for ``config``.

    Rows are appended to ``config.output_path`` (if set) after each basis
    size, so a numerical failure leaves the rows computed so far on disk.

    Returns:
        ExperimentResult
    """
    config.validate()
    timings = {}
    workers = get_setting('ESTIMATOR_WORKERS') if config.workers is None else config.workers

    start = time.perf_counter()
    mesh = build_mesh(config.grid_n)
    model = assemble_thermal_block(mesh, solver_method=config.solver_method, solver_tol=config.solver_tol)
    timings['assembly'] = time.perf_counter() - start

    start = time.perf_counter()
    train_set = make_train_set(config.train_points_per_axis)
    basis, _, log = weak_greedy(model, train_set, config.greedy_tol, config.max_basis,
                                estimator_kind=config.greedy_estimator, workers=workers)
    timings['greedy'] = time.perf_counter() - start

    start = time.perf_counter()
    test_set = sample_test_parameters(config.n_test_params, config.rng_seed)
    truths = [solve_cached(model, mu, solve_high_dim, config.use_file_cache) for mu in test_set]
    truth_norms = [v_norm(model.product, u) for u in truths]
    timings['truth_solves'] = time.perf_counter() - start

    start = time.perf_counter()
    writer = CsvRowWriter(config.output_path) if config.output_path else None
    rows = []
    samples = []
    try:
        for size, rmodel in enumerate(log.reduced_models):
            basis_n = basis.prefix(size)

            def evaluate(j):
                return evaluate_sample(model, basis_n, rmodel, test_set[j], truths[j], truth_norms[j])

            if workers and workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    records = list(pool.map(evaluate, range(len(test_set))))
            else:
                records = [evaluate(j) for j in range(len(test_set))]

            for j, record in enumerate(records):
                samples.append({'N': size, 'test_index': j, **record})
            row = {
                'N': size,
                'est_stable': max(r['bound_stable_rel'] for r in records),
                'est_trad': max(r['bound_trad_rel'] for r in records),
                'err': max(r['err_rel'] for r in records),
            }
            rows.append(row)
            if writer:
                writer.append(row)
            logger.debug(f"N={size}: err={row['err']:.3e} stable={row['est_stable']:.3e} "
                         f"trad={row['est_trad']:.3e}")
    except ReducedBasisError as e:
        logger.error(f"Error study aborted after {len(rows)} basis sizes: {e}")
        raise
    timings['evaluation'] = time.perf_counter() - start

    for phase, seconds in timings.items():
        logger.info(f"Phase {phase}: {seconds:.2f}s")

    samples = pd.DataFrame(samples)
    return ExperimentResult(
        config=config,
        rows=pd.DataFrame(rows, columns=CSV_COLUMNS),
        samples=samples,
        efficiencies=efficiency_table(samples),
        greedy_log=log,
        timings=timings,
    )


__all__ = [
    'CSV_COLUMNS', 'EFFICIENCY_SIZES', 'ExperimentConfig', 'ExperimentResult', 'ResultRow',
    'efficiency_table', 'format_efficiency_table', 'run_experiment', 'sample_test_parameters',
    'STABLE', 'TRADITIONAL',
]
