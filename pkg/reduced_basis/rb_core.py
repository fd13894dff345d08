"""
Reduced basis construction: basis management, Galerkin projection, reduced
solves and the weak greedy algorithm.

The reduced basis is kept orthonormal in the V-inner product, so the
V-norm of a reduced solution equals the Euclidean norm of its coefficients
and the reduced systems stay well conditioned.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg

from .conf import get_setting
from .estimators import (ESTIMATOR_KINDS, STABLE, ResidualOfflineData, build_offline_data,
                         error_bound, estimate_stable, estimate_traditional, residual_coefficients)
from .exceptions import InvalidArgumentError, NumericalBreakdownError
from .linops import gram_schmidt_reiterated
from .thermal_block import THERMAL_BLOCK_SPACE

# Set up logging
logger = logging.getLogger(__name__)


class ReducedBasis:
    """V-orthonormal basis of the reduced space, one vector per row."""

    def __init__(self, vectors, product):
        self.vectors = vectors
        self.product = product

    @classmethod
    def empty(cls, product):
        return cls(np.zeros((0, product.shape[0])), product)

    def __len__(self):
        return self.vectors.shape[0]

    def __repr__(self):
        return f"ReducedBasis(size={len(self)}, N={self.vectors.shape[1]})"

    def prefix(self, size):
        return ReducedBasis(self.vectors[:size], self.product)

    def reconstruct(self, coefficients):
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (len(self),):
            raise InvalidArgumentError(f"Expected {len(self)} coefficients, got shape {coefficients.shape}")
        if not len(self):
            return np.zeros(self.vectors.shape[1])
        return coefficients @ self.vectors


def extend_basis(basis, snapshot, product=None, deflation_tol=None):
    """
    Extend the basis by the orthonormalized snapshot.

    Snapshots are only dropped when their remainder after projection is at
    round-off level (setting BASIS_DEFLATION_TOL).

    Returns:
        tuple: (ReducedBasis, deflated) where ``deflated`` tells that the
        snapshot already lay in the span and the basis is unchanged
    """
    product = basis.product if product is None else product
    deflation_tol = get_setting('BASIS_DEFLATION_TOL') if deflation_tol is None else deflation_tol
    snapshot = np.asarray(snapshot, dtype=float)
    if snapshot.shape != (basis.vectors.shape[1],):
        raise InvalidArgumentError(f"Snapshot has shape {snapshot.shape}, expected ({basis.vectors.shape[1]},)")
    size = len(basis)
    vectors, kept = gram_schmidt_reiterated(np.vstack([basis.vectors, snapshot]), product, start_index=size,
                                            deflation_tol=deflation_tol)
    if len(kept) == size:
        logger.warning(f"Snapshot lies in the span of the {size} basis vectors, basis unchanged")
        return basis, True
    return ReducedBasis(vectors, product), False


class ReducedModel:
    """
    Galerkin-projected model plus the online data of both estimators.

    Holds only arrays whose sizes are the basis size or the number of
    residual representatives.
    """

    def __init__(self, operators, rhs_vectors, theta_a, theta_f, parameter_space, coercivity,
                 estimator_trad, estimator_stable):
        self.operators = operators
        self.rhs_vectors = rhs_vectors
        self.theta_a = theta_a
        self.theta_f = theta_f
        self.parameter_space = parameter_space
        self.coercivity = coercivity
        self.estimator_trad = estimator_trad
        self.estimator_stable = estimator_stable

    def __repr__(self):
        return f"ReducedModel(basis_size={self.basis_size})"

    @property
    def basis_size(self):
        return self.rhs_vectors[0].shape[0]

    def parse_parameter(self, mu):
        return self.parameter_space.parse(mu)

    def operator(self, mu):
        theta = np.asarray(self.theta_a(self.parse_parameter(mu)), dtype=float)
        return np.tensordot(theta, self.operators, axes=1)

    def rhs(self, mu):
        theta = np.asarray(self.theta_f(self.parse_parameter(mu)), dtype=float)
        return np.tensordot(theta, self.rhs_vectors, axes=1)

    def solve(self, mu):
        return solve_reduced(self, mu)

    def estimate(self, mu, kind=STABLE, u_coeffs=None):
        """Residual norm estimate of the reduced solution (not yet divided by alpha_LB)."""
        if u_coeffs is None:
            u_coeffs = self.solve(mu)
        alpha = residual_coefficients(self, mu, u_coeffs)
        if kind == STABLE:
            return estimate_stable(self.estimator_stable, alpha)
        return estimate_traditional(self.estimator_trad, alpha)

    def error_bound(self, mu, kind=STABLE, relative=True):
        """
        Error bound at ``mu``, divided by the V-norm of the reduced solution
        when ``relative`` and that norm is above the RELATIVE_FLOOR setting.
        """
        u_coeffs = self.solve(mu)
        bound = error_bound(self.estimate(mu, kind, u_coeffs), mu, self.coercivity)
        if relative:
            norm = float(np.linalg.norm(u_coeffs))
            if norm >= get_setting('RELATIVE_FLOOR'):
                bound /= norm
        return bound


def _project(model, basis, residual_data):
    V = basis.vectors
    operators = np.array([V @ (A @ V.T) for A in model.operators]).reshape(model.num_operators, len(basis), len(basis))
    rhs_vectors = np.array([V @ f for f in model.rhs_vectors]).reshape(model.num_rhs, len(basis))
    return ReducedModel(
        operators=operators,
        rhs_vectors=rhs_vectors,
        theta_a=model.theta_a,
        theta_f=model.theta_f,
        parameter_space=model.parameter_space,
        coercivity=model.coercivity,
        estimator_trad=residual_data.traditional_data(),
        estimator_stable=residual_data.stable_data(),
    )


class _FrozenResidualData:
    def __init__(self, trad, stable):
        self._trad = trad
        self._stable = stable

    def traditional_data(self):
        return self._trad

    def stable_data(self):
        return self._stable


def project(model, basis):
    """Galerkin projection of ``model`` onto ``basis`` with fresh estimator data."""
    _, trad, stable = build_offline_data(model, basis)
    return _project(model, basis, _FrozenResidualData(trad, stable))


def solve_reduced(rmodel, mu):
    """Solve the dense SPD reduced system by Cholesky factorization."""
    size = rmodel.basis_size
    if size == 0:
        rmodel.parse_parameter(mu)
        return np.zeros(0)
    matrix = rmodel.operator(mu)
    rhs = rmodel.rhs(mu)
    try:
        factor = scipy.linalg.cho_factor(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalBreakdownError(f"Reduced system of size {size} is not positive definite: {e}") from e
    return scipy.linalg.cho_solve(factor, rhs)


def solve_high_dim(model, mu):
    """High-dimensional solution ``u_mu`` on the interior dofs."""
    mu = model.parse_parameter(mu)
    rhs = model.rhs(mu)
    solver = model.operator_solver(mu)
    u = solver.solve(rhs)
    logger.debug(f"High-dimensional solve at mu={mu.tolist()} ({solver.last_iterations} iterations)")
    return u


class CoerciveRBReductor:
    """
    Owns a reduced basis and keeps the estimator offline data in sync with it.

    Extending the basis only computes the new residual representatives.
    """

    def __init__(self, model):
        self.model = model
        self.basis = ReducedBasis.empty(model.product)
        self.residual_data = ResidualOfflineData(model)

    def extend_basis(self, snapshot):
        """Add a snapshot; returns True when it was deflated (basis unchanged)."""
        basis, deflated = extend_basis(self.basis, snapshot, self.model.product)
        if not deflated:
            self.residual_data.extend(basis.vectors[len(self.basis):])
            self.basis = basis
        return deflated

    def reduce(self):
        return _project(self.model, self.basis, self.residual_data)

    def reconstruct(self, u_coeffs):
        return self.basis.reconstruct(u_coeffs)


class GreedyStep:
    """
    One evaluated basis size: the largest bound over the training set and the
    training parameter whose snapshot extended the basis (the maximizer when
    the run stopped at this size).
    """

    def __init__(self, basis_size, max_estimate, mu, index):
        self.basis_size = basis_size
        self.max_estimate = max_estimate
        self.mu = mu
        self.index = index

    def __repr__(self):
        return f"GreedyStep(basis_size={self.basis_size}, max_estimate={self.max_estimate:.3e}, index={self.index})"


class GreedyLog:
    """
    History of a weak greedy run.

    ``steps`` has one entry per evaluated basis size.
    ``reduced_models[n]`` is the reduced model of the first n basis vectors.
    ``deflated`` lists ``(basis_size, index)`` for every training parameter
    whose snapshot was rejected because it already lay in the span.
    """

    def __init__(self, estimator_kind):
        self.estimator_kind = estimator_kind
        self.steps = []
        self.reduced_models = []
        self.deflated = []
        self.stagnated = False
        self.reason = None
        self.extension_times = []
        self.max_gs_passes = 0

    @property
    def max_estimates(self):
        return [step.max_estimate for step in self.steps]

    @property
    def selected_parameters(self):
        return [step.mu for step in self.steps[:len(self.reduced_models) - 1]]

    @property
    def selected_indices(self):
        return [step.index for step in self.steps[:len(self.reduced_models) - 1]]


def make_train_set(points_per_axis, parameter_space=THERMAL_BLOCK_SPACE):
    """Equidistant tensor training set, endpoints included."""
    return parameter_space.sample_uniformly(points_per_axis)


def evaluate_bounds(rmodel, parameters, kind=STABLE, relative=True, workers=None):
    """Error bounds of ``rmodel`` at every parameter, in input order."""
    workers = get_setting('ESTIMATOR_WORKERS') if workers is None else workers

    def bound(mu):
        return rmodel.error_bound(mu, kind, relative)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(bound, parameters)))
    return np.array([bound(mu) for mu in parameters])


def greedy_candidates(bounds, selected=(), retry_deflated=True):
    """
    Training indices to try for the next extension, best first.

    Indices are ordered by decreasing bound, lower index first on ties. With
    ``retry_deflated`` already selected indices are left out and every other
    index is a fallback; otherwise only the maximizer is returned.
    """
    order = np.argsort(-np.asarray(bounds, dtype=float), kind='stable')
    if not retry_deflated:
        return [int(order[0])]
    selected = set(selected)
    return [int(i) for i in order if int(i) not in selected]


def weak_greedy(model, train_set, tol, max_size, estimator_kind=STABLE, relative=True, workers=None,
                retry_deflated=True):
    """
    Weak greedy basis generation.

    At each basis size the chosen estimator's error bound is evaluated on the
    whole training set; the run stops when the largest bound is at most
    ``tol`` or the basis has ``max_size`` vectors. Otherwise the
    high-dimensional solution at the maximizing parameter (lowest index on
    ties) extends the basis.

    With ``retry_deflated`` (the default) parameters that were selected before
    are not selected again, and a snapshot that deflates is skipped in favour
    of the next largest bound; the run only stagnates when no remaining
    training parameter extends the span. With ``retry_deflated=False`` the
    first deflated snapshot ends the run. Either way a stagnated run has
    ``log.stagnated`` set.

    Returns:
        tuple: (ReducedBasis, ReducedModel, GreedyLog)
    """
    if estimator_kind not in ESTIMATOR_KINDS:
        raise InvalidArgumentError(f"Unknown estimator '{estimator_kind}', expected one of {ESTIMATOR_KINDS}")
    train_set = [model.parse_parameter(mu) for mu in train_set]
    if not train_set:
        raise InvalidArgumentError("Training set must not be empty")
    if max_size is None and not tol > 0:
        raise InvalidArgumentError("Greedy needs a positive tolerance or a maximum basis size")
    if max_size is not None and max_size < 0:
        raise InvalidArgumentError(f"Maximum basis size must be non-negative, got {max_size}")

    logger.info(f"Starting weak greedy with {estimator_kind} estimator on {len(train_set)} "
                f"training parameters (tol={tol}, max_size={max_size})")
    reductor = CoerciveRBReductor(model)
    log = GreedyLog(estimator_kind)

    while True:
        rmodel = reductor.reduce()
        log.reduced_models.append(rmodel)
        log.max_gs_passes = reductor.residual_data.max_passes
        size = len(reductor.basis)

        bounds = evaluate_bounds(rmodel, train_set, estimator_kind, relative, workers)
        index = int(np.argmax(bounds))
        max_estimate = float(bounds[index])
        step = GreedyStep(size, max_estimate, train_set[index], index)
        log.steps.append(step)
        logger.info(f"Basis size {size}: max estimated error {max_estimate:.3e} at training index {index}")

        if max_estimate <= tol:
            log.reason = 'tolerance'
            break
        if max_size is not None and size >= max_size:
            log.reason = 'max_size'
            break

        start = time.perf_counter()
        extended = False
        for candidate in greedy_candidates(bounds, log.selected_indices, retry_deflated):
            snapshot = solve_high_dim(model, train_set[candidate])
            if not reductor.extend_basis(snapshot):
                extended = True
                break
            log.deflated.append((size, candidate))
            logger.warning(f"Snapshot for training index {candidate} deflated at basis size {size} "
                           f"(bound {bounds[candidate]:.3e})")
        if not extended:
            logger.warning(f"Greedy stagnated at basis size {size}: no training parameter extends the span "
                           f"although the estimate is {max_estimate:.3e}")
            log.stagnated = True
            log.reason = 'stagnation'
            break
        if candidate != index:
            logger.info(f"Basis size {size}: extended with training index {candidate} instead of {index}")
        step.mu = train_set[candidate]
        step.index = candidate
        log.extension_times.append(time.perf_counter() - start)

    logger.info(f"Weak greedy finished with basis size {len(reductor.basis)} ({log.reason}), "
                f"at most {log.max_gs_passes} Gram-Schmidt passes per residual representative")
    return reductor.basis, rmodel, log
