"""
Residual based a posteriori error estimation with offline/online splitting.

The Riesz representative of the residual of a reduced solution is the
linear combination ``sum_k alpha_k eta_k`` of the representatives

    eta = [R(f^1), ..., R(f^Qf), R(a^1(psi_1, .)), ..., R(a^1(psi_n, .)), ..., R(a^Qa(psi_n, .))]

(q-major, basis-index-minor) with coefficients alpha carrying the minus sign
of the operator terms. Two ways of evaluating its norm online are offered:

* traditional: ``sqrt(alpha^T G alpha)`` with the Gram matrix
  ``G[k, l] = (eta_k, eta_l)_V``; loses half of the significant digits, so it
  stagnates near sqrt(machine epsilon) relative to the residual scale.
* stable: expand every eta_k in a V-orthonormal basis of span{eta_k},
  ``E[k, i] = (eta_k, psi_i)_V``, and return ``||E^T alpha||_2``, which keeps
  the cancellation in the un-squared coefficients.
"""
import logging

import numpy as np

from .exceptions import InvalidArgumentError
from .linops import as_vector_set, gram_schmidt_reiterated, v_norm
from .thermal_block import coercivity_lower_bound

# Set up logging
logger = logging.getLogger(__name__)

TRADITIONAL = 'traditional'
STABLE = 'stable'
ESTIMATOR_KINDS = (STABLE, TRADITIONAL)


class ResidualVectors:
    """Riesz representatives eta_k as rows, in q-major, basis-index-minor order."""

    def __init__(self, vectors, num_rhs, num_operators, basis_size):
        self.vectors = vectors
        self.num_rhs = num_rhs
        self.num_operators = num_operators
        self.basis_size = basis_size

    def __len__(self):
        return self.vectors.shape[0]


class TradEstimatorData:
    """Gram matrix of the residual representatives."""

    def __init__(self, gram):
        self.gram = gram

    @property
    def size(self):
        return self.gram.shape[0]


class StableEstimatorData:
    """Coefficients of the residual representatives in a V-orthonormal basis."""

    def __init__(self, coefficients):
        self.coefficients = coefficients

    @property
    def size(self):
        return self.coefficients.shape[0]

    @property
    def rank(self):
        return self.coefficients.shape[1]


def riesz(model, functional):
    """Riesz representative of a functional given by its dof vector."""
    return model.product_solver.solve(functional)


def residual_order(num_rhs, num_operators, basis_size):
    """
    Map from public (q-major) order to insertion order.

    Representatives are computed in the order rhs terms first, then for each
    basis vector all operator terms; entry ``k`` of the result is the
    insertion position of public representative ``k``.
    """
    operator_terms = [num_rhs + i * num_operators + q
                      for q in range(num_operators) for i in range(basis_size)]
    return np.array(list(range(num_rhs)) + operator_terms, dtype=int)


class ResidualOfflineData:
    """
    Incrementally maintained offline data of both estimators.

    Adding a basis vector costs ``Q_a`` Riesz solves; the Gram matrix gains
    the corresponding rows and columns and the orthonormal basis of the
    residual space is extended by Gram-Schmidt starting after its current
    vectors. ``max_passes`` is the largest number of Gram-Schmidt projection
    passes any representative has needed so far.
    """

    def __init__(self, model):
        self.model = model
        self.basis_size = 0
        dim = model.dim
        self._eta = np.zeros((0, dim))
        self._eta_images = np.zeros((0, dim))
        self._gram = np.zeros((0, 0))
        self._psi = np.zeros((0, dim))
        self._coefficients = np.zeros((0, 0))
        self.max_passes = 0
        self._append([riesz(model, f) for f in model.rhs_vectors])

    def extend(self, basis_vectors):
        """Add the operator representatives of new reduced basis vectors."""
        new = []
        for psi in as_vector_set(basis_vectors, dim=self.model.dim):
            new.extend(riesz(self.model, A @ psi) for A in self.model.operators)
            self.basis_size += 1
        if new:
            self._append(new)

    def _append(self, vectors):
        M = self.model.product
        new = as_vector_set(vectors, dim=self.model.dim)
        new_images = np.vstack([M @ v for v in new])
        old_count = self._eta.shape[0]

        cross = self._eta @ new_images.T
        block = new @ new_images.T
        block = 0.5 * (block + block.T)
        gram = np.zeros((old_count + len(new),) * 2)
        gram[:old_count, :old_count] = self._gram
        gram[:old_count, old_count:] = cross
        gram[old_count:, :old_count] = cross.T
        gram[old_count:, old_count:] = block

        self._eta = np.vstack([self._eta, new])
        self._eta_images = np.vstack([self._eta_images, new_images])
        self._gram = gram

        old_rank = self._psi.shape[0]
        psi, kept, passes = gram_schmidt_reiterated(np.vstack([self._psi, new]), M, start_index=old_rank,
                                                    return_passes=True)
        self.max_passes = max(self.max_passes, passes)
        if len(kept) - old_rank < len(new):
            logger.debug(f"Residual space: {len(new) - (len(kept) - old_rank)} of {len(new)} "
                         f"new representatives deflated")
        added_psi = psi[old_rank:]

        coefficients = np.zeros((self._eta.shape[0], psi.shape[0]))
        coefficients[:old_count, :old_rank] = self._coefficients
        if old_rank:
            coefficients[old_count:, :old_rank] = new_images @ self._psi.T
        if len(added_psi):
            coefficients[:, old_rank:] = self._eta_images @ added_psi.T
        self._psi = psi
        self._coefficients = coefficients

    @property
    def order(self):
        return residual_order(self.model.num_rhs, self.model.num_operators, self.basis_size)

    @property
    def residual_basis(self):
        """V-orthonormal basis of the residual space (rows)."""
        return self._psi

    def residual_vectors(self):
        return ResidualVectors(self._eta[self.order], self.model.num_rhs,
                               self.model.num_operators, self.basis_size)

    def traditional_data(self):
        order = self.order
        return TradEstimatorData(self._gram[np.ix_(order, order)].copy())

    def stable_data(self):
        return StableEstimatorData(self._coefficients[self.order].copy())

    def freeze(self):
        return self.residual_vectors(), self.traditional_data(), self.stable_data()


def build_offline_data(model, basis):
    """
    Offline data of both estimators for a reduced basis, computed from scratch.

    Returns:
        tuple: (ResidualVectors, TradEstimatorData, StableEstimatorData)
    """
    vectors = getattr(basis, 'vectors', basis)
    data = ResidualOfflineData(model)
    if len(vectors):
        data.extend(vectors)
    logger.debug(f"Offline data for basis size {data.basis_size}: "
                 f"{len(data.order)} representatives, residual rank {data.residual_basis.shape[0]}")
    return data.freeze()


def residual_coefficients(rmodel, mu, u_coeffs):
    """
    Coefficients alpha with ``R(residual) = sum_k alpha_k eta_k``.

    The operator coefficients are ``-theta_a^q(mu) * u_i`` in q-major order.
    """
    u_coeffs = np.asarray(u_coeffs, dtype=float)
    if u_coeffs.shape != (rmodel.basis_size,):
        raise InvalidArgumentError(
            f"Reduced coefficients have shape {u_coeffs.shape}, expected ({rmodel.basis_size},)"
        )
    mu = rmodel.parse_parameter(mu)
    theta_f = np.asarray(rmodel.theta_f(mu), dtype=float)
    theta_a = np.asarray(rmodel.theta_a(mu), dtype=float)
    return np.concatenate([theta_f, -np.outer(theta_a, u_coeffs).ravel()])


def _check_length(alpha, size):
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (size,):
        raise InvalidArgumentError(f"Coefficient vector has shape {alpha.shape}, expected ({size},)")
    return alpha


def estimate_traditional(data, alpha):
    """Residual norm from the Gram matrix; negative round-off is clamped to 0."""
    alpha = _check_length(alpha, data.size)
    return float(np.sqrt(max(0.0, alpha @ (data.gram @ alpha))))


def estimate_stable(data, alpha):
    """Residual norm from the orthonormal expansion coefficients."""
    alpha = _check_length(alpha, data.size)
    return float(np.linalg.norm(data.coefficients.T @ alpha))


def hd_residual_norm_oracle(model, basis, mu, u_coeffs):
    """
    V-norm of the Riesz representative of the residual, evaluated in the
    full space. Reference for both online evaluations.
    """
    vectors = getattr(basis, 'vectors', basis)
    u_coeffs = np.asarray(u_coeffs, dtype=float)
    if u_coeffs.shape != (len(vectors),):
        raise InvalidArgumentError(
            f"Reduced coefficients have shape {u_coeffs.shape}, expected ({len(vectors)},)"
        )
    u = u_coeffs @ vectors if len(vectors) else np.zeros(model.dim)
    residual = model.rhs(mu) - model.operator(mu) @ u
    return v_norm(model.product, riesz(model, residual))


def error_bound(estimate, mu, coercivity=None):
    """Upper bound ``estimate / alpha_LB(mu)`` of the V-norm reduction error."""
    if estimate < 0:
        raise InvalidArgumentError(f"Residual norm estimate must be non-negative, got {estimate}")
    coercivity = coercivity or coercivity_lower_bound
    return estimate / coercivity(mu)
