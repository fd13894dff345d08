"""
Sparse SPD linear algebra used by the high-dimensional side of the reduction.

This module provides:
1. Solves with sparse symmetric positive definite matrices (Jacobi-preconditioned
   conjugate gradients, or a reusable sparse LU factorization)
2. Inner products and norms induced by such a matrix
3. Gram-Schmidt orthonormalization with re-iteration and deflation

Vector sets are 2-d float arrays holding one vector per row.
"""
import logging
import math

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import splu

from .conf import get_setting
from .exceptions import InvalidArgumentError, NumericalBreakdownError, SolverFailureError

# Set up logging
logger = logging.getLogger(__name__)

SOLVER_METHODS = ('cg', 'direct')


def as_vector_set(vectors, dim=None):
    """
    Stack vectors into a float array with one vector per row.

    Args:
        vectors: 2-d array or sequence of equally long 1-d arrays
        dim: required vector length, if known

    Returns:
        numpy.ndarray: Array of shape (count, dim), always a fresh copy
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        array = np.array(vectors, dtype=float)
    else:
        rows = [np.asarray(v, dtype=float) for v in vectors]
        if not rows:
            array = np.zeros((0, dim or 0))
        else:
            lengths = {row.shape for row in rows}
            if len(lengths) != 1 or rows[0].ndim != 1:
                raise InvalidArgumentError(f"Vectors must share one 1-d shape, got {sorted(lengths)}")
            array = np.vstack(rows)
    if dim is not None and array.shape[1] != dim:
        raise InvalidArgumentError(f"Vectors have dimension {array.shape[1]}, expected {dim}")
    return array


def _apply(M, x):
    return x.copy() if M is None else M @ x


def v_inner(M, x, y):
    """Inner product ``x^T M y``; ``M=None`` means the Euclidean product."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidArgumentError(f"Dimension mismatch in inner product: {x.shape} vs {y.shape}")
    if M is not None and M.shape != (x.shape[0], x.shape[0]):
        raise InvalidArgumentError(f"Inner product matrix {M.shape} does not match vectors of length {x.shape[0]}")
    return float(x @ _apply(M, y))


def _norm_from_square(square, scale):
    # Round-off can push the square of a vanishing vector slightly below zero.
    if square < 0:
        if -square <= 1e-12 * scale:
            return 0.0
        raise NumericalBreakdownError(
            f"Negative norm square {square:.3e}; inner product matrix is not positive definite"
        )
    return math.sqrt(square)


def v_norm(M, x):
    """Norm induced by ``M``."""
    x = np.asarray(x, dtype=float)
    image = _apply(M, x)
    return _norm_from_square(float(x @ image), float(np.linalg.norm(x) * np.linalg.norm(image)))


def default_maxiter(dim):
    return int(50 * math.sqrt(dim) + 1000)


class SpdSolver:
    """
    Reusable solver for a fixed sparse SPD matrix.

    With ``method='direct'`` the matrix is factorized once and every call to
    :meth:`solve` reuses the factors, which is what the many Riesz solves
    against one inner product matrix want. ``method='cg'`` runs conjugate
    gradients with a Jacobi preconditioner and stops once the recursively
    updated residual satisfies ``||r|| <= tol * ||b||``; the true residual of
    the result is measured once afterwards.
    """

    def __init__(self, matrix, method=None, tol=None, maxiter=None):
        if not sps.issparse(matrix):
            matrix = sps.csr_matrix(matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise InvalidArgumentError(f"SPD solver needs a square matrix, got {matrix.shape}")
        self.matrix = matrix.tocsr()
        self.dim = self.matrix.shape[0]
        self.method = method or get_setting('SOLVER_METHOD')
        if self.method not in SOLVER_METHODS:
            raise InvalidArgumentError(f"Unknown solver method '{self.method}', expected one of {SOLVER_METHODS}")
        self.tol = get_setting('SOLVER_TOL') if tol is None else float(tol)
        if not self.tol > 0:
            raise InvalidArgumentError(f"Solver tolerance must be positive, got {self.tol}")
        if maxiter is None:
            maxiter = get_setting('SOLVER_MAXITER')
        self.maxiter = default_maxiter(self.dim) if maxiter is None else int(maxiter)

        diagonal = self.matrix.diagonal()
        if np.any(diagonal <= 0):
            raise InvalidArgumentError("SPD matrix must have a positive diagonal")
        self._inverse_diagonal = 1.0 / diagonal
        self._factors = None
        self.last_iterations = 0
        self.last_residual = None

    def _factorize(self):
        if self._factors is None:
            logger.debug(f"Factorizing {self.dim}x{self.dim} matrix with {self.matrix.nnz} nonzeros")
            self._factors = splu(self.matrix.tocsc())
        return self._factors

    def solve(self, rhs):
        """
        Return ``x`` with ``M x = rhs`` to the configured accuracy.

        The true relative residual ``||M x - rhs|| / ||rhs||`` of the returned
        solution is kept in ``last_residual``.
        """
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.dim,):
            raise InvalidArgumentError(f"Right-hand side has shape {rhs.shape}, expected ({self.dim},)")
        if not np.any(rhs):
            self.last_iterations = 0
            self.last_residual = 0.0
            return np.zeros(self.dim)
        if self.method == 'direct':
            self.last_iterations = 0
            x = self._factorize().solve(rhs)
        else:
            x = self._conjugate_gradient(rhs)
        self.last_residual = self._relative_residual(x, rhs)
        logger.debug(f"{self.method} solve with N={self.dim}: {self.last_iterations} iterations, "
                     f"true relative residual {self.last_residual:.2e}")
        return x

    def _relative_residual(self, x, rhs):
        return float(np.linalg.norm(rhs - self.matrix @ x) / np.linalg.norm(rhs))

    def _conjugate_gradient(self, rhs):
        rhs_norm = np.linalg.norm(rhs)
        target = self.tol * rhs_norm

        x = np.zeros(self.dim)
        residual = rhs.copy()
        preconditioned = self._inverse_diagonal * residual
        direction = preconditioned.copy()
        rz = residual @ preconditioned

        for iteration in range(1, self.maxiter + 1):
            image = self.matrix @ direction
            curvature = direction @ image
            if curvature <= 0:
                raise NumericalBreakdownError(
                    f"Non-positive curvature {curvature:.3e} in conjugate gradients; matrix is not SPD"
                )
            step = rz / curvature
            x += step * direction
            residual -= step * image

            if np.linalg.norm(residual) <= target:
                self.last_iterations = iteration
                return x

            preconditioned = self._inverse_diagonal * residual
            rz_next = residual @ preconditioned
            direction = preconditioned + (rz_next / rz) * direction
            rz = rz_next

        achieved = self._relative_residual(x, rhs)
        self.last_residual = achieved
        logger.error(f"CG did not converge in {self.maxiter} iterations, relative residual {achieved:.3e}")
        raise SolverFailureError(
            f"Conjugate gradients stopped after {self.maxiter} iterations "
            f"at relative residual {achieved:.3e} (target {self.tol:.1e})",
            residual=achieved,
            iterations=self.maxiter,
        )


def spd_solve(matrix, rhs, tol=None, method=None, maxiter=None):
    """One-off solve of ``matrix @ x = rhs``; see :class:`SpdSolver`."""
    return SpdSolver(matrix, method=method, tol=tol, maxiter=maxiter).solve(rhs)


def gram_schmidt_reiterated(vectors, M=None, start_index=0, threshold=None,
                            deflation_tol=None, max_passes=None, return_passes=False):
    """
    Orthonormalize vectors w.r.t. ``M`` with Gram-Schmidt and re-iteration.

    Each vector is normalized, then projected against all previously accepted
    vectors and renormalized; the projection pass is repeated until the norm
    left after a pass exceeds ``threshold``. A vector whose norm after a pass
    has dropped below ``deflation_tol`` times its original norm lies in the span
    of its predecessors and is dropped.

    Args:
        vectors: vector set (rows), not modified
        M: sparse SPD inner product matrix, ``None`` for the Euclidean product
        start_index: rows before this index are already M-orthonormal and are
            taken over unchanged; this allows extending an existing basis
        threshold: re-iteration threshold (setting GS_REITERATION_THRESHOLD)
        deflation_tol: relative deflation threshold (setting GS_DEFLATION_TOL)
        max_passes: projection pass cap per vector (setting GS_MAX_PASSES)
        return_passes: also return the largest number of projection passes
            any vector needed (one pass means no re-iteration)

    Returns:
        tuple: (orthonormal vector set, indices of the input rows that were kept),
        plus the pass count when ``return_passes`` is set
    """
    work = as_vector_set(vectors)
    count, dim = work.shape
    if count == 0:
        raise InvalidArgumentError("Cannot orthonormalize an empty vector set")
    if not 0 <= start_index <= count:
        raise InvalidArgumentError(f"start_index {start_index} outside [0, {count}]")
    if M is not None and M.shape != (dim, dim):
        raise InvalidArgumentError(f"Inner product matrix {M.shape} does not match vectors of length {dim}")
    threshold = get_setting('GS_REITERATION_THRESHOLD') if threshold is None else threshold
    deflation_tol = get_setting('GS_DEFLATION_TOL') if deflation_tol is None else deflation_tol
    max_passes = get_setting('GS_MAX_PASSES') if max_passes is None else max_passes

    basis = [work[i] for i in range(start_index)]
    images = [_apply(M, v) for v in basis]
    kept = list(range(start_index))
    most_passes = 0

    for i in range(start_index, count):
        v = work[i].copy()
        original_norm = v_norm(M, v)
        if original_norm == 0:
            logger.debug(f"Vector {i} is zero, deflated")
            continue
        v /= original_norm

        remaining = 1.0
        passes = 0
        deflated = False
        while True:
            for b, image in zip(basis, images):
                v -= (v @ image) * b
            v_image = _apply(M, v)
            new_norm = _norm_from_square(float(v @ v_image),
                                         float(np.linalg.norm(v) * np.linalg.norm(v_image)))
            passes += 1
            remaining *= new_norm
            if remaining < deflation_tol:
                deflated = True
                break
            v /= new_norm
            if new_norm > threshold:
                v_image = v_image / new_norm
                break
            if passes >= max_passes:
                raise NumericalBreakdownError(
                    f"Vector {i} still loses orthogonality after {passes} projection passes"
                )

        most_passes = max(most_passes, passes)
        if deflated:
            logger.debug(f"Vector {i} deflated after {passes} passes (relative remainder {remaining:.2e})")
            continue
        basis.append(v)
        images.append(v_image)
        kept.append(i)

    logger.debug(f"Gram-Schmidt kept {len(kept)} of {count} vectors, at most {most_passes} passes per vector")
    result = np.vstack(basis) if basis else np.zeros((0, dim))
    if return_passes:
        return result, kept, most_passes
    return result, kept
