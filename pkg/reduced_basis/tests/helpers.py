import functools

import numpy as np

from reduced_basis.rb_core import ReducedBasis, extend_basis, solve_high_dim
from reduced_basis.thermal_block import assemble_thermal_block, build_mesh


@functools.lru_cache(maxsize=None)
def thermal_block(n):
    """Assembled thermal block model, shared between tests (models are read-only)."""
    return assemble_thermal_block(build_mesh(n))


def dense(matrix):
    return matrix.toarray() if hasattr(matrix, 'toarray') else np.asarray(matrix)


def snapshot_basis(model, parameters):
    """V-orthonormal basis spanned by high-dimensional solutions."""
    basis = ReducedBasis.empty(model.product)
    for mu in parameters:
        basis, _ = extend_basis(basis, solve_high_dim(model, mu))
    return basis


def random_basis(model, size, seed=0):
    rng = np.random.default_rng(seed)
    basis = ReducedBasis.empty(model.product)
    for _ in range(size):
        basis, _ = extend_basis(basis, rng.standard_normal(model.dim))
    return basis


def random_parameters(count, seed=1):
    rng = np.random.default_rng(seed)
    return [row for row in rng.uniform(0.1, 1.0, size=(count, 4))]
