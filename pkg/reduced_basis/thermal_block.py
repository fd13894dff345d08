"""
Thermal block benchmark discretized with linear finite elements.

The problem is ::

    -div(sigma_mu grad u) = 1 in [0,1]^2,   u = 0 on the boundary,

where sigma_mu is constant on each quadrant ::

    -----------------
    |       |       |
    | mu_01 | mu_11 |
    |       |       |
    -----------------
    |       |       |
    | mu_00 | mu_10 |
    |       |       |
    -----------------

with mu_ij belonging to [i/2, (i+1)/2] x [j/2, (j+1)/2] and each mu_ij in
[0.1, 1.0]. The discretization is affinely decomposed into one stiffness
block per quadrant, so the assembled model plugs directly into the reduction.
"""
import functools
import logging
import time

import numpy as np
import scipy.sparse as sps

from .exceptions import InvalidArgumentError
from .linops import SpdSolver
from .parameters import ParameterSpace

# Set up logging
logger = logging.getLogger(__name__)

# Parameter components in (i, j) lexicographic order
THERMAL_BLOCK_SPACE = ParameterSpace(4, 0.1, 1.0, names=('mu_00', 'mu_01', 'mu_10', 'mu_11'))


class Mesh:
    """
    Uniform triangulation of the unit square.

    Vertex ``(i, j)`` sits at ``(i/n, j/n)`` and has index ``j*(n+1) + i``.
    Every square cell is cut along its lower-left to upper-right diagonal
    into two counter-clockwise triangles.
    """

    def __init__(self, n, vertices, triangles):
        self.n = n
        self.vertices = vertices
        self.triangles = triangles

    def __repr__(self):
        return f"Mesh(n={self.n}, vertices={self.num_vertices}, triangles={self.num_triangles})"

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_triangles(self):
        return self.triangles.shape[0]

    def areas(self):
        p = self.vertices[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def barycenters(self):
        return self.vertices[self.triangles].mean(axis=1)

    def boundary_vertices(self):
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        on_boundary = (x == 0.0) | (x == 1.0) | (y == 0.0) | (y == 1.0)
        return np.flatnonzero(on_boundary)


def build_mesh(n):
    """
    Build the ``n x n x 2`` triangulation of the unit square.

    Args:
        n: cells per axis

    Returns:
        Mesh: (n+1)^2 vertices and 2 n^2 triangles of area 1/(2 n^2)
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"Mesh needs a positive number of cells per axis, got {n}")
    n = int(n)

    coords = np.arange(n + 1) / n
    xx, yy = np.meshgrid(coords, coords)  # row j holds y = j/n
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    lower_left = (j * (n + 1) + i).ravel()
    lower_right = lower_left + 1
    upper_left = lower_left + n + 1
    upper_right = upper_left + 1
    first = np.column_stack([lower_left, lower_right, upper_right])
    second = np.column_stack([lower_left, upper_right, upper_left])
    triangles = np.vstack([first, second])

    mesh = Mesh(n, vertices, triangles)
    logger.debug(f"Built {mesh!r}")
    return mesh


def _local_stiffness(mesh):
    p = mesh.vertices[mesh.triangles]
    x, y = p[:, :, 0], p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = mesh.areas()
    return (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area)[:, None, None]


def assemble_diffusion_matrix(mesh, sigma):
    """
    P1 stiffness matrix for an elementwise constant diffusion coefficient.

    Args:
        mesh: Mesh
        sigma: coefficient per triangle (array of length num_triangles) or scalar

    Returns:
        scipy.sparse.csr_matrix: symmetric matrix on all vertices, boundary included
    """
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (mesh.num_triangles,))
    local = _local_stiffness(mesh) * sigma[:, None, None]
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    size = mesh.num_vertices
    matrix = sps.coo_matrix((local.ravel(), (rows, cols)), shape=(size, size)).tocsr()
    matrix = (0.5 * (matrix + matrix.T)).tocsr()
    matrix.eliminate_zeros()
    return matrix


def assemble_load_vector(mesh, source=1.0):
    """Load vector of a constant source on all vertices (boundary included)."""
    weights = np.repeat(source * mesh.areas() / 3.0, 3)
    return np.bincount(mesh.triangles.ravel(), weights=weights, minlength=mesh.num_vertices)


def quadrant_indices(mesh):
    """
    Quadrant ``2*i + j`` of every triangle, decided by its barycenter.

    With an even number of cells per axis no triangle crosses a quadrant
    interface.
    """
    centers = mesh.barycenters()
    qi = np.minimum(np.floor(2.0 * centers[:, 0]), 1).astype(int)
    qj = np.minimum(np.floor(2.0 * centers[:, 1]), 1).astype(int)
    return 2 * qi + qj


def coercivity_lower_bound(mu):
    """
    Min-theta lower bound ``min_q mu_q`` of the coercivity constant.

    Valid because the inner product matrix is the sum of the positive
    semidefinite quadrant blocks.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.ndim != 1 or mu.size == 0:
        raise InvalidArgumentError(f"Parameter must be a non-empty vector, got shape {mu.shape}")
    if np.any(mu <= 0):
        raise InvalidArgumentError(f"Coercivity bound needs positive coefficients, got {mu.tolist()}")
    return float(mu.min())


class HighDimModel:
    """
    Affinely decomposed high-dimensional problem on the interior dofs.

    ``A(mu) = sum_q theta_a(mu)[q] * operators[q]`` and
    ``f(mu) = sum_q theta_f(mu)[q] * rhs_vectors[q]``. The object is not
    modified after construction; the product solver is created lazily once.
    """

    def __init__(self, operators, rhs_vectors, theta_a, theta_f, product,
                 parameter_space, coercivity, interior_dofs, constrained_dofs,
                 solver_method=None, solver_tol=None, name='model', mesh=None):
        self.operators = list(operators)
        self.rhs_vectors = [np.asarray(f, dtype=float) for f in rhs_vectors]
        self.theta_a = theta_a
        self.theta_f = theta_f
        self.product = product
        self.parameter_space = parameter_space
        self.coercivity = coercivity
        self.interior_dofs = np.asarray(interior_dofs)
        self.constrained_dofs = np.asarray(constrained_dofs)
        self.solver_method = solver_method
        self.solver_tol = solver_tol
        self.name = name
        self.mesh = mesh

        dim = self.product.shape[0]
        for A in self.operators:
            if A.shape != (dim, dim):
                raise InvalidArgumentError(f"Operator shape {A.shape} does not match product dimension {dim}")
        for f in self.rhs_vectors:
            if f.shape != (dim,):
                raise InvalidArgumentError(f"Right-hand side shape {f.shape} does not match dimension {dim}")

    def __repr__(self):
        return f"HighDimModel(name={self.name!r}, N={self.dim}, Q_a={self.num_operators}, Q_f={self.num_rhs})"

    @property
    def dim(self):
        return self.product.shape[0]

    @property
    def num_operators(self):
        return len(self.operators)

    @property
    def num_rhs(self):
        return len(self.rhs_vectors)

    def parse_parameter(self, mu):
        return self.parameter_space.parse(mu)

    def operator(self, mu):
        theta = np.asarray(self.theta_a(self.parse_parameter(mu)), dtype=float)
        matrix = theta[0] * self.operators[0]
        for coefficient, A in zip(theta[1:], self.operators[1:]):
            matrix = matrix + coefficient * A
        return matrix.tocsr()

    def rhs(self, mu):
        theta = np.asarray(self.theta_f(self.parse_parameter(mu)), dtype=float)
        vector = np.zeros(self.dim)
        for coefficient, f in zip(theta, self.rhs_vectors):
            vector += coefficient * f
        return vector

    def coercivity_lower_bound(self, mu):
        return self.coercivity(self.parse_parameter(mu))

    @functools.cached_property
    def product_solver(self):
        return SpdSolver(self.product, method=self.solver_method, tol=self.solver_tol)

    def operator_solver(self, mu):
        return SpdSolver(self.operator(mu), method=self.solver_method, tol=self.solver_tol)

    def prolongate(self, u):
        """Extend an interior-dof vector by the homogeneous boundary values."""
        full = np.zeros(self.interior_dofs.size + self.constrained_dofs.size)
        full[self.interior_dofs] = u
        return full


def assemble_thermal_block(mesh, solver_method=None, solver_tol=None):
    """
    Assemble the affine thermal block model on ``mesh``.

    Args:
        mesh: Mesh (use an even number of cells per axis)
        solver_method: 'cg' or 'direct', defaults to setting SOLVER_METHOD
        solver_tol: relative residual tolerance, defaults to setting SOLVER_TOL

    Returns:
        HighDimModel: four quadrant stiffness blocks, the unit load, and the
        H1-seminorm product (sum of the blocks) restricted to interior vertices
    """
    start = time.perf_counter()
    if mesh.n % 2:
        logger.warning(f"Odd grid n={mesh.n}: interface triangles are assigned by barycenter")

    quadrants = quadrant_indices(mesh)
    constrained = mesh.boundary_vertices()
    interior = np.setdiff1d(np.arange(mesh.num_vertices), constrained)

    def restrict(matrix):
        return matrix[interior][:, interior].tocsr()

    blocks = [restrict(assemble_diffusion_matrix(mesh, (quadrants == q).astype(float))) for q in range(4)]
    load = assemble_load_vector(mesh)[interior]

    product = blocks[0] + blocks[1] + blocks[2] + blocks[3]
    product = product.tocsr()

    model = HighDimModel(
        operators=blocks,
        rhs_vectors=[load],
        theta_a=lambda mu: np.asarray(mu, dtype=float),
        theta_f=lambda mu: np.ones(1),
        product=product,
        parameter_space=THERMAL_BLOCK_SPACE,
        coercivity=coercivity_lower_bound,
        interior_dofs=interior,
        constrained_dofs=constrained,
        solver_method=solver_method,
        solver_tol=solver_tol,
        name=f'thermal_block_{mesh.n}',
        mesh=mesh,
    )
    logger.info(f"Assembled {model!r} in {time.perf_counter() - start:.2f}s")
    return model
