import numpy as np
import scipy.sparse as sps
from numpy.testing import assert_allclose, assert_array_equal

from django.test import SimpleTestCase, override_settings

from reduced_basis.exceptions import InvalidArgumentError, NumericalBreakdownError, SolverFailureError
from reduced_basis.linops import SpdSolver, default_maxiter, gram_schmidt_reiterated, spd_solve, v_inner, v_norm

from .helpers import dense, thermal_block


def random_spd(size, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((size, size))
    return A.T @ A + np.eye(size)


def gram(vectors, M=None):
    images = vectors if M is None else (M @ vectors.T).T
    return vectors @ images.T


class SpdSolveTestCase(SimpleTestCase):
    """Test case for solves with sparse SPD matrices."""

    def test_identity(self):
        b = np.array([1.0, -2.0, 3.5, 0.25])
        for method in ('cg', 'direct'):
            assert_allclose(spd_solve(sps.identity(4, format='csr'), b, method=method), b, rtol=1e-15)

    def test_zero_rhs(self):
        x = spd_solve(sps.csr_matrix(random_spd(5)), np.zeros(5))
        assert_array_equal(x, np.zeros(5))

    def test_dense_oracle(self):
        A = random_spd(5)
        expected = np.linalg.solve(A, np.ones(5))
        for method in ('cg', 'direct'):
            x = spd_solve(sps.csr_matrix(A), np.ones(5), method=method)
            assert_allclose(x, expected, rtol=1e-12)

    def test_residual_contract(self):
        model = thermal_block(8)
        b = model.rhs(np.ones(4))
        solver = SpdSolver(model.product, method='cg', tol=1e-12)
        x = solver.solve(b)
        # true residual; the iteration stops on the recursively updated one
        self.assertLessEqual(np.linalg.norm(model.product @ x - b), 1.1e-12 * np.linalg.norm(b))
        self.assertGreater(solver.last_iterations, 0)

    def test_true_residual_recorded(self):
        model = thermal_block(8)
        b = model.rhs(np.ones(4))
        for method in ('cg', 'direct'):
            solver = SpdSolver(model.product, method=method, tol=1e-12)
            x = solver.solve(b)
            measured = np.linalg.norm(model.product @ x - b) / np.linalg.norm(b)
            self.assertAlmostEqual(solver.last_residual, measured, delta=1e-16)
            self.assertLessEqual(solver.last_residual, 1.1e-12)
        solver.solve(np.zeros(model.dim))
        self.assertEqual(solver.last_residual, 0.0)

    def test_failure_reports_true_residual(self):
        A = sps.csr_matrix(random_spd(6, seed=2))
        solver = SpdSolver(A, method='cg', maxiter=2)
        with self.assertRaises(SolverFailureError) as ctx:
            solver.solve(np.ones(6))
        self.assertEqual(solver.last_residual, ctx.exception.residual)

    def test_direct_solver_reuses_factorization(self):
        model = thermal_block(4)
        solver = SpdSolver(model.product, method='direct')
        solver.solve(np.ones(model.dim))
        factors = solver._factors
        solver.solve(np.arange(model.dim, dtype=float))
        self.assertIs(solver._factors, factors)

    @override_settings(REDUCED_BASIS={'SOLVER_METHOD': 'direct'})
    def test_method_from_settings(self):
        self.assertEqual(SpdSolver(sps.identity(3, format='csr')).method, 'direct')

    def test_iteration_cap(self):
        A = sps.csr_matrix(random_spd(6, seed=2))
        with self.assertRaises(SolverFailureError) as ctx:
            SpdSolver(A, method='cg', maxiter=1).solve(np.ones(6))
        self.assertEqual(ctx.exception.iterations, 1)
        self.assertGreater(ctx.exception.residual, 1e-14)

    def test_default_iteration_cap(self):
        self.assertEqual(default_maxiter(10000), 6000)

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidArgumentError):
            SpdSolver(sps.csr_matrix(np.diag([1.0, 0.0])))
        with self.assertRaises(InvalidArgumentError):
            SpdSolver(sps.identity(2, format='csr'), method='gmres')
        with self.assertRaises(InvalidArgumentError):
            SpdSolver(sps.identity(2, format='csr'), tol=0.0)
        with self.assertRaises(InvalidArgumentError):
            spd_solve(sps.identity(2, format='csr'), np.ones(3))

    def test_indefinite_matrix_breaks_down(self):
        A = sps.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with self.assertRaises(NumericalBreakdownError):
            spd_solve(A, np.array([1.0, -1.0]), method='cg')


class InnerProductTestCase(SimpleTestCase):

    def test_trivial_values(self):
        self.assertEqual(v_inner(None, np.zeros(3), np.zeros(3)), 0.0)
        e1 = np.array([1.0, 0.0, 0.0])
        self.assertEqual(v_inner(sps.identity(3, format='csr'), e1, e1), 1.0)

    def test_dense_triple_product(self):
        M = thermal_block(4).product
        rng = np.random.default_rng(7)
        x, y = rng.standard_normal((2, M.shape[0]))
        expected = x @ dense(M) @ y
        scale = np.abs(x) @ np.abs(dense(M)) @ np.abs(y)
        self.assertLessEqual(abs(v_inner(M, x, y) - expected), 1e-14 * scale)
        self.assertAlmostEqual(v_norm(M, x), np.sqrt(x @ dense(M) @ x), delta=1e-13 * np.linalg.norm(x))

    def test_dimension_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            v_inner(None, np.ones(3), np.ones(4))
        with self.assertRaises(InvalidArgumentError):
            v_inner(sps.identity(4, format='csr'), np.ones(3), np.ones(3))

    def test_negative_norm_square(self):
        M = sps.csr_matrix(np.diag([1.0, -1.0]))
        with self.assertRaises(NumericalBreakdownError):
            v_norm(M, np.array([0.0, 1.0]))


class GramSchmidtTestCase(SimpleTestCase):
    """Test case for Gram-Schmidt with re-iteration."""

    def test_orthonormal_input_unchanged(self):
        vectors = np.eye(4)[:3]
        result, kept = gram_schmidt_reiterated(vectors)
        assert_array_equal(result, vectors)
        self.assertEqual(kept, [0, 1, 2])

    def test_repeated_vector_deflated(self):
        v = np.array([1.0, 2.0, 3.0])
        result, kept = gram_schmidt_reiterated(np.vstack([v, v]))
        self.assertEqual(kept, [0])
        assert_allclose(result[0], v / np.linalg.norm(v), rtol=1e-15)

    def test_hand_computation(self):
        result, kept = gram_schmidt_reiterated(np.array([[1.0, 0.0], [1.0, 1.0]]))
        self.assertEqual(kept, [0, 1])
        assert_allclose(result, np.eye(2), atol=1e-15)

    def test_zero_vector_deflated(self):
        result, kept = gram_schmidt_reiterated(np.array([[0.0, 0.0], [0.0, 2.0]]))
        self.assertEqual(kept, [1])
        assert_allclose(result, [[0.0, 1.0]])

    def test_ill_conditioned_euclidean(self):
        i, j = np.meshgrid(np.arange(50), np.arange(10))
        hilbert = 1.0 / (i + j + 1.0)
        result, kept = gram_schmidt_reiterated(hilbert)
        self.assertEqual(kept[0], 0)
        assert_allclose(gram(result), np.eye(len(kept)), rtol=0, atol=1e-13)

    def test_orthonormal_in_energy_product(self):
        M = thermal_block(8).product
        vectors = np.random.default_rng(11).standard_normal((10, M.shape[0]))
        result, kept = gram_schmidt_reiterated(vectors, M)
        self.assertEqual(kept, list(range(10)))
        assert_allclose(gram(result, M), np.eye(10), rtol=0, atol=1e-13)

    def test_span_preserved(self):
        M = thermal_block(4).product
        rng = np.random.default_rng(12)
        vectors = rng.standard_normal((4, M.shape[0]))
        vectors = np.vstack([vectors, vectors[0] + 2.0 * vectors[1], np.zeros(M.shape[0])])
        result, kept = gram_schmidt_reiterated(vectors, M)
        self.assertEqual(kept, [0, 1, 2, 3])
        for v in vectors:
            coefficients = result @ (M @ v)
            remainder = v - coefficients @ result
            self.assertLessEqual(v_norm(M, remainder), 1e-10 * v_norm(M, v) + 1e-300)

    def test_extension_keeps_existing_vectors(self):
        M = thermal_block(4).product
        rng = np.random.default_rng(13)
        first, _ = gram_schmidt_reiterated(rng.standard_normal((3, M.shape[0])), M)
        extended, kept = gram_schmidt_reiterated(np.vstack([first, rng.standard_normal((2, M.shape[0]))]),
                                                 M, start_index=3)
        assert_array_equal(extended[:3], first)
        self.assertEqual(kept, [0, 1, 2, 3, 4])
        assert_allclose(gram(extended, M), np.eye(5), rtol=0, atol=1e-13)

    def test_input_not_modified(self):
        vectors = np.array([[1.0, 1.0], [1.0, 0.0]])
        original = vectors.copy()
        gram_schmidt_reiterated(vectors)
        assert_array_equal(vectors, original)

    def test_indefinite_product(self):
        M = sps.csr_matrix(np.diag([1.0, -1.0]))
        with self.assertRaises(NumericalBreakdownError):
            gram_schmidt_reiterated(np.array([[0.0, 1.0]]), M)

    def test_empty_input(self):
        with self.assertRaises(InvalidArgumentError):
            gram_schmidt_reiterated(np.zeros((0, 3)))

    def test_re_iteration_needed(self):
        # nearly parallel vectors lose most of their norm in the first pass
        vectors = np.array([[1.0, 0.0, 0.0], [1.0, 1e-6, 0.0]])
        with self.assertLogs('reduced_basis.linops', level='DEBUG') as logs:
            result, kept = gram_schmidt_reiterated(vectors)
        self.assertEqual(kept, [0, 1])
        assert_allclose(result @ result.T, np.eye(2), rtol=0, atol=1e-15)
        self.assertIn('at most 2 passes per vector', logs.output[-1])

    def test_pass_count_returned(self):
        _, kept, passes = gram_schmidt_reiterated(np.eye(4)[:3], return_passes=True)
        self.assertEqual((kept, passes), ([0, 1, 2], 1))
        _, _, passes = gram_schmidt_reiterated(np.array([[1.0, 0.0, 0.0], [1.0, 1e-6, 0.0]]), return_passes=True)
        self.assertEqual(passes, 2)

    def test_pass_count_in_energy_product(self):
        M = thermal_block(8).product
        vectors = np.random.default_rng(14).standard_normal((12, M.shape[0]))
        vectors[-1] = vectors[0] + 1e-8 * vectors[-1]
        _, kept, passes = gram_schmidt_reiterated(vectors, M, return_passes=True)
        self.assertEqual(len(kept), 12)
        self.assertGreaterEqual(passes, 2)
        self.assertLessEqual(passes, 4)
