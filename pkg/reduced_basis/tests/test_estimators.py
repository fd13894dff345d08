import numpy as np
import scipy.sparse as sps
from numpy.testing import assert_allclose, assert_array_equal

from django.test import SimpleTestCase

from reduced_basis.estimators import (StableEstimatorData, TradEstimatorData, build_offline_data, error_bound,
                                      estimate_stable, estimate_traditional, hd_residual_norm_oracle, residual_coefficients,
                                      residual_order, riesz)
from reduced_basis.exceptions import InvalidArgumentError
from reduced_basis.linops import v_norm
from reduced_basis.rb_core import CoerciveRBReductor, ReducedModel, project, solve_high_dim
from reduced_basis.thermal_block import THERMAL_BLOCK_SPACE, HighDimModel

from .helpers import dense, random_basis, random_parameters, snapshot_basis, thermal_block


def tiny_reduced_model(basis_size=1):
    return ReducedModel(
        operators=np.ones((4, basis_size, basis_size)),
        rhs_vectors=np.ones((1, basis_size)),
        theta_a=lambda mu: np.asarray(mu),
        theta_f=lambda mu: np.ones(1),
        parameter_space=THERMAL_BLOCK_SPACE,
        coercivity=lambda mu: float(np.min(mu)),
        estimator_trad=TradEstimatorData(np.eye(1 + 4 * basis_size)),
        estimator_stable=StableEstimatorData(np.eye(1 + 4 * basis_size)),
    )


class RieszTestCase(SimpleTestCase):

    def test_zero_functional(self):
        model = thermal_block(4)
        assert_array_equal(riesz(model, np.zeros(model.dim)), np.zeros(model.dim))

    def test_dense_oracle(self):
        model = thermal_block(4)
        g = model.rhs_vectors[0]
        expected = np.linalg.solve(dense(model.product), g)
        assert_allclose(riesz(model, g), expected, rtol=0, atol=1e-12 * np.abs(expected).max())

    def test_identity_product(self):
        model_identity = HighDimModel(
            operators=[sps.identity(3, format='csr')], rhs_vectors=[np.ones(3)],
            theta_a=lambda mu: np.ones(1), theta_f=lambda mu: np.ones(1),
            product=sps.identity(3, format='csr'), parameter_space=THERMAL_BLOCK_SPACE,
            coercivity=lambda mu: 1.0, interior_dofs=np.arange(3), constrained_dofs=np.arange(3, 3),
        )
        g = np.array([1.0, -2.0, 0.5])
        assert_allclose(riesz(model_identity, g), g, rtol=1e-15)


class OfflineDataTestCase(SimpleTestCase):
    """Test case for the offline data of both estimators."""

    def test_empty_basis(self):
        model = thermal_block(4)
        vectors, trad, stable = build_offline_data(model, np.zeros((0, model.dim)))
        self.assertEqual(len(vectors), 1)
        norm = v_norm(model.product, riesz(model, model.rhs_vectors[0]))
        assert_allclose(trad.gram, [[norm ** 2]], rtol=1e-12)
        assert_allclose(stable.coefficients, [[norm]], rtol=1e-12)

    def test_counting(self):
        model = thermal_block(4)
        basis = snapshot_basis(model, random_parameters(2))
        vectors, trad, stable = build_offline_data(model, basis)
        self.assertEqual(len(vectors), 9)
        self.assertEqual(trad.size, 9)
        self.assertEqual(stable.size, 9)
        self.assertLessEqual(stable.rank, 9)

    def test_residual_order(self):
        # insertion order: f, then (q=0..3) for basis vector 0, then for basis vector 1
        assert_array_equal(residual_order(1, 4, 2), [0, 1, 5, 2, 6, 3, 7, 4, 8])
        assert_array_equal(residual_order(1, 4, 0), [0])

    def test_representatives_in_public_order(self):
        model = thermal_block(4)
        basis = random_basis(model, 2)
        vectors, _, _ = build_offline_data(model, basis)
        for k, (q, i) in enumerate([(q, i) for q in range(4) for i in range(2)], start=1):
            expected = riesz(model, model.operators[q] @ basis.vectors[i])
            assert_allclose(vectors.vectors[k], expected, rtol=0, atol=1e-12 * np.abs(expected).max())

    def test_gram_matches_coefficients(self):
        model = thermal_block(8)
        basis = random_basis(model, 3)
        _, trad, stable = build_offline_data(model, basis)
        gram = trad.gram
        assert_allclose(gram, gram.T, rtol=0, atol=0)
        assert_allclose(gram, stable.coefficients @ stable.coefficients.T,
                        rtol=0, atol=1e-12 * np.abs(gram).max())
        self.assertGreaterEqual(np.linalg.eigvalsh(gram).min(), -1e-12 * np.abs(gram).max())

    def test_gram_matches_coefficients_with_dependent_representatives(self):
        model = thermal_block(4)
        basis = snapshot_basis(model, random_parameters(3))
        vectors, trad, stable = build_offline_data(model, basis)
        self.assertLess(stable.rank, len(vectors))
        assert_allclose(trad.gram, stable.coefficients @ stable.coefficients.T,
                        rtol=0, atol=1e-12 * np.abs(trad.gram).max())

    def test_rows_reconstruct(self):
        model = thermal_block(8)
        basis = random_basis(model, 2)
        reductor = CoerciveRBReductor(model)
        for psi in basis.vectors:
            reductor.extend_basis(psi)
        data = reductor.residual_data
        eta = data.residual_vectors().vectors
        coefficients = data.stable_data().coefficients
        psi_eta = data.residual_basis
        for k in range(len(eta)):
            remainder = eta[k] - coefficients[k] @ psi_eta
            self.assertLessEqual(v_norm(model.product, remainder), 1e-10 * v_norm(model.product, eta[k]))

    def test_incremental_matches_from_scratch(self):
        model = thermal_block(8)
        reductor = CoerciveRBReductor(model)
        for mu in random_parameters(3, seed=8):
            reductor.extend_basis(solve_high_dim(model, mu))
        incremental = reductor.reduce()
        _, trad, stable = build_offline_data(model, reductor.basis)
        scale = np.abs(trad.gram).max()
        assert_allclose(incremental.estimator_trad.gram, trad.gram, rtol=0, atol=1e-12 * scale)
        self.assertEqual(incremental.estimator_stable.rank, stable.rank)
        assert_allclose(incremental.estimator_stable.coefficients, stable.coefficients,
                        rtol=0, atol=1e-12 * np.sqrt(scale))

    def test_pass_count_recorded(self):
        model = thermal_block(8)
        reductor = CoerciveRBReductor(model)
        self.assertEqual(reductor.residual_data.max_passes, 1)
        for mu in random_parameters(3, seed=8):
            reductor.extend_basis(solve_high_dim(model, mu))
        self.assertGreaterEqual(reductor.residual_data.max_passes, 1)
        self.assertLessEqual(reductor.residual_data.max_passes, 10)


class OnlineEvaluationTestCase(SimpleTestCase):
    """Test case for the online estimator evaluations."""

    def test_residual_coefficients(self):
        rmodel = tiny_reduced_model(1)
        assert_allclose(residual_coefficients(rmodel, [0.1, 1.0, 0.4, 1.0], [2.0]),
                        [1.0, -0.2, -2.0, -0.8, -2.0])
        assert_array_equal(residual_coefficients(rmodel, [0.5] * 4, [0.0]), [1.0, 0.0, 0.0, 0.0, 0.0])

    def test_residual_coefficients_order(self):
        rmodel = tiny_reduced_model(2)
        alpha = residual_coefficients(rmodel, [0.1, 0.2, 0.3, 0.4], [1.0, 10.0])
        assert_allclose(alpha, [1.0, -0.1, -1.0, -0.2, -2.0, -0.3, -3.0, -0.4, -4.0])

    def test_residual_coefficients_length(self):
        with self.assertRaises(InvalidArgumentError):
            residual_coefficients(tiny_reduced_model(1), [0.5] * 4, [1.0, 2.0])

    def test_trivial_estimates(self):
        self.assertEqual(estimate_traditional(TradEstimatorData(np.eye(3)), np.zeros(3)), 0.0)
        self.assertEqual(estimate_traditional(TradEstimatorData(np.eye(3)), [1.0, 0.0, 0.0]), 1.0)
        self.assertEqual(estimate_stable(StableEstimatorData(np.eye(3)), np.zeros(3)), 0.0)
        ones = StableEstimatorData(np.ones((3, 1)))
        self.assertAlmostEqual(estimate_stable(ones, [1.0, -4.0, 2.0]), 1.0, places=15)

    def test_negative_square_clamped(self):
        self.assertEqual(estimate_traditional(TradEstimatorData(-np.eye(2)), [1.0, 1.0]), 0.0)

    def test_length_checked(self):
        with self.assertRaises(InvalidArgumentError):
            estimate_stable(StableEstimatorData(np.eye(3)), np.zeros(2))
        with self.assertRaises(InvalidArgumentError):
            estimate_traditional(TradEstimatorData(np.eye(3)), np.zeros(4))

    def test_rank_zero_residual_space(self):
        self.assertEqual(estimate_stable(StableEstimatorData(np.zeros((3, 0))), [1.0, 2.0, 3.0]), 0.0)

    def test_against_oracle(self):
        model = thermal_block(8)
        basis = random_basis(model, 2, seed=4)
        rmodel = project(model, basis)
        vectors, _, _ = build_offline_data(model, basis)
        max_eta = max(v_norm(model.product, eta) for eta in vectors.vectors)
        gram = rmodel.estimator_trad.gram
        for mu in random_parameters(5, seed=9):
            u_coeffs = rmodel.solve(mu)
            alpha = residual_coefficients(rmodel, mu, u_coeffs)
            oracle = hd_residual_norm_oracle(model, basis, mu, u_coeffs)
            stable = estimate_stable(rmodel.estimator_stable, alpha)
            trad = estimate_traditional(rmodel.estimator_trad, alpha)
            self.assertLessEqual(abs(stable - oracle),
                                 1e-11 * (1 + oracle + np.linalg.norm(alpha) * max_eta))
            self.assertLessEqual(abs(trad - oracle), 1e-6 * np.sqrt(np.abs(np.outer(alpha, alpha) * gram).max()))

    def test_oracle_empty_basis(self):
        model = thermal_block(4)
        mu = [0.3, 0.6, 0.9, 0.2]
        expected = v_norm(model.product, riesz(model, model.rhs(mu)))
        self.assertAlmostEqual(hd_residual_norm_oracle(model, np.zeros((0, model.dim)), mu, []), expected, places=14)

    def test_oracle_vanishes_on_reproduced_solution(self):
        model = thermal_block(4)
        mu = [0.3, 0.6, 0.9, 0.2]
        basis = snapshot_basis(model, [mu])
        rmodel = project(model, basis)
        scale = v_norm(model.product, riesz(model, model.rhs(mu)))
        self.assertLessEqual(hd_residual_norm_oracle(model, basis, mu, rmodel.solve(mu)), 1e-10 * scale)


class ErrorBoundTestCase(SimpleTestCase):

    def test_values(self):
        self.assertEqual(error_bound(0.0, [0.5, 0.5, 0.5, 0.5]), 0.0)
        self.assertAlmostEqual(error_bound(0.5, [0.1, 1.0, 0.4, 1.0]), 5.0, places=14)

    def test_negative_estimate(self):
        with self.assertRaises(InvalidArgumentError):
            error_bound(-1e-3, [0.5, 0.5, 0.5, 0.5])

    def test_bounds_true_error(self):
        model = thermal_block(8)
        train = [np.full(4, 0.1), np.full(4, 1.0), np.array([0.1, 1.0, 0.4, 1.0])]
        basis = snapshot_basis(model, train)
        for size in range(len(basis) + 1):
            rmodel = project(model, basis.prefix(size))
            for mu in random_parameters(5, seed=10):
                u = solve_high_dim(model, mu)
                u_coeffs = rmodel.solve(mu)
                err = v_norm(model.product, u - basis.prefix(size).reconstruct(u_coeffs))
                estimate = rmodel.estimate(mu, u_coeffs=u_coeffs)
                bound = error_bound(estimate, mu)
                self.assertGreaterEqual(bound, err - 1e-12 * v_norm(model.product, u))


class StructuralOnlineTestCase(SimpleTestCase):
    """Online evaluation only touches reduced-size arrays."""

    def test_reduced_model_holds_no_high_dimensional_data(self):
        model = thermal_block(8)
        rmodel = project(model, random_basis(model, 3))
        n_eta = 1 + 4 * 3
        self.assertEqual(rmodel.operators.shape, (4, 3, 3))
        self.assertEqual(rmodel.rhs_vectors.shape, (1, 3))
        self.assertEqual(rmodel.estimator_trad.gram.shape, (n_eta, n_eta))
        self.assertEqual(rmodel.estimator_stable.coefficients.shape[0], n_eta)
        self.assertLessEqual(rmodel.estimator_stable.coefficients.shape[1], n_eta)
        for value in vars(rmodel).values():
            if isinstance(value, np.ndarray):
                self.assertNotIn(model.dim, value.shape)
        for data in (rmodel.estimator_trad, rmodel.estimator_stable):
            for value in vars(data).values():
                self.assertNotIn(model.dim, np.shape(value))

    def test_online_sizes_independent_of_grid(self):
        shapes = []
        for n in (4, 16):
            model = thermal_block(n)
            rmodel = project(model, snapshot_basis(model, random_parameters(3, seed=4)))
            shapes.append((rmodel.operators.shape, rmodel.rhs_vectors.shape, rmodel.estimator_trad.gram.shape,
                           rmodel.estimator_stable.coefficients.shape[0]))
        self.assertEqual(shapes[0], shapes[1])
