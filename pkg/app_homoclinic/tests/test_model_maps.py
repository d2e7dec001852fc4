import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from app_homoclinic.exceptions import DegenerateMatrixError, DomainError, DomainWarning
from app_homoclinic.services.model_maps import (
    FlowParams, GlobalMatrix, ModelMap3D, ModelParams, Mu, StateS,
    compose_return_map, derive_map_coefficients, falling_factorial, local_map, model_map_3d,
    richardson_derivative, scalar_map, scalar_map_fd_check, second_iterate_derivatives,
)

PROPERTY = settings(max_examples=100, derandomize=True, deadline=None)
GENERIC_MATRIX = ((0.7, -0.4, 0.3), (0.2, 0.9, -0.5), (0.6, 0.8, 1.1))

mu1s = st.floats(min_value=-0.05, max_value=0.05)
mu2s = st.floats(min_value=-0.1, max_value=0.1)


class ScalarMapTests(SimpleTestCase):
    def setUp(self):
        self.p = ModelParams()

    def test_value_matches_closed_form(self):
        x, mu = 0.3, Mu(0.01, 0.02)
        kappa = self.p.nu + mu.mu1 / self.p.beta
        expected = (mu.mu2 + self.p.C1 * x ** self.p.nu * math.sin(-math.log(x) / self.p.beta)
                    + self.p.C2 * x ** kappa)
        self.assertAlmostEqual(scalar_map(x, mu, self.p)[0], expected, places=14)

    def test_value_at_full_turn(self):
        x = math.exp(-2 * math.pi * self.p.beta)
        value = scalar_map(x, Mu(0.0, 0.0), self.p)[0]
        self.assertAlmostEqual(value, 1.2 * math.exp(-math.pi / 2), places=14)
        self.assertAlmostEqual(value, 0.24946, delta=1e-5)
        self.assertAlmostEqual(scalar_map(1.0, Mu(0.01, 0.3), self.p)[0], 0.3 + self.p.C2, places=14)

    def test_falling_factorial(self):
        self.assertEqual(falling_factorial(5, 3), 60)
        self.assertEqual(falling_factorial(0.5, 0), 1)
        self.assertAlmostEqual(abs(falling_factorial(complex(0.5, -2.0), 2) - complex(0.5, -2.0) * complex(-0.5, -2.0)),
                               0.0)

    @PROPERTY
    @given(x=st.floats(min_value=1e-4, max_value=0.8), mu1=mu1s, mu2=mu2s)
    def test_derivatives_match_finite_differences(self, x, mu1, mu2):
        self.assertLess(scalar_map_fd_check(x, Mu(mu1, mu2), self.p), 1e-6)

    def test_non_positive_x_is_rejected(self):
        with self.assertRaises(DomainError):
            scalar_map(0.0, Mu(), self.p)
        with self.assertRaises(DomainError):
            scalar_map(-1e-3, Mu(), self.p)

    def test_order_out_of_range(self):
        with self.assertRaises(ValueError):
            scalar_map(0.1, Mu(), self.p, order=4)

    def test_negative_power_exponent_warns(self):
        with self.assertWarns(DomainWarning):
            scalar_map(0.1, Mu(-0.3, 0.0), self.p, order=1)

    def test_second_iterate_chain_rule(self):
        x, mu = 0.3, Mu(0.0, 0.2)
        analytic = second_iterate_derivatives(x, mu, self.p)

        def iterate(t, order):
            return second_iterate_derivatives(t, mu, self.p)[order]

        for k in range(1, 4):
            estimate = richardson_derivative(lambda t, k=k: iterate(t, k - 1), x, 1e-4 * x)
            self.assertLess(abs(estimate - analytic[k]), 1e-6 * max(1.0, abs(analytic[k])))

    def test_invalid_params(self):
        with self.assertRaises(DomainError):
            ModelParams(nu=-0.5)
        with self.assertRaises(DomainError):
            ModelParams(C2=0.0)
        with self.assertRaises(DomainError):
            Mu(math.nan, 0.0)

    def test_decay_alpha(self):
        self.assertAlmostEqual(self.p.decay_alpha(), 2 * math.pi * 0.25)


class ModelMap3DTests(SimpleTestCase):
    def setUp(self):
        self.p = ModelParams()

    def fd_columns(self, func, x, step=1e-5):
        columns = []
        for j in range(3):
            h = step * max(abs(x[j]), 1e-3)

            def along(t, j=j):
                shifted = np.array(x, dtype=float)
                shifted[j] = t
                return func(shifted)

            columns.append(richardson_derivative(along, x[j], h))
        return np.stack(columns, axis=-1)

    @PROPERTY
    @given(
        x1=st.floats(min_value=-2.0, max_value=2.0),
        x3=st.floats(min_value=-2.0, max_value=2.0),
        x4=st.floats(min_value=1e-3, max_value=0.5),
        mu1=mu1s, mu2=mu2s,
    )
    def test_jacobian_and_tensors_match_finite_differences(self, x1, x3, x4, mu1, mu2):
        model_map = ModelMap3D(self.p, Mu(mu1, mu2))
        x = np.array([x1, x3, x4])
        checks = (
            (model_map.image, model_map.jacobian),
            (model_map.jacobian, model_map.second),
            (model_map.second, model_map.third),
        )
        for lower, higher in checks:
            analytic = higher(x)
            estimate = self.fd_columns(lower, x)
            scale = max(1.0, float(np.max(np.abs(analytic))))
            self.assertLess(float(np.max(np.abs(analytic - estimate))) / scale, 1e-6)

    @PROPERTY
    @given(x4=st.floats(min_value=1e-3, max_value=0.5), mu1=mu1s)
    def test_mu1_derivatives(self, x4, mu1):
        x = np.array([0.7, -1.3, x4])
        d_image, d_jacobian = ModelMap3D(self.p, Mu(mu1, 0.01)).mu1_derivatives(x)

        def image(t):
            return ModelMap3D(self.p, Mu(t, 0.01)).image(x)

        def jacobian(t):
            return ModelMap3D(self.p, Mu(t, 0.01)).jacobian(x)

        image_fd = richardson_derivative(image, mu1, 1e-4)
        jacobian_fd = richardson_derivative(jacobian, mu1, 1e-4)
        self.assertTrue(np.allclose(d_image, image_fd, rtol=1e-6, atol=1e-9))
        self.assertTrue(np.allclose(d_jacobian, jacobian_fd, rtol=1e-6, atol=1e-9))

    def test_third_component_is_scalar_map(self):
        mu = Mu(0.01, 0.03)
        image, _ = model_map_3d(StateS(1.0, 1.0, 0.2), mu, self.p)
        self.assertAlmostEqual(image.x4, scalar_map(0.2, mu, self.p)[0], places=14)

    def test_x4_must_be_positive(self):
        with self.assertRaises(DomainError):
            model_map_3d(StateS(1.0, 1.0, 0.0), Mu(), self.p)


class ReturnMapTests(SimpleTestCase):
    def setUp(self):
        self.flow = FlowParams(gamma=-0.25, beta=0.5, mu1=0.01)
        self.matrix = GlobalMatrix(GENERIC_MATRIX)
        self.coefficients = derive_map_coefficients(self.matrix, self.flow)

    @PROPERTY
    @given(
        x1=st.floats(min_value=-2.0, max_value=2.0),
        x3=st.floats(min_value=-2.0, max_value=2.0),
        x4=st.floats(min_value=1e-4, max_value=0.5),
        mu2=mu2s,
    )
    def test_coefficient_form_equals_composition(self, x1, x3, x4, mu2):
        xs = (x1, x3, x4)
        expected = compose_return_map(xs, mu2, self.matrix, self.flow)
        actual = self.coefficients.full_map(xs, mu2, self.flow)
        self.assertTrue(np.allclose(actual, expected, rtol=1e-12, atol=1e-12))

    @PROPERTY
    @given(
        x1=st.floats(min_value=-2.0, max_value=2.0),
        x3=st.floats(min_value=-2.0, max_value=2.0),
        y=st.floats(min_value=1e-4, max_value=0.3),
    )
    def test_shifted_model_map_matches_coefficient_form(self, x1, x3, y):
        mu = Mu(self.flow.mu1, 0.02)
        model_map = ModelMap3D(self.coefficients.model_params(), mu)
        expected = self.coefficients.full_map((x1, x3, self.coefficients.shift_x4(y)), mu.mu2, self.flow)
        self.assertTrue(np.allclose(model_map.image(np.array([x1, x3, y])), expected, rtol=1e-11, atol=1e-12))

    def test_c2_comes_from_a33(self):
        shift = math.exp(self.flow.kappa * self.coefficients.theta3 * self.flow.beta)
        self.assertAlmostEqual(self.coefficients.C2, GENERIC_MATRIX[2][2] * shift)
        self.assertAlmostEqual(self.coefficients.b6, GENERIC_MATRIX[2][2])

    def test_lower_triangular_example(self):
        coefficients = derive_map_coefficients(GlobalMatrix(((1, 0, 0), (0, 1, 0), (0, 1, 1))), self.flow)
        self.assertAlmostEqual(coefficients.b5, 1.0)
        self.assertAlmostEqual(coefficients.theta3, 0.0)
        self.assertAlmostEqual(coefficients.C1, 1.0)

    def test_identity_matrix_has_undefined_phase(self):
        with self.assertRaises(DegenerateMatrixError):
            derive_map_coefficients(GlobalMatrix(((1, 0, 0), (0, 1, 0), (0, 0, 1))), self.flow)

    def test_singular_matrix(self):
        with self.assertRaises(DegenerateMatrixError):
            GlobalMatrix(((1, 2, 3), (2, 4, 6), (0, 1, 1)))

    def test_flow_params_validation(self):
        with self.assertRaises(DomainError):
            FlowParams(gamma=0.1, beta=0.5)


class LocalMapTests(SimpleTestCase):
    def setUp(self):
        self.flow = FlowParams(gamma=-0.25, beta=0.5, mu1=0.01)

    @PROPERTY
    @given(
        a=st.tuples(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=-2.0, max_value=2.0)),
        b=st.tuples(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=-2.0, max_value=2.0)),
        scale=st.floats(min_value=-3.0, max_value=3.0),
        x4=st.floats(min_value=1e-6, max_value=1.0),
    )
    def test_superposition(self, a, b, scale, x4):
        combined = local_map(a[0] + scale * b[0], a[1] + scale * b[1], x4, self.flow)
        expected = local_map(a[0], a[1], x4, self.flow) + scale * local_map(b[0], b[1], x4, self.flow)
        self.assertTrue(np.allclose(combined, expected, rtol=1e-13, atol=1e-13))

    def test_unit_x4(self):
        self.assertTrue(np.allclose(local_map(0.7, -1.3, 1.0, self.flow), [0.7, 0.0, -1.3], rtol=0.0, atol=1e-15))

    def test_zero_section_point(self):
        self.assertTrue(np.array_equal(local_map(0.0, 0.0, 0.03, self.flow), np.zeros(3)))

    def test_full_turn(self):
        x4 = math.exp(-2 * math.pi * self.flow.beta)
        image = local_map(0.7, -1.3, x4, self.flow)
        self.assertAlmostEqual(image[0], 0.7 * math.exp(-2 * math.pi * self.flow.beta * self.flow.nu), places=14)
        self.assertAlmostEqual(image[1], 0.0, places=14)
        self.assertAlmostEqual(image[2], -1.3 * x4 ** self.flow.kappa, places=14)

    def test_x4_must_be_positive(self):
        with self.assertRaises(DomainError):
            local_map(1.0, 1.0, 0.0, self.flow)
