import cmath
import math
from unittest import mock

import numpy as np
from django.conf import settings as django_settings
from django.test import SimpleTestCase

from app_homoclinic.exceptions import ConvergenceError, NotFoundError
from app_homoclinic.services.continuation import fd_jacobian
from app_homoclinic.services.model_maps import ModelMap3D, ModelParams, Mu, richardson_derivative
from app_homoclinic.services.map3d_bifurcations import (
    Map3DForm, adjugate, classify_horn_3d, critical_vectors, curve_fixed_points, detect_codim2_3d,
    find_fixed_point_3d, fold_coefficient, map_system, multiplier_condition_error, multipliers,
    multipliers_from_invariants, ns_test,
    ns_test_matrix, second_compound, symmetric_functions, trace_lp3, trace_ns3, trace_pd3,
)
from app_homoclinic.services.scalar_bifurcations import ThetaForm

BASELINE = ModelParams()
GENERIC = np.array([[0.7, -0.4, 0.3], [0.2, 0.9, -0.5], [0.6, 0.8, 1.1]])


def resonance_params():
    return ModelParams(**django_settings.HOMOCLINIC['MODEL_PROFILES']['resonance'])


def with_eigenvalues(values):
    basis = np.array([[1.0, 0.3, -0.2], [0.1, 1.0, 0.4], [0.5, -0.6, 1.0]])
    return basis @ np.diag(values) @ np.linalg.inv(basis)


class LinearAlgebraTests(SimpleTestCase):
    def test_adjugate(self):
        self.assertTrue(np.allclose(adjugate(GENERIC) @ GENERIC, np.linalg.det(GENERIC) * np.eye(3)))

    def test_second_compound_eigenvalues_are_pair_products(self):
        matrix = with_eigenvalues([2.0, -0.5, 0.3])
        products = sorted([-1.0, 0.6, -0.15])
        self.assertTrue(np.allclose(sorted(np.linalg.eigvals(second_compound(matrix)).real), products))

    def test_symmetric_functions(self):
        e1, e2, e3 = symmetric_functions(with_eigenvalues([2.0, -0.5, 0.3]))
        self.assertAlmostEqual(e1, 1.8)
        self.assertAlmostEqual(e2, -0.55)
        self.assertAlmostEqual(e3, -0.3)

    def test_ns_test_vanishes_for_unit_circle_pair(self):
        omega = 0.9
        matrix = np.array([
            [math.cos(omega), -math.sin(omega), 0.0],
            [math.sin(omega), math.cos(omega), 0.0],
            [0.0, 0.0, 0.3],
        ])
        self.assertAlmostEqual(ns_test(*symmetric_functions(matrix)), 0.0, places=12)
        self.assertGreater(abs(ns_test(*symmetric_functions(1.1 * matrix))), 1e-3)

    def test_ns_test_is_second_compound_determinant(self):
        for matrix in (GENERIC, with_eigenvalues([2.0, -0.5, 0.3]), 3.0 * GENERIC):
            expected = ns_test(*symmetric_functions(matrix))
            self.assertAlmostEqual(ns_test_matrix(matrix), expected, delta=1e-10 * max(1.0, abs(expected)))

    def test_multiplier_condition_error(self):
        self.assertAlmostEqual(multiplier_condition_error('CP', [3.0, 1.0 + 1e-9, 0.2]), 1e-9, delta=1e-15)
        self.assertAlmostEqual(multiplier_condition_error('R1', [3.0, 1.0, 0.2]), 0.8)
        self.assertAlmostEqual(multiplier_condition_error('R2', [-1.0, -1.0, 0.2]), 0.0)
        self.assertAlmostEqual(multiplier_condition_error('LPPD', [1.0, -1.0, 0.2]), 0.0)
        pair = cmath.exp(2j * math.pi / 3)
        self.assertLess(multiplier_condition_error('R3', [pair, pair.conjugate(), 0.2]), 1e-15)
        self.assertGreater(multiplier_condition_error('R4', [pair, pair.conjugate(), 0.2]), 0.5)
        with self.assertRaises(ValueError):
            multiplier_condition_error('NS', [1.0, 1.0, 1.0])

    def test_roots_from_invariants(self):
        roots = multipliers_from_invariants(*symmetric_functions(with_eigenvalues([2.0, -0.5, 0.3])))
        self.assertTrue(np.allclose(roots, [2.0, -0.5, 0.3], atol=1e-12))

    def test_polynomial_residual_is_enforced(self):
        with mock.patch('app_homoclinic.services.map3d_bifurcations.CHAR_POLY_TOL', -1.0):
            with self.assertRaises(ConvergenceError):
                multipliers_from_invariants(1.8, -0.55, -0.3)

    def test_multipliers_sorted_by_modulus(self):
        result = multipliers(with_eigenvalues([0.5, -2.0, 1.5]))
        self.assertTrue(np.allclose(result, [-2.0, 1.5, 0.5]))

    def test_complex_multipliers(self):
        omega = 0.9
        matrix = np.array([
            [1.2 * math.cos(omega), -1.2 * math.sin(omega), 0.0],
            [1.2 * math.sin(omega), 1.2 * math.cos(omega), 0.0],
            [0.0, 0.0, 0.3],
        ])
        result = multipliers(matrix)
        self.assertAlmostEqual(abs(result[0]), 1.2)
        self.assertAlmostEqual(result[0], np.conj(result[1]))
        self.assertGreater(result[0].imag, 0.0)

    def test_critical_vectors(self):
        for sigma in (1.0, -1.0):
            matrix = with_eigenvalues([sigma, 0.4, 2.7])
            q, p = critical_vectors(matrix, sigma)
            self.assertTrue(np.allclose(matrix @ q, sigma * q))
            self.assertTrue(np.allclose(matrix.T @ p, sigma * p))
            self.assertAlmostEqual(float(np.linalg.norm(q)), 1.0)
            self.assertAlmostEqual(float(p @ q), 1.0)

    def test_fold_coefficient_is_directional_second_derivative(self):
        model_map = ModelMap3D(BASELINE, Mu(0.01, 0.02))
        x = np.array([0.4, -0.7, 0.05])
        matrix = with_eigenvalues([1.0, 0.4, 2.7])
        q, p = critical_vectors(matrix, 1.0)

        def along(t):
            return float(p @ model_map.jacobian(x + t * q) @ q)

        estimate = 0.5 * richardson_derivative(along, 0.0, 1e-4)
        analytic = fold_coefficient(model_map, x, matrix)
        self.assertLess(abs(analytic - estimate), 1e-6 * max(1.0, abs(analytic)))


class DefiningSystemTests(SimpleTestCase):
    def test_jacobian_matches_finite_differences(self):
        form = Map3DForm(2, BASELINE)
        u = np.array([0.5, -0.3, 3.0, 0.01, 0.2])
        for kind in ('LP3', 'PD3', 'NS3'):
            system = map_system(form, kind)
            analytic = system.evaluate_jacobian(u)
            estimate = fd_jacobian(system.evaluate, u)
            for row, fd_row in zip(analytic, estimate):
                scale = max(1.0, float(np.max(np.abs(row))))
                self.assertLess(float(np.max(np.abs(row - fd_row))) / scale, 1e-5, kind)

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            map_system(Map3DForm(2, BASELINE), 'HOPF')

    def test_third_row_is_scaled_scalar_condition(self):
        form = Map3DForm(5, BASELINE)
        u = np.array([0.2, 0.1, 3.0, 0.0, 0.4])
        scalar = ThetaForm(5, BASELINE)
        expected = scalar.derivatives(3.0, 0.0, 0.4, 0)[0] - scalar.xi(3.0)
        self.assertAlmostEqual(form.fixed_point_rows(u)[2] / expected, 1.0, places=9)


class FixedPointTests(SimpleTestCase):
    def test_fixed_point_x4_matches_scalar_root(self):
        n, theta, mu1 = 5, 3.0, 0.0
        scalar = ThetaForm(n, BASELINE)
        m2 = scalar.xi(theta) - scalar.derivatives(theta, mu1, 0.0, 0)[0]
        mu = Mu(mu1, scalar.S * m2)
        target = scalar.x_of(theta)
        found = None
        for root_index in range(10):
            try:
                point = find_fixed_point_3d(mu, BASELINE, n, root_index)
            except NotFoundError:
                break
            if abs(point.scalar_x4 / target - 1.0) < 1e-6:
                found = point
                break
        self.assertIsNotNone(found)
        self.assertAlmostEqual(found.state.x4 / found.scalar_x4, 1.0, places=8)
        self.assertAlmostEqual(found.theta, theta, delta=1e-6)
        self.assertLess(found.residual_norm, 1e-9)
        self.assertEqual(len(found.multipliers), 3)

    def test_missing_root(self):
        with self.assertRaises(NotFoundError):
            find_fixed_point_3d(Mu(0.0, 0.0), BASELINE, 5, root_index=10000)


class ResonanceProfileTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.p = resonance_params()
        cls.points = {}
        for n in (4, 5, 6):
            lp = detect_codim2_3d(trace_lp3(n, cls.p), cls.p)
            pd = detect_codim2_3d(trace_pd3(n, cls.p), cls.p)
            cls.points[n] = (lp, pd)

    def test_codim2_kinds(self):
        lp_kinds = {point.kind for lp, _ in self.points.values() for point in lp}
        pd_kinds = {point.kind for _, pd in self.points.values() for point in pd}
        self.assertIn('CP', lp_kinds)
        self.assertIn('R1', lp_kinds)
        self.assertIn('R2', pd_kinds)

    def test_codim2_points_lie_on_fixed_points(self):
        for lp, pd in self.points.values():
            for point in [*lp, *pd]:
                self.assertLess(point.residual_norm, 1e-8)

    def test_double_multipliers(self):
        for lp, pd in self.points.values():
            for point in [*lp, *pd]:
                if point.kind not in ('R1', 'R2'):
                    continue
                with self.subTest(kind=point.kind, n=point.n):
                    unit = 1.0 if point.kind == 'R1' else -1.0
                    distances = sorted(abs(m - unit) for m in point.multipliers)
                    self.assertLess(distances[1], 1e-6)
                    self.assertLessEqual(point.diagnostics['multiplier_error'], 1e-6)

    def test_every_point_satisfies_its_condition(self):
        for lp, pd in self.points.values():
            for point in [*lp, *pd]:
                with self.subTest(kind=point.kind, n=point.n, theta=point.u[2]):
                    self.assertLessEqual(multiplier_condition_error(point.kind, point.multipliers), 1e-6)

    def test_gpd_pair_and_spring_verdict_n6(self):
        verdict, gpd = classify_horn_3d(6, self.p)
        self.assertEqual(verdict, 'spring')
        thetas = sorted(point.u[2] for point in gpd)
        self.assertEqual(len(thetas), 2)
        self.assertAlmostEqual(thetas[0], 6.010, delta=5e-3)
        self.assertAlmostEqual(thetas[1], 6.016, delta=5e-3)
        for point in gpd:
            self.assertLessEqual(multiplier_condition_error('GPD', point.multipliers), 1e-6)

    def test_ns_curve_from_r1(self):
        seed = next(point for lp, _ in self.points.values() for point in lp if point.kind == 'R1')
        result = trace_ns3(seed, self.p)
        self.assertGreaterEqual(len(result.curve), 3)
        self.assertEqual(result.endpoints[0].kind, 'R1')
        self.assertEqual(result.modulus_violations, 0)
        self.assertLess(float(np.max(np.abs(result.curve.monitor('pair_modulus')))), 1e-6)
        self.assertTrue(all(value <= 1e-9 for value in result.curve.monitor('discriminant')[1:]))

        kinds = [point.kind for point in result.resonances]
        self.assertIn('R3', kinds)
        self.assertIn('R4', kinds)
        for point in result.resonances:
            with self.subTest(kind=point.kind):
                self.assertLessEqual(multiplier_condition_error(point.kind, point.multipliers), 1e-6)
                pair = max(point.multipliers, key=lambda value: value.imag)
                self.assertAlmostEqual(abs(pair), 1.0, delta=1e-6)


class BaselineAcceptanceTests(SimpleTestCase):
    """Кривые LP3 и PD3 при параметрах по умолчанию на ветвях с малым x4."""

    def assert_on_curve(self, curve, unit):
        monitor = 'det_JmI' if unit > 0 else 'det_JpI'
        self.assertLess(float(np.max(np.abs(curve.monitor(monitor)))), 1e-8)
        for point in curve_fixed_points(curve, BASELINE):
            distance = min(abs(m - unit) for m in point.multipliers)
            self.assertLess(distance, 1e-8, point.theta)
            self.assertLess(point.residual_norm, 1e-8)
            self.assertLess(abs(point.state.x4 - point.scalar_x4), 10.0 * point.state.x4 ** (2.0 * BASELINE.nu))

    def test_lp3_n10(self):
        curve = trace_lp3(10, BASELINE)
        self.assertGreater(len(curve), 100)
        self.assert_on_curve(curve, 1.0)

    def test_lp3_n15(self):
        self.assert_on_curve(trace_lp3(15, BASELINE), 1.0)

    def test_pd3_n10(self):
        self.assert_on_curve(trace_pd3(10, BASELINE), -1.0)

    def test_pd3_n15(self):
        self.assert_on_curve(trace_pd3(15, BASELINE), -1.0)


class BaselineCodim2ScanTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.curves = {n: (trace_lp3(n, BASELINE), trace_pd3(n, BASELINE)) for n in (8, 14, 20)}
        cls.points = {n: (detect_codim2_3d(lp, BASELINE), detect_codim2_3d(pd, BASELINE))
                      for n, (lp, pd) in cls.curves.items()}

    def test_cusp_on_every_horn(self):
        for n, (lp, _) in self.points.items():
            with self.subTest(n=n):
                self.assertEqual([point.kind for point in lp].count('CP'), 1)

    def test_lppd_is_found(self):
        kinds = {point.kind for lp, pd in self.points.values() for point in [*lp, *pd]}
        self.assertIn('LPPD', kinds)

    def test_no_unverified_points(self):
        for n, (lp, pd) in self.points.items():
            for point in [*lp, *pd]:
                with self.subTest(n=n, kind=point.kind, theta=point.u[2]):
                    self.assertLessEqual(point.diagnostics['multiplier_error'], 1e-6)
                    self.assertLess(point.residual_norm, 1e-8)

    def test_no_double_unit_multiplier_on_baseline(self):
        for n, (lp, pd) in self.points.items():
            kinds = {point.kind for point in [*lp, *pd]}
            self.assertFalse(kinds & {'R1', 'R2'}, n)
        for n, (lp, _) in self.curves.items():
            with self.subTest(n=n):
                for point in curve_fixed_points(lp, BASELINE):
                    distances = sorted(abs(m - 1.0) for m in point.multipliers)
                    self.assertGreater(distances[1], 0.05)
