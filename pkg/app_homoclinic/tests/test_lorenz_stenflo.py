import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from app_homoclinic.exceptions import ConvergenceError, DomainError
from app_homoclinic.services.continuation import fd_jacobian
from app_homoclinic.services.lorenz_stenflo import (
    LSParams, block_matrix, equilibrium_eigenvalues, find_3dl_locus, integrate, jacobian, rhs,
    is_complex, shoot_scan, unstable_eigenvector, unstable_manifold_shoot,
)

LS = LSParams()


class EigenvalueTests(SimpleTestCase):
    def test_3dl_point_spectrum(self):
        data = equilibrium_eigenvalues(LS)
        self.assertAlmostEqual(data.real_stable, -1.9884, places=12)
        self.assertAlmostEqual(data.delta0, -1.98845, delta=1e-4)
        self.assertAlmostEqual(data.omega0, 6.2265, delta=1e-3)
        self.assertAlmostEqual(data.eps0, 2.7769, delta=1e-3)
        self.assertAlmostEqual(data.nu0, 0.71605, delta=1e-4)
        self.assertAlmostEqual(data.sigma0, 0.7885, delta=1e-3)
        self.assertTrue(data.wild)
        self.assertEqual(len(data.eigenvalues), 4)
        self.assertLess(data.char_residual, 1e-8)

    def test_block_trace(self):
        data = equilibrium_eigenvalues(LS)
        self.assertAlmostEqual(data.eps0 + 2 * data.delta0, -(1 + 2 * LS.sigma), places=10)

    def test_block_cubic_coefficients(self):
        sigma, s, r, eps2 = LS.sigma, LS.s, LS.r, LS.eps2
        expected = [
            1.0, 1 + 2 * sigma, 2 * sigma + sigma ** 2 + s - sigma * r,
            -(sigma ** 2 * (r - 1) + s * (r * eps2 - 1)),
        ]
        self.assertTrue(np.allclose(np.poly(block_matrix(LS)), expected))

    def test_full_spectrum_contains_minus_b(self):
        full = np.poly(jacobian(np.zeros(4), LS))
        self.assertTrue(np.allclose(full, np.polymul(np.poly(block_matrix(LS)), [1.0, LS.b])))

    def test_stable_equilibrium_is_flagged(self):
        data = equilibrium_eigenvalues(LS.with_changes(r=0.5))
        self.assertFalse(data.has_unstable)
        self.assertTrue(math.isnan(data.nu0))
        self.assertTrue(math.isnan(data.sigma0))
        self.assertFalse(data.wild)
        self.assertLessEqual(data.eps0, 0.0)
        self.assertEqual(len(data.eigenvalues), 4)
        with self.assertRaises(DomainError):
            unstable_eigenvector(LS.with_changes(r=0.5))

    def test_complex_root_tolerance_is_relative(self):
        self.assertFalse(is_complex(complex(3.0, 1e-9)))
        self.assertFalse(is_complex(complex(300.0, 1e-6)))
        self.assertTrue(is_complex(complex(300.0, 1e-3)))
        self.assertTrue(is_complex(complex(-2.0, 6.2)))

    def test_unstable_eigenvector(self):
        vector = unstable_eigenvector(LS)
        eps0 = equilibrium_eigenvalues(LS).eps0
        self.assertTrue(np.allclose(jacobian(np.zeros(4), LS) @ vector, eps0 * vector, atol=1e-10))
        self.assertAlmostEqual(float(np.linalg.norm(vector)), 1.0)
        self.assertGreater(vector[np.flatnonzero(np.abs(vector) > 1e-12)[0]], 0.0)

    def test_params_validation(self):
        with self.assertRaises(DomainError):
            LSParams(b=0.0)
        with self.assertRaises(DomainError):
            LSParams(r=math.nan)
        self.assertEqual(LSParams.from_dict({**LS.to_dict(), 'extra': 1}), LS)


class LocusTests(SimpleTestCase):
    def test_locus_over_default_grid(self):
        result = find_3dl_locus(LS)
        self.assertEqual(result.free, 'b')
        self.assertEqual(len(result.points), 101)
        self.assertFalse(result.truncated)
        self.assertTrue(all(point.residual < 1e-8 for point in result.points))
        b = np.array([point.b for point in result.points])
        self.assertTrue(np.all(np.diff(b) > 0.0))

    def test_locus_passes_through_3dl_point(self):
        result = find_3dl_locus(LS, grid=[LS.r])
        self.assertAlmostEqual(result.points[0].b, 1.98845, delta=1e-4)

    def test_locus_matches_equilibrium_spectrum(self):
        result = find_3dl_locus(LS, grid=np.linspace(12.0, 18.0, 7))
        self.assertEqual(len(result.points), 7)
        for point in result.points:
            with self.subTest(r=point.r):
                data = equilibrium_eigenvalues(LS.with_changes(r=point.r, b=point.b))
                self.assertAlmostEqual(data.delta0, -point.b, delta=1e-8)
                self.assertAlmostEqual(data.real_stable, data.delta0, delta=1e-8)
                self.assertGreater(data.omega0, 0.0)

    def test_locus_residual_is_enforced(self):
        with mock.patch('app_homoclinic.services.lorenz_stenflo.LOCUS_TOL', -1.0):
            with self.assertRaises(ConvergenceError):
                find_3dl_locus(LS, grid=[LS.r])

    def test_free_parameter_validation(self):
        with self.assertRaises(ValueError):
            find_3dl_locus(LS, free='sigma')


class VectorFieldTests(SimpleTestCase):
    def test_jacobian_matches_finite_differences(self):
        state = np.array([0.3, -1.2, 2.5, 0.7])
        estimate = fd_jacobian(lambda y: rhs(y, LS), state)
        self.assertTrue(np.allclose(jacobian(state, LS), estimate, rtol=1e-7, atol=1e-7))

    def test_linear_growth_along_unstable_direction(self):
        delta = 1e-9
        vector = unstable_eigenvector(LS)
        eps0 = equilibrium_eigenvalues(LS).eps0
        trajectory = integrate(LS, delta * vector, (0.0, 1.0), rel_tol=1e-11, abs_tol=1e-20)
        expected = delta * math.exp(eps0) * vector
        self.assertLess(float(np.linalg.norm(trajectory.y[-1] - expected)) / float(np.linalg.norm(expected)), 1e-5)

    def test_halved_tolerances_agree(self):
        state0 = 1e-6 * unstable_eigenvector(LS)
        coarse = integrate(LS, state0, (0.0, 5.0), rel_tol=1e-9, abs_tol=1e-12)
        fine = integrate(LS, state0, (0.0, 5.0), rel_tol=5e-10, abs_tol=5e-13)
        difference = float(np.linalg.norm(coarse.y[-1] - fine.y[-1]))
        self.assertLess(difference / float(np.linalg.norm(fine.y[-1])), 1e-4)

        shots = unstable_manifold_shoot(LS, t_max=8.0)
        refined = unstable_manifold_shoot(LS, t_max=8.0, rel_tol=5e-10, abs_tol=5e-13)
        for shot, finer in zip(shots, refined):
            self.assertLessEqual(abs(shot.exit_time - finer.exit_time), 8.0 / 3999 + 1e-12)

    def test_invalid_initial_state(self):
        with self.assertRaises(DomainError):
            integrate(LS, [0.0, 0.0, 0.0], (0.0, 1.0))
        with self.assertRaises(DomainError):
            integrate(LS, [0.0, math.inf, 0.0, 0.0], (0.0, 1.0))


class ShootingTests(SimpleTestCase):
    def test_both_branches_leave_equilibrium(self):
        results = unstable_manifold_shoot(LS, delta=1e-6, t_max=10.0)
        self.assertEqual([result.sign for result in results], [1, -1])
        for result in results:
            self.assertGreater(result.exit_time, 3.0)
            self.assertLess(result.exit_time, 6.0)
            self.assertGreaterEqual(result.closest_distance, 0.0)
            self.assertGreaterEqual(result.closest_time, result.exit_time)
            times = [t for t, _ in result.crossings]
            self.assertEqual(times, sorted(times))
            self.assertTrue(all(t > result.exit_time for t in times))

    def test_delta_out_of_range(self):
        with self.assertRaises(DomainError):
            unstable_manifold_shoot(LS, delta=1.0)

    def test_scan_is_independent_of_workers(self):
        r_values = [14.5, 15.302531, 16.0]
        sequential = shoot_scan(LS, r_values, workers=1, t_max=8.0)
        threaded = shoot_scan(LS, r_values, workers=3, t_max=8.0)
        self.assertEqual([r for r, _ in sequential], r_values)
        self.assertEqual(sequential, threaded)
