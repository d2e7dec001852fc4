import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from app_homoclinic.exceptions import ConvergenceError, DomainError
from app_homoclinic.services import scalar_bifurcations
from app_homoclinic.services.asymptotics import compare_table, cusp_asymptotic, mu1_axis_intersection
from app_homoclinic.services.continuation import StepControl
from app_homoclinic.services.model_maps import ModelParams, Mu, scalar_map
from app_homoclinic.services.scalar_bifurcations import (
    ThetaForm, classify_horn, find_cusp, find_gpd, horn_axis_crossings, lp_system,
    make_point, pd_point_at_theta, pd_system, polish_point, polyline_self_intersects, scan_cusps,
    trace_lp_horn, trace_pd_curve,
)

PROPERTY = settings(max_examples=100, derandomize=True, deadline=None)
BASELINE = ModelParams()
SPRING = ModelParams(C2=-1.2)


class ThetaFormTests(SimpleTestCase):
    @PROPERTY
    @given(
        n=st.integers(min_value=1, max_value=4),
        theta=st.floats(min_value=0.0, max_value=2 * math.pi),
        mu1=st.floats(min_value=-0.05, max_value=0.05),
        m2=st.floats(min_value=-1.0, max_value=1.0),
    )
    def test_scaled_form_matches_scalar_map(self, n, theta, mu1, m2):
        form = ThetaForm(n, BASELINE)
        point = make_point(form, 'LP', (theta, mu1, m2))
        values = scalar_map(point.x, point.mu, BASELINE, 1)
        scale = form.S
        self.assertLess(abs(point.residuals['f_minus_x'] - (values[0] - point.x)), 1e-12 * scale)
        self.assertLess(abs(point.residuals['fx'] - values[1]), 1e-9 * max(1.0, abs(values[1])))

    def test_fold_scaled_is_positive_multiple_of_second_derivative(self):
        form = ThetaForm(3, BASELINE)
        for theta in np.linspace(0.1, 6.2, 13):
            u = (theta, 0.0, 0.2)
            values = form.derivatives(*u, 3)
            fxx = scalar_map(form.x_of(theta), form.mu(u), BASELINE, 2)[2]
            expected = fxx * form.x_of(theta) * form.xi(theta)
            self.assertLess(abs(form.fold_scaled(values) - expected), 1e-9 * max(1.0, abs(expected)))

    def test_branch_index_validation(self):
        with self.assertRaises(DomainError):
            ThetaForm(0, BASELINE)
        with self.assertRaises(DomainError):
            ThetaForm(2.5, BASELINE)


class CuspTests(SimpleTestCase):
    def test_cusp_n10(self):
        cusp = find_cusp(10, BASELINE)
        self.assertAlmostEqual(cusp.theta, 6.0226, delta=1e-3)
        self.assertAlmostEqual(cusp.mu.mu1 / -0.0156205, 1.0, delta=1e-3)
        self.assertAlmostEqual(cusp.m2 / -0.73479, 1.0, delta=1e-3)
        self.assertLess(abs(cusp.residuals['fixed_point_scaled']), 1e-10)
        self.assertLess(abs(cusp.residuals['fold_scaled']), 1e-8)

    def test_cusp_mu2_ratio_between_consecutive_horns(self):
        expected = math.exp(-2 * math.pi * BASELINE.beta_nu)
        for n in (10, 15, 20):
            first, second = scan_cusps([n, n + 1], BASELINE)
            self.assertAlmostEqual((second.mu.mu2 / first.mu.mu2) / expected, 1.0, delta=0.15)

    def test_cusp_mu1_approaches_leading_term(self):
        cusp = find_cusp(50, BASELINE)
        self.assertAlmostEqual(4 * math.pi * 50 * cusp.mu.mu1 / math.log(0.0625 * 2.25 / 1.0625), 1.0, delta=0.05)

    def test_asymptotic_error_decreases_over_n10_to_90(self):
        n_values = list(range(10, 91))
        exact = [point.mu for point in scan_cusps(n_values, BASELINE, workers=4)]
        table = compare_table(exact, [cusp_asymptotic(n, BASELINE) for n in n_values])
        self.assertLess(table.errors[-1], table.errors[0] / 5)
        self.assertLess(table.spearman, 0.0)
        self.assertTrue(table.decreasing)

    def test_cusp_is_polished(self):
        cusp = find_cusp(40, BASELINE)
        self.assertLess(abs(cusp.residuals['fx'] - 1.0), 1e-12)
        self.assertLess(abs(cusp.residuals['fold_scaled']), 1e-12)

    def test_scan_is_independent_of_workers(self):
        sequential = scan_cusps(range(10, 16), BASELINE, workers=1)
        threaded = scan_cusps(range(10, 16), BASELINE, workers=4)
        self.assertEqual([point.unknowns for point in sequential], [point.unknowns for point in threaded])


class HornTests(SimpleTestCase):
    def test_lp_horn_n10(self):
        branches = trace_lp_horn(10, BASELINE)
        self.assertEqual(len(branches), 2)
        cusp = find_cusp(10, BASELINE)
        for curve in branches:
            self.assertGreater(len(curve), 10)
            self.assertTrue(all(point.residual_norm < 1e-10 for point in curve))
            self.assertEqual(curve.termination, 'sign_change:fxx')
            end = curve.unknowns()[-1]
            self.assertAlmostEqual(end[1], cusp.mu.mu1, delta=1e-7)
            self.assertAlmostEqual(end[0], cusp.theta, delta=1e-4)

    def test_lp_horn_original_residuals_n4(self):
        form = ThetaForm(4, BASELINE)
        for curve in trace_lp_horn(4, BASELINE):
            for u in curve.unknowns():
                point = make_point(form, 'LP', u)
                self.assertLess(abs(point.residuals['f_minus_x']), 1e-10)
                self.assertLess(abs(point.residuals['fx'] - 1.0), 1e-5)

    def test_axis_crossing_matches_leading_term(self):
        crossings = horn_axis_crossings(trace_lp_horn(10, BASELINE), BASELINE)
        self.assertTrue(crossings)
        target = mu1_axis_intersection(10, BASELINE)
        closest = min(crossings, key=lambda point: abs(point.mu.mu1 - target))
        self.assertAlmostEqual(closest.mu.mu1, 0.006003, delta=5e-5)
        self.assertLess(abs(closest.mu.mu1 - target) / target, 0.1)
        self.assertLess(abs(closest.m2), 1e-9)

    def test_axis_crossing_n50(self):
        crossings = horn_axis_crossings(trace_lp_horn(50, BASELINE), BASELINE)
        target = mu1_axis_intersection(50, BASELINE)
        closest = min(crossings, key=lambda point: abs(point.mu.mu1 - target))
        self.assertLess(abs(closest.mu.mu1 - target) / target, 0.03)

    def test_pd_curve_n20_is_period_doubling(self):
        curve = trace_pd_curve(20, BASELINE)
        form = ThetaForm(20, BASELINE)
        for u in curve.unknowns()[::max(1, len(curve) // 25)]:
            point = make_point(form, 'PD', u, precise=True)
            with self.subTest(theta=point.theta):
                self.assertLess(abs(point.residuals['fx'] + 1.0), 1e-8)
                self.assertLess(abs(point.residuals['fixed_point_scaled']), 1e-12)
                self.assertAlmostEqual(point.theta, u[0], delta=1e-6)

    def test_polish_keeps_curve_point(self):
        form = ThetaForm(20, BASELINE)
        u = trace_pd_curve(20, BASELINE, max_points=50).unknowns()[10]
        polished, residuals = polish_point(form, 'PD', u)
        self.assertLess(float(np.max(np.abs(polished - u))), 1e-6)
        self.assertEqual(set(residuals), {'fixed_point_scaled', 'f_minus_x', 'fx', 'fold_scaled', 'flip_scaled'})

    def test_pd_curve_n10(self):
        curve = trace_pd_curve(10, BASELINE)
        self.assertGreater(len(curve), 10)
        self.assertTrue(all(point.residual_norm < 1e-10 for point in curve))
        system = pd_system(ThetaForm(10, BASELINE))
        self.assertLess(float(np.max(np.abs(system.evaluate(curve.unknowns()[len(curve) // 2])))), 1e-10)

    def test_half_initial_step_traces_same_curve(self):
        form = ThetaForm(10, BASELINE)
        default = trace_pd_curve(10, BASELINE)
        halved = trace_pd_curve(10, BASELINE, step_ctrl=StepControl(h0=5e-4))
        for curve in (default, halved):
            distances = []
            for theta, mu1, m2 in curve.unknowns():
                exact_mu1, exact_m2 = pd_point_at_theta(form, theta)
                distances.append(math.hypot(mu1 - exact_mu1, form.S * (m2 - exact_m2)))
            self.assertLess(max(distances), 1e-9)
        for index in (0, -1):
            self.assertAlmostEqual(default.unknowns()[index][0], halved.unknowns()[index][0], delta=0.1)

    def test_pd_curve_is_deterministic(self):
        first, second = trace_pd_curve(10, BASELINE), trace_pd_curve(10, BASELINE)
        self.assertTrue(np.array_equal(first.unknowns(), second.unknowns()))

    def test_pd_graph_crosses_mu1_zero(self):
        form = ThetaForm(10, BASELINE)
        for theta in (4.83976, 7.23666):
            mu1, m2 = pd_point_at_theta(form, theta)
            self.assertLess(abs(mu1), 1e-4)
            residual = pd_system(form).evaluate([theta, mu1, m2])
            self.assertLess(float(np.max(np.abs(residual))), 1e-10)

    def test_lp_and_pd_systems_differ_in_sign(self):
        form = ThetaForm(10, BASELINE)
        u = np.array([6.0, -0.01, -0.7])
        lp, pd = lp_system(form).evaluate(u), pd_system(form).evaluate(u)
        self.assertEqual(lp[0], pd[0])
        self.assertAlmostEqual(lp[1] - pd[1], 2 * BASELINE.beta * form.xi(6.0), places=12)


class GpdTests(SimpleTestCase):
    def test_spring_horn_has_two_gpd(self):
        points = find_gpd(10, SPRING)
        self.assertEqual(len(points), 2)
        self.assertAlmostEqual(points[0].theta, 2.88003, delta=1e-3)
        self.assertAlmostEqual(points[1].theta, 2.88037, delta=1e-3)
        for point in points:
            self.assertEqual(point.kind, 'GPD')
            self.assertLess(abs(point.residuals['flip_scaled']), 1e-6)
            self.assertLess(abs(point.residuals['fixed_point_scaled']), 1e-9)

    def test_unpolished_root_is_not_returned(self):
        original = scalar_bifurcations.polish_point

        def failing(form, kind, u):
            if kind == 'GPD':
                raise ConvergenceError('Уточнение в расширенной точности не сошлось')
            return original(form, kind, u)

        with mock.patch.object(scalar_bifurcations, 'polish_point', side_effect=failing):
            with self.assertRaises(ConvergenceError) as context:
                find_gpd(10, SPRING)
        self.assertEqual(context.exception.details['n'], 10)

    def test_spring_verdict(self):
        self.assertEqual(classify_horn(10, SPRING).verdict, 'spring')

    def test_saddle_verdict(self):
        result = classify_horn(10, BASELINE)
        self.assertEqual(result.verdict, 'saddle')
        self.assertLess(len(result.gpd_points), 2)

    def test_verdict_is_stable_under_finer_steps(self):
        coarse = trace_pd_curve(10, SPRING)
        fine = trace_pd_curve(10, SPRING, step_ctrl=StepControl(h0=5e-4, h_max=0.025))
        self.assertEqual(classify_horn(10, SPRING, coarse).verdict, classify_horn(10, SPRING, fine).verdict)


class PolylineTests(SimpleTestCase):
    def test_figure_eight_intersects(self):
        points = [(0, 0), (1, 1), (1, 0), (0, 1)]
        self.assertTrue(polyline_self_intersects(points))

    def test_simple_arc_does_not_intersect(self):
        t = np.linspace(0, math.pi, 50)
        self.assertFalse(polyline_self_intersects(np.column_stack([np.cos(t), np.sin(t)])))

    def test_short_polyline(self):
        self.assertFalse(polyline_self_intersects([(0, 0), (1, 1), (2, 0)]))


class MuSanityTests(SimpleTestCase):
    def test_mu_from_unknowns(self):
        form = ThetaForm(10, BASELINE)
        self.assertEqual(form.mu((6.0, 0.01, -0.5)), Mu(0.01, -0.5 * form.S))
