"""
Бифуркации неподвижных точек скалярного отображения F(x, μ).

Все системы записаны в θ-параметризации ветви n: x = exp(-β(2πn + θ)),
μ2 = S·m2, S = exp(-2πβνn). После деления на S невязки имеют порядок единицы:

    P_k = δ_k0·m2 + C1 Im(w^k e^{wθ}) + C2 e^{-2πnμ1} (-c)^k e^{-cθ},
    w = -βν + i, c = βν + μ1, ξ = D e^{-βθ}, D = exp(-2πβ(1-ν)n),

так что F - x = S(P0 - ξ), а производные F по x выражаются через P_k/ξ.
"""

# Standard library imports
import logging
import math
from dataclasses import dataclass, field

# Third-party imports
import numpy as np
from scipy.optimize import brentq

# Local imports
from ..exceptions import (
    ConvergenceError, DomainError, InconclusiveError, NotFoundError,
)
from .asymptotics import (
    DerivedConstants, cusp_asymptotic, horn_theta_seeds, mu1_axis_intersection,
)
from .continuation import (
    DefiningSystem, DomainBox, continue_curve, curve_tangent,
    join_curves, newton_solve, pin_unknown, refine_sign_change,
)
from .model_maps import Mu
from .parallel import ordered_map
from .precision import polish, precise_context, split, working_digits

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
PD_MU1_UPPER = 1.0


class ThetaForm:
    """θ-параметризация ветви n скалярного отображения."""

    def __init__(self, n, p):
        if int(n) != n or n < 1:
            raise DomainError('Номер ветви должен быть целым >= 1', n=n)
        self.n = int(n)
        self.p = p
        self.w = complex(-p.beta_nu, 1.0)
        self.S = math.exp(-2.0 * math.pi * p.beta_nu * self.n)
        self.D = math.exp(-2.0 * math.pi * p.beta * (1.0 - p.nu) * self.n)

    def xi(self, theta):
        return self.D * math.exp(-self.p.beta * theta)

    def log_xi(self, theta):
        return -2.0 * math.pi * self.p.beta * (1.0 - self.p.nu) * self.n - self.p.beta * theta

    def x_of(self, theta):
        return math.exp(-self.p.beta * (2.0 * math.pi * self.n + theta))

    def theta_of(self, x):
        return -math.log(x) / self.p.beta - 2.0 * math.pi * self.n

    def mu2_of(self, m2):
        return self.S * m2

    def mu(self, u):
        return Mu(float(u[1]), self.mu2_of(float(u[2])))

    def _amplitude(self, theta, mu1):
        c = self.p.beta_nu + mu1
        return c, self.p.C2 * math.exp(-2.0 * math.pi * self.n * mu1 - c * theta)

    def derivatives(self, theta, mu1, m2, order=3):
        """P_0..P_order в точке (θ, μ1, m2)."""
        c, amplitude = self._amplitude(theta, mu1)
        base = np.exp(self.w * theta)
        values = np.array([
            self.p.C1 * (self.w ** k * base).imag + amplitude * (-c) ** k
            for k in range(order + 1)
        ])
        values[0] += m2
        return values

    def precise_derivatives(self, ctx, theta, mu1, m2, order=3):
        """P_0..P_order в контексте ctx (аргументы - mpf)."""
        beta_nu = ctx.mpf(self.p.beta_nu)
        w = ctx.mpc(-beta_nu, 1)
        c = beta_nu + mu1
        amplitude = self.p.C2 * ctx.exp(-2 * ctx.pi * self.n * mu1 - c * theta)
        base = ctx.exp(w * theta)
        values = [self.p.C1 * (w ** k * base).imag + amplitude * (-c) ** k for k in range(order + 1)]
        values[0] += m2
        return values

    def precise_xi(self, ctx, theta):
        beta = ctx.mpf(self.p.beta)
        return ctx.exp(-2 * ctx.pi * beta * (1 - ctx.mpf(self.p.nu)) * self.n - beta * theta)

    def mu1_partials(self, theta, mu1, order=3):
        """∂P_k/∂μ1 для k = 0..order (μ1 входит только в слагаемое C2)."""
        c, amplitude = self._amplitude(theta, mu1)
        lever = -(2.0 * math.pi * self.n + theta)
        return np.array([
            amplitude * ((-c) ** k * lever - (k * (-c) ** (k - 1) if k else 0.0))
            for k in range(order + 1)
        ])

    def fx(self, theta, mu1, m2):
        """Производная F по x."""
        values = self.derivatives(theta, mu1, m2, 1)
        return -values[1] / (self.p.beta * self.xi(theta))

    def fold_scaled(self, values):
        """F_xx·xξ = (P2 + βP1)/β²; знак совпадает со знаком F_xx."""
        return (values[2] + self.p.beta * values[1]) / self.p.beta ** 2

    def flip_scaled(self, values, xi):
        """(2F_xxx + 3F_xx²), умноженное на положительный множитель."""
        beta = self.p.beta
        fold = self.fold_scaled(values)
        return -2.0 * values[3] / beta ** 3 - 6.0 * fold + 2.0 * values[1] / beta + 3.0 * fold ** 2 / xi


@dataclass(frozen=True)
class ScalarBifPoint:
    """Точка бифуркации коразмерности 1 или 2 скалярного отображения."""

    kind: str
    n: int
    theta: float
    mu: Mu
    x: float
    m2: float = 0.0
    residuals: dict = field(default_factory=dict)
    label: str = ''

    @property
    def unknowns(self):
        return (self.theta, self.mu.mu1, self.m2)


def _residuals(form, values, xi):
    return {
        'fixed_point_scaled': float(values[0] - xi),
        'f_minus_x': float(form.S * (values[0] - xi)),
        'fx': float(-values[1] / (form.p.beta * xi)),
        'fold_scaled': float(form.fold_scaled(values)),
        'flip_scaled': float(form.flip_scaled(values, xi)),
    }


def precise_rows(form, ctx, kind, u):
    """
    Невязки условий точки kind в контексте ctx.

    LP и PD - два уравнения (точка кривой), CP и GPD - три.
    """
    theta, mu1, m2 = u
    values = form.precise_derivatives(ctx, theta, mu1, m2, 3)
    xi = form.precise_xi(ctx, theta)
    sign = 1 if kind in ('LP', 'CP') else -1
    rows = [values[0] - xi, values[1] + sign * form.p.beta * xi]
    if kind == 'CP':
        rows.append(values[2] - form.p.beta ** 2 * xi)
    elif kind == 'GPD':
        rows.append(form.flip_scaled(values, xi))
    elif kind not in ('LP', 'PD'):
        raise ValueError(f'Неизвестный тип точки {kind}')
    return rows


def polish_point(form, kind, u):
    """
    Уточняет точку LP, PD, CP или GPD в расширенной точности.

    Returns:
        tuple: (np.ndarray (θ, μ1, m2) в double, словарь невязок в уточнённой точке)

    Raises:
        ConvergenceError: уточнение не сошлось
    """
    u = np.asarray(u, dtype=float)
    ctx = precise_context(working_digits(form.log_xi(u[0])))
    values, _ = polish(ctx, f'{kind}[n={form.n}]', lambda v: precise_rows(form, ctx, kind, v), u)
    theta, mu1, m2 = values
    residuals = _residuals(form, form.precise_derivatives(ctx, theta, mu1, m2, 3), form.precise_xi(ctx, theta))
    return split(ctx, values)[0], residuals


def make_point(form, kind, u, label='', precise=False):
    """
    Собирает ScalarBifPoint с невязками в исходных и масштабированных переменных.

    С precise=True точка предварительно уточняется в расширенной точности
    (polish_point), и невязки считаются в уточнённой точке.
    """
    if precise:
        u, residuals = polish_point(form, kind, u)
    theta, mu1, m2 = (float(value) for value in u)
    if not precise:
        residuals = _residuals(form, form.derivatives(theta, mu1, m2, 3), form.xi(theta))
    return ScalarBifPoint(
        kind=kind, n=form.n, theta=theta, mu=form.mu(u), x=form.x_of(theta),
        m2=m2, residuals=residuals, label=label,
    )


def _fold_row(form, sign):
    """Строка условия P1 ∓ βξ = 0 и её производные."""
    beta = form.p.beta

    def residual(theta, values, xi):
        return values[1] + sign * beta * xi

    def gradient(theta, values, partials, xi):
        return [values[2] - sign * beta ** 2 * xi, partials[1], 0.0]

    return residual, gradient


def _monitors(form):
    def values_at(u):
        return form.derivatives(u[0], u[1], u[2], 3)

    return {
        'mu2': lambda u: u[2],
        'fxx': lambda u: form.fold_scaled(values_at(u)),
        'flip': lambda u: form.flip_scaled(values_at(u), form.xi(u[0])),
    }


def _condition_system(form, name, sign):
    beta = form.p.beta
    fold_residual, fold_gradient = _fold_row(form, sign)

    def residual(u):
        theta, mu1, m2 = u
        values = form.derivatives(theta, mu1, m2, 1)
        xi = form.xi(theta)
        return np.array([values[0] - xi, fold_residual(theta, values, xi)])

    def jacobian(u):
        theta, mu1, m2 = u
        values = form.derivatives(theta, mu1, m2, 2)
        partials = form.mu1_partials(theta, mu1, 1)
        xi = form.xi(theta)
        return np.array([
            [values[1] + beta * xi, partials[0], 1.0],
            fold_gradient(theta, values, partials, xi),
        ])

    return DefiningSystem(
        name=f'{name}[n={form.n}]', dimension=3, residual=residual, jacobian=jacobian,
        monitors=_monitors(form), labels=('theta', 'mu1', 'm2'),
    )


def lp_system(form):
    """Складка: F = x, F_x = 1, то есть P0 = ξ, P1 = -βξ."""
    return _condition_system(form, 'LP', 1.0)


def pd_system(form):
    """Удвоение периода: F = x, F_x = -1, то есть P0 = ξ, P1 = βξ."""
    return _condition_system(form, 'PD', -1.0)


def cusp_system(form):
    """Сборка: LP плюс F_xx = 0 (P2 = β²ξ); квадратная система 3x3."""
    beta = form.p.beta
    lp = lp_system(form)

    def residual(u):
        theta, mu1, m2 = u
        values = form.derivatives(theta, mu1, m2, 2)
        xi = form.xi(theta)
        return np.array([values[0] - xi, values[1] + beta * xi, values[2] - beta ** 2 * xi])

    def jacobian(u):
        theta, mu1, m2 = u
        values = form.derivatives(theta, mu1, m2, 3)
        partials = form.mu1_partials(theta, mu1, 2)
        xi = form.xi(theta)
        return np.vstack([lp.evaluate_jacobian(u), [values[3] + beta ** 3 * xi, partials[2], 0.0]])

    return DefiningSystem(
        name=f'CP[n={form.n}]', dimension=3, residual=residual, jacobian=jacobian,
        monitors=lp.monitors, labels=lp.labels,
    )


def _fixed_point_m2(form, theta, mu1):
    """m2, при котором θ - неподвижная точка (P0 = ξ)."""
    values = form.derivatives(theta, mu1, 0.0, 0)
    return form.xi(theta) - values[0]


def seed_on_curve(system, form, theta, mu1, tol):
    u0 = np.array([theta, mu1, _fixed_point_m2(form, theta, mu1)])
    return newton_solve(pin_unknown(system, 1, mu1), u0, tol).u


def _horn_box(theta_c, theta_half_width, mu1_max):
    return DomainBox(
        (theta_c - theta_half_width, -mu1_max, -math.inf),
        (theta_c + theta_half_width, mu1_max, math.inf),
    )


def horn_seeds(n, p):
    try:
        mu1_seed = mu1_axis_intersection(n, p)
        return mu1_seed, horn_theta_seeds(n, mu1_seed, p)
    except DomainError as exc:
        raise NotFoundError('Нет вещественной начальной фазы рога', n=n) from exc


def trace_lp_horn(n, p, step_ctrl=None, mu1_max=0.1, theta_half_width=math.pi / 2,
                  max_points=2000, tol=1e-10):
    """
    Две ветви LP-рога с номером n от границы области до точки сборки.

    Начальные точки - пересечения ветвей с прямой μ1 = μ1(axis); от них
    кривая продолжается к сборке (до смены знака F_xx, точка сборки
    уточняется) и от сборки к границе области.

    Returns:
        tuple: (Curve ветви 1, Curve ветви 2); каждая упорядочена от края к сборке
    """
    form = ThetaForm(n, p)
    system = lp_system(form)
    theta_c = DerivedConstants.from_params(p).cusp_theta
    box = _horn_box(theta_c, theta_half_width, mu1_max)
    mu1_seed, seeds = horn_seeds(n, p)

    branches = []
    for branch, theta_seed in enumerate(seeds, start=1):
        u_seed = seed_on_curve(system, form, theta_seed, mu1_seed, tol)
        tangent = curve_tangent(system, u_seed)
        if tangent[0] * (theta_c - u_seed[0]) < 0.0:
            tangent = -tangent
        inward = continue_curve(
            system, u_seed, 1, step_ctrl, box, max_points, tol, tangent0=tangent, stop_monitors=('fxx',),
        )
        outward = continue_curve(system, u_seed, -1, step_ctrl, box, max_points, tol, tangent0=tangent)
        if inward.termination == 'sign_change:fxx':
            inward.points[-1] = refine_sign_change(inward, 'fxx', len(inward) - 2, tol)
        else:
            logger.warning('LP-ветвь %d рога n=%d не дошла до сборки: %s', branch, n, inward.termination)
        curve = join_curves(outward, inward, {'kind': 'LP', 'n': n, 'branch': branch})
        logger.info('LP-ветвь %d рога n=%d: %d точек', branch, n, len(curve))
        branches.append(curve)
    return tuple(branches)


def trace_pd_curve(n, p, step_ctrl=None, mu1_max=0.1, theta_half_width=math.pi / 2,
                   max_points=2000, tol=1e-10):
    """Кривая удвоения периода рога n: одна кривая, проходящая окрестность сборки."""
    form = ThetaForm(n, p)
    system = pd_system(form)
    theta_c = DerivedConstants.from_params(p).cusp_theta
    box = _horn_box(theta_c, theta_half_width, mu1_max)
    mu1_seed, seeds = horn_seeds(n, p)
    u_seed = seed_on_curve(system, form, seeds[1], mu1_seed, tol)
    tangent = curve_tangent(system, u_seed)
    forward = continue_curve(system, u_seed, 1, step_ctrl, box, max_points, tol, tangent0=tangent)
    backward = continue_curve(system, u_seed, -1, step_ctrl, box, max_points, tol, tangent0=tangent)
    curve = join_curves(backward, forward, {'kind': 'PD', 'n': n, 'branch': 0})
    logger.info('PD-кривая рога n=%d: %d точек', n, len(curve))
    return curve


def horn_axis_crossings(curves, p, tol=1e-10):
    """Точки пересечения кривых с осью μ2 = 0 (смены знака монитора mu2)."""
    points = []
    for curve in curves:
        form = ThetaForm(curve.metadata['n'], p)
        for i in curve.sign_changes('mu2'):
            refined = refine_sign_change(curve, 'mu2', i, tol)
            points.append(make_point(form, curve.metadata['kind'], refined.u, label='mu2=0', precise=True))
    return points


def find_cusp(n, p, tol=1e-10):
    """
    Точка сборки рога n методом Ньютона из асимптотического приближения.

    Raises:
        ConvergenceError: с начальным приближением в details
    """
    form = ThetaForm(n, p)
    theta = DerivedConstants.from_params(p).cusp_theta
    guess = cusp_asymptotic(n, p)
    u0 = np.array([theta, guess.mu1, guess.mu2 / form.S])
    try:
        result = newton_solve(cusp_system(form), u0, tol)
    except ConvergenceError as exc:
        raise ConvergenceError(
            'Сборка не найдена', n=n, seed=[float(v) for v in u0], reason=exc.message,
        ) from exc
    try:
        return make_point(form, 'CP', result.u, precise=True)
    except ConvergenceError as exc:
        raise ConvergenceError(
            'Сборка не уточнена в расширенной точности', n=n, seed=[float(v) for v in result.u], reason=exc.message,
        ) from exc


def pd_point_at_theta(form, theta):
    """
    Точка PD-кривой с заданной фазой θ: μ1 из P1 = βξ, затем m2 из P0 = ξ.

    Returns:
        tuple (mu1, m2) или None, если на отрезке поиска нет корня
    """
    beta = form.p.beta
    xi = form.xi(theta)
    lower = -0.8 * form.p.beta_nu

    def condition(mu1):
        return form.derivatives(theta, mu1, 0.0, 1)[1] - beta * xi

    if condition(lower) * condition(PD_MU1_UPPER) > 0.0:
        return None
    mu1 = brentq(condition, lower, PD_MU1_UPPER, xtol=1e-15, rtol=4 * EPS)
    return mu1, _fixed_point_m2(form, theta, mu1)


def lp_point_at_theta(form, theta):
    """То же для складки (P1 = -βξ)."""
    beta = form.p.beta
    xi = form.xi(theta)
    lower = -0.8 * form.p.beta_nu

    def condition(mu1):
        return form.derivatives(theta, mu1, 0.0, 1)[1] + beta * xi

    if condition(lower) * condition(PD_MU1_UPPER) > 0.0:
        return None
    mu1 = brentq(condition, lower, PD_MU1_UPPER, xtol=1e-15, rtol=4 * EPS)
    return mu1, _fixed_point_m2(form, theta, mu1)


def _flip_along_pd(form, theta):
    point = pd_point_at_theta(form, theta)
    if point is None:
        return math.nan
    mu1, m2 = point
    return form.flip_scaled(form.derivatives(theta, mu1, m2, 3), form.xi(theta))


def find_gpd(n, p, samples=400, theta_half_width=math.pi / 2, tol=1e-10):
    """
    Точки вырожденного удвоения на PD-кривой рога n.

    PD-кривая - график над θ, поэтому условие 2F_xxx + 3F_xx² = 0
    рассматривается как функция θ на логарифмической сетке вокруг сборки
    (сгущение к сборке, шаг порядка √ξ), корни уточняются методом Брента
    и полируются в расширенной точности (polish_point).

    Returns:
        list[ScalarBifPoint] по возрастанию θ; пустой список - рог седлового типа

    Raises:
        ConvergenceError: корень Брента не удалось уточнить
    """
    form = ThetaForm(n, p)
    cusp = find_cusp(n, p, tol)
    theta_c = cusp.theta
    xi_c = form.xi(theta_c)
    offsets = np.geomspace(1e-3 * math.sqrt(xi_c), theta_half_width, samples)
    grid = np.concatenate([theta_c - offsets[::-1], [theta_c], theta_c + offsets])
    values = np.array([_flip_along_pd(form, theta) for theta in grid])

    points = []
    for i in range(len(grid) - 1):
        left, right = values[i], values[i + 1]
        if not (np.isfinite(left) and np.isfinite(right)) or left * right >= 0.0:
            continue
        theta = brentq(lambda t: _flip_along_pd(form, t), grid[i], grid[i + 1], xtol=1e-15, rtol=4 * EPS)
        mu1, m2 = pd_point_at_theta(form, theta)
        u = np.array([theta, mu1, m2])
        try:
            points.append(make_point(form, 'GPD', u, precise=True))
        except ConvergenceError as exc:
            raise ConvergenceError(
                'Точка GPD не уточнена', n=n, theta=float(theta), reason=exc.message,
            ) from exc
    logger.info('GPD рога n=%d: найдено %d', n, len(points))
    return points


def polyline_self_intersects(points):
    """Есть ли у ломаной собственные пересечения (несмежных отрезков)."""
    vertices = np.asarray(points, dtype=float)
    if len(vertices) < 4:
        return False
    start, end = vertices[:-1], vertices[1:]

    def orientation(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    a, b = start[:, None, :], end[:, None, :]
    c, d = start[None, :, :], end[None, :, :]
    crossing = (
        (orientation(a, b, c) * orientation(a, b, d) < 0.0)
        & (orientation(c, d, a) * orientation(c, d, b) < 0.0)
    )
    rows, cols = np.triu_indices(len(start), k=2)
    return bool(np.any(crossing[rows, cols]))


@dataclass(frozen=True)
class HornClassification:
    n: int
    verdict: str
    gpd_points: list
    self_intersects: bool


def classify_horn(n, p, pd_curve=None, samples=400, tol=1e-10):
    """
    Тип рога: 'spring', если на PD-кривой не меньше двух GPD
    или её образ на плоскости (μ1, μ2) самопересекается, иначе 'saddle'.

    Raises:
        InconclusiveError: PD-кривая не проходит окрестность сборки
    """
    gpd_points = find_gpd(n, p, samples, tol=tol)
    if pd_curve is None:
        pd_curve = trace_pd_curve(n, p, tol=tol)
    unknowns = pd_curve.unknowns()
    theta_c = DerivedConstants.from_params(p).cusp_theta
    if len(unknowns) < 3 or not unknowns[:, 0].min() < theta_c < unknowns[:, 0].max():
        raise InconclusiveError('PD-кривая не покрывает окрестность сборки', n=n, points=len(unknowns))
    intersects = polyline_self_intersects(unknowns[:, 1:3])
    verdict = 'spring' if len(gpd_points) >= 2 or intersects else 'saddle'
    logger.info('Рог n=%d: %s (GPD=%d, самопересечение=%s)', n, verdict, len(gpd_points), intersects)
    return HornClassification(n, verdict, gpd_points, intersects)


def scan_cusps(n_values, p, workers=1, tol=1e-10):
    """Точки сборки для набора номеров рогов (порядок результата совпадает с n_values)."""
    return ordered_map(lambda n: find_cusp(n, p, tol), list(n_values), workers)
