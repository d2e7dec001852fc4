"""
Бифуркации неподвижных точек трёхмерного модельного отображения G.

Неизвестные ветви n: u = (x1, x3, θ, μ1, m2), x4 = exp(-β(2πn + θ)),
μ2 = S·m2. Определяющая система: три уравнения неподвижной точки
(третье поделено на S) и условие на мультипликаторы:

    LP3: g·det(J - I) = 0,
    PD3: g·det(J + I) = 0,
    NS3: det(J^[2] - I) = e3² - e1·e3 + e2 - 1 = 0,

где e1, e2, e3 - элементарные симметрические функции мультипликаторов,
J^[2] - вторая составная матрица, g = x4^(1-ν) снимает рост элементов
третьего столбца J. Производные условий берутся по формуле
d det(M) = tr(adj(M) dM).

Продолжение идёт в double; спектральные величины (тест-функции,
мультипликаторы) считаются в точке, уточнённой в расширенной точности.
"""

# Standard library imports
import cmath
import logging
import math
from dataclasses import dataclass, field

# Third-party imports
import numpy as np
from scipy.optimize import brentq

# Local imports
from ..exceptions import ConvergenceError, InconclusiveError, NotFoundError
from .asymptotics import DerivedConstants
from .continuation import (
    DefiningSystem, DomainBox, StepControl, continue_curve, correct_point,
    curve_tangent, join_curves, newton_solve, pin_unknown, refine_sign_change,
    rescale_system,
)
from .model_maps import ModelMap3D, Mu, StateS
from .precision import polish, precise_context, split, to_mp, working_digits
from .scalar_bifurcations import (
    ThetaForm, horn_seeds, seed_on_curve, lp_system, pd_system, polyline_self_intersects,
)

logger = logging.getLogger(__name__)

CHAR_POLY_TOL = 1e-8
UNIT_MODULUS_TOL = 1e-6
MAP3D_STEP_CONTROL = StepControl(h0=1e-3, h_min=1e-10, h_max=2e-3, theta_max_deg=20.0)
IDENTITY = np.eye(3)
SIGMA = {'LP3': 1, 'PD3': -1}
RESONANCE_ANGLES = {'R3': 2.0 * math.pi / 3.0, 'R4': math.pi / 2.0}


def adjugate(matrix):
    """Присоединённая матрица 3x3 (строки - векторные произведения столбцов)."""
    c0, c1, c2 = matrix[:, 0], matrix[:, 1], matrix[:, 2]
    return np.array([np.cross(c1, c2), np.cross(c2, c0), np.cross(c0, c1)])


def second_compound(matrix):
    """Вторая составная матрица: её собственные значения - произведения λiλj, i < j."""
    pairs = ((0, 1), (0, 2), (1, 2))
    compound = np.empty((3, 3))
    for row, (i, j) in enumerate(pairs):
        for col, (k, l) in enumerate(pairs):
            compound[row, col] = matrix[i, k] * matrix[j, l] - matrix[i, l] * matrix[j, k]
    return compound


def symmetric_functions(matrix):
    """
    (e1, e2, e3): след, сумма главных миноров 2x2, определитель.

    Явные формулы по элементам, поэтому подходят и для numpy-массива,
    и для вложенного списка mpf.
    """
    m = matrix
    e1 = m[0][0] + m[1][1] + m[2][2]
    e2 = (
        (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    )
    e3 = (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )
    return e1, e2, e3


def characteristic_value(invariants, sigma):
    """det(J - σI) через e1, e2, e3."""
    e1, e2, e3 = invariants
    return e3 - sigma * e2 + sigma ** 2 * e1 - sigma ** 3


def ns_test(e1, e2, e3):
    return e3 ** 2 - e1 * e3 + e2 - 1.0


def ns_test_matrix(matrix):
    """Π(λiλj - 1) по парам как det(J^[2] - I)."""
    return float(np.linalg.det(second_compound(matrix) - IDENTITY))


def multipliers_from_invariants(e1, e2, e3):
    """
    Корни λ³ - e1λ² + e2λ - e3 с уточнением Ньютоном.

    Returns:
        np.ndarray (complex) по убыванию модуля

    Raises:
        ConvergenceError: относительная невязка многочлена больше 1e-8
    """
    coefficients = np.array([1.0, -e1, e2, -e3], dtype=float)
    derivative = np.polyder(coefficients)
    roots = np.roots(coefficients).astype(complex)
    for index, root in enumerate(roots):
        for _ in range(3):
            slope = np.polyval(derivative, root)
            if slope == 0:
                break
            root = root - np.polyval(coefficients, root) / slope
        roots[index] = root
    scale = float(np.linalg.norm(coefficients))
    worst = max(abs(np.polyval(coefficients, root)) for root in roots) / scale
    if not worst <= CHAR_POLY_TOL:
        raise ConvergenceError(
            'Невязка характеристического многочлена больше допустимой',
            residual=float(worst), coefficients=[float(v) for v in coefficients],
        )
    order = sorted(range(3), key=lambda k: (-abs(roots[k]), -roots[k].imag))
    return roots[order]


def multipliers(matrix):
    """Мультипликаторы матрицы 3x3 по убыванию модуля."""
    return multipliers_from_invariants(*(float(value) for value in symmetric_functions(matrix)))


def pair_invariants(e1, e2, roots):
    """
    След, произведение и дискриминант пары мультипликаторов, остающейся
    после исключения наименьшего по модулю (вещественного) мультипликатора.
    """
    smallest = float(roots[-1].real)
    trace = e1 - smallest
    product = e2 - smallest * trace
    return trace, product, trace ** 2 - 4.0 * product


def multiplier_condition_error(kind, roots):
    """
    Отклонение мультипликаторов от условия точки коразмерности 2.

    CP и GPD - один мультипликатор +1 или -1; R1 и R2 - два; LPPD - +1 и -1;
    R3 и R4 - пара на единичной окружности с аргументом 2π/3 или π/2.
    """
    roots = np.asarray(roots, dtype=complex)
    to_plus = np.sort(np.abs(roots - 1.0))
    to_minus = np.sort(np.abs(roots + 1.0))
    if kind == 'CP':
        return float(to_plus[0])
    if kind == 'GPD':
        return float(to_minus[0])
    if kind == 'R1':
        return float(to_plus[1])
    if kind == 'R2':
        return float(to_minus[1])
    if kind == 'LPPD':
        return float(max(to_plus[0], to_minus[0]))
    if kind in RESONANCE_ANGLES:
        upper = roots[int(np.argmax(roots.imag))]
        return float(max(abs(abs(upper) - 1.0), abs(cmath.phase(upper) - RESONANCE_ANGLES[kind])))
    raise ValueError(f'Неизвестный тип точки {kind}')


def critical_vectors(matrix, sigma):
    """
    Правый и левый собственные векторы для мультипликатора sigma:
    q нормирован (|q| = 1, q3 > 0), p нормирован условием <p, q> = 1.
    """
    shifted = matrix - sigma * IDENTITY
    q = np.append(np.linalg.solve(shifted[:2, :2], -shifted[:2, 2]), 1.0)
    q /= np.linalg.norm(q)
    transposed = shifted.T
    p = np.append(np.linalg.solve(transposed[:2, :2], -transposed[:2, 2]), 1.0)
    return q, p / (p @ q)


def fold_coefficient(model_map, x, matrix):
    """Квадратичный коэффициент нормальной формы складки: ½<p, B(q, q)>."""
    q, p = critical_vectors(matrix, 1.0)
    return 0.5 * p @ model_map.bilinear(x, q, q)


def flip_coefficient(model_map, x, matrix):
    """Кубический коэффициент нормальной формы удвоения."""
    q, p = critical_vectors(matrix, -1.0)
    bqq = model_map.bilinear(x, q, q)
    correction = np.linalg.solve(IDENTITY - matrix, bqq)
    return p @ model_map.trilinear(x, q, q, q) / 6.0 + 0.5 * p @ model_map.bilinear(x, q, correction)


@dataclass(frozen=True)
class FixedPoint3D:
    state: StateS
    mu: Mu
    multipliers: tuple
    residual_norm: float
    n: int
    theta: float
    scalar_x4: float = math.nan


@dataclass(frozen=True)
class Codim2Point3D:
    kind: str
    n: int
    u: tuple
    state: StateS
    mu: Mu
    multipliers: tuple
    residual_norm: float
    diagnostics: dict = field(default_factory=dict)


def _float_matrix(matrix):
    return np.array([[float(value) for value in row] for row in matrix])


class Map3DForm:
    """Масштабированная формулировка неподвижных точек G на ветви n."""

    def __init__(self, n, p):
        self.scalar = ThetaForm(n, p)
        self.n = self.scalar.n
        self.p = p
        self.S = self.scalar.S
        self._cache = (None, None)

    def log_x4(self, theta):
        return -self.p.beta * (2.0 * math.pi * self.n + theta)

    def x4(self, theta):
        return self.scalar.x_of(theta)

    def log_condition_scale(self, theta):
        """ln g, g = x4^(1-ν) при ν < 1 и g = 1 иначе."""
        return min(0.0, (1.0 - self.p.nu) * self.log_x4(theta))

    def condition_scale(self, theta):
        return math.exp(self.log_condition_scale(theta))

    def state(self, u):
        return np.array([u[0], u[1], self.x4(u[2])])

    def mu(self, u):
        return Mu(float(u[3]), self.S * float(u[4]))

    def model_map(self, u):
        return ModelMap3D(self.p, self.mu(u))

    def fixed_point_rows(self, u):
        x = self.state(u)
        rows = self.model_map(u).image(x) - x
        rows[2] /= self.S
        return rows

    def fixed_point_jacobian(self, u, matrix=None):
        """Якобиан строк неподвижной точки по (x1, x3, θ, μ1, m2), форма (3, 5)."""
        model_map = self.model_map(u)
        x = self.state(u)
        jacobian = model_map.jacobian(x) if matrix is None else matrix
        d_image, _ = model_map.mu1_derivatives(x)
        dx4 = -self.p.beta * x[2]
        columns = np.column_stack([
            jacobian[:, 0] - IDENTITY[:, 0],
            jacobian[:, 1] - IDENTITY[:, 1],
            (jacobian[:, 2] - IDENTITY[:, 2]) * dx4,
            d_image,
            [0.0, 0.0, self.S],
        ])
        columns[2] /= self.S
        return columns

    def jacobian_derivatives(self, u, matrix=None):
        """Матрица J и её производные по пяти неизвестным."""
        model_map = self.model_map(u)
        x = self.state(u)
        tensor = model_map.second(x)
        _, d_jacobian = model_map.mu1_derivatives(x)
        dx4 = -self.p.beta * x[2]
        return model_map.jacobian(x) if matrix is None else matrix, [
            tensor[:, :, 0], tensor[:, :, 1], tensor[:, :, 2] * dx4, d_jacobian, np.zeros((3, 3)),
        ]

    def condition_row(self, kind, u, matrix):
        value, _ = _condition(kind)
        if kind == 'NS3':
            return value(matrix)
        return self.condition_scale(u[2]) * value(matrix)

    def system_jacobian(self, kind, u, matrix=None):
        """Якобиан 4x5 определяющей системы; matrix подменяет J, посчитанную в double."""
        value, gradient = _condition(kind)
        matrix, derivatives = self.jacobian_derivatives(u, matrix)
        row = np.array(gradient(matrix, derivatives), dtype=float)
        if kind != 'NS3':
            scale = self.condition_scale(u[2])
            row *= scale
            if self.p.nu < 1.0:
                row[2] -= scale * (1.0 - self.p.nu) * self.p.beta * value(matrix)
        return np.vstack([self.fixed_point_jacobian(u, matrix), row])

    def precise_state(self, ctx, u):
        """G(x), J(x), S и g в контексте ctx по списку mpf (x1, x3, θ, μ1, m2)."""
        p = self.p
        x1, x3, theta, mu1, m2 = u
        beta, nu = ctx.mpf(p.beta), ctx.mpf(p.nu)
        log_x4 = -beta * (2 * ctx.pi * self.n + theta)
        x4 = ctx.exp(log_x4)
        kappa = nu + mu1 / beta
        # x4^z = x4^ν·exp(i(2πn + θ)) = x4^ν·exp(iθ)
        power_e = ctx.exp(nu * log_x4) * ctx.expj(theta)
        power_q = ctx.exp(kappa * log_x4)
        slope_e = ctx.mpc(nu, -1 / beta) * power_e / x4
        slope_q = kappa * power_q / x4
        rot1, rot2 = ctx.expj(p.phi1), ctx.expj(p.phi2)

        def linear(w):
            return [p.alpha1 * (rot1 * w).real, p.alpha3 * (rot2 * w).imag, p.C1 * w.imag]

        k = (p.alpha2, p.alpha4, p.C2)
        scale = ctx.exp(-2 * ctx.pi * beta * nu * self.n)
        offset = (1, 1, scale * m2)
        col_e, col_slope = linear(power_e), linear(slope_e)
        return {
            'x': (x1, x3, x4),
            'image': [offset[i] + x1 * col_e[i] + x3 * k[i] * power_q for i in range(3)],
            'J': [[col_e[i], k[i] * power_q, x1 * col_slope[i] + x3 * k[i] * slope_q] for i in range(3)],
            'S': scale,
            'g': ctx.exp(min(0, (1 - nu) * log_x4)),
        }

    def precise_rows(self, kind, state):
        """Невязки системы kind (None - только неподвижная точка) в расширенной точности."""
        image, x = state['image'], state['x']
        rows = [image[0] - x[0], image[1] - x[1], (image[2] - x[2]) / state['S']]
        if kind is None:
            return rows
        invariants = symmetric_functions(state['J'])
        if kind == 'NS3':
            rows.append(ns_test(*invariants))
        else:
            rows.append(state['g'] * characteristic_value(invariants, SIGMA[kind]))
        return rows

    def _polish(self, ctx, kind, u):
        u = np.asarray(u, dtype=float)
        start = self.precise_state(ctx, to_mp(ctx, u))
        matrix = _float_matrix(start['J'])
        name = f'{kind or "FP3"}[n={self.n}]'
        if kind is None:
            fixed = to_mp(ctx, u[3:])

            def residual(v):
                return self.precise_rows(None, self.precise_state(ctx, [*v, *fixed]))

            values, _ = polish(ctx, name, residual, u[:3], self.fixed_point_jacobian(u, matrix)[:, :3])
            return values + fixed

        def residual(v):
            return self.precise_rows(kind, self.precise_state(ctx, v))

        values, _ = polish(ctx, name, residual, u, self.system_jacobian(kind, u, matrix))
        return values

    def spectral(self, u, kind=None):
        """
        Спектральные величины в точке u, уточнённой в расширенной точности
        на условии kind (None - неподвижная точка при заданных μ1, m2).

        Кэшируется последняя точка.

        Raises:
            ConvergenceError: уточнение не сошлось
        """
        u = np.asarray(u, dtype=float)
        key = (kind, u.tobytes())
        if self._cache[0] == key:
            return self._cache[1]
        ctx = precise_context(working_digits(self.log_condition_scale(u[2])))
        values = self._polish(ctx, kind, u)
        state = self.precise_state(ctx, values)
        invariants = symmetric_functions(state['J'])
        e1, e2, e3 = (float(value) for value in invariants)
        roots = multipliers_from_invariants(e1, e2, e3)
        trace, product, discriminant = pair_invariants(e1, e2, roots)
        u_high, u_low = split(ctx, values)
        data = {
            'u': u_high, 'u_low': u_low, 'digits': ctx.dps,
            'model_map': self.model_map(u_high), 'x': self.state(u_high), 'J': _float_matrix(state['J']),
            'e': (e1, e2, e3),
            'det_JmI': float(characteristic_value(invariants, 1)),
            'det_JpI': float(characteristic_value(invariants, -1)),
            'ns': float(ns_test(*invariants)),
            'multipliers': roots,
            'pair_trace': trace, 'pair_product': product, 'discriminant': discriminant,
            'residual': float(max(abs(g - x) for g, x in zip(state['image'], state['x']))),
        }
        self._cache = (key, data)
        return data


def _condition(kind):
    """Функция условия (без множителя g) и её градиент по J и dJ."""
    if kind == 'NS3':
        def gradient(matrix, derivatives):
            e1, e2, e3 = symmetric_functions(matrix)
            adjoint = adjugate(matrix)
            result = []
            for d_matrix in derivatives:
                de1 = np.trace(d_matrix)
                de2 = e1 * de1 - np.trace(matrix @ d_matrix)
                de3 = np.trace(adjoint @ d_matrix)
                result.append(2.0 * e3 * de3 - de1 * e3 - e1 * de3 + de2)
            return result

        return ns_test_matrix, gradient

    sigma = SIGMA[kind]

    def value(matrix):
        return float(characteristic_value(symmetric_functions(matrix), sigma))

    def gradient(matrix, derivatives):
        adjoint = adjugate(matrix - sigma * IDENTITY)
        return [np.trace(adjoint @ d_matrix) for d_matrix in derivatives]

    return value, gradient


def _monitors(form, kind):
    def spectral(name):
        return lambda u: form.spectral(u, kind)[name]

    def invariant(index):
        return lambda u: form.spectral(u, kind)['e'][index]

    e1, e2 = invariant(0), invariant(1)
    monitors = {
        'mu2': lambda u: u[4],
        'det_JmI': spectral('det_JmI'),
        'det_JpI': spectral('det_JpI'),
        'ns': spectral('ns'),
    }
    if kind == 'LP3':
        monitors['r1'] = lambda u: 3.0 - 2.0 * e1(u) + e2(u)
        monitors['pair_product'] = lambda u: e2(u) + 1.0 - e1(u)
        monitors['fold_a'] = lambda u: fold_coefficient(
            form.spectral(u, kind)['model_map'], form.spectral(u, kind)['x'], form.spectral(u, kind)['J'],
        )
    elif kind == 'PD3':
        monitors['r2'] = lambda u: 3.0 + 2.0 * e1(u) + e2(u)
        monitors['pair_product'] = lambda u: e2(u) + 1.0 + e1(u)
        monitors['flip_c'] = lambda u: flip_coefficient(
            form.spectral(u, kind)['model_map'], form.spectral(u, kind)['x'], form.spectral(u, kind)['J'],
        )
    else:
        monitors['discriminant'] = spectral('discriminant')
        monitors['pair_trace'] = spectral('pair_trace')
        monitors['pair_modulus'] = lambda u: form.spectral(u, kind)['pair_product'] - 1.0
        monitors['r3'] = lambda u: form.spectral(u, kind)['pair_trace'] + 1.0
        monitors['r4'] = spectral('pair_trace')
    return monitors


def map_system(form, kind):
    """Определяющая система LP3, PD3 или NS3 (5 неизвестных, 4 уравнения)."""
    if kind not in ('LP3', 'PD3', 'NS3'):
        raise ValueError(f'Неизвестный тип кривой {kind}')

    def residual(u):
        matrix = form.model_map(u).jacobian(form.state(u))
        return np.append(form.fixed_point_rows(u), form.condition_row(kind, u, matrix))

    def jacobian(u):
        return form.system_jacobian(kind, u)

    return DefiningSystem(
        name=f'{kind}[n={form.n}]', dimension=5, residual=residual, jacobian=jacobian,
        monitors=_monitors(form, kind), labels=('x1', 'x3', 'theta', 'mu1', 'm2'),
    )


def _seed_from_scalar(form, theta, mu1, m2):
    """Начальное приближение: x1, x3 из первых двух компонент G в скалярной точке."""
    x4 = form.x4(theta)
    model_map = ModelMap3D(form.p, Mu(mu1, form.S * m2))
    x1, x3 = 1.0, 1.0
    for _ in range(2):
        x1, x3, _ = model_map.image(np.array([x1, x3, x4]))
    return np.array([x1, x3, theta, mu1, m2])


def codim2_point(form, kind, curve_kind, u, diagnostics=None):
    """Точка коразмерности 2 с мультипликаторами в уточнённой точке кривой curve_kind."""
    data = form.spectral(u, curve_kind)
    u = data['u']
    return Codim2Point3D(
        kind=kind, n=form.n, u=tuple(float(v) for v in u), state=StateS.from_array(data['x']),
        mu=form.mu(u), multipliers=tuple(data['multipliers']),
        residual_norm=data['residual'],
        diagnostics={**(diagnostics or {}), 'multiplier_error': multiplier_condition_error(kind, data['multipliers'])},
    )


def scalar_root_near(scalar, theta, mu1, m2, steps=13):
    """
    Ближайший к θ корень скалярного уравнения P0 = ξ при тех же μ1, m2.

    Отрезок поиска расширяется вдвое в обе стороны от 1e-3 до 4.1.

    Raises:
        NotFoundError: смены знака нет
    """
    def residual(t):
        return scalar.derivatives(t, mu1, m2, 0)[0] - scalar.xi(t)

    center = residual(theta)
    if center == 0.0:
        return theta
    previous = {-1: (theta, center), 1: (theta, center)}
    for k in range(steps):
        offset = 1e-3 * 2.0 ** k
        for side in (-1, 1):
            t_prev, r_prev = previous[side]
            t = theta + side * offset
            r = residual(t)
            if r_prev * r <= 0.0:
                return brentq(residual, min(t_prev, t), max(t_prev, t), xtol=1e-15)
            previous[side] = (t, r)
    raise NotFoundError('Скалярная неподвижная точка рядом не найдена', theta=theta, mu1=mu1)


def curve_fixed_points(curve, p):
    """
    FixedPoint3D в каждой точке кривой LP3, PD3 или NS3.

    Мультипликаторы и невязка берутся в уточнённой точке; scalar_x4 -
    ближайшая неподвижная точка скалярного отображения при тех же μ.
    """
    kind = curve.metadata['kind']
    form = Map3DForm(curve.metadata['n'], p)
    points = []
    for u in curve.unknowns():
        data = form.spectral(u, kind)
        u = data['u']
        theta_scalar = scalar_root_near(form.scalar, u[2], u[3], u[4])
        points.append(FixedPoint3D(
            state=StateS.from_array(data['x']), mu=form.mu(u), multipliers=tuple(data['multipliers']),
            residual_norm=data['residual'], n=form.n, theta=float(u[2]), scalar_x4=form.x4(theta_scalar),
        ))
    return points


def trace_map_curve(kind, n, p, step_ctrl=None, theta_half_width=2.0, mu1_max=0.1,
                    max_points=6000, tol=1e-10):
    """
    Кривая LP3 или PD3 рога n, начатая из соответствующей скалярной кривой.

    Returns:
        Curve с metadata {'kind', 'n'}
    """
    if kind not in ('LP3', 'PD3'):
        raise ValueError(f'trace_map_curve строит только LP3 и PD3, получено {kind}')
    form = Map3DForm(n, p)
    theta_c = DerivedConstants.from_params(p).cusp_theta
    system = map_system(form, kind)
    box = DomainBox(
        (-math.inf, -math.inf, theta_c - theta_half_width, -mu1_max, -math.inf),
        (math.inf, math.inf, theta_c + theta_half_width, mu1_max, math.inf),
    )

    mu1_seed, seeds = horn_seeds(n, p)
    scalar_system = lp_system(form.scalar) if kind == 'LP3' else pd_system(form.scalar)
    theta, mu1, m2 = seed_on_curve(scalar_system, form.scalar, seeds[1], mu1_seed, tol)
    u0 = _seed_from_scalar(form, theta, mu1, m2)
    try:
        u_seed = newton_solve(pin_unknown(system, 3, mu1_seed), u0, tol).u
    except ConvergenceError as exc:
        raise ConvergenceError(
            f'Начальная точка {kind} не найдена', n=n, seed=[float(v) for v in u0], reason=exc.message,
        ) from exc

    step_ctrl = step_ctrl or MAP3D_STEP_CONTROL
    tangent = curve_tangent(system, u_seed)
    forward = continue_curve(system, u_seed, 1, step_ctrl, box, max_points, tol, tangent0=tangent)
    backward = continue_curve(system, u_seed, -1, step_ctrl, box, max_points, tol, tangent0=tangent)
    curve = join_curves(backward, forward, {'kind': kind, 'n': n, 'branch': 0})
    logger.info('%s n=%d: %d точек (%s / %s)', kind, n, len(curve), curve.metadata['termination_start'],
                curve.termination)
    return curve


def trace_lp3(n, p, **options):
    return trace_map_curve('LP3', n, p, **options)


def trace_pd3(n, p, **options):
    return trace_map_curve('PD3', n, p, **options)


CODIM2_RULES = {
    'LP3': (('CP', 'fold_a'), ('R1', 'r1'), ('LPPD', 'det_JpI')),
    'PD3': (('GPD', 'flip_c'), ('R2', 'r2'), ('LPPD', 'det_JmI')),
    'NS3': (('R3', 'r3'), ('R4', 'r4')),
}


def _verified(point, curve_kind):
    error = point.diagnostics['multiplier_error']
    if error > UNIT_MODULUS_TOL:
        logger.warning(
            '%s на %s n=%d отброшена: мультипликаторы %s не удовлетворяют условию (%.3e)',
            point.kind, curve_kind, point.n, np.round(point.multipliers, 8), error,
        )
        return False
    return True


def detect_codim2_3d(curve, p, tol=1e-10):
    """
    Точки коразмерности 2 вдоль кривой LP3, PD3 или NS3.

    Смена знака монитора принимается, только если уточнённое значение
    близко к нулю (у полюса коэффициента нормальной формы оно велико),
    а мультипликаторы в уточнённой точке удовлетворяют условию точки
    с допуском 1e-6.

    Returns:
        list[Codim2Point3D] в порядке следования вдоль кривой
    """
    kind = curve.metadata['kind']
    form = Map3DForm(curve.metadata['n'], p)
    found = []
    for label, monitor in CODIM2_RULES[kind]:
        for i in curve.sign_changes(monitor):
            try:
                refined = refine_sign_change(curve, monitor, i, tol)
                point = codim2_point(form, label, kind, curve.system.to_unknowns(refined.u), refined.monitors)
            except NotFoundError as exc:
                logger.debug('%s на %s: смена знака в точке %d без нуля (%s)', label, kind, i, exc)
                continue
            except ConvergenceError as exc:
                logger.warning('%s на %s: уточнение не удалось (%s)', label, kind, exc)
                continue
            if not _verified(point, kind):
                continue
            found.append((i, point))
            logger.info('%s n=%d: θ=%.6f μ1=%.6e', label, form.n, point.u[2], point.mu.mu1)
    found.sort(key=lambda item: (item[0], item[1].u[2]))
    return [point for _, point in found]


@dataclass
class NSResult:
    curve: object
    endpoints: list
    resonances: list
    neutral_saddle: object = None
    modulus_violations: int = 0


def trace_ns3(seed, p, step_ctrl=None, max_points=400, tol=1e-10):
    """
    Кривая Неймарка-Сакера из точки R1 или R2.

    Кривая условия NS3 продолжается в обе стороны в переменных,
    растянутых на ξ точки старта. Половина, на которой пара мультипликаторов
    комплексная (дискриминант < 0), - кривая NS; другая половина
    (вещественные взаимно обратные мультипликаторы, нейтральное седло)
    возвращается отдельно.

    Returns:
        NSResult

    Raises:
        NotFoundError: ни одна половина не даёт комплексной пары
    """
    form = Map3DForm(seed.n, p)
    u_seed = np.asarray(seed.u, dtype=float)
    scale = form.scalar.xi(u_seed[2])
    system = rescale_system(map_system(form, 'NS3'), u_seed, scale)

    v0 = np.zeros(5)
    tangent = curve_tangent(system, v0)
    corrected = correct_point(system, v0, tangent, tol, 15)
    if corrected is None:
        raise ConvergenceError('Точка старта не лежит на кривой NS', n=seed.n, kind=seed.kind)
    v0 = corrected[0]
    tangent = curve_tangent(system, v0, tangent)

    step_ctrl = step_ctrl or StepControl(h0=1e-2, h_min=1e-9, h_max=0.1, theta_max_deg=20.0)
    ns_half, saddle_half = None, None
    for direction in (1, -1):
        half = continue_curve(
            system, v0, direction, step_ctrl, None, max_points, tol,
            tangent0=tangent, stop_monitors=('discriminant',),
        )
        half.metadata.update({'kind': 'NS3', 'n': seed.n, 'branch': 0})
        if len(half) < 2:
            continue
        if half.points[1].monitors['discriminant'] < 0.0 and ns_half is None:
            ns_half = half
        else:
            saddle_half = half
    if ns_half is None:
        raise NotFoundError('Комплексная пара на единичной окружности не найдена', n=seed.n, kind=seed.kind)

    endpoints = [seed]
    if ns_half.termination == 'sign_change:discriminant':
        end = refine_sign_change(ns_half, 'discriminant', len(ns_half) - 2, tol)
        ns_half.points[-1] = end
        kind = 'R1' if end.monitors['pair_trace'] > 0.0 else 'R2'
        try:
            point = codim2_point(form, kind, 'NS3', system.to_unknowns(end.u), end.monitors)
        except ConvergenceError as exc:
            logger.warning('NS n=%d: конец %s не уточнён (%s)', seed.n, kind, exc)
        else:
            if _verified(point, 'NS3'):
                endpoints.append(point)
    else:
        logger.warning('NS n=%d: второй конец не найден (%s)', seed.n, ns_half.termination)

    violations = int(np.sum(np.abs(ns_half.monitor('pair_modulus')) > UNIT_MODULUS_TOL))
    if violations:
        logger.warning('NS n=%d: %d точек вне единичной окружности', seed.n, violations)
    resonances = detect_codim2_3d(ns_half, p, tol)
    logger.info('NS n=%d: %d точек, резонансы %s', seed.n, len(ns_half), [r.kind for r in resonances])
    return NSResult(ns_half, endpoints, resonances, saddle_half, violations)


def find_fixed_point_3d(mu, p, n, root_index=0, samples=2000, tol=1e-10):
    """
    Неподвижная точка G на ветви n (x4 = exp(-β(2πn + θ)), θ ∈ [0, 2π)).

    Корни скалярного уравнения F(x) = x ищутся сменой знака на сетке по θ,
    затем система из трёх уравнений решается методом Ньютона и точка
    уточняется в расширенной точности.

    Raises:
        NotFoundError: на ветви нет скалярного корня с таким номером
    """
    form = Map3DForm(n, p)
    scalar = form.scalar
    m2 = mu.mu2 / form.S

    def scalar_residual(theta):
        return scalar.derivatives(theta, mu.mu1, m2, 0)[0] - scalar.xi(theta)

    grid = np.linspace(0.0, 2.0 * math.pi, samples + 1)
    values = np.array([scalar_residual(theta) for theta in grid])
    roots = [
        brentq(scalar_residual, grid[i], grid[i + 1], xtol=1e-15)
        for i in range(samples) if values[i] * values[i + 1] < 0.0
    ]
    if root_index >= len(roots):
        raise NotFoundError('Скалярная неподвижная точка не найдена', n=n, roots=len(roots), root_index=root_index)
    theta0 = roots[root_index]

    def residual(v):
        return form.fixed_point_rows([v[0], v[1], v[2], mu.mu1, m2])

    def jacobian(v):
        return form.fixed_point_jacobian([v[0], v[1], v[2], mu.mu1, m2])[:, :3]

    system = DefiningSystem(name=f'FP3[n={n}]', dimension=3, residual=residual, jacobian=jacobian)
    start = _seed_from_scalar(form, theta0, mu.mu1, m2)[:3]
    result = newton_solve(system, start, tol)
    data = form.spectral(np.array([*result.u, mu.mu1, m2]))
    return FixedPoint3D(
        state=StateS.from_array(data['x']), mu=mu,
        multipliers=tuple(data['multipliers']), residual_norm=data['residual'],
        n=form.n, theta=float(data['u'][2]), scalar_x4=form.x4(theta0),
    )


def classify_horn_3d(n, p, pd_curve=None, window=math.pi / 2, tol=1e-10):
    """
    Тип рога для трёхмерного отображения по кривой PD3: 'spring' при двух
    и более GPD в окне вокруг сборки или при самопересечении, иначе 'saddle'.
    """
    if pd_curve is None:
        pd_curve = trace_pd3(n, p, tol=tol)
    theta_c = DerivedConstants.from_params(p).cusp_theta
    unknowns = pd_curve.unknowns()
    inside = np.abs(unknowns[:, 2] - theta_c) < window
    if np.count_nonzero(inside) < 3:
        raise InconclusiveError('Кривая PD3 не покрывает окрестность сборки', n=n)
    gpd = [point for point in detect_codim2_3d(pd_curve, p, tol)
           if point.kind == 'GPD' and abs(point.u[2] - theta_c) < window]
    intersects = polyline_self_intersects(unknowns[inside][:, 3:5])
    verdict = 'spring' if len(gpd) >= 2 or intersects else 'saddle'
    logger.info('Рог 3D n=%d: %s (GPD=%d)', n, verdict, len(gpd))
    return verdict, gpd
