"""
Вторичные гомоклинические траектории: условие H(μ) = F(μ2; μ) = 0,
"параболы" H = 0 с номером m и их точки поворота.

На параболе m удобно параметризовать μ2 = exp(-β(2πm + θ)); тогда
H / μ2^ν = exp(-β(1-ν)t) + C1 sin θ + C2 exp(-μ1 t), t = 2πm + θ.
"""

# Standard library imports
import logging
import math
from dataclasses import dataclass

# Third-party imports
import numpy as np

# Local imports
from ..exceptions import ConvergenceError, DomainError, NotFoundError
from .asymptotics import parabola_theta_seeds, turning_asymptotic
from .continuation import (
    DefiningSystem, DomainBox, continue_curve, curve_tangent, join_curves,
    newton_solve, pin_unknown, refine_sign_change,
)
from .model_maps import Mu, scalar_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SecHomPoint:
    m: int
    theta: float
    mu: Mu
    residual: float
    label: str = ''


def h_eval(mu, p, order=1):
    """
    H(μ) и (при order=1) частные производные по μ1 и μ2.

    Returns:
        np.ndarray: [H] или [H, ∂H/∂μ1, ∂H/∂μ2]
    """
    if not mu.mu2 > 0:
        raise DomainError('Условие вторичной гомоклиники требует μ2 > 0', mu2=mu.mu2)
    if order not in (0, 1):
        raise ValueError(f'order должен быть 0 или 1, получено {order}')
    values = scalar_map(mu.mu2, mu, p, order)
    if order == 0:
        return values[:1]
    log_x = math.log(mu.mu2)
    d_mu1 = p.C2 * math.exp(p.kappa(mu.mu1) * log_x) * log_x / p.beta
    return np.array([values[0], d_mu1, values[1] + 1.0])


class ParabolaForm:
    """Масштабированное условие H = 0 на параболе m в переменных (θ, μ1)."""

    def __init__(self, m, p):
        if int(m) != m or m < 1:
            raise DomainError('Номер параболы должен быть целым >= 1', m=m)
        self.m = int(m)
        self.p = p

    def t(self, theta):
        return 2.0 * math.pi * self.m + theta

    def mu2_of(self, theta):
        return math.exp(-self.p.beta * self.t(theta))

    def residual(self, theta, mu1):
        p, t = self.p, self.t(theta)
        return math.exp(-p.beta * (1.0 - p.nu) * t) + p.C1 * math.sin(theta) + p.C2 * math.exp(-mu1 * t)

    def gradient(self, theta, mu1):
        p, t = self.p, self.t(theta)
        power = p.C2 * math.exp(-mu1 * t)
        return np.array([
            -p.beta * (1.0 - p.nu) * math.exp(-p.beta * (1.0 - p.nu) * t) + p.C1 * math.cos(theta) - mu1 * power,
            -t * power,
        ])

    def point(self, u, label=''):
        theta, mu1 = float(u[0]), float(u[1])
        mu = Mu(mu1, self.mu2_of(theta))
        return SecHomPoint(self.m, theta, mu, float(h_eval(mu, self.p, 0)[0]), label)


def parabola_system(form):
    def residual(u):
        return np.array([form.residual(u[0], u[1])])

    def jacobian(u):
        return form.gradient(u[0], u[1]).reshape(1, 2)

    return DefiningSystem(
        name=f'SECHOM[m={form.m}]', dimension=2, residual=residual, jacobian=jacobian,
        monitors={
            'h_theta': lambda u: form.gradient(u[0], u[1])[0],
            'mu1': lambda u: u[1],
        },
        labels=('theta', 'mu1'),
    )


def _turning_theta(p):
    return math.pi / 2 if p.C2 < 0 else 3 * math.pi / 2


def trace_parabola(m, p, step_ctrl=None, mu1_max=0.1, max_points=2000, tol=1e-10):
    """
    Две половины параболы m: от границы области до точки поворота.

    Начальные фазы берутся из главных членов при μ1, немного большем
    асимптотического μ1 точки поворота.

    Returns:
        tuple: (Curve половины 1, Curve половины 2)

    Raises:
        NotFoundError: ни одна половина не построена
    """
    form = ParabolaForm(m, p)
    system = parabola_system(form)
    theta_turn = _turning_theta(p)
    box = DomainBox((theta_turn - math.pi / 2, -mu1_max), (theta_turn + math.pi / 2, mu1_max))
    mu1_seed = turning_asymptotic(m, p).mu1 + math.log(1.5) / (2.0 * math.pi * m)
    try:
        seeds = parabola_theta_seeds(m, mu1_seed, p)
    except DomainError as exc:
        raise NotFoundError('Нет вещественной начальной фазы параболы', m=m, mu1=mu1_seed) from exc

    halves = []
    for branch, theta_seed in enumerate(seeds, start=1):
        try:
            u_seed = newton_solve(pin_unknown(system, 1, mu1_seed), [theta_seed, mu1_seed], tol).u
        except ConvergenceError as exc:
            logger.warning('Половина %d параболы m=%d не построена: %s', branch, m, exc)
            continue
        tangent = curve_tangent(system, u_seed)
        if tangent[0] * (theta_turn - u_seed[0]) < 0.0:
            tangent = -tangent
        inward = continue_curve(
            system, u_seed, 1, step_ctrl, box, max_points, tol, tangent0=tangent, stop_monitors=('h_theta',),
        )
        outward = continue_curve(system, u_seed, -1, step_ctrl, box, max_points, tol, tangent0=tangent)
        if inward.termination == 'sign_change:h_theta':
            inward.points[-1] = refine_sign_change(inward, 'h_theta', len(inward) - 2, tol)
        halves.append(join_curves(outward, inward, {'kind': 'SECHOM', 'm': m, 'branch': branch}))
    if not halves:
        raise NotFoundError('Парабола не построена', m=m)
    logger.info('Парабола m=%d: %s точек', m, '+'.join(str(len(half)) for half in halves))
    return tuple(halves)


def curve_points(form, curve):
    """SecHomPoint для каждой точки кривой параболы."""
    return [form.point(u) for u in curve.unknowns()]


def find_turning(m, p, tol=1e-10, max_iter=25):
    """
    Точка поворота параболы m: H = 0 и ∂H/∂μ2 = 0.

    Неизвестные (μ1, w), μ2 = μ2_seed·w; уравнения приведены к порядку единицы:
    H/μ2^ν и (F_x + 1)·μ2^(1-ν).

    Raises:
        ConvergenceError: с асимптотическим начальным приближением в details
    """
    seed = turning_asymptotic(m, p)
    nu = p.nu

    def residual(u):
        mu2 = seed.mu2 * u[1]
        if not mu2 > 0:
            return np.array([math.inf, math.inf])
        values = scalar_map(mu2, Mu(u[0], mu2), p, 1)
        return np.array([values[0] / mu2 ** nu, (values[1] + 1.0) * mu2 ** (1.0 - nu)])

    system = DefiningSystem(name=f'TURN[m={m}]', dimension=2, residual=residual, labels=('mu1', 'w'))
    try:
        result = newton_solve(system, [seed.mu1, 1.0], tol, max_iter)
    except ConvergenceError as exc:
        raise ConvergenceError(
            'Точка поворота не найдена', m=m, seed_mu1=seed.mu1, seed_mu2=seed.mu2, reason=exc.message,
        ) from exc
    mu = Mu(float(result.u[0]), seed.mu2 * float(result.u[1]))
    theta = -math.log(mu.mu2) / p.beta - 2.0 * math.pi * m
    return SecHomPoint(m, theta, mu, float(h_eval(mu, p, 0)[0]), 'TURN')
