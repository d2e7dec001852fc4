# Standard library imports
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

# Third-party imports
import numpy as np
from scipy.optimize import brentq

# Local imports
from ..exceptions import ConvergenceError, DomainError, NotFoundError, SingularJacobianError

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
FD_JACOBIAN_STEP = 1e-7
ZERO_ATOL = 1e-10
ZERO_RTOL = 1e-6


def fd_jacobian(residual, u, rel_step=FD_JACOBIAN_STEP):
    """
    Якобиан центральными разностями с относительным шагом.

    Args:
        residual: callable - функция невязки R^n -> R^m
        u: np.ndarray - точка
        rel_step: float - относительный шаг

    Returns:
        np.ndarray формы (m, n)
    """
    u = np.asarray(u, dtype=float)
    columns = []
    for j in range(u.size):
        h = rel_step * max(1.0, abs(u[j]))
        forward = u.copy()
        backward = u.copy()
        forward[j] += h
        backward[j] -= h
        columns.append((np.asarray(residual(forward)) - np.asarray(residual(backward))) / (2.0 * h))
    return np.column_stack(columns)


def _identity(u):
    return u


@dataclass
class DefiningSystem:
    """
    Определяющая система для метода Ньютона и продолжения.

    residual возвращает dimension-1 (кривая) или dimension (изолированная точка)
    невязок; jacobian может отсутствовать, тогда используются разности.
    to_unknowns переводит рабочие переменные в исходные
    (для перемасштабированных систем).
    """

    name: str
    dimension: int
    residual: Callable
    jacobian: Callable = None
    monitors: dict = field(default_factory=dict)
    labels: tuple = ()
    to_unknowns: Callable = _identity

    def evaluate(self, u):
        return np.asarray(self.residual(np.asarray(u, dtype=float)), dtype=float)

    def evaluate_jacobian(self, u):
        u = np.asarray(u, dtype=float)
        if self.jacobian is None:
            matrix = fd_jacobian(self.residual, u)
        else:
            matrix = np.asarray(self.jacobian(u), dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] != self.dimension:
            raise ValueError(f'Якобиан системы {self.name} имеет форму {matrix.shape}')
        return matrix

    def evaluate_monitors(self, u):
        return {name: float(monitor(u)) for name, monitor in self.monitors.items()}


def pin_unknown(system, index, value):
    """Добавляет к системе уравнение u[index] = value (делает систему квадратной)."""
    def residual(u):
        return np.append(system.evaluate(u), u[index] - value)

    def jacobian(u):
        row = np.zeros(system.dimension)
        row[index] = 1.0
        return np.vstack([system.evaluate_jacobian(u), row])

    return DefiningSystem(
        name=f'{system.name}|pin{index}',
        dimension=system.dimension,
        residual=residual,
        jacobian=jacobian,
        monitors=system.monitors,
        labels=system.labels,
        to_unknowns=system.to_unknowns,
    )


def rescale_system(system, origin, scale):
    """
    Система в переменных v, где u = origin + scale * v.

    Нужна, когда кривая занимает узкую полосу в исходных переменных
    и шаг продолжения в них был бы слишком грубым.
    """
    origin = np.asarray(origin, dtype=float)
    scale = np.broadcast_to(np.asarray(scale, dtype=float), origin.shape).copy()

    def to_unknowns(v):
        return origin + scale * np.asarray(v, dtype=float)

    def residual(v):
        return system.evaluate(to_unknowns(v))

    def jacobian(v):
        return system.evaluate_jacobian(to_unknowns(v)) * scale

    monitors = {
        name: (lambda v, monitor=monitor: monitor(to_unknowns(v)))
        for name, monitor in system.monitors.items()
    }
    return DefiningSystem(
        name=f'{system.name}|scaled',
        dimension=system.dimension,
        residual=residual,
        jacobian=jacobian,
        monitors=monitors,
        labels=system.labels,
        to_unknowns=to_unknowns,
    )


def _equilibrated_solve(matrix, rhs):
    """Решает систему после нормировки строк; возвращает решение и число обусловленности."""
    row_norms = np.linalg.norm(matrix, axis=1)
    row_norms[row_norms == 0.0] = 1.0
    scaled = matrix / row_norms[:, None]
    condition = np.linalg.cond(scaled)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        return None, condition
    return np.linalg.solve(scaled, rhs / row_norms), condition


@dataclass(frozen=True)
class NewtonResult:
    u: np.ndarray
    residual_norm: float
    iterations: int
    quadratic: bool


def _looks_quadratic(history, tol):
    if len(history) < 3:
        return True
    last, previous = history[-1], history[-2]
    return last <= max(previous ** 1.5, tol)


def newton_solve(system, u0, tol=1e-10, max_iter=25):
    """
    Метод Ньютона для квадратной системы.

    Args:
        system: DefiningSystem - квадратная система
        u0: начальное приближение
        tol: float - порог для max-нормы невязки
        max_iter: int - максимальное число итераций

    Returns:
        NewtonResult

    Raises:
        SingularJacobianError: обусловленность якобиана > 1e12
        ConvergenceError: превышено число итераций или невязка не конечна
    """
    u = np.array(u0, dtype=float)
    history = []
    norm = math.inf
    for iteration in range(max_iter + 1):
        residual = system.evaluate(u)
        norm = float(np.max(np.abs(residual))) if residual.size else 0.0
        if not math.isfinite(norm):
            raise ConvergenceError('Невязка не конечна', system=system.name, iteration=iteration)
        history.append(norm)
        logger.debug('newton %s: iter=%d residual=%.3e', system.name, iteration, norm)
        if norm < tol:
            return NewtonResult(u, norm, iteration, _looks_quadratic(history, tol))
        if iteration == max_iter:
            break
        matrix = system.evaluate_jacobian(u)
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f'Система {system.name} не квадратная: {matrix.shape}')
        step, condition = _equilibrated_solve(matrix, residual)
        if step is None:
            raise SingularJacobianError(
                'Якобиан вырожден', system=system.name, condition=float(condition), iteration=iteration,
            )
        u = u - step
    raise ConvergenceError(
        'Метод Ньютона не сошёлся', system=system.name, iterations=max_iter,
        residual=norm, u0=[float(v) for v in np.asarray(u0, dtype=float)],
    )


@dataclass(frozen=True)
class StepControl:
    h0: float = 1e-3
    h_min: float = 1e-9
    h_max: float = 0.05
    theta_max_deg: float = 30.0
    grow: float = 1.3
    grow_after: int = 3
    corrector_max_iter: int = 8

    @classmethod
    def from_dict(cls, data):
        known = {name for name in cls.__dataclass_fields__}
        return cls(**{key: value for key, value in data.items() if key in known})


@dataclass(frozen=True)
class DomainBox:
    lower: tuple
    upper: tuple

    def contains(self, u):
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= np.asarray(self.lower)) and np.all(u <= np.asarray(self.upper)))


@dataclass(frozen=True)
class CurvePoint:
    u: np.ndarray
    tangent: np.ndarray
    step: float
    residual_norm: float
    monitors: dict


@dataclass
class Curve:
    """Упорядоченный набор точек продолжения с метаданными ветви."""

    system: DefiningSystem = field(repr=False, compare=False)
    points: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    termination: str = ''

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def unknowns(self):
        return np.array([self.system.to_unknowns(point.u) for point in self.points])

    def monitor(self, name):
        return np.array([point.monitors.get(name, math.nan) for point in self.points])

    def sign_changes(self, name):
        values = self.monitor(name)
        return [
            i for i in range(len(values) - 1)
            if np.isfinite(values[i]) and np.isfinite(values[i + 1]) and values[i] * values[i + 1] < 0.0
        ]

    def reversed(self):
        points = [
            CurvePoint(point.u, -point.tangent, point.step, point.residual_norm, point.monitors)
            for point in reversed(self.points)
        ]
        return Curve(self.system, points, dict(self.metadata), self.termination)


def join_curves(backward, forward, metadata=None):
    """Склеивает две половины, продолженные из общей точки в разные стороны."""
    points = backward.reversed().points + forward.points[1:]
    merged = dict(backward.metadata)
    merged.update(forward.metadata)
    merged.update(metadata or {})
    merged['termination_start'] = backward.termination
    return Curve(forward.system, points, merged, forward.termination)


def curve_tangent(system, u, previous=None):
    """
    Единичный касательный вектор к кривой решений.

    Без предыдущего касательного берётся последний правый сингулярный вектор
    (знак выбирается так, чтобы наибольшая компонента была положительной).
    """
    matrix = system.evaluate_jacobian(u)
    if previous is None:
        _, _, vt = np.linalg.svd(matrix)
        tangent = vt[-1]
        tangent = tangent * math.copysign(1.0, tangent[np.argmax(np.abs(tangent))])
    else:
        bordered = np.vstack([matrix, previous])
        rhs = np.zeros(bordered.shape[0])
        rhs[-1] = 1.0
        tangent, _ = _equilibrated_solve(bordered, rhs)
        if tangent is None:
            tangent = np.linalg.lstsq(bordered, rhs, rcond=None)[0]
    return tangent / np.linalg.norm(tangent)


def correct_point(system, u_pred, normal, tol, max_iter=8):
    """Корректор: Ньютон на расширенной системе с условием на гиперплоскости через u_pred."""
    u = np.array(u_pred, dtype=float)
    for _ in range(max_iter + 1):
        residual = system.evaluate(u)
        norm = float(np.max(np.abs(residual)))
        if not math.isfinite(norm):
            return None
        if norm < tol:
            return u, norm
        bordered = np.vstack([system.evaluate_jacobian(u), normal])
        rhs = np.append(residual, normal @ (u - u_pred))
        step, _ = _equilibrated_solve(bordered, rhs)
        if step is None:
            return None
        u = u - step
    return None


def continue_curve(system, u0, direction=1, step_ctrl=None, domain_box=None, max_points=500,
                   tol=1e-10, tangent0=None, stop_monitors=(), close_loop=True):
    """
    Продолжение по псевдодлине дуги (предиктор по касательной, корректор Ньютона).

    Шаг уменьшается вдвое при неудаче корректора или превышении угла между
    касательными и растёт в grow раз после grow_after успешных шагов.

    Args:
        system: DefiningSystem с dimension-1 невязками
        u0: точка на кривой (невязка < tol)
        direction: +1 или -1 - направление относительно начальной касательной
        step_ctrl: StepControl
        domain_box: DomainBox или None
        max_points: int - предельное число точек
        tol: float - порог невязки
        tangent0: начальная касательная или None
        stop_monitors: имена мониторов, смена знака которых завершает кривую
        close_loop: bool - распознавать возвращение в начальную точку

    Returns:
        Curve с причиной остановки в termination
    """
    step_ctrl = step_ctrl or StepControl()
    u0 = np.array(u0, dtype=float)
    seed_norm = float(np.max(np.abs(system.evaluate(u0))))
    if not seed_norm < tol:
        raise ConvergenceError('Начальная точка не решает систему', system=system.name, residual=seed_norm)
    if domain_box is not None and not domain_box.contains(u0):
        raise DomainError('Начальная точка вне области продолжения', system=system.name)

    if tangent0 is None:
        tangent = curve_tangent(system, u0)
    else:
        tangent = np.asarray(tangent0, dtype=float) / np.linalg.norm(tangent0)
    tangent = direction * tangent

    points = [CurvePoint(u0, tangent, 0.0, seed_norm, system.evaluate_monitors(u0))]
    cos_max = math.cos(math.radians(step_ctrl.theta_max_deg))
    h = step_ctrl.h0
    successes = 0
    termination = 'max_points'

    while len(points) < max_points:
        current = points[-1]
        u_pred = current.u + h * current.tangent
        corrected = correct_point(system, u_pred, current.tangent, tol, step_ctrl.corrector_max_iter)
        new_tangent = None
        if corrected is not None:
            new_tangent = curve_tangent(system, corrected[0], current.tangent)
            if new_tangent @ current.tangent <= cos_max:
                new_tangent = None
        if new_tangent is None:
            h *= 0.5
            successes = 0
            if h < step_ctrl.h_min:
                if len(points) == 1:
                    raise ConvergenceError(
                        'Корректор не сходится даже на минимальном шаге',
                        system=system.name, u0=[float(v) for v in u0], h_min=step_ctrl.h_min,
                    )
                termination = 'step_underflow'
                break
            continue

        u_new, norm = corrected
        if domain_box is not None and not domain_box.contains(u_new):
            termination = 'domain'
            break
        point = CurvePoint(u_new, new_tangent, h, norm, system.evaluate_monitors(u_new))
        points.append(point)

        # начальная точка может лежать на нуле монитора
        crossed = [
            name for name in stop_monitors
            if len(points) > 2 and current.monitors[name] * point.monitors[name] < 0.0
        ]
        if crossed:
            termination = f'sign_change:{crossed[0]}'
            break

        if close_loop and len(points) > 3:
            axis = points[0].tangent
            before = axis @ (current.u - u0)
            after = axis @ (u_new - u0)
            if before < 0.0 <= after and np.linalg.norm(u_new - u0) < 2.0 * h:
                closing = correct_point(system, u0, axis, tol, step_ctrl.corrector_max_iter)
                if closing is not None:
                    points.append(CurvePoint(closing[0], axis, h, closing[1], system.evaluate_monitors(closing[0])))
                termination = 'closed'
                break

        successes += 1
        if successes >= step_ctrl.grow_after:
            h = min(h * step_ctrl.grow, step_ctrl.h_max)
            successes = 0

    logger.debug('curve %s: %d points, termination=%s', system.name, len(points), termination)
    return Curve(system, points, {}, termination)


def refine_sign_change(curve, monitor_name, i, tol=1e-10, xtol=1e-13, zero_rtol=ZERO_RTOL):
    """
    Уточняет нуль монитора между точками i и i+1 кривой.

    Параметр s ∈ [0, 1] задаёт точку на секущей; при каждом s точка
    возвращается на кривую Ньютоном в гиперплоскости, ортогональной секущей,
    а нуль монитора по s ищется методом Брента. Найденная точка считается
    нулём, если |монитор| не больше max(1e-10, zero_rtol·max(|концы|)).

    Returns:
        CurvePoint в найденном нуле

    Raises:
        NotFoundError: монитор не меняет знак на отрезке или меняет его
            скачком (полюс, разрыв)
    """
    start, end = curve.points[i], curve.points[i + 1]
    value_start = start.monitors[monitor_name]
    value_end = end.monitors[monitor_name]
    if value_start == 0.0:
        return start
    if value_end == 0.0:
        return end
    if not value_start * value_end < 0.0:
        raise NotFoundError(
            f'Монитор {monitor_name} не меняет знак между точками {i} и {i + 1}',
            start=value_start, end=value_end,
        )

    system = curve.system
    secant = end.u - start.u
    length = float(np.linalg.norm(secant))
    normal = secant / length
    monitor = system.monitors[monitor_name]

    def project(s):
        corrected = correct_point(system, start.u + s * secant, normal, tol, 15)
        if corrected is None:
            raise ConvergenceError('Не удалось вернуть точку на кривую', monitor=monitor_name, s=s)
        return corrected

    def value(s):
        if s == 0.0:
            return value_start
        if s == 1.0:
            return value_end
        return monitor(project(s)[0])

    s_root = brentq(value, 0.0, 1.0, xtol=xtol, maxiter=200)
    u, norm = project(s_root)
    monitors = system.evaluate_monitors(u)
    bound = max(ZERO_ATOL, zero_rtol * max(abs(value_start), abs(value_end)))
    if not abs(monitors[monitor_name]) <= bound:
        raise NotFoundError(
            f'Монитор {monitor_name} меняет знак без нуля между точками {i} и {i + 1}',
            value=monitors[monitor_name], bound=bound,
        )
    tangent = curve_tangent(system, u, start.tangent)
    return CurvePoint(u, tangent, s_root * length, norm, monitors)
