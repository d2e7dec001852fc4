"""
Возмущённая система Лоренца-Стенфло:

    x' = σ(y - x) + s·u
    y' = r·x - x·z - y + ε1·z
    z' = x·y - b·z
    u' = -x - σ·u + ε2·y

Тривиальное равновесие существует при всех параметрах; его спектр равен
{-b} и спектру блока 3x3 по (x, y, u). 3DL-переход - равенство
вещественной части комплексной пары блока и -b.
"""

# Standard library imports
import dataclasses
import logging
import math
from dataclasses import dataclass, field

# Third-party imports
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

# Local imports
from ..exceptions import ConvergenceError, DomainError, IntegrationError
from .map3d_bifurcations import multipliers
from .parallel import ordered_map

logger = logging.getLogger(__name__)

CHAR_POLY_TOL = 1e-8
COMPLEX_RTOL = 1e-7
LOCUS_TOL = 1e-8


@dataclass(frozen=True)
class LSParams:
    sigma: float = 0.1
    r: float = 15.302531
    b: float = 1.9884
    s: float = 33.0
    eps1: float = 0.1
    eps2: float = 0.3

    def __post_init__(self):
        for name, value in dataclasses.asdict(self).items():
            if not math.isfinite(value):
                raise DomainError(f'Параметр {name} должен быть конечным числом', **{name: value})
        if self.b <= 0:
            raise DomainError('Требуется b > 0', b=self.b)

    def with_changes(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        names = {item.name for item in dataclasses.fields(cls)}
        return cls(**{key: float(value) for key, value in data.items() if key in names})


@dataclass(frozen=True)
class EigenData:
    """Спектр тривиального равновесия."""

    delta0: float
    omega0: float
    eps0: float
    real_stable: float
    nu0: float
    sigma0: float
    eigenvalues: tuple = field(default=())
    char_residual: float = 0.0
    has_unstable: bool = True

    @property
    def wild(self):
        return self.sigma0 > 0.0


def rhs(state, p):
    x, y, z, u = state
    return np.array([
        p.sigma * (y - x) + p.s * u,
        p.r * x - x * z - y + p.eps1 * z,
        x * y - p.b * z,
        -x - p.sigma * u + p.eps2 * y,
    ])


def jacobian(state, p):
    x, y, z, _ = state
    return np.array([
        [-p.sigma, p.sigma, 0.0, p.s],
        [p.r - z, -1.0, -x + p.eps1, 0.0],
        [y, x, -p.b, 0.0],
        [-1.0, p.eps2, 0.0, -p.sigma],
    ])


def block_matrix(p):
    """Блок якобиана в нуле по переменным (x, y, u)."""
    return np.array([
        [-p.sigma, p.sigma, p.s],
        [p.r, -1.0, 0.0],
        [-1.0, p.eps2, -p.sigma],
    ])


def is_complex(root):
    """Корень считается комплексным, если |Im| заметно больше ошибки округления."""
    return abs(root.imag) > COMPLEX_RTOL * max(1.0, abs(root))


def _complex_pair(p):
    """Комплексная пара блока или None, если все корни вещественные."""
    roots = multipliers(block_matrix(p))
    complex_roots = [root for root in roots if is_complex(root)]
    if not complex_roots:
        return None
    return max(complex_roots, key=lambda root: root.imag)


def equilibrium_eigenvalues(p):
    """
    Спектр равновесия в нуле: -b и корни кубического многочлена блока.

    Если простого вещественного положительного корня нет, возвращается
    EigenData с has_unstable=False; ε0 тогда - наибольшая вещественная
    часть спектра блока, а ν0 и σ0 не определены (NaN).

    Returns:
        EigenData
    """
    roots = multipliers(block_matrix(p))
    top = int(np.argmax(roots.real))
    unstable = roots[top]
    has_unstable = bool(unstable.real > 0.0 and not is_complex(unstable))
    rest = [root for index, root in enumerate(roots) if index != top]
    pair = [root for root in rest if is_complex(root)]
    if pair:
        delta0, omega0 = float(pair[0].real), float(abs(pair[0].imag))
    else:
        delta0, omega0 = float(max(root.real for root in rest)), 0.0

    eps0 = float(unstable.real)
    leading = max(delta0, -p.b)
    eigenvalues = tuple(sorted([complex(-p.b, 0.0), *(complex(root) for root in roots)],
                               key=lambda value: (value.real, value.imag)))

    coefficients = np.poly(jacobian(np.zeros(4), p))
    scale = float(np.linalg.norm(coefficients))
    residual = max(abs(np.polyval(coefficients, value)) for value in eigenvalues) / scale
    if residual > CHAR_POLY_TOL:
        logger.warning('Невязка характеристического многочлена 4x4: %.3e', residual)
    if not has_unstable:
        logger.info('У равновесия нет простого неустойчивого собственного значения (r=%g)', p.r)
        return EigenData(
            delta0=delta0, omega0=omega0, eps0=eps0, real_stable=-p.b, nu0=math.nan, sigma0=math.nan,
            eigenvalues=eigenvalues, char_residual=float(residual), has_unstable=False,
        )
    return EigenData(
        delta0=delta0, omega0=omega0, eps0=eps0, real_stable=-p.b,
        nu0=-leading / eps0, sigma0=leading + eps0,
        eigenvalues=eigenvalues, char_residual=float(residual),
    )


def unstable_eigenvector(p):
    """
    Единичный собственный вектор для ε0 (первая ненулевая компонента положительна).

    Raises:
        DomainError: у равновесия нет простого неустойчивого собственного значения
    """
    data = equilibrium_eigenvalues(p)
    if not data.has_unstable:
        raise DomainError('У равновесия нет простого неустойчивого собственного значения', r=p.r)
    eps0 = data.eps0
    _, _, vt = np.linalg.svd(jacobian(np.zeros(4), p) - eps0 * np.eye(4))
    vector = vt[-1]
    pivot = vector[np.flatnonzero(np.abs(vector) > 1e-12)[0]]
    return vector * math.copysign(1.0, pivot) / np.linalg.norm(vector)


@dataclass(frozen=True)
class LocusPoint:
    r: float
    b: float
    residual: float


@dataclass(frozen=True)
class LocusResult:
    free: str
    points: list
    truncated: bool


def _locus_residual(p):
    pair = _complex_pair(p)
    if pair is None:
        return math.nan
    return float(pair.real) + p.b


def find_3dl_locus(p, free='b', grid=None, bracket=None, xtol=1e-14):
    """
    Кривая 3DL-перехода Re(λc) = -b на плоскости (r, b).

    Для каждого значения фиксированного параметра из grid свободный параметр
    free находится методом Брента на отрезке bracket. Точки, где пара
    становится вещественной, отбрасываются, а результат помечается как усечённый.

    Args:
        p: LSParams - остальные параметры
        free: 'b' или 'r'
        grid: значения второго параметра
        bracket: (lower, upper) для свободного параметра

    Returns:
        LocusResult

    Raises:
        ConvergenceError: |Re λc + b| в найденной точке больше 1e-8
    """
    if free not in ('b', 'r'):
        raise ValueError(f'free должен быть "b" или "r", получено {free!r}')
    fixed = 'r' if free == 'b' else 'b'
    if grid is None:
        grid = np.linspace(10.0, 20.0, 101) if fixed == 'r' else np.linspace(1.5, 2.5, 101)
    if bracket is None:
        bracket = (1e-6, 20.0) if free == 'b' else (1.0, 40.0)

    points, truncated = [], False
    for value in grid:
        base = p.with_changes(**{fixed: float(value)})

        def residual(candidate, base=base):
            return _locus_residual(base.with_changes(**{free: candidate}))

        lower, upper = residual(bracket[0]), residual(bracket[1])
        if not (np.isfinite(lower) and np.isfinite(upper)) or lower * upper > 0.0:
            truncated = True
            logger.info('3DL: при %s=%.6g корня нет (пара вещественная или нет смены знака)', fixed, value)
            continue
        root = brentq(residual, bracket[0], bracket[1], xtol=xtol, rtol=8 * np.finfo(float).eps)
        point = base.with_changes(**{free: root})
        error = abs(_locus_residual(point))
        if not error <= LOCUS_TOL:
            raise ConvergenceError(
                '3DL-переход не уточнён', free=free, r=point.r, b=point.b, residual=float(error),
            )
        points.append(LocusPoint(point.r, point.b, error))
    return LocusResult(free, points, truncated)


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    sol: object = field(repr=False, default=None)
    events: list = field(default_factory=list)


def integrate(p, state0, t_span, rel_tol=1e-9, abs_tol=1e-12, t_eval=None, events=None):
    """
    Интегрирование вложенной парой Рунге-Кутты 4(5) с плотным выводом.

    Raises:
        IntegrationError: интегратор не смог сделать шаг
    """
    state0 = np.asarray(state0, dtype=float)
    if state0.shape != (4,) or not np.all(np.isfinite(state0)):
        raise DomainError('Начальное состояние должно быть конечным вектором длины 4')
    solution = solve_ivp(
        lambda t, y: rhs(y, p), t_span, state0, method='RK45', rtol=rel_tol, atol=abs_tol,
        t_eval=t_eval, dense_output=True, events=events,
    )
    if solution.status == -1:
        raise IntegrationError('Интегратор остановился', message=solution.message, t=float(solution.t[-1]))
    return Trajectory(solution.t, solution.y.T, solution.sol, list(solution.t_events or []))


@dataclass(frozen=True)
class ShootResult:
    sign: int
    crossings: list
    closest_distance: float
    closest_time: float
    exit_time: float


def _section_event(normal, offset):
    normal = np.asarray(normal, dtype=float)

    def event(t, y):
        return float(normal @ y) - offset

    return event


def unstable_manifold_shoot(p, delta=1e-6, t_max=20.0, section=None, exit_radius=0.1,
                            rel_tol=1e-9, abs_tol=1e-12, samples=4000):
    """
    Стрельба вдоль неустойчивого многообразия нуля (обе ветви, знаки ±).

    Записываются пересечения гиперплоскости normal·y = offset после выхода
    из шара exit_radius и минимальное расстояние возврата к нулю.

    Returns:
        list[ShootResult] для знаков +1 и -1
    """
    if not 1e-8 <= delta <= 1e-4:
        raise DomainError('delta должно лежать в [1e-8, 1e-4]', delta=delta)
    section = section or {'normal': (1.0, 0.0, 0.0, 0.0), 'offset': 0.0}
    event = _section_event(section['normal'], section['offset'])
    vector = unstable_eigenvector(p)
    results = []
    for sign in (1, -1):
        trajectory = integrate(p, sign * delta * vector, (0.0, t_max), rel_tol, abs_tol, events=event)
        times = np.linspace(0.0, trajectory.t[-1], samples)
        distances = np.linalg.norm(trajectory.sol(times), axis=0)
        outside = np.flatnonzero(distances > exit_radius)
        if outside.size == 0:
            logger.info('Стрельба (%+d): траектория не вышла из шара радиуса %g', sign, exit_radius)
            results.append(ShootResult(sign, [], math.nan, math.nan, math.nan))
            continue
        exit_time = float(times[outside[0]])
        crossings = [
            (float(t), [float(v) for v in trajectory.sol(t)])
            for t in trajectory.events[0] if t > exit_time
        ] if trajectory.events else []
        if not crossings:
            logger.info('Стрельба (%+d): пересечений сечения до t=%g нет', sign, t_max)

        after = np.arange(outside[0], samples)
        index = int(after[np.argmin(distances[after])])
        lower = times[max(index - 1, outside[0])]
        upper = times[min(index + 1, samples - 1)]
        closest_time, closest = float(times[index]), float(distances[index])
        if upper > lower:
            refined = minimize_scalar(
                lambda t: float(np.linalg.norm(trajectory.sol(t))), bounds=(lower, upper), method='bounded',
                options={'xatol': 1e-12},
            )
            if refined.fun < closest:
                closest_time, closest = float(refined.x), float(refined.fun)
        results.append(ShootResult(sign, crossings, closest, closest_time, exit_time))
    return results


def shoot_scan(p, r_values, workers=1, **options):
    """Стрельба на сетке по r; порядок результатов совпадает с r_values."""
    def shoot(r):
        return float(r), unstable_manifold_shoot(p.with_changes(r=float(r)), **options)

    return ordered_map(shoot, list(r_values), workers)
