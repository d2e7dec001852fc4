"""
Уточнение решений в расширенной точности (mpmath).

На ветви n условия на мультипликаторы содержат сокращение слагаемых,
растущих как 1/ξ, поэтому в double их значение известно лишь с
точностью порядка EPS/ξ. Точка, найденная в double, дополнительно
уточняется хордовым методом Ньютона: невязка считается в mpmath,
матрица берётся в double и не меняется.

Каждый расчёт получает собственный контекст MPContext с нужным
числом знаков (precise_context), глобальный mp не трогается.
"""

# Standard library imports
import logging
import math

# Third-party imports
import numpy as np
from mpmath import MPContext

# Local imports
from ..exceptions import ConvergenceError, SingularJacobianError
from .continuation import _equilibrated_solve

logger = logging.getLogger(__name__)

BASE_DIGITS = 24
MAX_DIGITS = 160
SAFETY_DIGITS = 6
POLISH_MAX_ITER = 12


def working_digits(log_scale):
    """
    Число десятичных знаков для величин, теряющих в double log10(1/scale) знаков.

    Args:
        log_scale: float - натуральный логарифм масштаба сокращения (ln ξ или (1-ν) ln x4)

    Returns:
        int
    """
    lost = math.ceil(-log_scale / math.log(10.0)) if log_scale < 0.0 else 0
    return min(MAX_DIGITS, BASE_DIGITS + lost)


def precise_context(digits):
    ctx = MPContext()
    ctx.dps = digits
    return ctx


def to_mp(ctx, values):
    return [ctx.mpf(float(value)) for value in values]


def split(ctx, values):
    """Пара (старшие, младшие) double: value = hi + lo с точностью около 32 знаков."""
    high = np.array([float(value) for value in values])
    low = np.array([float(value - ctx.mpf(h)) for value, h in zip(values, high)])
    return high, low


def mp_jacobian(ctx, residual, u):
    """Якобиан невязки центральными разностями в mp (шаг 10^(-dps/3))."""
    u = to_mp(ctx, u)
    base = ctx.mpf(10) ** (-(ctx.dps // 3))
    columns = []
    for j, value in enumerate(u):
        h = base * max(ctx.mpf(1), abs(value))
        forward, backward = list(u), list(u)
        forward[j] += h
        backward[j] -= h
        columns.append([float((a - b) / (2 * h)) for a, b in zip(residual(forward), residual(backward))])
    return np.array(columns).T


def polish(ctx, name, residual, u, matrix=None, normal=None, max_iter=POLISH_MAX_ITER):
    """
    Хордовый метод Ньютона в расширенной точности.

    Если уравнений на одно меньше, чем неизвестных (точка кривой),
    добавляется гиперплоскость через u, ортогональная normal; без normal
    берётся нуль-вектор матрицы.

    Args:
        ctx: MPContext
        name: str - имя системы для сообщений
        residual: callable - список mpf невязок по списку mpf неизвестных
        u: начальная точка (double)
        matrix: якобиан в double; по умолчанию разностный в mp

    Returns:
        tuple: (список mpf неизвестных, mpf норма невязки)

    Raises:
        SingularJacobianError: матрица вырождена
        ConvergenceError: норма не опустилась до 10^(6 - dps)
    """
    u_ref = np.asarray(u, dtype=float)
    if matrix is None:
        matrix = mp_jacobian(ctx, residual, u_ref)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[0] == u_ref.size - 1:
        if normal is None:
            normal = np.linalg.svd(matrix)[2][-1]
        matrix = np.vstack([matrix, normal])
        anchor = to_mp(ctx, u_ref)
        weights = to_mp(ctx, normal)
    else:
        normal = None

    values = to_mp(ctx, u_ref)
    target = ctx.mpf(10) ** (SAFETY_DIGITS - ctx.dps)
    norm = ctx.inf
    for iteration in range(max_iter + 1):
        rows = list(residual(values))
        if normal is not None:
            rows.append(ctx.fsum(w * (v - a) for w, v, a in zip(weights, values, anchor)))
        norm = max(abs(row) for row in rows)
        if not ctx.isfinite(norm):
            raise ConvergenceError('Невязка в расширенной точности не конечна', system=name, iteration=iteration)
        if norm < target:
            logger.debug('polish %s: iter=%d residual=%s dps=%d', name, iteration, ctx.nstr(norm, 3), ctx.dps)
            return values, norm
        step, condition = _equilibrated_solve(matrix, np.array([float(row) for row in rows]))
        if step is None:
            raise SingularJacobianError('Якобиан уточнения вырожден', system=name, condition=float(condition))
        values = [v - ctx.mpf(float(d)) for v, d in zip(values, step)]
    raise ConvergenceError(
        'Уточнение в расширенной точности не сошлось', system=name, residual=float(norm),
        digits=ctx.dps, u0=[float(v) for v in u_ref],
    )
