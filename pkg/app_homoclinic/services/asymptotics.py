"""
Главные члены асимптотик: ветви LP-"рогов", точки сборки, пересечения с осью
μ2 = 0, "параболы" вторичных гомоклиник и их точки поворота, а также таблицы
сравнения точных и асимптотических значений.

Остаточные члены (O(μ1), O(1/n), O(1/√n)) отброшены; их величина
оценивается сравнением с решениями, уточнёнными методом Ньютона.
"""

# Standard library imports
import logging
import math
from dataclasses import dataclass

# Third-party imports
import numpy as np
from scipy.stats import spearmanr

# Local imports
from ..exceptions import DomainError
from .model_maps import Mu

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DerivedConstants:
    """
    Константы асимптотик: phi0, a, theta0 и индекс i = -sign(C2).

    shift - число полных оборотов 2π, добавляемых к первой ветви;
    первая ветвь лежит выше 2π при C2 > 0.
    """

    phi0: float
    a: float
    theta0: float
    i: int
    shift: int
    beta_nu: float
    root: float
    C1: float
    C2: float

    @classmethod
    def from_params(cls, p):
        beta_nu = p.beta * p.nu
        root = math.sqrt(1.0 + beta_nu ** 2)
        return cls(
            phi0=math.asin(1.0 / root),
            a=beta_nu ** 2 * p.C2 ** 2 / ((1.0 + beta_nu ** 2) * p.C1 ** 2),
            theta0=math.pi / 2 if p.C2 < 0 else 3 * math.pi / 2,
            i=-int(math.copysign(1, p.C2)),
            shift=1 if p.C2 > 0 else 0,
            beta_nu=beta_nu,
            root=root,
            C1=p.C1,
            C2=p.C2,
        )

    def theta0_n(self, n, mu1):
        argument = -self.beta_nu * self.C2 * math.exp(-2.0 * math.pi * mu1 * n) / (self.root * self.C1)
        if abs(argument) > 1.0:
            raise DomainError('Рог не доходит до этого μ1: |аргумент arcsin| > 1', n=n, mu1=mu1, argument=argument)
        return math.asin(argument)

    @property
    def cusp_theta(self):
        return self.theta0 + self.phi0


def horn_theta_seeds(n, mu1, p):
    """
    Две главные фазы θ1, θ2 точек LP/PD-кривой рога n при данном μ1.

    Returns:
        tuple: (theta1, theta2)
    """
    constants = DerivedConstants.from_params(p)
    theta_n = constants.theta0_n(n, mu1)
    return (
        constants.phi0 + theta_n + 2.0 * math.pi * constants.shift,
        constants.phi0 + math.pi - theta_n,
    )


def horn_branch_mu2(n, mu1, branch, p):
    """
    Главный член μ2 на ветви branch (1 или 2) LP-рога с номером n.

    Args:
        n: int - номер рога
        mu1: float
        branch: int - 1 или 2
        p: ModelParams

    Returns:
        float: μ2
    """
    if branch not in (1, 2):
        raise ValueError(f'branch должен быть 1 или 2, получено {branch}')
    constants = DerivedConstants.from_params(p)
    theta_n = constants.theta0_n(n, mu1)
    beta_nu, root = constants.beta_nu, constants.root
    cosine = math.sqrt(max(0.0, 1.0 - beta_nu ** 2 / root ** 2 * (p.C2 / p.C1) ** 2 * math.exp(-4.0 * math.pi * mu1 * n)))
    if branch == 1:
        theta = theta_n + constants.phi0 + 2.0 * math.pi * constants.shift
        bracket = p.C1 * cosine
    else:
        theta = math.pi - theta_n + constants.phi0
        bracket = -p.C1 * cosine
    bracket += p.C2 / root * math.exp(-mu1 * (2.0 * math.pi * n + theta))
    return -math.exp(-beta_nu * theta) * math.exp(-2.0 * math.pi * beta_nu * n) / root * bracket


def cusp_asymptotic(n, p):
    """Главные члены (μ1, μ2) точки сборки рога n."""
    constants = DerivedConstants.from_params(p)
    mu1 = math.log(constants.a) / (4.0 * math.pi * n)
    theta = constants.cusp_theta
    mu2 = (
        -math.exp(-constants.beta_nu * (2.0 * math.pi * n + theta))
        * math.copysign(1.0, p.C2) * p.C1 / (constants.beta_nu * constants.root)
        * constants.a ** (-theta / (4.0 * math.pi * n))
    )
    return Mu(mu1, mu2)


def mu1_axis_intersection(n, p):
    """μ1, при котором рог n пересекает ось μ2 = 0."""
    return math.log(p.C2 ** 2 / p.C1 ** 2) / (4.0 * math.pi * n)


def parabola_theta_seeds(m, mu1, p):
    """Фазы θ1, θ2 двух половин "параболы" вторичной гомоклиники с номером m."""
    argument = -p.C2 / p.C1 * math.exp(-2.0 * math.pi * mu1 * m)
    if abs(argument) > 1.0:
        raise DomainError('Парабола не доходит до этого μ1: |аргумент arcsin| > 1', m=m, mu1=mu1, argument=argument)
    theta_m = math.asin(argument)
    shift = 1 if p.C2 > 0 else 0
    return theta_m + 2.0 * math.pi * shift, math.pi - theta_m


def parabola_mu2(m, mu1, branch, p):
    """Главный член μ2 на половине branch "параболы" m."""
    if branch not in (1, 2):
        raise ValueError(f'branch должен быть 1 или 2, получено {branch}')
    theta = parabola_theta_seeds(m, mu1, p)[branch - 1]
    return math.exp(-p.beta * (2.0 * math.pi * m + theta))


def turning_asymptotic(m, p):
    """Главные члены точки поворота "параболы" m (показатель с 2πm)."""
    theta0 = math.pi / 2 if p.C2 < 0 else 3 * math.pi / 2
    return Mu(
        math.log(p.C2 ** 2 / p.C1 ** 2) / (4.0 * math.pi * m),
        math.exp(-p.beta * (2.0 * math.pi * m + theta0)),
    )


@dataclass(frozen=True)
class ComparisonTable:
    errors: np.ndarray
    spearman: float
    decreasing: bool


def compare_table(exact, asymptotic):
    """
    Относительные нормы ‖exact - asymptotic‖ / ‖exact‖ по индексам и вердикт
    об убывании: последняя ошибка меньше первой и ранговая корреляция с индексом < 0.

    Args:
        exact: список Mu
        asymptotic: список Mu той же длины

    Returns:
        ComparisonTable
    """
    if len(exact) != len(asymptotic):
        raise ValueError(f'Длины списков различаются: {len(exact)} != {len(asymptotic)}')
    exact_values = np.array([[item.mu1, item.mu2] for item in exact], dtype=float).reshape(-1, 2)
    asymptotic_values = np.array([[item.mu1, item.mu2] for item in asymptotic], dtype=float).reshape(-1, 2)
    norms = np.linalg.norm(exact_values, axis=1)
    norms[norms == 0.0] = 1.0
    errors = np.linalg.norm(exact_values - asymptotic_values, axis=1) / norms

    if len(errors) < 2 or np.all(errors == errors[0]):
        return ComparisonTable(errors, math.nan, False)
    rho = float(spearmanr(np.arange(len(errors)), errors).statistic)
    return ComparisonTable(errors, rho, bool(errors[-1] < errors[0] and rho < 0.0))


def asymptotic_horn_table(n, p, mu1_values):
    """Строки (branch, mu1, mu2) асимптотических ветвей рога n; точки вне области пропускаются."""
    rows = []
    for branch in (1, 2):
        for mu1 in mu1_values:
            try:
                rows.append((branch, float(mu1), horn_branch_mu2(n, float(mu1), branch, p)))
            except DomainError:
                continue
    return rows


def asymptotic_parabola_table(m, p, mu1_values):
    """Строки (branch, mu1, mu2) асимптотических половин параболы m."""
    rows = []
    for branch in (1, 2):
        for mu1 in mu1_values:
            try:
                rows.append((branch, float(mu1), parabola_mu2(m, float(mu1), branch, p)))
            except DomainError:
                continue
    return rows
