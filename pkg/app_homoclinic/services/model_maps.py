# Standard library imports
import cmath
import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass

# Third-party imports
import numpy as np

# Local imports
from ..exceptions import DegenerateMatrixError, DomainError, DomainWarning

logger = logging.getLogger(__name__)

FD_STEP = 1e-5


def falling_factorial(a, k):
    """
    Убывающий факториал (a)_k = a (a-1) ... (a-k+1); работает и для комплексного a.

    Args:
        a: число (вещественное или комплексное)
        k: int - порядок, k >= 0

    Returns:
        Значение (a)_k того же типа, что и a
    """
    result = 1
    for j in range(k):
        result = result * (a - j)
    return result


def richardson_derivative(func, x, h):
    """
    Центральная разность с одним уровнем экстраполяции Ричардсона.

    Args:
        func: callable - скалярная функция одного аргумента
        x: float - точка
        h: float - шаг (абсолютный)

    Returns:
        float: оценка производной с погрешностью O(h^4)
    """
    def central(step):
        return (func(x + step) - func(x - step)) / (2.0 * step)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


@dataclass(frozen=True)
class ModelParams:
    """
    Коэффициенты модельных отображений: седловой индекс nu, beta = ε0/ω0,
    C1, C2, коэффициенты alpha1..alpha4 и фазы phi1, phi2.
    По умолчанию значения для базового набора параметров (baseline).
    """

    nu: float = 0.5
    beta: float = 0.5
    C1: float = 0.8
    C2: float = 1.2
    alpha1: float = 0.8
    alpha2: float = 1.3
    alpha3: float = 0.6
    alpha4: float = 1.1
    phi1: float = math.pi / 6
    phi2: float = math.pi / 6

    def __post_init__(self):
        for name, value in dataclasses.asdict(self).items():
            if not math.isfinite(value):
                raise DomainError(f'Параметр {name} должен быть конечным числом', **{name: value})
        if self.nu <= 0 or self.beta <= 0:
            raise DomainError('Требуется nu > 0 и beta > 0', nu=self.nu, beta=self.beta)
        if self.C1 == 0 or self.C2 == 0:
            raise DomainError('Требуется C1 != 0 и C2 != 0', C1=self.C1, C2=self.C2)

    @property
    def z(self):
        """Комплексный показатель: x^z = x^nu · exp(-i ln x / beta)."""
        return complex(self.nu, -1.0 / self.beta)

    @property
    def beta_nu(self):
        return self.beta * self.nu

    def kappa(self, mu1):
        """Показатель nu + mu1/beta при слагаемом C2."""
        return self.nu + mu1 / self.beta

    def decay_alpha(self):
        """Скорость убывания 2πβ(1-ν) поправочных слагаемых."""
        return 2.0 * math.pi * self.beta * (1.0 - self.nu)

    def with_changes(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        names = {item.name for item in dataclasses.fields(cls)}
        return cls(**{key: float(value) for key, value in data.items() if key in names})


@dataclass(frozen=True)
class Mu:
    """Параметры развёртки: mu1 (расщепление собственных значений) и mu2 (расщепление петли)."""

    mu1: float = 0.0
    mu2: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mu1) and math.isfinite(self.mu2)):
            raise DomainError('mu1 и mu2 должны быть конечными', mu1=self.mu1, mu2=self.mu2)


@dataclass(frozen=True)
class StateS:
    """Точка (x1, x3, x4) на секущей Σs."""

    x1: float
    x3: float
    x4: float

    def as_array(self):
        return np.array([self.x1, self.x3, self.x4], dtype=float)

    @classmethod
    def from_array(cls, values):
        return cls(float(values[0]), float(values[1]), float(values[2]))


@dataclass(frozen=True)
class GlobalMatrix:
    """Матрица линеаризации аффинного глобального отображения Σu → Σs."""

    a: tuple

    def __post_init__(self):
        matrix = np.asarray(self.a, dtype=float)
        if matrix.shape != (3, 3) or not np.all(np.isfinite(matrix)):
            raise DegenerateMatrixError('Ожидается конечная матрица 3x3', shape=matrix.shape)
        scale = max(1.0, float(np.max(np.abs(matrix)))) ** 3
        if abs(np.linalg.det(matrix)) <= 1e-14 * scale:
            raise DegenerateMatrixError('Матрица глобального отображения вырождена')
        object.__setattr__(self, 'a', tuple(tuple(float(v) for v in row) for row in matrix))

    @property
    def array(self):
        return np.array(self.a, dtype=float)


@dataclass(frozen=True)
class FlowParams:
    """Параметры линейного потока у седла: gamma < 0, beta > 0, mu1; nu = -gamma/beta."""

    gamma: float
    beta: float
    mu1: float = 0.0

    def __post_init__(self):
        if self.beta <= 0 or self.gamma >= 0:
            raise DomainError('Требуется gamma < 0 и beta > 0', gamma=self.gamma, beta=self.beta)

    @property
    def nu(self):
        return -self.gamma / self.beta

    @property
    def kappa(self):
        return self.nu + self.mu1 / self.beta


def _check_positive(value, name):
    if not value > 0:
        raise DomainError(f'{name} должен быть положительным', **{name: value})


def _warn_kappa(kappa):
    if kappa <= 0:
        warnings.warn(
            f'nu + mu1/beta = {kappa:.6g} <= 0: производные расходятся при x -> 0',
            DomainWarning,
            stacklevel=3,
        )


def scalar_map(x, mu, p, order=0):
    """
    Скалярное модельное отображение F(x, μ) = μ2 + C1 x^ν sin(-ln x / β) + C2 x^(ν+μ1/β)
    и его производные по x.

    Синусное слагаемое записано как C1 Im(x^z), z = ν - i/β, поэтому
    k-я производная равна C1 Im((z)_k x^(z-k)) + C2 (κ)_k x^(κ-k).

    Args:
        x: float - точка, x > 0
        mu: Mu - параметры развёртки
        p: ModelParams - коэффициенты
        order: int - максимальный порядок производной (0..3)

    Returns:
        np.ndarray длины order+1: [F, F', F'', F''']
    """
    _check_positive(x, 'x')
    if order not in (0, 1, 2, 3):
        raise ValueError(f'order должен быть 0..3, получено {order}')
    kappa = p.kappa(mu.mu1)
    _warn_kappa(kappa)

    log_x = math.log(x)
    z = p.z
    values = np.empty(order + 1)
    for k in range(order + 1):
        sine_part = (falling_factorial(z, k) * cmath.exp((z - k) * log_x)).imag
        power_part = falling_factorial(kappa, k) * math.exp((kappa - k) * log_x)
        values[k] = p.C1 * sine_part + p.C2 * power_part
    values[0] += mu.mu2
    return values


def _scalar_term_scale(x, mu, p, k):
    """Сумма модулей слагаемых k-й производной: естественный масштаб для относительной ошибки."""
    log_x = math.log(x)
    kappa = p.kappa(mu.mu1)
    sine_part = abs(falling_factorial(p.z, k) * cmath.exp((p.z - k) * log_x))
    power_part = abs(falling_factorial(kappa, k) * math.exp((kappa - k) * log_x))
    return abs(p.C1) * sine_part + abs(p.C2) * power_part


def scalar_map_fd_check(x, mu, p, step=FD_STEP):
    """
    Сравнивает аналитические производные F порядков 1-3 с центральными разностями.

    Args:
        x: float - точка, x > 1e-6
        mu: Mu
        p: ModelParams
        step: float - относительный шаг разностной схемы

    Returns:
        float: максимальная относительная ошибка
    """
    if not x > 1e-6:
        raise DomainError('Проверка разностями требует x > 1e-6', x=x)
    analytic = scalar_map(x, mu, p, 3)
    worst = 0.0
    for k in range(1, 4):
        def lower(t, k=k):
            return scalar_map(t, mu, p, k - 1)[k - 1]

        estimate = richardson_derivative(lower, x, step * x)
        scale = max(abs(analytic[k]), _scalar_term_scale(x, mu, p, k))
        worst = max(worst, abs(analytic[k] - estimate) / scale)
    return worst


def second_iterate_derivatives(x, mu, p):
    """
    Производные второй итерации F∘F до третьего порядка (формула Фаа ди Бруно).

    Returns:
        np.ndarray: [F(F(x)), (F∘F)', (F∘F)'', (F∘F)''']
    """
    f = scalar_map(x, mu, p, 3)
    g = scalar_map(f[0], mu, p, 3)
    return np.array([
        g[0],
        g[1] * f[1],
        g[2] * f[1] ** 2 + g[1] * f[2],
        g[3] * f[1] ** 3 + 3.0 * g[2] * f[1] * f[2] + g[1] * f[3],
    ])


class ModelMap3D:
    """
    Трёхмерное модельное отображение G(x1, x3, x4) с аналитическими производными.

    Каждая компонента имеет вид G_i = c_i + x1 L_i(E) + x3 k_i Q, где E = x4^z,
    Q = x4^κ, L_1(w) = α1 Re(e^{iφ1} w), L_2(w) = α3 Im(e^{iφ2} w), L_3(w) = C1 Im w,
    k = (α2, α4, C2), c = (1, 1, μ2).
    """

    def __init__(self, p, mu):
        self.p = p
        self.mu = mu
        self.kappa = p.kappa(mu.mu1)
        self._k = np.array([p.alpha2, p.alpha4, p.C2])
        self._rot1 = cmath.exp(1j * p.phi1)
        self._rot2 = cmath.exp(1j * p.phi2)
        self._offset = np.array([1.0, 1.0, mu.mu2])

    def linear_part(self, w):
        return np.array([
            self.p.alpha1 * (self._rot1 * w).real,
            self.p.alpha3 * (self._rot2 * w).imag,
            self.p.C1 * w.imag,
        ])

    def powers(self, x4, order):
        """Производные E = x4^z и Q = x4^κ по x4 до порядка order."""
        _check_positive(x4, 'x4')
        log_x4 = math.log(x4)
        z = self.p.z
        powers_e = [falling_factorial(z, k) * cmath.exp((z - k) * log_x4) for k in range(order + 1)]
        powers_q = [falling_factorial(self.kappa, k) * math.exp((self.kappa - k) * log_x4) for k in range(order + 1)]
        return powers_e, powers_q

    def image(self, x):
        x1, x3, x4 = x
        powers_e, powers_q = self.powers(x4, 0)
        return self._offset + x1 * self.linear_part(powers_e[0]) + x3 * self._k * powers_q[0]

    def jacobian(self, x):
        x1, x3, x4 = x
        powers_e, powers_q = self.powers(x4, 1)
        return np.column_stack([
            self.linear_part(powers_e[0]),
            self._k * powers_q[0],
            x1 * self.linear_part(powers_e[1]) + x3 * self._k * powers_q[1],
        ])

    def second(self, x):
        """Тензор вторых производных B[i, j, l] = ∂²G_i / ∂x_j ∂x_l."""
        x1, x3, x4 = x
        powers_e, powers_q = self.powers(x4, 2)
        tensor = np.zeros((3, 3, 3))
        tensor[:, 0, 2] = tensor[:, 2, 0] = self.linear_part(powers_e[1])
        tensor[:, 1, 2] = tensor[:, 2, 1] = self._k * powers_q[1]
        tensor[:, 2, 2] = x1 * self.linear_part(powers_e[2]) + x3 * self._k * powers_q[2]
        return tensor

    def third(self, x):
        """Тензор третьих производных C[i, j, l, m]."""
        x1, x3, x4 = x
        powers_e, powers_q = self.powers(x4, 3)
        tensor = np.zeros((3, 3, 3, 3))
        for a, b, c in ((0, 2, 2), (2, 0, 2), (2, 2, 0)):
            tensor[:, a, b, c] = self.linear_part(powers_e[2])
        for a, b, c in ((1, 2, 2), (2, 1, 2), (2, 2, 1)):
            tensor[:, a, b, c] = self._k * powers_q[2]
        tensor[:, 2, 2, 2] = x1 * self.linear_part(powers_e[3]) + x3 * self._k * powers_q[3]
        return tensor

    def bilinear(self, x, u, v):
        return np.einsum('ijk,j,k->i', self.second(x), u, v)

    def trilinear(self, x, u, v, w):
        return np.einsum('ijkl,j,k,l->i', self.third(x), u, v, w)

    def mu1_derivatives(self, x):
        """
        Производные G и якобиана по μ1 (μ1 входит только через Q = x4^κ).

        Returns:
            tuple: (dG/dμ1 формы (3,), dJ/dμ1 формы (3, 3))
        """
        x1, x3, x4 = x
        _check_positive(x4, 'x4')
        log_x4 = math.log(x4)
        beta = self.p.beta
        q0 = math.exp(self.kappa * log_x4)
        dq0 = q0 * log_x4 / beta
        dq1 = math.exp((self.kappa - 1.0) * log_x4) * (1.0 + self.kappa * log_x4) / beta
        d_image = x3 * self._k * dq0
        d_jacobian = np.zeros((3, 3))
        d_jacobian[:, 1] = self._k * dq0
        d_jacobian[:, 2] = x3 * self._k * dq1
        return d_image, d_jacobian


def model_map_3d(s, mu, p):
    """
    Образ точки под действием G и якобиан по (x1, x3, x4).

    Args:
        s: StateS - точка, s.x4 > 0
        mu: Mu
        p: ModelParams

    Returns:
        tuple: (StateS образ, np.ndarray якобиан 3x3)
    """
    model_map = ModelMap3D(p, mu)
    x = s.as_array()
    return StateS.from_array(model_map.image(x)), model_map.jacobian(x)


def local_map(x1s, x3s, x4s, flow):
    """
    Локальное отображение Σs → Σu вдоль линеаризованного потока у седла.

    Returns:
        np.ndarray: (x1u, x2u, x3u)
    """
    _check_positive(x4s, 'x4s')
    log_x4 = math.log(x4s)
    phase = -log_x4 / flow.beta
    radial = math.exp(flow.nu * log_x4)
    return np.array([
        x1s * radial * math.cos(phase),
        x1s * radial * math.sin(phase),
        x3s * math.exp(flow.kappa * log_x4),
    ])


def global_map(xu, mu2, matrix):
    """Аффинное глобальное отображение Σu → Σs: (1, 1, μ2) + A xu."""
    return np.array([1.0, 1.0, mu2]) + matrix.array @ np.asarray(xu, dtype=float)


def compose_return_map(xs, mu2, matrix, flow):
    """Полное отображение возвращения Π = Π_glob ∘ Π_loc для точки xs = (x1, x3, x4)."""
    x1s, x3s, x4s = xs
    return global_map(local_map(x1s, x3s, x4s, flow), mu2, matrix)


@dataclass(frozen=True)
class MapCoefficients:
    """Коэффициенты b1..b6, фазы theta1..theta3 и коэффициенты после сдвига фазы."""

    b1: float
    b2: float
    b3: float
    b4: float
    b5: float
    b6: float
    theta1: float
    theta2: float
    theta3: float
    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float
    C1: float
    C2: float
    phi1: float
    phi2: float
    nu: float
    beta: float

    def full_map(self, xs, mu2, flow):
        """Отображение в b/θ-форме (до сдвига x4 -> x4 exp(θ3 β))."""
        x1, x3, x4 = xs
        _check_positive(x4, 'x4')
        log_x4 = math.log(x4)
        phase = -log_x4 / flow.beta
        radial = x1 * math.exp(flow.nu * log_x4)
        power = x3 * math.exp(flow.kappa * log_x4)
        return np.array([
            1.0 + self.b1 * radial * math.cos(phase + self.theta1) + self.b2 * power,
            1.0 + self.b3 * radial * math.sin(phase + self.theta2) + self.b4 * power,
            mu2 + self.b5 * radial * math.sin(phase + self.theta3) + self.b6 * power,
        ])

    def shift_x4(self, y):
        """Координата x4 b/θ-формы, соответствующая координате y сдвинутой формы."""
        return y * math.exp(self.theta3 * self.beta)

    def model_params(self):
        return ModelParams(
            nu=self.nu, beta=self.beta, C1=self.C1, C2=self.C2,
            alpha1=self.alpha1, alpha2=self.alpha2, alpha3=self.alpha3, alpha4=self.alpha4,
            phi1=self.phi1, phi2=self.phi2,
        )


def derive_map_coefficients(matrix, flow):
    """
    Переводит матрицу глобального отображения в коэффициенты отображения возвращения.

    Сначала b-коэффициенты и фазы θ1..θ3, затем сдвиг x4 -> x4 exp(θ3 β),
    убирающий фазу третьей компоненты. C2 строится из b6 = a33.

    Args:
        matrix: GlobalMatrix
        flow: FlowParams

    Returns:
        MapCoefficients
    """
    a = matrix.array
    for row in range(3):
        if a[row, 0] == 0.0 and a[row, 1] == 0.0:
            raise DegenerateMatrixError(
                f'Пара (a{row + 1}1, a{row + 1}2) нулевая: фаза theta{row + 1} не определена',
                row=row + 1,
            )

    b1, theta1 = math.hypot(a[0, 0], a[0, 1]), math.atan2(-a[0, 1], a[0, 0])
    b3, theta2 = math.hypot(a[1, 0], a[1, 1]), math.atan2(a[1, 0], a[1, 1])
    b5, theta3 = math.hypot(a[2, 0], a[2, 1]), math.atan2(a[2, 0], a[2, 1])
    b2, b4, b6 = a[0, 2], a[1, 2], a[2, 2]

    shift_nu = math.exp(theta3 * flow.beta * flow.nu)
    shift_kappa = math.exp(flow.kappa * theta3 * flow.beta)
    return MapCoefficients(
        b1=b1, b2=b2, b3=b3, b4=b4, b5=b5, b6=b6,
        theta1=theta1, theta2=theta2, theta3=theta3,
        alpha1=b1 * shift_nu, alpha2=b2 * shift_kappa,
        alpha3=b3 * shift_nu, alpha4=b4 * shift_kappa,
        C1=b5 * shift_nu, C2=b6 * shift_kappa,
        phi1=theta1 - theta3, phi2=theta2 - theta3,
        nu=flow.nu, beta=flow.beta,
    )
