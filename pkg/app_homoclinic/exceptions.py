"""
Иерархия исключений инструментария.

Все численные ошибки наследуются от HomoclinicError и несут словарь details
с диагностикой (начальное приближение, последняя невязка, число итераций).
Команды управления превращают их в CommandError с кодом выхода 2.
"""


class HomoclinicError(Exception):
    """Базовая ошибка расчёта."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def __str__(self):
        if not self.details:
            return self.message
        extra = ', '.join(f'{key}={value!r}' for key, value in sorted(self.details.items()))
        return f'{self.message} ({extra})'


class DomainError(HomoclinicError):
    """Аргумент вне области определения (x ≤ 0, arcsin вне [-1, 1] и т.п.)."""


class DegenerateMatrixError(DomainError):
    """Вырожденная матрица глобального отображения."""


class ConvergenceError(HomoclinicError):
    """Метод Ньютона или продолжение не сошлись."""


class SingularJacobianError(ConvergenceError):
    """Якобиан вырожден (оценка числа обусловленности > 1e12)."""


class NotFoundError(HomoclinicError):
    """Искомое решение отсутствует (нет смены знака, нет корня)."""


class IntegrationError(HomoclinicError):
    """Интегратор ОДУ не смог сделать шаг (жёсткость, слишком малый шаг)."""


class InconclusiveError(HomoclinicError):
    """Недостаточно данных для классификации."""


class DomainWarning(RuntimeWarning):
    """Предупреждение: производные расходятся при x → 0 (ν + μ1/β ≤ 0)."""
