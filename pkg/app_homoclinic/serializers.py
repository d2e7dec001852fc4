from rest_framework import serializers

from .exceptions import DomainError
from .models import ScanRun
from .services.lorenz_stenflo import LSParams
from .services.model_maps import ModelParams


class ScanRunSerializer(serializers.ModelSerializer):
    """
    Сериализатор для запусков расчётов.

    Манифест отдаётся отдельным действием, в списке он не нужен.
    """

    class Meta:
        model = ScanRun
        fields = ['id',
                  'command',
                  'status',
                  'config',
                  'output_files',
                  'exit_code',
                  'message',
                  'version',
                  'created_at',
                  'finished_at']


class MultiplierSerializer(serializers.Serializer):
    """Комплексный мультипликатор в виде {re, im}."""

    re = serializers.FloatField()
    im = serializers.FloatField()

    def to_representation(self, value):
        value = complex(value)
        return {'re': value.real, 'im': value.imag}


class PointSerializer(serializers.Serializer):
    """Точка бифуркации в JSON-схеме выходных файлов."""

    kind = serializers.CharField()
    n_or_m = serializers.IntegerField()
    mu1 = serializers.FloatField()
    mu2 = serializers.FloatField()
    unknowns = serializers.ListField(child=serializers.FloatField())
    multipliers = MultiplierSerializer(many=True, required=False, default=list)
    residual = serializers.FloatField(allow_null=True)


class ModelParamsSerializer(serializers.Serializer):
    """
    Коэффициенты модельных отображений.

    Проверка инвариантов делегируется ModelParams, чтобы правила
    не расходились между API и численными модулями.
    """

    nu = serializers.FloatField()
    beta = serializers.FloatField()
    C1 = serializers.FloatField()
    C2 = serializers.FloatField()
    alpha1 = serializers.FloatField()
    alpha2 = serializers.FloatField()
    alpha3 = serializers.FloatField()
    alpha4 = serializers.FloatField()
    phi1 = serializers.FloatField()
    phi2 = serializers.FloatField()

    def validate(self, attrs):
        try:
            ModelParams(**attrs)
        except DomainError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs


class LSParamsSerializer(serializers.Serializer):
    """Параметры системы Лоренца-Стенфло."""

    sigma = serializers.FloatField()
    r = serializers.FloatField()
    b = serializers.FloatField()
    s = serializers.FloatField()
    eps1 = serializers.FloatField()
    eps2 = serializers.FloatField()

    def validate_b(self, value):
        if value <= 0:
            raise serializers.ValidationError('b должно быть положительным')
        return value

    def validate(self, attrs):
        try:
            LSParams(**attrs)
        except DomainError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs


class StepControlSerializer(serializers.Serializer):
    h0 = serializers.FloatField()
    h_min = serializers.FloatField()
    h_max = serializers.FloatField()
    theta_max_deg = serializers.FloatField(min_value=0.0, max_value=90.0)

    def validate(self, attrs):
        if not 0 < attrs['h_min'] <= attrs['h0'] <= attrs['h_max']:
            raise serializers.ValidationError('Требуется 0 < h_min <= h0 <= h_max')
        return attrs


def _validate_range(value):
    lower, upper = value
    if lower > upper:
        raise serializers.ValidationError(f'Пустой диапазон {lower}:{upper}')
    return value


class RunConfigSerializer(serializers.Serializer):
    """
    Разрешённая конфигурация запуска команды.

    Диапазоны непустые, допуски положительные, параметры модели
    удовлетворяют инвариантам ModelParams/LSParams.
    """

    command = serializers.CharField()
    profile = serializers.CharField(allow_blank=True, required=False, default='')
    model = ModelParamsSerializer()
    lorenz_stenflo = LSParamsSerializer()
    n_range = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=2, max_length=2)
    m_range = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=2, max_length=2)
    newton_tol = serializers.FloatField()
    newton_max_iter = serializers.IntegerField(min_value=1)
    step_control = StepControlSerializer()
    max_points = serializers.IntegerField(min_value=2)
    theta_half_width = serializers.FloatField()
    mu1_max = serializers.FloatField()
    ls_rtol = serializers.FloatField()
    ls_atol = serializers.FloatField()
    output_dir = serializers.CharField()
    options = serializers.DictField(required=False, default=dict)

    def validate_n_range(self, value):
        return _validate_range(value)

    def validate_m_range(self, value):
        return _validate_range(value)

    def _positive(self, value, name):
        if not value > 0:
            raise serializers.ValidationError(f'{name} должен быть положительным')
        return value

    def validate_newton_tol(self, value):
        return self._positive(value, 'newton_tol')

    def validate_theta_half_width(self, value):
        return self._positive(value, 'theta_half_width')

    def validate_mu1_max(self, value):
        return self._positive(value, 'mu1_max')

    def validate_ls_rtol(self, value):
        return self._positive(value, 'ls_rtol')

    def validate_ls_atol(self, value):
        return self._positive(value, 'ls_atol')

    def validate_output_dir(self, value):
        if value.startswith('/') or '..' in value.split('/'):
            raise serializers.ValidationError('output_dir должен быть относительным путём внутри хранилища')
        return value.strip('/') or '.'
