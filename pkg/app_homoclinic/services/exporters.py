"""
Запись результатов расчётов: кривые в CSV, наборы точек и манифесты в JSON.

Все файлы пишутся через default_storage, поэтому локально они попадают
в HOMOCLINIC_OUTPUT_ROOT, а в продакшне в S3. Числа пишутся с 17 значащими
цифрами, так что конечные значения читаются обратно без потерь.
"""

# Standard library imports
import io
import json
import logging
import math

# Third-party imports
import numpy as np
import pandas as pd
from django.core.files.base import ContentFile
from django.core.files.storage import default_storage
from rest_framework.renderers import JSONRenderer

# Local imports
from ..serializers import PointSerializer
from .map3d_bifurcations import Map3DForm
from .scalar_bifurcations import ThetaForm
from .secondary_homoclinic import ParabolaForm

logger = logging.getLogger(__name__)

CURVE_COLUMNS = [
    'curve_id', 'branch', 'step', 'theta', 'mu1', 'mu2',
    'x1', 'x3', 'x4', 'res_norm', 'det_JmI', 'det_JpI', 'ns_test',
]
FLOAT_FORMAT = '%.17g'


def _finite_or_none(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def clean_json(data):
    """Заменяет NaN и бесконечности на None и приводит numpy-типы к встроенным."""
    if isinstance(data, dict):
        return {str(key): clean_json(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [clean_json(value) for value in data]
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        return _finite_or_none(data)
    return data


def scalar_curve_rows(curve, p, curve_id):
    """Строки CSV для кривой LP/PD скалярного отображения (неизвестные θ, μ1, m2)."""
    form = ThetaForm(curve.metadata['n'], p)
    rows = []
    for step, (point, u) in enumerate(zip(curve.points, curve.unknowns())):
        theta, mu1, m2 = (float(v) for v in u)
        rows.append({
            'curve_id': curve_id, 'branch': curve.metadata.get('branch', 0), 'step': step,
            'theta': theta, 'mu1': mu1, 'mu2': form.mu2_of(m2),
            'x4': form.x_of(theta), 'res_norm': point.residual_norm,
        })
    return rows


def map3d_curve_rows(curve, p, curve_id):
    """Строки CSV для кривой LP3/PD3/NS3: состояние и тест-функции в каждой точке."""
    form = Map3DForm(curve.metadata['n'], p)
    rows = []
    for step, (point, u) in enumerate(zip(curve.points, curve.unknowns())):
        x1, x3, theta, mu1, m2 = (float(v) for v in u)
        rows.append({
            'curve_id': curve_id, 'branch': curve.metadata.get('branch', 0), 'step': step,
            'theta': theta, 'mu1': mu1, 'mu2': form.S * m2,
            'x1': x1, 'x3': x3, 'x4': form.x4(theta), 'res_norm': point.residual_norm,
            'det_JmI': point.monitors.get('det_JmI'),
            'det_JpI': point.monitors.get('det_JpI'),
            'ns_test': point.monitors.get('ns'),
        })
    return rows


def parabola_curve_rows(curve, p, curve_id):
    """Строки CSV для половины параболы вторичной гомоклиники (x4 = μ2)."""
    form = ParabolaForm(curve.metadata['m'], p)
    rows = []
    for step, (point, u) in enumerate(zip(curve.points, curve.unknowns())):
        theta, mu1 = float(u[0]), float(u[1])
        mu2 = form.mu2_of(theta)
        rows.append({
            'curve_id': curve_id, 'branch': curve.metadata.get('branch', 0), 'step': step,
            'theta': theta, 'mu1': mu1, 'mu2': mu2, 'x4': mu2, 'res_norm': point.residual_norm,
        })
    return rows


def point_record(kind, n_or_m, mu, unknowns, residual, multipliers=()):
    """Запись точки в JSON-схеме {kind, n_or_m, mu1, mu2, unknowns, multipliers, residual}."""
    record = {
        'kind': kind,
        'n_or_m': int(n_or_m),
        'mu1': float(mu.mu1),
        'mu2': float(mu.mu2),
        'unknowns': [float(v) for v in unknowns],
        'multipliers': [complex(v) for v in multipliers],
        'residual': _finite_or_none(residual),
    }
    return clean_json(PointSerializer(record).data)


def scalar_point_residual(point):
    """Максимум масштабированных невязок условий точки скалярного отображения."""
    residuals = point.residuals
    sign = 1.0 if point.kind in ('LP', 'CP') else -1.0
    values = [residuals['fixed_point_scaled'], residuals['fx'] - sign]
    if point.kind == 'CP':
        values.append(residuals['fold_scaled'])
    elif point.kind == 'GPD':
        values.append(residuals['flip_scaled'])
    return max(abs(value) for value in values)


def scalar_point_record(point):
    return point_record(point.kind, point.n, point.mu, point.unknowns, scalar_point_residual(point))


def codim2_point_record(point):
    return point_record(point.kind, point.n, point.mu, point.u, point.residual_norm, point.multipliers)


def sechom_point_record(point):
    return point_record(point.label or 'SECHOM', point.m, point.mu, (point.theta, point.mu.mu1), abs(point.residual))


def save_content(name, content):
    """
    Записывает файл в хранилище, заменяя существующий.

    Returns:
        str: имя сохранённого файла
    """
    if isinstance(content, str):
        content = content.encode('utf-8')
    if default_storage.exists(name):
        default_storage.delete(name)
    saved = default_storage.save(name, ContentFile(content))
    logger.info('Записан файл %s (%d байт)', saved, len(content))
    return saved


def write_csv(name, rows, columns=None, trailer=()):
    """
    CSV с заголовком и фиксированным порядком колонок; пустые ячейки - нет значения.

    Args:
        name: str - имя файла в хранилище
        rows: список словарей
        columns: порядок колонок (по умолчанию CURVE_COLUMNS)
        trailer: строки вердиктов, дописываются в конец с префиксом '# '
    """
    columns = columns or CURVE_COLUMNS
    frame = pd.DataFrame(list(rows), columns=columns)
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, na_rep='', lineterminator='\n')
    for line in trailer:
        buffer.write(f'# {line}\n')
    return save_content(name, buffer.getvalue())


def write_json(name, data):
    content = JSONRenderer().render(clean_json(data), renderer_context={'indent': 2})
    return save_content(name, content + b'\n')


def read_csv(name):
    """Читает CSV, записанный write_csv (строки-комментарии пропускаются)."""
    with default_storage.open(name, 'rb') as handle:
        return pd.read_csv(handle, comment='#', float_precision='round_trip')


def read_trailer(name):
    with default_storage.open(name, 'rb') as handle:
        lines = handle.read().decode('utf-8').splitlines()
    return [line[2:] for line in lines if line.startswith('# ')]


def read_json(name):
    with default_storage.open(name, 'rb') as handle:
        return json.loads(handle.read().decode('utf-8'))
