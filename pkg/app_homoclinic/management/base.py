"""
Общая основа команд управления: разрешение конфигурации, запись манифеста
и учёт запусков в ScanRun.

Порядок разрешения конфигурации: значения из settings.HOMOCLINIC → профиль
(--profile) → JSON-файл (--config, секции model, continuation,
lorenz_stenflo, scan) → флаги командной строки.
"""

# Standard library imports
import copy
import json
import logging
import posixpath

# Third-party imports
import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError
from django.utils import timezone

# Local imports
from ..exceptions import HomoclinicError
from ..models import ScanRun
from ..serializers import RunConfigSerializer
from ..services.continuation import StepControl
from ..services.exporters import write_json
from ..services.lorenz_stenflo import LSParams
from ..services.model_maps import ModelParams

logger = logging.getLogger(__name__)

MODEL_FIELDS = tuple(ModelParams().to_dict())
LS_FIELDS = tuple(LSParams().to_dict())
CONTINUATION_KEYS = ('newton_tol', 'newton_max_iter', 'step_control', 'max_points', 'theta_half_width', 'mu1_max')
SCAN_KEYS = ('n_range', 'm_range', 'output_dir', 'options')
LS_KEYS = ('ls_rtol', 'ls_atol')
NUMERICAL_ERRORS = (HomoclinicError, np.linalg.LinAlgError, ArithmeticError, ValueError)


def parse_range(value):
    """Диапазон 'a:b' (включительно) или одно число 'a'."""
    try:
        parts = [int(part) for part in value.split(':')]
    except ValueError:
        raise CommandError(f'Некорректный диапазон {value!r}, ожидается a:b', returncode=1)
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise CommandError(f'Некорректный диапазон {value!r}, ожидается a:b', returncode=1)
    return parts


class HomoclinicCommand(BaseCommand):
    """
    Базовая команда расчёта.

    Наследники задают option_defaults (собственные параметры команды,
    попадают в config['options']), add_command_arguments и run_command,
    который возвращает список записанных файлов.
    """

    option_defaults = {}
    uses_map3d_defaults = False

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON-файл конфигурации')
        parser.add_argument('--profile', help='Именованный набор параметров из settings')
        parser.add_argument('--output-dir', dest='output_dir', help='Каталог результатов в хранилище')
        parser.add_argument('--workers', type=int, help='Число потоков для независимых индексов')
        parser.add_argument('--tol', type=float, dest='newton_tol', help='Порог невязки Ньютона')
        parser.add_argument('--max-iter', type=int, dest='newton_max_iter')
        parser.add_argument('--max-points', type=int, dest='max_points')
        parser.add_argument('--h0', type=float)
        parser.add_argument('--h-min', type=float, dest='h_min')
        parser.add_argument('--h-max', type=float, dest='h_max')
        parser.add_argument('--theta-half-width', type=float, dest='theta_half_width')
        parser.add_argument('--mu1-max', type=float, dest='mu1_max')
        parser.add_argument('--rtol', type=float, dest='ls_rtol', help='Относительный допуск интегратора')
        parser.add_argument('--atol', type=float, dest='ls_atol', help='Абсолютный допуск интегратора')
        parser.add_argument('--n-range', type=parse_range, dest='n_range', help='Номера рогов a:b')
        parser.add_argument('--m-range', type=parse_range, dest='m_range', help='Номера парабол a:b')
        for name in MODEL_FIELDS:
            parser.add_argument(f'--{name}', type=float, dest=f'model_{name}')
        for name in LS_FIELDS:
            parser.add_argument(f'--{name}', type=float, dest=f'ls_{name}')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run_command(self, config):
        raise NotImplementedError

    def defaults(self):
        base = settings.HOMOCLINIC
        config = {
            'command': self.command_name,
            'profile': '',
            'model': ModelParams().to_dict(),
            'lorenz_stenflo': LSParams().to_dict(),
            'n_range': list(base['N_RANGE']),
            'm_range': list(base['M_RANGE']),
            'newton_tol': base['NEWTON_TOL'],
            'newton_max_iter': base['NEWTON_MAX_ITER'],
            'step_control': dict(base['STEP_CONTROL']),
            'max_points': base['MAX_POINTS'],
            'theta_half_width': base['THETA_HALF_WIDTH'],
            'mu1_max': base['MU1_MAX'],
            'ls_rtol': base['LS_RTOL'],
            'ls_atol': base['LS_ATOL'],
            'output_dir': '.',
            'options': copy.deepcopy(self.option_defaults),
        }
        if self.uses_map3d_defaults:
            map3d = base['MAP3D']
            config.update({
                'step_control': dict(map3d['STEP_CONTROL']),
                'max_points': map3d['MAX_POINTS'],
                'n_range': list(map3d['N_RANGE']),
                'theta_half_width': map3d['THETA_HALF_WIDTH'],
            })
        return config

    def apply_profile(self, config, profile):
        base = settings.HOMOCLINIC
        if profile in base['MODEL_PROFILES']:
            config['model'].update(base['MODEL_PROFILES'][profile])
        elif profile in base['LS_PROFILES']:
            config['lorenz_stenflo'].update(base['LS_PROFILES'][profile])
        else:
            known = sorted([*base['MODEL_PROFILES'], *base['LS_PROFILES']])
            raise CommandError(f'Неизвестный профиль {profile!r}; доступны: {", ".join(known)}', returncode=1)
        config['profile'] = profile

    def apply_file(self, config, path):
        try:
            with open(path, encoding='utf-8') as handle:
                data = json.load(handle)
        except (OSError, ValueError) as exc:
            raise CommandError(f'Не удалось прочитать конфигурацию {path}: {exc}', returncode=1)
        if not isinstance(data, dict):
            raise CommandError('Конфигурация должна быть JSON-объектом', returncode=1)

        allowed = {
            'model': MODEL_FIELDS,
            'lorenz_stenflo': LS_FIELDS + LS_KEYS,
            'continuation': CONTINUATION_KEYS,
            'scan': SCAN_KEYS,
        }
        for section, values in data.items():
            if section not in allowed or not isinstance(values, dict):
                raise CommandError(f'Неизвестная секция конфигурации {section!r}', returncode=1)
            unknown = sorted(set(values) - set(allowed[section]))
            if unknown:
                raise CommandError(f'Неизвестные ключи в секции {section}: {", ".join(unknown)}', returncode=1)
            for key, value in values.items():
                if section == 'model':
                    config['model'][key] = value
                elif section == 'lorenz_stenflo' and key in LS_FIELDS:
                    config['lorenz_stenflo'][key] = value
                elif key in ('step_control', 'options') and isinstance(value, dict):
                    config[key].update(value)
                else:
                    config[key] = value

    def apply_flags(self, config, options):
        for name in MODEL_FIELDS:
            if options.get(f'model_{name}') is not None:
                config['model'][name] = options[f'model_{name}']
        for name in LS_FIELDS:
            if options.get(f'ls_{name}') is not None:
                config['lorenz_stenflo'][name] = options[f'ls_{name}']
        for key in (*CONTINUATION_KEYS, *LS_KEYS, *SCAN_KEYS):
            if key in ('step_control', 'options'):
                continue
            if options.get(key) is not None:
                config[key] = options[key]
        for key in ('h0', 'h_min', 'h_max'):
            if options.get(key) is not None:
                config['step_control'][key] = options[key]
        for key in self.option_defaults:
            if options.get(key) is not None:
                config['options'][key] = options[key]

    def resolve_config(self, options):
        """
        Собирает и проверяет конфигурацию запуска.

        Raises:
            CommandError: returncode=1 при ошибках конфигурации
        """
        config = self.defaults()
        if options.get('profile'):
            self.apply_profile(config, options['profile'])
        if options.get('config'):
            self.apply_file(config, options['config'])
        self.apply_flags(config, options)

        serializer = RunConfigSerializer(data=config)
        if not serializer.is_valid():
            raise CommandError(f'Некорректная конфигурация: {json.dumps(serializer.errors, ensure_ascii=False)}',
                               returncode=1)
        return json.loads(json.dumps(serializer.validated_data))

    def output_name(self, suffix):
        name = f'{self.command_name}{suffix}'
        directory = self.config['output_dir']
        return name if directory == '.' else posixpath.join(directory, name)

    @property
    def model_params(self):
        return ModelParams.from_dict(self.config['model'])

    @property
    def ls_params(self):
        return LSParams.from_dict(self.config['lorenz_stenflo'])

    @property
    def step_control(self):
        return StepControl.from_dict(self.config['step_control'])

    def n_values(self):
        lower, upper = self.config['n_range']
        return list(range(lower, upper + 1))

    def m_values(self):
        lower, upper = self.config['m_range']
        return list(range(lower, upper + 1))

    def _record(self, run, **fields):
        if run is None:
            return
        try:
            for key, value in fields.items():
                setattr(run, key, value)
            run.save()
        except DatabaseError as exc:
            logger.warning('Не удалось обновить запись запуска %s: %s', self.command_name, exc)

    def _start_run(self):
        if not settings.HOMOCLINIC.get('RECORD_RUNS', True):
            return None
        try:
            return ScanRun.objects.create(
                command=self.command_name, config=self.config, version=settings.HOMOCLINIC['VERSION'],
            )
        except DatabaseError as exc:
            logger.warning('Запуск %s не записан в базу: %s', self.command_name, exc)
            return None

    def handle(self, *args, **options):
        self.config = self.resolve_config(options)
        self.workers = options.get('workers') or settings.HOMOCLINIC['WORKERS']
        if self.workers < 1:
            raise CommandError('--workers должно быть >= 1', returncode=1)

        run = self._start_run()
        try:
            outputs = list(self.run_command(self.config))
        except NUMERICAL_ERRORS as exc:
            message = str(exc) if isinstance(exc, HomoclinicError) else f'{type(exc).__name__}: {exc}'
            manifest = self.manifest([], status='failed', error=message)
            manifest_name = self._write_manifest(manifest)
            self._record(run, status=ScanRun.Status.FAILED, exit_code=2, message=message,
                         output_files=[manifest_name] if manifest_name else [], manifest=manifest,
                         finished_at=timezone.now())
            logger.error('%s: %s', self.command_name, message)
            raise CommandError(message, returncode=2) from exc

        manifest = self.manifest(outputs)
        manifest_name = self._write_manifest(manifest)
        self._record(run, status=ScanRun.Status.SUCCEEDED, exit_code=0, output_files=[*outputs, manifest_name],
                     manifest=manifest, finished_at=timezone.now())
        self.stdout.write(self.style.SUCCESS(f'{self.command_name}: записано {len(outputs) + 1} файлов'))

    def manifest(self, outputs, status='succeeded', error=''):
        manifest = {
            'command': self.command_name,
            'version': settings.HOMOCLINIC['VERSION'],
            'status': status,
            'config': self.config,
            'outputs': outputs,
        }
        if error:
            manifest['error'] = error
        return manifest

    def _write_manifest(self, manifest):
        if manifest['status'] == 'succeeded':
            return write_json(self.output_name('.manifest.json'), manifest)
        # на ветви ошибки сбой записи не должен скрыть исходную ошибку
        try:
            return write_json(self.output_name('.manifest.json'), manifest)
        except OSError as exc:
            logger.warning('Манифест %s не записан: %s', self.command_name, exc)
            return None
