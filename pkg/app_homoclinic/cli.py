"""
Точка входа командной строки: `python -m app_homoclinic.cli scalar-cusps --n-range 10:90`.

Имена подкоманд с дефисами соответствуют командам управления Django
с подчёркиваниями. Коды завершения: 0 - успех, 1 - ошибка использования
или конфигурации, 2 - ошибка расчёта (область определения, сходимость).
"""

import os
import sys

SUBCOMMANDS = (
    'scalar-horns', 'scalar-cusps', 'scalar-gpd', 'map3d-curves', 'map3d-codim2',
    'sechom', 'asymptotics-compare', 'ls-eigen', 'ls-3dl-locus', 'ls-shoot',
)


def run(argv=None, stdout=None, stderr=None):
    """
    Запускает подкоманду и возвращает код завершения.

    Args:
        argv: список аргументов без имени программы (по умолчанию sys.argv[1:])

    Returns:
        int: 0, 1 или 2
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if not argv or argv[0] not in SUBCOMMANDS:
        given = argv[0] if argv else ''
        stderr.write(f'Неизвестная подкоманда {given!r}; доступны: {", ".join(SUBCOMMANDS)}\n')
        return 1

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'project_homoclinic.settings.local')
    import django
    from django.core.management import call_command
    from django.core.management.base import CommandError

    django.setup()
    try:
        call_command(argv[0].replace('-', '_'), *argv[1:], stdout=stdout, stderr=stderr)
    except CommandError as exc:
        stderr.write(f'{exc}\n')
        return exc.returncode
    return 0


if __name__ == '__main__':
    sys.exit(run())
