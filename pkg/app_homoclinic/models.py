from django.db import models


class ScanRun(models.Model):
    """
    Запись о запуске команды расчёта.
    Хранит разрешённую конфигурацию, список выходных файлов и код завершения.
    """

    class Status(models.TextChoices):
        RUNNING = 'running', 'Расчёт выполняется'
        SUCCEEDED = 'succeeded', 'Расчёт завершён'
        FAILED = 'failed', 'Расчёт завершился ошибкой'

    command = models.CharField(max_length=64, verbose_name='Команда')
    status = models.CharField(max_length=20, choices=Status.choices, default=Status.RUNNING, verbose_name='Статус')
    config = models.JSONField(default=dict, verbose_name='Конфигурация')
    output_files = models.JSONField(default=list, verbose_name='Выходные файлы')
    manifest = models.JSONField(default=dict, blank=True, verbose_name='Манифест')
    exit_code = models.IntegerField(null=True, blank=True, verbose_name='Код завершения')
    message = models.TextField(blank=True, default='', verbose_name='Сообщение')
    version = models.CharField(max_length=20, verbose_name='Версия инструментария')
    created_at = models.DateTimeField(auto_now_add=True, verbose_name='Дата запуска')
    finished_at = models.DateTimeField(null=True, blank=True, verbose_name='Дата завершения')

    def __str__(self):
        return f'{self.command} #{self.pk} ({self.status})'

    class Meta:
        verbose_name = 'Запуск расчёта'
        verbose_name_plural = 'Запуски расчётов'
        ordering = ['-created_at']
