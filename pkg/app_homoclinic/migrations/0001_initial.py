from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ScanRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=64, verbose_name='Команда')),
                ('status', models.CharField(choices=[('running', 'Расчёт выполняется'), ('succeeded', 'Расчёт завершён'), ('failed', 'Расчёт завершился ошибкой')], default='running', max_length=20, verbose_name='Статус')),
                ('config', models.JSONField(default=dict, verbose_name='Конфигурация')),
                ('output_files', models.JSONField(default=list, verbose_name='Выходные файлы')),
                ('manifest', models.JSONField(blank=True, default=dict, verbose_name='Манифест')),
                ('exit_code', models.IntegerField(blank=True, null=True, verbose_name='Код завершения')),
                ('message', models.TextField(blank=True, default='', verbose_name='Сообщение')),
                ('version', models.CharField(max_length=20, verbose_name='Версия инструментария')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Дата запуска')),
                ('finished_at', models.DateTimeField(blank=True, null=True, verbose_name='Дата завершения')),
            ],
            options={
                'verbose_name': 'Запуск расчёта',
                'verbose_name_plural': 'Запуски расчётов',
                'ordering': ['-created_at'],
            },
        ),
    ]
