from django.contrib import admin

from app_homoclinic.models import ScanRun


@admin.register(ScanRun)
class ScanRunAdmin(admin.ModelAdmin):
    """
    Административная панель для запусков расчётов.

    Отображает команду, статус и код завершения с фильтрацией по команде
    и статусу и поиском по сообщению об ошибке.
    """

    list_display = ['id', 'command', 'status', 'exit_code', 'version', 'created_at', 'finished_at']
    list_filter = ['command', 'status', 'created_at']
    search_fields = ['command', 'message']
    readonly_fields = ['created_at', 'finished_at']
    ordering = ['-created_at']
