from django_filters.rest_framework import DjangoFilterBackend
from rest_framework import status, viewsets
from rest_framework.decorators import action
from rest_framework.filters import OrderingFilter
from rest_framework.pagination import PageNumberPagination
from rest_framework.response import Response

from .models import ScanRun
from .serializers import ScanRunSerializer


class ScanRunsPagination(PageNumberPagination):
    """Пагинация для списка запусков."""
    page_size_query_param = 'size'
    max_page_size = 50


class ScanRunViewSet(viewsets.ReadOnlyModelViewSet):
    """
    ViewSet для просмотра запусков расчётов.

    Только чтение: запуски создаются командами управления. Фильтрация
    по команде и статусу, сортировка по дате запуска.
    """
    queryset = ScanRun.objects.all()
    serializer_class = ScanRunSerializer
    pagination_class = ScanRunsPagination
    filter_backends = [DjangoFilterBackend, OrderingFilter]
    filterset_fields = ['command', 'status']
    ordering_fields = ['created_at']

    @action(detail=True, methods=['get'])
    def manifest(self, request, pk=None):
        """Манифест запуска: команда, версия, конфигурация, выходные файлы."""
        run = self.get_object()
        if not run.manifest:
            return Response({'error': 'Манифест ещё не записан'}, status=status.HTTP_404_NOT_FOUND)
        return Response(run.manifest, status=status.HTTP_200_OK)
