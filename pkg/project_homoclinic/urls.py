from django.contrib import admin
from django.urls import path, include
from rest_framework.routers import DefaultRouter

from app_homoclinic.views import ScanRunViewSet

router = DefaultRouter()
router.register('api/runs', ScanRunViewSet)

urlpatterns = [
    path('admin/', admin.site.urls),
    path('', include(router.urls)),
]
