from django.apps import AppConfig


class AppHomoclinicConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'app_homoclinic'
    verbose_name = 'Гомоклинические бифуркации'
