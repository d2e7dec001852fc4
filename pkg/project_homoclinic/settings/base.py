import math
import os
from pathlib import Path


BASE_DIR = Path(__file__).resolve().parent.parent.parent


SECRET_KEY = os.environ.get(
    'DJANGO_SECRET_KEY',
    'django-insecure-3dl-homoclinic-toolkit-local-key-change-me',
)


DEBUG = False

ALLOWED_HOSTS = ['*']


INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    'rest_framework',
    'django_filters',

    'app_homoclinic',
]


MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]


ROOT_URLCONF = 'project_homoclinic.urls'


TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'project_homoclinic.wsgi.application'


LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


STATIC_URL = 'static/'
STATIC_ROOT = 'static'


DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


REST_FRAMEWORK = {
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_FILTER_BACKENDS': [
        'django_filters.rest_framework.DjangoFilterBackend',
    ],
}


# Каталог для CSV/JSON результатов расчётов
HOMOCLINIC_OUTPUT_ROOT = Path(os.environ.get('HOMOCLINIC_OUTPUT_ROOT', BASE_DIR / 'output'))


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'app_homoclinic': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}


# Параметры по умолчанию для всех расчётов
HOMOCLINIC = {
    'VERSION': '1.0.0',
    'RECORD_RUNS': True,
    'WORKERS': 1,
    'NEWTON_TOL': 1e-10,
    'NEWTON_MAX_ITER': 25,
    'STEP_CONTROL': {
        'h0': 1e-3,
        'h_min': 1e-9,
        'h_max': 0.05,
        'theta_max_deg': 30.0,
    },
    'MAX_POINTS': 2000,
    'N_RANGE': (10, 90),
    'M_RANGE': (10, 40),
    'THETA_HALF_WIDTH': math.pi / 2,
    'MU1_MAX': 0.1,
    # Кривые трёхмерного отображения: пары GPD у сборки разнесены на ~1e-2 по θ
    'MAP3D': {
        'STEP_CONTROL': {
            'h0': 1e-3,
            'h_min': 1e-10,
            'h_max': 2e-3,
            'theta_max_deg': 20.0,
        },
        'MAX_POINTS': 6000,
        'N_RANGE': (8, 20),
        'THETA_HALF_WIDTH': 2.0,
    },
    'MODEL_PROFILES': {
        'baseline': {
            'nu': 0.5, 'beta': 0.5, 'C1': 0.8, 'C2': 1.2,
            'alpha1': 0.8, 'alpha2': 1.3, 'alpha3': 0.6, 'alpha4': 1.1,
            'phi1': math.pi / 6, 'phi2': math.pi / 6,
        },
        'spring': {
            'nu': 0.5, 'beta': 0.5, 'C1': 0.8, 'C2': -1.2,
            'alpha1': 0.8, 'alpha2': 1.3, 'alpha3': 0.6, 'alpha4': 1.1,
            'phi1': math.pi / 6, 'phi2': math.pi / 6,
        },
        'resonance': {
            'nu': 0.5, 'beta': 0.5, 'C1': 0.8, 'C2': 1.2,
            'alpha1': 0.8, 'alpha2': 1.3, 'alpha3': 0.6, 'alpha4': 1.1,
            'phi1': math.pi / 3, 'phi2': math.pi / 3,
        },
    },
    'LS_PROFILES': {
        'ls-3dl': {
            'sigma': 0.1, 's': 33.0, 'eps1': 0.1, 'eps2': 0.3,
            'r': 15.302531, 'b': 1.9884,
        },
        # синоним ls-3dl
        'paper-3dl': {
            'sigma': 0.1, 's': 33.0, 'eps1': 0.1, 'eps2': 0.3,
            'r': 15.302531, 'b': 1.9884,
        },
        'ls-sigma1': {
            'sigma': 1.0, 's': 33.0, 'eps1': 0.1, 'eps2': 0.3,
            'r': 15.302531, 'b': 1.9884,
        },
    },
    'LS_RTOL': 1e-9,
    'LS_ATOL': 1e-12,
}
