"""
Django settings for config project.

El proyecto no usa base de datos: Django aporta el marco de comandos de gestión,
la configuración y el runner de tests del pipeline de predicción de cortes.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'django-insecure-outage-pipeline-local-only')

DEBUG = os.getenv('DJANGO_DEBUG', 'False').lower() in ('1', 'true', 'yes')

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'core',
    'outages',
    'rest_framework',
]

MIDDLEWARE = []

# Sin base de datos: todos los artefactos son archivos CSV/JSON por etapa
DATABASES = {}

USE_I18N = False

USE_TZ = True

TIME_ZONE = 'UTC'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

TEST_RUNNER = 'django.test.runner.DiscoverRunner'


# ----------------------------------------------------------------------------------
# PIPELINE DE CORTES
# ----------------------------------------------------------------------------------
# Valores por defecto; el archivo --config y los flags de cada comando tienen prioridad
OUTAGE_PIPELINE = {
    'out_dir': os.getenv('OUTAGE_OUT_DIR', str(BASE_DIR / 'artifacts')),
    'seed': int(os.getenv('OUTAGE_SEED', '0')),
    'utc_offset_hours': float(os.getenv('OUTAGE_UTC_OFFSET_HOURS', '-5')),
}

OUTAGE_LOG_LEVEL = os.getenv('OUTAGE_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '[{levelname}] {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'outages': {
            'handlers': ['console'],
            'level': OUTAGE_LOG_LEVEL,
            'propagate': False,
        },
        'core': {
            'handlers': ['console'],
            'level': OUTAGE_LOG_LEVEL,
            'propagate': False,
        },
    },
}
