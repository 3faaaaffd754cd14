"""
Django settings for the ndslab project.

The project has no web surface: it hosts the `transitivity` app, whose
management commands run exact experiments on nonautonomous dynamical systems.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'django-insecure-ndslab-local-experiments-only')

DEBUG = os.getenv('DJANGO_DEBUG', '0') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'transitivity',
]

# Experiments keep their results in report files, not in a database.
DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Truncation defaults for condition checks, gallery runs and CLI configs.
# Rationals are written as exact "p/q" strings.

NDSLAB = {
    'N_MAX': int(os.getenv('NDSLAB_N_MAX', 32)),
    'K_MAX': int(os.getenv('NDSLAB_K_MAX', 4096)),
    'CANTOR_LENGTH': int(os.getenv('NDSLAB_CANTOR_LENGTH', 32)),
    'BREAKPOINT_BUDGET': int(os.getenv('NDSLAB_BREAKPOINT_BUDGET', 1_000_000)),
    'HORIZON': int(os.getenv('NDSLAB_HORIZON', 32)),
    'WORKERS': int(os.getenv('NDSLAB_WORKERS', 1)),
    'EPS_GRID': ['1/8', '1/32', '1/128'],
    'TRACE_THRESHOLD': '1/128',
    'SAMPLE_GRID': 64,
}


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {name} {message}',
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
        'transitivity': {
            'handlers': ['console'],
            'level': os.getenv('NDSLAB_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
