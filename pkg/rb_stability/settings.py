"""
Django settings for rb_stability project.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'django-insecure-key-for-development')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get('DJANGO_DEBUG', '1') == '1'

ALLOWED_HOSTS = ['localhost', '127.0.0.1', '0.0.0.0']

# Application definition
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'reduced_basis.apps.ReducedBasisConfig',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'rb_stability.urls'

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

# Database
# Experiment runs are only persisted on request (run_experiment --record),
# a local SQLite file is enough for that.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('RB_DATABASE', str(BASE_DIR / 'db.sqlite3')),
    }
}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

STATIC_URL = '/static/'

MEDIA_ROOT = BASE_DIR / 'media'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Cache settings (memory level of the truth-solution cache)
CACHES = {
    'default': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'rb-stability-cache',
    }
}

# Reduced basis numerics and experiment settings.
# Every entry can be overridden from the environment.
REDUCED_BASIS = {
    # High-dimensional solver: 'cg' (Jacobi-preconditioned CG) or 'direct' (sparse LU)
    'SOLVER_METHOD': os.environ.get('RB_SOLVER_METHOD', 'cg'),
    'SOLVER_TOL': float(os.environ.get('RB_SOLVER_TOL', '1e-14')),
    # None means 50 * sqrt(N) + 1000
    'SOLVER_MAXITER': int(os.environ['RB_SOLVER_MAXITER']) if os.environ.get('RB_SOLVER_MAXITER') else None,

    # Gram-Schmidt with re-iteration
    'GS_REITERATION_THRESHOLD': 0.1,
    'GS_DEFLATION_TOL': float(os.environ.get('RB_GS_DEFLATION_TOL', '1e-10')),
    'GS_MAX_PASSES': 10,

    # Reduced basis extension drops a snapshot only at round-off level
    'BASIS_DEFLATION_TOL': float(os.environ.get('RB_BASIS_DEFLATION_TOL', '1e-14')),

    # Denominators below this switch relative errors to absolute ones
    'RELATIVE_FLOOR': 1e-30,

    # Thread pool size for estimator sweeps over a parameter set
    'ESTIMATOR_WORKERS': int(os.environ.get('RB_ESTIMATOR_WORKERS', '1')),

    # Truth-solution cache
    'MEMORY_CACHE_SIZE_LIMIT': 1024 * 1024 * 10,  # 10MB per array
    'MEMORY_CACHE_EXPIRY': 60 * 60 * 12,  # 12 hours
    'FILE_CACHE_ENABLED': os.environ.get('RB_FILE_CACHE', '1') == '1',
    'FILE_CACHE_DIR': os.environ.get('RB_FILE_CACHE_DIR', str(MEDIA_ROOT / 'cache' / 'solutions')),
    'FILE_CACHE_EXPIRY': 60 * 60 * 24 * 7,  # 7 days

    # Default CSV target of run_experiment
    'OUTPUT_PATH': os.environ.get('RB_OUTPUT_PATH', 'errors.csv'),
}

# Logging configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': os.getenv('DJANGO_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
        'reduced_basis': {
            'handlers': ['console'],
            'level': os.getenv('RB_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
