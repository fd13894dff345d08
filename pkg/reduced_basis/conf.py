"""
Access to the REDUCED_BASIS settings dict with app-level defaults.
"""
from django.conf import settings

DEFAULTS = {
    'SOLVER_METHOD': 'cg',
    'SOLVER_TOL': 1e-14,
    'SOLVER_MAXITER': None,
    'GS_REITERATION_THRESHOLD': 0.1,
    'GS_DEFLATION_TOL': 1e-10,
    'GS_MAX_PASSES': 10,
    'BASIS_DEFLATION_TOL': 1e-14,
    'RELATIVE_FLOOR': 1e-30,
    'ESTIMATOR_WORKERS': 1,
    'MEMORY_CACHE_SIZE_LIMIT': 1024 * 1024 * 10,
    'MEMORY_CACHE_EXPIRY': 60 * 60 * 12,
    'FILE_CACHE_ENABLED': False,
    'FILE_CACHE_DIR': 'media/cache/solutions',
    'FILE_CACHE_EXPIRY': 60 * 60 * 24 * 7,
    'OUTPUT_PATH': 'errors.csv',
}


def get_setting(name):
    """Look up a REDUCED_BASIS setting, falling back to the app default."""
    project_settings = getattr(settings, 'REDUCED_BASIS', {})
    if name in project_settings:
        return project_settings[name]
    return DEFAULTS[name]
