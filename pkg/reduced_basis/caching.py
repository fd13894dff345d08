"""
Two-level cache for high-dimensional solutions.

Test-parameter solutions are reused across basis sizes and across runs of
the same configuration. Small arrays live in the Django cache (memory); all
arrays are additionally written as ``.npy`` files when the file cache is
enabled. Stored arrays are bit-exact, so cached and fresh runs produce the
same output.
"""
import hashlib
import logging
import os
import time

import numpy as np
from django.core.cache import cache

from .conf import get_setting

# Set up logging
logger = logging.getLogger(__name__)

KEY_PREFIX = 'hd_solution_'


def solver_signature(model):
    """Solver method and tolerance the model's solves actually use."""
    method = model.solver_method or get_setting('SOLVER_METHOD')
    tol = get_setting('SOLVER_TOL') if model.solver_tol is None else model.solver_tol
    return method, float(tol)


def get_cache_key(model, mu):
    """Cache key for the solution of ``model`` at ``mu``."""
    mu = np.ascontiguousarray(mu, dtype=float)
    method, tol = solver_signature(model)
    params = f"{model.name}:{model.dim}:{method}:{tol!r}:{mu.tobytes().hex()}"
    return f"{KEY_PREFIX}{hashlib.md5(params.encode()).hexdigest()}"


def get_file_cache_path(cache_key):
    return os.path.join(get_setting('FILE_CACHE_DIR'), f"{cache_key}.npy")


def is_in_file_cache(cache_key):
    """Check if a key is in the file cache, removing it if expired."""
    cache_file = get_file_cache_path(cache_key)
    if not os.path.exists(cache_file):
        return False
    file_age = time.time() - os.path.getmtime(cache_file)
    if file_age < get_setting('FILE_CACHE_EXPIRY'):
        return True
    try:
        os.remove(cache_file)
    except OSError:
        logger.error(f"Failed to remove expired cache file: {cache_file}")
    return False


def get_from_file_cache(cache_key):
    if not is_in_file_cache(cache_key):
        return None
    cache_file = get_file_cache_path(cache_key)
    try:
        return np.load(cache_file, allow_pickle=False)
    except (OSError, ValueError) as e:
        logger.error(f"Error reading cache file {cache_file}: {e}")
        return None


def save_to_file_cache(cache_key, solution):
    cache_file = get_file_cache_path(cache_key)
    try:
        os.makedirs(os.path.dirname(cache_file), exist_ok=True)
        np.save(cache_file, solution, allow_pickle=False)
        return True
    except OSError as e:
        logger.error(f"Error writing to cache file {cache_file}: {e}")
        return False


def get_cached_solution(model, mu, use_file_cache=None):
    """
    Look up a solution, memory first.

    Returns:
        tuple: (solution or None, 'memory' / 'file' / None)
    """
    cache_key = get_cache_key(model, mu)
    solution = cache.get(cache_key)
    if solution is not None:
        return solution, 'memory'

    if use_file_cache is None:
        use_file_cache = get_setting('FILE_CACHE_ENABLED')
    if use_file_cache:
        solution = get_from_file_cache(cache_key)
        if solution is not None:
            if solution.nbytes <= get_setting('MEMORY_CACHE_SIZE_LIMIT'):
                cache.set(cache_key, solution, get_setting('MEMORY_CACHE_EXPIRY'))
            return solution, 'file'
    return None, None


def cache_solution(model, mu, solution, use_file_cache=None):
    """Store a solution in the caches that fit its size."""
    cache_key = get_cache_key(model, mu)
    if use_file_cache is None:
        use_file_cache = get_setting('FILE_CACHE_ENABLED')
    file_cached = save_to_file_cache(cache_key, solution) if use_file_cache else False

    if solution.nbytes <= get_setting('MEMORY_CACHE_SIZE_LIMIT'):
        cache.set(cache_key, solution, get_setting('MEMORY_CACHE_EXPIRY'))
        return 'both' if file_cached else 'memory'
    logger.debug(f"Solution {cache_key} too large for the memory cache ({solution.nbytes} bytes)")
    return 'file' if file_cached else None


def solve_cached(model, mu, solve, use_file_cache=None):
    """Return the cached solution at ``mu`` or compute it with ``solve(model, mu)``."""
    solution, source = get_cached_solution(model, mu, use_file_cache)
    if solution is not None:
        logger.debug(f"{source.capitalize()} cache hit for mu={np.asarray(mu).tolist()}")
        return solution
    solution = solve(model, mu)
    cache_solution(model, mu, solution, use_file_cache)
    return solution


def clear_solution_cache():
    """Clear the file cache; memory entries expire on their own."""
    cache_dir = get_setting('FILE_CACHE_DIR')
    if not os.path.isdir(cache_dir):
        return 0
    removed = 0
    for name in os.listdir(cache_dir):
        if name.startswith(KEY_PREFIX):
            os.remove(os.path.join(cache_dir, name))
            removed += 1
    logger.info(f"Removed {removed} cached solutions from {cache_dir}")
    return removed
