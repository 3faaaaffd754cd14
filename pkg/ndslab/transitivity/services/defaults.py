"""Truncation defaults read from `settings.NDSLAB`."""
from __future__ import annotations

from fractions import Fraction
from multiprocessing.pool import ThreadPool
from typing import List

from django.conf import settings

from .phase_spaces import as_rational


DEFAULTS = {
    'N_MAX': 32,
    'K_MAX': 4096,
    'CANTOR_LENGTH': 32,
    'BREAKPOINT_BUDGET': 10 ** 6,
    'HORIZON': 32,
    'WORKERS': 1,
    'EPS_GRID': ['1/8', '1/32', '1/128'],
    'TRACE_THRESHOLD': '1/128',
    'SAMPLE_GRID': 64,
}


def setting(key: str):
    return getattr(settings, 'NDSLAB', {}).get(key, DEFAULTS[key])


def n_max() -> int:
    return setting('N_MAX')


def k_max() -> int:
    return setting('K_MAX')


def cantor_length() -> int:
    return setting('CANTOR_LENGTH')


def breakpoint_budget() -> int:
    return setting('BREAKPOINT_BUDGET')


def horizon() -> int:
    return setting('HORIZON')


def workers() -> int:
    return max(1, setting('WORKERS'))


def eps_grid() -> List[Fraction]:
    return [as_rational(value) for value in setting('EPS_GRID')]


def trace_threshold() -> Fraction:
    return as_rational(setting('TRACE_THRESHOLD'))


def sample_grid() -> int:
    return setting('SAMPLE_GRID')


def parallel_map(function, items) -> List:
    """Order-preserving map over the configured number of worker threads."""
    items = list(items)
    count = workers()
    if count == 1 or len(items) < 2:
        return [function(item) for item in items]
    with ThreadPool(min(count, len(items))) as pool:
        return pool.map(function, items)
