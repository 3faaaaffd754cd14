"""Execution of declarative experiment configs: one report record per requested check."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from ..exceptions import UsageError, guard
from . import analysis, conditions, defaults
from .maps import as_point
from .phase_spaces import CANTOR, CantorWord, RationalInterval, as_rational
from .reports import decimal_text, to_record
from .systems import NDSystem

logger = logging.getLogger(__name__)

# Statuses that always make a run fail, whatever the config expects.
FAILURE_STATUSES = frozenset({analysis.THEOREM_CHECK_FAILURE, analysis.INSTANCE_CHECK_FAILURE})


@dataclass
class CheckOutcome:
    index: int
    check: str
    status: str
    record: Dict[str, object]
    failed: bool


def _eps(check: Dict[str, object], truncation: Dict[str, object]) -> Fraction:
    if 'eps' in check:
        return check['eps']
    grid = truncation.get('eps') or defaults.eps_grid()
    return grid[0]


def _point(system: NDSystem, text) -> object:
    if system.space == CANTOR:
        return CantorWord.from_string(str(text), system.limit.word_length)
    return as_point(system.space, as_rational(text))


def _status(report) -> str:
    for attribute in ('verdict', 'status'):
        value = getattr(report, attribute, None)
        if value is not None:
            return value
    return 'computed'


def _seed(check) -> RationalInterval:
    seed = check.get('seed') or ['1/4', '3/4']
    guard([(UsageError, 'seed must be a pair ["lo", "hi"]', not isinstance(seed, list) or len(seed) != 2)])
    return RationalInterval(*seed)


def _common(check, truncation):
    return {
        'N_max': check.get('N_max') or truncation.get('N_max'),
        'K_max': check.get('K_max') or truncation.get('K_max'),
    }


def _horizon(check, truncation) -> Optional[int]:
    return check.get('horizon') or truncation.get('horizon')


RUNNERS: Dict[str, Callable[[NDSystem, Dict[str, object], Dict[str, object]], object]] = {
    'CC': lambda system, check, t: conditions.check_CC(system, _eps(check, t), mode=check.get('mode', 'exact'), **_common(check, t)),
    'CCstar': lambda system, check, t: conditions.check_CCstar(system, _eps(check, t), mode=check.get('mode', 'exact'), **_common(check, t)),
    'L': lambda system, check, t: conditions.check_L(system, _common(check, t)['N_max'], check.get('mode', 'exact'), check.get('threshold')),
    'Lstar': lambda system, check, t: conditions.check_Lstar(system, _common(check, t)['N_max'], check.get('mode', 'exact'), check.get('threshold')),
    'DO': lambda system, check, t: conditions.check_DO(system, _point(system, check.get('x0', '0')), _eps(check, t), _common(check, t)['N_max']),
    'DOstar': lambda system, check, t: conditions.check_DOstar(system, _point(system, check.get('x0', '0')), _eps(check, t), _common(check, t)['N_max']),
    'transitivity': lambda system, check, t: analysis.test_transitivity(system.limit_map, _eps(check, t), _horizon(check, t)),
    'nds-transitivity': lambda system, check, t: analysis.test_nds_transitivity(system, _eps(check, t), _horizon(check, t)),
    'sensitivity': lambda system, check, t: analysis.test_sensitivity(
        system.limit_map, check.get('delta', Fraction(1, 4)), check.get('radius', Fraction(1, 32)), _horizon(check, t)),
    'orbit-coverage': lambda system, check, t: analysis.orbit_coverage(
        system, _point(system, check.get('x0', '0')), _eps(check, t), _common(check, t)['N_max']),
    'invariant-interval': lambda system, check, t: analysis.find_invariant_interval(
        system.fiber(check['n']) if 'n' in check else system.limit_map, _seed(check)),
    'fix-inclusion': lambda system, check, t: analysis.check_fix_inclusion(
        system.limit_map, system.fiber(check.get('n', 1)), check.get('depth', 3)),
    'prefix-agreement': lambda system, check, t: analysis.check_prefix_agreement(
        system, check.get('p', Fraction(0)), check.get('depth', 3), _common(check, t)['N_max']),
    'agreement-measure': lambda system, check, t: {
        'n': check.get('n', 1),
        'measure': analysis.agreement_measure(system.fiber(check.get('n', 1)), system.limit_map),
    },
    'eventual-equality': lambda system, check, t: analysis.check_eventual_equality(
        system, eps=_eps(check, t), grid_eps=check.get('grid_eps'), horizon=_horizon(check, t), **_common(check, t)),
    'equivalence': lambda system, check, t: analysis.check_equivalence_instance(
        system, _eps(check, t), _common(check, t)['N_max'], _horizon(check, t)),
    'fiber-inheritance': lambda system, check, t: analysis.check_fiber_inheritance(
        system, _eps(check, t), grid_eps=check.get('grid_eps'), horizon=_horizon(check, t), **_common(check, t)),
    'nds-inheritance': lambda system, check, t: analysis.check_nds_inheritance(
        system, _eps(check, t), grid_eps=check.get('grid_eps'), horizon=_horizon(check, t), **_common(check, t)),
    'invariant-intervals': lambda system, check, t: analysis.check_invariant_intervals(
        system, _eps(check, t), _common(check, t)['N_max'], check.get('grid_eps'), _horizon(check, t)),
}


def run_check(index: int, system: NDSystem, check: Dict[str, object], truncation: Dict[str, object]) -> CheckOutcome:
    name = check['check']
    guard([(UsageError, f'unknown check {name!r}', name not in RUNNERS)])
    report = RUNNERS[name](system, check, truncation)
    status = _status(report) if not isinstance(report, dict) else 'computed'
    expected = check.get('expect')
    failed = status in FAILURE_STATUSES or (expected is not None and expected != status)
    if failed:
        logger.warning('check %d (%s) on %s: status %s, expected %s', index, name, system, status, expected or 'no failure')
    record = {
        'index': index,
        'check': name,
        'status': status,
        'expect': expected,
        'passed': not failed,
        'parameters': to_record({key: value for key, value in check.items() if key not in ('check', 'expect')}),
        'report': to_record(report),
    }
    return CheckOutcome(index, name, status, record, failed)


def run_checks(system: NDSystem, checks: List[Dict[str, object]], truncation: Dict[str, object]) -> List[CheckOutcome]:
    """Checks run in parallel when configured; outcomes keep declaration order."""
    logger.info('running %d checks on %s', len(checks), system)
    return defaults.parallel_map(lambda item: run_check(item[0], system, item[1], truncation), list(enumerate(checks)))


def summary_rows(outcomes: List[CheckOutcome]) -> List[List[object]]:
    rows = []
    for outcome in outcomes:
        report = outcome.record['report']
        n0 = report.get('n0') if isinstance(report, dict) else None
        coverage = report.get('coverage') if isinstance(report, dict) else None
        rows.append([
            outcome.index, outcome.check, outcome.status, 'yes' if not outcome.failed else 'no',
            '' if n0 is None else n0,
            '' if coverage is None else coverage,
            '' if coverage is None else decimal_text(coverage),
        ])
    return rows


SUMMARY_HEADER = ['index', 'check', 'status', 'passed', 'n0', 'coverage', 'coverage_decimal']


def system_summary(system: NDSystem) -> str:
    prefix = f', prefix of {len(system.prefix)}' if system.prefix else ''
    return f'{system} on {system.space}{prefix}'

