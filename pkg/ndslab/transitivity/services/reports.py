"""Serialization of maps, systems and reports.

Rationals are always written as "p/q" strings (integers too, as "n/1"), JSON
keys are sorted and no record carries a timestamp, so rerunning a config
reproduces its report byte for byte.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List

from ..exceptions import ConfigurationError, DynamicsError, UsageError, guard
from .gallery import ACCUMULATING_PL
from .lazy_maps import LazyPLMap, lazy_family
from .maps import NAMED_IRRATIONALS, RATIONAL, AddingMachineMap, PLMap, RotationMap
from .phase_spaces import (
    CantorWord,
    CircleArc,
    CirclePoint,
    IntervalPoint,
    IntervalUnion,
    RationalInterval,
    as_rational,
)
from .systems import NDSystem

logger = logging.getLogger(__name__)

TRACE = 'trace'
COVERAGE = 'coverage'
PAIR_MATRIX = 'pair-matrix'
PLOT_KINDS = (TRACE, COVERAGE, PAIR_MATRIX)

SIGNIFICANT_DIGITS = 12

PL_KIND = 'pl'
ROTATION_KIND = 'rotation'
ADDING_MACHINE_KIND = 'adding_machine'
LAZY_PL_KIND = 'lazy_pl'
FULL = 'full'

MAP_FIELDS = {
    PL_KIND: {'kind', 'breakpoints', 'values'},
    ROTATION_KIND: {'kind', 'fraction', 'exactness'},
    ADDING_MACHINE_KIND: {'kind', 'word_length', 'truncation', 'increment'},
    LAZY_PL_KIND: {'kind', 'family', 'm'},
}
SYSTEM_FIELDS = {'space', 'name', 'limit', 'prefix', 'family', 'params', 'conjugacy'}

_TEXT_TYPES = (IntervalPoint, CirclePoint, CantorWord, RationalInterval, IntervalUnion)
_LAZY_LABEL = re.compile(r'^(?P<family>[a-z-]+?)-f(?:_(?P<m>\d+))?$')
_LAZY_FAMILIES = {'accumulating': ACCUMULATING_PL}
_LAZY_GALLERY = {ACCUMULATING_PL: 'accumulating-pl'}
_REQUIRED = object()


def fraction_text(value: Fraction) -> str:
    value = Fraction(value)
    return f'{value.numerator}/{value.denominator}'


def decimal_text(value) -> str:
    value = as_rational(value)
    with localcontext() as context:
        context.prec = SIGNIFICANT_DIGITS
        return format(Decimal(value.numerator) / Decimal(value.denominator), 'g')


def map_record(f) -> Dict[str, object]:
    if isinstance(f, PLMap):
        return {'kind': PL_KIND, 'breakpoints': [fraction_text(x) for x in f.breakpoints],
                'values': [fraction_text(y) for y in f.values]}
    if isinstance(f, RotationMap):
        if not f.is_exact and f.label in NAMED_IRRATIONALS:
            return {'kind': ROTATION_KIND, 'fraction': f.label}
        record = {'kind': ROTATION_KIND, 'fraction': fraction_text(f.fraction)}
        if not f.is_exact:
            record['exactness'] = f.exactness
        return record
    if isinstance(f, AddingMachineMap):
        record = {'kind': ADDING_MACHINE_KIND, 'word_length': f.word_length,
                  'truncation': FULL if f.is_full else f.truncation}
        if f.increment != 1:
            record['increment'] = f.increment
        return record
    if isinstance(f, LazyPLMap):
        match = _LAZY_LABEL.match(f.label)
        guard([(UsageError, f'{f} is not a member of a named lazy family', match is None or match['family'] not in _LAZY_FAMILIES)])
        record = {'kind': LAZY_PL_KIND, 'family': _LAZY_FAMILIES[match['family']]}
        if match['m']:
            record['m'] = int(match['m'])
        return record
    raise UsageError(f'{type(f).__name__} has no record form')


def map_from_record(record: Dict[str, object]):
    guard([(ConfigurationError, f'map record must be an object, got {record!r}', not isinstance(record, dict))])
    kind = record.get('kind')
    guard([(ConfigurationError, f'unknown map kind {kind!r}', not isinstance(kind, str) or kind not in MAP_FIELDS)])
    _reject_unknown(f'{kind} map', record, MAP_FIELDS[kind])
    try:
        if kind == PL_KIND:
            return PLMap(_rationals(record, 'breakpoints'), _rationals(record, 'values'))
        if kind == ROTATION_KIND:
            fraction = record['fraction']
            if isinstance(fraction, str) and fraction in NAMED_IRRATIONALS:
                return RotationMap.named(fraction)
            guard([(ConfigurationError, f'rotation fraction must be a "p/q" string or one of {sorted(NAMED_IRRATIONALS)}',
                    not isinstance(fraction, (str, int)) or isinstance(fraction, bool))])
            return RotationMap(as_rational(fraction), record.get('exactness', RATIONAL))
        if kind == ADDING_MACHINE_KIND:
            truncation = record.get('truncation', FULL)
            guard([(ConfigurationError, f'adding_machine truncation must be a positive integer or "{FULL}"',
                    truncation != FULL and not _is_integer(truncation))])
            return AddingMachineMap(_integer(record, 'word_length'), None if truncation == FULL else truncation,
                                    _integer(record, 'increment', 1))
        family = record['family']
        guard([(ConfigurationError, f'unknown lazy_pl family {family!r}; expected one of {sorted(_LAZY_GALLERY)}',
                family not in _LAZY_GALLERY)])
        m = _integer(record, 'm', None)
        return lazy_family(_LAZY_GALLERY[family], m)
    except KeyError as exc:
        raise ConfigurationError(f'{kind} map record is missing {exc}') from exc
    except ConfigurationError:
        raise
    except (DynamicsError, TypeError, ValueError) as exc:
        raise ConfigurationError(f'{kind} map record is malformed: {exc}') from exc


def _reject_unknown(what: str, record: Dict[str, object], allowed) -> None:
    unknown = sorted(set(record) - set(allowed))
    guard([(ConfigurationError, f'{what} record: unknown fields {unknown}', bool(unknown))])


def _is_integer(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _integer(record: Dict[str, object], key: str, default=_REQUIRED):
    if key not in record and default is not _REQUIRED:
        return default
    value = record[key]
    guard([(ConfigurationError, f'{key} must be an integer, got {value!r}', not _is_integer(value))])
    return value


def _rationals(record: Dict[str, object], key: str) -> tuple:
    values = record[key]
    guard([(ConfigurationError, f'{key} must be a list of "p/q" strings', not isinstance(values, list))])
    return tuple(values)


def system_record(system: NDSystem) -> Dict[str, object]:
    record = {
        'space': system.space,
        'name': system.name,
        'limit': map_record(system.limit),
        'prefix': [map_record(f) for f in system.prefix],
        'family': system.family_name,
        'params': to_record(dict(system.params)),
    }
    if system.conjugacy is not None:
        record['conjugacy'] = map_record(system.conjugacy)
    return record


def system_from_record(record: Dict[str, object]) -> NDSystem:
    """Families are rebuilt from their name and parameters, explicit systems from their maps."""
    guard([(ConfigurationError, 'system record must be an object', not isinstance(record, dict))])
    _reject_unknown('system', record, SYSTEM_FIELDS)
    params = record.get('params') or {}
    guard([
        (ConfigurationError, 'system prefix must be a list of map records', not isinstance(record.get('prefix') or [], list)),
        (ConfigurationError, 'system params must be an object', not isinstance(params, dict)),
        (ConfigurationError, 'system name must be a string', not isinstance(record.get('name') or '', str)),
    ])
    prefix = tuple(map_from_record(item) for item in record.get('prefix') or ())
    name = record.get('name') or ''
    if record.get('family'):
        try:
            system = NDSystem.from_family(record['family'], dict(params), prefix, name)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f'family {record["family"]!r}: {exc}') from exc
    else:
        guard([(ConfigurationError, 'an explicit system needs a limit map', 'limit' not in record)])
        limit = map_from_record(record['limit'])
        system = NDSystem(limit.space, limit, prefix, name=name)
    if record.get('conjugacy'):
        system = dataclasses.replace(system, conjugacy=map_from_record(record['conjugacy']))
    return system


def to_record(value):
    """Plain JSON structure for reports, points, maps and systems."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return fraction_text(value)
    if isinstance(value, _TEXT_TYPES):
        return str(value)
    if isinstance(value, CircleArc):
        return f'({value.start}, {value.start + value.width})'
    if isinstance(value, (PLMap, RotationMap, AddingMachineMap, LazyPLMap)):
        return map_record(value)
    if isinstance(value, NDSystem):
        return system_record(value)
    if dataclasses.is_dataclass(value):
        return {item.name: to_record(getattr(value, item.name)) for item in dataclasses.fields(value)}
    if hasattr(value, '_asdict'):
        return to_record(value._asdict())
    if isinstance(value, dict):
        return {str(key): to_record(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value, key=str) if isinstance(value, (set, frozenset)) else value
        return [to_record(item) for item in items]
    raise UsageError(f'cannot serialize {type(value).__name__}')


def dumps(record) -> str:
    return json.dumps(record, sort_keys=True, separators=(',', ':'))


def write_jsonl(path, records: Iterable[Dict[str, object]]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        for record in records:
            handle.write(dumps(record) + '\n')
            count += 1
    logger.debug('wrote %d records to %s', count, path)
    return count


def read_jsonl(path) -> List[Dict[str, object]]:
    path = Path(path)
    guard([(UsageError, f'report {path} does not exist', not path.is_file())])
    with path.open(encoding='utf-8') as handle:
        return [json.loads(line) for line in handle if line.strip()]


def write_csv(path, header: List[str], rows: Iterable[List[object]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def _series(record: Dict[str, object], key: str) -> List[List[object]]:
    return [[n, value, decimal_text(value)] for n, value in record[key]]


def plot_rows(record: Dict[str, object], kind: str):
    """Header and rows of one plot series of a report record, or None if the record has none."""
    guard([(UsageError, f'unknown plot kind {kind!r}; expected one of {list(PLOT_KINDS)}', kind not in PLOT_KINDS)])
    report = record.get('report', record)
    if kind == TRACE and report.get('trace'):
        return ['n', 'value', 'decimal'], _series(report, 'trace')
    if kind == COVERAGE and report.get('coverage_trace'):
        return ['N', 'coverage', 'decimal'], _series(report, 'coverage_trace')
    if kind == PAIR_MATRIX and report.get('table'):
        grid = report['grid']
        rows = [[source, *(-1 if n is None else n for n in row)] for source, row in zip(grid, report['table'])]
        return ['U', *grid], rows
    return None
