"""Nonautonomous systems f_1, f_2, ... with a uniform limit f.

A system is an explicit prefix followed either by the limit itself or by a
member of a named parametric family, so every system stays declarative and
serializable.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

from ..exceptions import ConfigurationError, DomainError, UnsupportedOperation, UsageError, guard
from . import defaults
from .lazy_maps import accumulating_family
from .maps import (
    IDENTITY,
    TENT,
    AddingMachineMap,
    CompositeMap,
    PLMap,
    RotationMap,
    apply_flagged,
    as_point,
    compose,
    compose_within,
    continued_fraction_convergents,
    raw_coordinate,
    SURROGATE_MIN_DENOMINATOR,
)
from .phase_spaces import (
    CANTOR,
    CIRCLE,
    HALF,
    INTERVAL,
    ONE,
    ZERO,
    IntervalUnion,
    Point,
    as_rational,
    check_points,
    check_space,
)

logger = logging.getLogger(__name__)

ORBIT = 'orbit'
DIAGONAL = 'diagonal'
DIAGONAL_FIBER = 'diagonal-fiber'
AUTONOMOUS = 'autonomous'
ORBIT_KIND_CHOICES = [
    (ORBIT, 'Orbit f_1^n(x)'),
    (DIAGONAL, 'Diagonal f_n^n(x)'),
    (DIAGONAL_FIBER, 'Diagonal fiber power (f_n)^n(x)'),
    (AUTONOMOUS, 'Autonomous f^n(x)'),
]
ORBIT_KINDS = frozenset(kind for kind, _ in ORBIT_KIND_CHOICES)


@dataclass(frozen=True)
class MapFamily:
    name: str
    space: str
    member: Callable[..., object]
    limit: Callable[..., object]
    defaults: Dict[str, object] = field(default_factory=dict)
    equal_from: Callable[..., Optional[int]] = lambda **params: None

    def resolve(self, params: Dict[str, object]) -> Dict[str, object]:
        unknown = sorted(set(params) - set(self.defaults))
        guard([(ConfigurationError, f'{self.name}: unknown parameters {unknown}', bool(unknown))])
        return {**self.defaults, **params}


def _dyadic_rotation(n: int, shift: int = 0) -> RotationMap:
    return RotationMap(Fraction(1, 2 ** (n + shift)))


def _surrogate_index(irrational: str) -> int:
    for index, convergent in enumerate(continued_fraction_convergents(irrational)):
        if convergent.denominator > SURROGATE_MIN_DENOMINATOR:
            return index


def _convergent_rotation(n: int, irrational: str = 'golden', offset: int = 2) -> RotationMap:
    index = n + offset
    if index >= _surrogate_index(irrational):
        return RotationMap.named(irrational)
    for position, convergent in enumerate(continued_fraction_convergents(irrational)):
        if position == index:
            return RotationMap(convergent)


def _truncated_adding_machine(n: int, word_length: int | None = None) -> AddingMachineMap:
    return AddingMachineMap(word_length or defaults.cantor_length(), n)


def collapsing_tent(n: int, depth: int = 5, side: str = 'left') -> PLMap:
    """Tent map that sends [0, delta] (or [1 - delta, 1]) to the fixed point 0,
    with delta = 2^-(n + depth)."""
    guard([(ConfigurationError, f'collapse side must be left or right, got {side!r}', side not in ('left', 'right'))])
    delta = Fraction(1, 2 ** (n + depth))
    if side == 'left':
        return PLMap((0, delta, 2 * delta, Fraction(1, 2), 1), (0, 0, 4 * delta, 1, 0))
    return PLMap((0, Fraction(1, 2), 1 - 2 * delta, 1 - delta, 1), (0, 1, 4 * delta, 0, 0))


BUMP_CELLS = 24


def tent_bump(cell: int, height) -> PLMap:
    """The tent map plus a narrow tent of `height` centred in the cell (cell/24, (cell+1)/24)."""
    height = as_rational(height)
    guard([
        (ConfigurationError, f'bump cell must lie in 0..{BUMP_CELLS - 1}, got {cell}', not 0 <= cell < BUMP_CELLS),
        (ConfigurationError, 'bump height must be nonzero', height == 0),
    ])
    centre = Fraction(2 * cell + 1, 2 * BUMP_CELLS)
    width = Fraction(1, 4 * BUMP_CELLS)
    xs = sorted({ZERO, HALF, ONE, centre - width, centre, centre + width})
    return PLMap(tuple(xs), tuple(TENT(x) + (height if x == centre else 0) for x in xs))


def _perturbed_tent(n: int, cell: int = 8, height='1/8') -> PLMap:
    return tent_bump(cell, height)


def _perturbed_tent_limit(cell: int = 8, height='1/8') -> PLMap:
    tent_bump(cell, height)  # rejects bad parameters before any fiber is asked for
    return TENT


FAMILIES: Dict[str, MapFamily] = {
    family.name: family for family in (
        MapFamily(
            'dyadic-rotations', CIRCLE, _dyadic_rotation,
            lambda shift=0: RotationMap(0), {'shift': 0},
        ),
        MapFamily(
            'convergent-rotations', CIRCLE, _convergent_rotation,
            lambda irrational='golden', offset=2: RotationMap.named(irrational),
            {'irrational': 'golden', 'offset': 2},
            lambda irrational='golden', offset=2: max(_surrogate_index(irrational) - offset, 1),
        ),
        MapFamily(
            'adding-machine', CANTOR, _truncated_adding_machine,
            lambda word_length=None: AddingMachineMap(word_length or defaults.cantor_length()),
            {'word_length': None},
            lambda word_length=None: word_length or defaults.cantor_length(),
        ),
        MapFamily(
            'accumulating-pl', INTERVAL, accumulating_family,
            lambda: accumulating_family(), {},
        ),
        MapFamily(
            'collapsing-tent', INTERVAL, collapsing_tent,
            lambda depth=5, side='left': TENT, {'depth': 5, 'side': 'left'},
        ),
        MapFamily(
            'perturbed-tent', INTERVAL, _perturbed_tent, _perturbed_tent_limit,
            {'cell': 8, 'height': '1/8'},
        ),
    )
}


def family(name: str) -> MapFamily:
    if name not in FAMILIES:
        raise ConfigurationError(f'unknown family {name!r}; expected one of {sorted(FAMILIES)}')
    return FAMILIES[name]


def identity_map(space: str, word_length: int | None = None):
    if space == INTERVAL:
        return IDENTITY
    if space == CIRCLE:
        return RotationMap(0)
    return AddingMachineMap(word_length or defaults.cantor_length(), None, 0)


def conjugated(h: PLMap, f: PLMap) -> PLMap:
    """h o f o h^-1."""
    return compose(h, compose(f, h.inverse()))


@dataclass(frozen=True)
class NDSystem:
    space: str
    limit: object
    prefix: Tuple[object, ...] = ()
    family_name: Optional[str] = None
    params: Tuple[Tuple[str, object], ...] = ()
    conjugacy: Optional[PLMap] = None
    name: str = ''

    def __post_init__(self):
        check_space(self.space)
        object.__setattr__(self, 'prefix', tuple(self.prefix))
        object.__setattr__(self, 'params', tuple(sorted(dict(self.params).items())))
        guard([
            (UsageError, f'limit lives on {self.limit.space}, system on {self.space}', self.limit.space != self.space),
            (UsageError, 'prefix maps must share the system space', any(f.space != self.space for f in self.prefix)),
            (ConfigurationError, 'conjugacy applies to interval systems only', self.conjugacy is not None and self.space != INTERVAL),
        ])
        if self.family_name is not None:
            definition = family(self.family_name)
            guard([(UsageError, f'family {definition.name} lives on {definition.space}', definition.space != self.space)])
            definition.resolve(dict(self.params))
        for index, f in enumerate((*self.prefix, self.limit)):
            if isinstance(f, PLMap) and not f.is_surjective:
                label = 'limit' if index == len(self.prefix) else f'f_{index + 1}'
                logger.warning('%s of %s is not surjective: %s', label, self.name or 'system', f)

    @classmethod
    def constant(cls, f, name: str = '') -> 'NDSystem':
        return cls(f.space, f, name=name)

    @classmethod
    def from_family(cls, family_name: str, params: Dict[str, object] | None = None, prefix=(), name: str = '') -> 'NDSystem':
        definition = family(family_name)
        resolved = definition.resolve(params or {})
        return cls(definition.space, definition.limit(**resolved), tuple(prefix), family_name, tuple((params or {}).items()), name=name or family_name)

    @property
    def family_params(self) -> Dict[str, object]:
        return family(self.family_name).resolve(dict(self.params)) if self.family_name else {}

    def fiber(self, n: int):
        guard([(DomainError, f'fiber index must be at least 1, got {n}', n < 1)])
        if n <= len(self.prefix):
            f = self.prefix[n - 1]
        elif self.family_name is None:
            f = self.limit
        else:
            try:
                f = family(self.family_name).member(n, **self.family_params)
            except (ValueError, TypeError, ArithmeticError) as exc:
                raise ConfigurationError(f'family {self.family_name} is not defined at n={n}: {exc}') from exc
        return conjugated(self.conjugacy, f) if self.conjugacy is not None else f

    @property
    def limit_map(self):
        return conjugated(self.conjugacy, self.limit) if self.conjugacy is not None else self.limit

    @property
    def tail_start(self) -> Optional[int]:
        """First index from which every fiber equals the limit, None when unknown."""
        if self.family_name is None:
            return len(self.prefix) + 1
        start = family(self.family_name).equal_from(**self.family_params)
        return None if start is None else max(start, len(self.prefix) + 1)

    def is_pl(self, n: int, k: int) -> bool:
        return all(isinstance(self.fiber(j), PLMap) for j in range(n, n + k))

    def __str__(self) -> str:
        return self.name or self.family_name or 'system'


def _pl_chain(maps: List[PLMap], space: str):
    budget = defaults.breakpoint_budget()
    result = IDENTITY
    for f in maps:
        result = compose_within(f, result, budget)
        if result is None:
            logger.debug('breakpoint budget %d exceeded, falling back to point evaluation', budget)
            return CompositeMap(tuple(maps), space)
    return result


def _chain(maps: List[object], space: str):
    if all(isinstance(f, RotationMap) for f in maps):
        result = RotationMap(0)
        for f in maps:
            result = result.then(f)
        return result
    if all(isinstance(f, PLMap) for f in maps):
        return _pl_chain(maps, space)
    return CompositeMap(tuple(maps), space)


def window_compose(system: NDSystem, n: int, k: int):
    """f_n^k = f_{n+k-1} o ... o f_n."""
    guard([
        (DomainError, f'window start must be at least 1, got {n}', n < 1),
        (DomainError, f'window length must be nonnegative, got {k}', k < 0),
    ])
    if k == 0:
        return identity_map(system.space, _word_length(system))
    return _chain([system.fiber(j) for j in range(n, n + k)], system.space)


def iterate(f, k: int, space: str, word_length: int | None = None):
    guard([(DomainError, f'iterate count must be nonnegative, got {k}', k < 0)])
    if k == 0:
        return identity_map(space, word_length)
    if isinstance(f, (RotationMap, AddingMachineMap)):
        return f.power(k)
    if isinstance(f, PLMap):
        return _pl_chain([f] * k, space)
    return CompositeMap((f,) * k, space)


def fiber_power(system: NDSystem, n: int, k: int):
    """(f_n)^k."""
    return iterate(system.fiber(n), k, system.space, _word_length(system))


def limit_power(system: NDSystem, k: int):
    return iterate(system.limit_map, k, system.space, _word_length(system))


def _word_length(system: NDSystem) -> int | None:
    if system.space != CANTOR:
        return None
    return system.limit.word_length


class OrbitRecord(NamedTuple):
    base_point: Point
    kind: str
    entries: Tuple[Tuple[int, Point], ...]
    saturated: Tuple[int, ...]

    def points(self) -> List[Point]:
        return [point for _, point in self.entries]


def _run(maps, x):
    saturated = False
    for f in maps:
        x, flagged = apply_flagged(f, x)
        saturated = saturated or flagged
    return x, saturated


def orbit(system: NDSystem, x: Point, N: int, kind: str = ORBIT) -> OrbitRecord:
    guard([
        (UsageError, f'unknown orbit kind {kind!r}', kind not in ORBIT_KINDS),
        (DomainError, f'orbit length must be at least 1, got {N}', N < 1),
    ])
    check_points(system.space, x)
    start = raw_coordinate(x)
    entries, saturated = [], []
    current = start
    for n in range(1, N + 1):
        if kind == ORBIT:
            current, flagged = _run([system.fiber(n)], current)
            value = current
        elif kind == AUTONOMOUS:
            current, flagged = _run([system.limit_map], current)
            value = current
        elif kind == DIAGONAL:
            value, flagged = _run([system.fiber(j) for j in range(n, 2 * n)], start)
        else:
            f = system.fiber(n)
            if isinstance(f, RotationMap):
                value, flagged = f.power(n)(start), False
            else:
                value, flagged = _run([f] * n, start)
        entries.append((n, as_point(system.space, value)))
        if flagged:
            saturated.append(n)
    if saturated:
        logger.debug('%s orbit of %s saturated at %s', kind, x, saturated)
    return OrbitRecord(x, kind, tuple(entries), tuple(saturated))


def inverse_window_set(system: NDSystem, n: int, target: IntervalUnion, k: int | None = None) -> IntervalUnion:
    """f_n^{-k}(target) = f_n^{-1} o ... o f_{n+k-1}^{-1}(target), k defaulting to n."""
    k = n if k is None else k
    guard([
        (DomainError, f'window start must be at least 1, got {n}', n < 1),
        (DomainError, 'target set must be nonempty', not target),
    ])
    fibers = [system.fiber(j) for j in range(n, n + k)]
    if not all(isinstance(f, PLMap) for f in fibers):
        raise UnsupportedOperation('inverse windows need an interval PL family')
    result = target
    for f in reversed(fibers):
        result = f.preimage_of_union(result)
        if not result:
            break
    return result
