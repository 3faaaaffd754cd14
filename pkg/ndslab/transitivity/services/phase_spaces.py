"""Points, metrics, balls and eps-nets for the unit interval, the circle of
circumference 1 and the truncated Cantor space {0,1}^L.

All coordinates are exact `Fraction`s; floats are rejected on entry.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Tuple, Union

from django.conf import settings

from ..exceptions import DomainError, UsageError, guard

Rational = Fraction

INTERVAL = 'interval'
CIRCLE = 'circle'
CANTOR = 'cantor'
SPACE_CHOICES = [
    (INTERVAL, 'Unit interval [0,1]'),
    (CIRCLE, 'Circle of circumference 1'),
    (CANTOR, 'Truncated Cantor space'),
]
SPACE_TAGS = frozenset(tag for tag, _ in SPACE_CHOICES)

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

# Largest prefix length enumerated by a Cantor eps-net.
MAX_CANTOR_NET_PREFIX = 20

_RATIONAL_PATTERN = re.compile(r'^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$')


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and exact "p/q" strings; decimals are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise DomainError(f'{value!r} is not an exact rational')
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str) and (match := _RATIONAL_PATTERN.match(value)):
        numerator, denominator = match.groups()
        if denominator is not None and int(denominator) == 0:
            raise DomainError(f'{value!r} has a zero denominator')
        return Fraction(int(numerator), int(denominator or 1))
    raise DomainError(f'{value!r} is not an exact rational "p/q"')


@dataclass(frozen=True, slots=True)
class IntervalPoint:
    value: Fraction

    def __post_init__(self):
        value = as_rational(self.value)
        guard([(DomainError, f'{value} lies outside [0,1]', not ZERO <= value <= ONE)])
        object.__setattr__(self, 'value', value)

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class CirclePoint:
    fraction: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'fraction', as_rational(self.fraction) % 1)

    def __str__(self) -> str:
        return str(self.fraction)


@dataclass(frozen=True, slots=True)
class CantorWord:
    """A point of {0,1}^L. Symbol x_i is stored in bit i-1 of `bits`."""

    bits: int
    length: int

    def __post_init__(self):
        guard([
            (DomainError, 'Cantor words need a positive length', self.length < 1),
            (DomainError, f'bits {self.bits} do not fit in {self.length} symbols', not 0 <= self.bits < (1 << self.length)),
        ])

    @classmethod
    def from_string(cls, symbols: str, length: int | None = None) -> 'CantorWord':
        symbols = symbols.strip()
        if not symbols or set(symbols) - {'0', '1'}:
            raise DomainError(f'{symbols!r} is not a binary word')
        length = length or len(symbols)
        if len(symbols) > length:
            raise DomainError(f'{symbols!r} is longer than {length} symbols')
        return cls(sum(1 << index for index, symbol in enumerate(symbols) if symbol == '1'), length)

    @property
    def symbols(self) -> Tuple[int, ...]:
        return tuple((self.bits >> index) & 1 for index in range(self.length))

    def symbol(self, index: int) -> int:
        """1-based symbol access, x_index."""
        return (self.bits >> (index - 1)) & 1

    def __str__(self) -> str:
        return ''.join(str(symbol) for symbol in self.symbols)


Point = Union[IntervalPoint, CirclePoint, CantorWord]
POINT_TYPES = {INTERVAL: IntervalPoint, CIRCLE: CirclePoint, CANTOR: CantorWord}


@dataclass(frozen=True, slots=True)
class RationalInterval:
    """Closed interval [lo, hi] inside [0,1]; lo == hi is a flagged point-interval."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        guard([(DomainError, f'[{lo}, {hi}] is not a subinterval of [0,1]', not ZERO <= lo <= hi <= ONE)])
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def covers(self, other: 'RationalInterval') -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def touches(self, other: 'RationalInterval') -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def meets_open(self, lo: Fraction, hi: Fraction) -> bool:
        """Whether the set this closed hull stands for meets the open interval (lo, hi).

        The hull is the closure of an image of an open set: a nondegenerate hull
        contains its interior, a degenerate one is the single point.
        """
        if self.is_degenerate:
            return lo < self.lo < hi
        return max(self.lo, lo) < min(self.hi, hi)

    def intersection(self, other: 'RationalInterval') -> 'RationalInterval | None':
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return RationalInterval(lo, hi) if lo <= hi else None

    def __str__(self) -> str:
        return f'[{self.lo}, {self.hi}]'


def hull(intervals: Iterable[RationalInterval]) -> RationalInterval:
    intervals = list(intervals)
    return RationalInterval(min(item.lo for item in intervals), max(item.hi for item in intervals))


def hull_of_values(values: Iterable[Fraction]) -> RationalInterval:
    values = list(values)
    return RationalInterval(min(values), max(values))


@dataclass(frozen=True, slots=True)
class IntervalUnion:
    """Finite union of closed rational intervals, kept sorted and merged."""

    intervals: Tuple[RationalInterval, ...] = ()

    @classmethod
    def of(cls, intervals: Iterable[RationalInterval]) -> 'IntervalUnion':
        merged: List[RationalInterval] = []
        for item in sorted(intervals, key=lambda interval: (interval.lo, interval.hi)):
            if merged and item.lo <= merged[-1].hi:
                merged[-1] = RationalInterval(merged[-1].lo, max(merged[-1].hi, item.hi))
            else:
                merged.append(item)
        return cls(tuple(merged))

    def __iter__(self) -> Iterator[RationalInterval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def length(self) -> Fraction:
        return sum((item.length for item in self.intervals), ZERO)

    def contains(self, x: Fraction) -> bool:
        return any(item.contains(x) for item in self.intervals)

    def covers(self, other: RationalInterval) -> bool:
        return any(item.covers(other) for item in self.intervals)

    def meets_open(self, lo: Fraction, hi: Fraction) -> bool:
        return any(item.meets_open(lo, hi) for item in self.intervals)

    def __str__(self) -> str:
        return ' U '.join(str(item) for item in self.intervals) or 'empty'


@dataclass(frozen=True, slots=True)
class CircleArc:
    """Open arc (start, start + width) on the circle of circumference 1."""

    start: Fraction
    width: Fraction

    @property
    def center(self) -> Fraction:
        return (self.start + self.width / 2) % 1

    def shifted(self, by: Fraction) -> 'CircleArc':
        return CircleArc((self.start + by) % 1, self.width)

    def meets(self, other: 'CircleArc') -> bool:
        return circle_distance(self.center, other.center) < (self.width + other.width) / 2


def interval_distance(a: Fraction, b: Fraction) -> Fraction:
    return abs(a - b)


def circle_distance(a: Fraction, b: Fraction) -> Fraction:
    gap = (a - b) % 1
    return min(gap, 1 - gap)


def first_difference(x: CantorWord, y: CantorWord) -> int:
    """1-based index of the first disagreeing symbol, 0 for equal words."""
    diff = x.bits ^ y.bits
    return (diff & -diff).bit_length()


def cantor_distance(x: CantorWord, y: CantorWord) -> Fraction:
    index = first_difference(x, y)
    return ZERO if index == 0 else Fraction(1, index)


def check_space(space: str) -> str:
    guard([(UsageError, f'unknown space tag {space!r}', space not in SPACE_TAGS)])
    return space


def check_points(space: str, *points: Point) -> None:
    point_type = POINT_TYPES[check_space(space)]
    for point in points:
        if not isinstance(point, point_type):
            raise UsageError(f'{point!r} is not a point of the {space} space')
    if space == CANTOR and len({point.length for point in points}) > 1:
        raise UsageError('Cantor words of different lengths cannot be compared')


def metric(space: str, x: Point, y: Point) -> Fraction:
    check_points(space, x, y)
    if space == INTERVAL:
        return interval_distance(x.value, y.value)
    if space == CIRCLE:
        return circle_distance(x.fraction, y.fraction)
    return cantor_distance(x, y)


def ball_contains(space: str, center: Point, radius, x: Point) -> bool:
    radius = as_rational(radius)
    guard([(DomainError, f'ball radius must be positive, got {radius}', radius <= 0)])
    return metric(space, center, x) < radius


def cantor_net_prefix(eps: Fraction, length: int) -> int:
    """Prefix length whose words are strictly closer than eps to every extension."""
    return min(math.floor(1 / eps), length)


def epsilon_net(space: str, eps, length: int | None = None) -> List[Point]:
    check_space(space)
    eps = as_rational(eps)
    guard([
        (DomainError, f'eps must be positive, got {eps}', eps <= 0),
        (DomainError, f'eps must not exceed 1, got {eps}', eps > 1),
    ])
    if space == INTERVAL:
        steps = math.ceil(1 / eps)
        return [IntervalPoint(Fraction(index, steps)) for index in range(steps + 1)]
    if space == CIRCLE:
        steps = math.ceil(1 / eps)
        return [CirclePoint(Fraction(index, steps)) for index in range(steps)]
    length = length or settings.NDSLAB['CANTOR_LENGTH']
    prefix = cantor_net_prefix(eps, length)
    guard([(DomainError, f'a Cantor net at eps={eps} needs 2^{prefix} words', prefix > MAX_CANTOR_NET_PREFIX)])
    return [CantorWord(bits, length) for bits in range(1 << prefix)]


def space_of(point: Point) -> str:
    for space, point_type in POINT_TYPES.items():
        if isinstance(point, point_type):
            return space
    raise UsageError(f'{point!r} is not a point of a known space')
