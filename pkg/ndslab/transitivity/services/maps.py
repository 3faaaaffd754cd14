"""Exact map families: piecewise-linear interval maps, circle rotations, the
Cantor adding machine and generic composites.

Every map is an immutable value that is called on raw coordinates (a
`Fraction` for the interval and the circle, a `CantorWord` for Cantor space);
`evaluate` wraps that for typed points.
"""
from __future__ import annotations

import logging
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import ClassVar, Iterator, List, NamedTuple, Optional, Tuple

from ..exceptions import ConstructionError, DomainError, UnsupportedOperation, UsageError, guard
from .phase_spaces import (
    CANTOR,
    CIRCLE,
    INTERVAL,
    ONE,
    ZERO,
    CantorWord,
    CirclePoint,
    IntervalPoint,
    IntervalUnion,
    Point,
    RationalInterval,
    as_rational,
    check_points,
    circle_distance,
    hull_of_values,
)

logger = logging.getLogger(__name__)

RATIONAL = 'rational'
IRRATIONAL_APPROX = 'irrational-approx'
EXACTNESS_CHOICES = [
    (RATIONAL, 'Exact rational'),
    (IRRATIONAL_APPROX, 'Rational surrogate of an irrational'),
]

# Continued fraction (a0, repeated partial quotient) of the named irrationals.
NAMED_IRRATIONALS = {
    'golden': (0, 1),
    'sqrt2': (0, 2),
}
SURROGATE_MIN_DENOMINATOR = 10 ** 12


class Piece(NamedTuple):
    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction

    @property
    def slope(self) -> Fraction:
        return (self.y1 - self.y0) / (self.x1 - self.x0)

    @property
    def intercept(self) -> Fraction:
        return self.y0 - self.slope * self.x0

    @property
    def domain(self) -> RationalInterval:
        return RationalInterval(self.x0, self.x1)

    @property
    def value_range(self) -> Tuple[Fraction, Fraction]:
        return min(self.y0, self.y1), max(self.y0, self.y1)

    def at(self, x: Fraction) -> Fraction:
        return self.y0 + self.slope * (x - self.x0)

    def solve(self, y: Fraction) -> Fraction:
        """x with at(x) == y; the piece must not be a plateau."""
        return self.x0 + (y - self.y0) / self.slope


class FixedPointSet(NamedTuple):
    points: Tuple[Fraction, ...]
    intervals: IntervalUnion

    def __bool__(self) -> bool:
        return bool(self.points) or bool(self.intervals)


class PreimageSet(NamedTuple):
    points: Tuple[Fraction, ...]
    intervals: IntervalUnion

    def __bool__(self) -> bool:
        return bool(self.points) or bool(self.intervals)

    def contains(self, x: Fraction) -> bool:
        return x in self.points or self.intervals.contains(x)


class SlopeProfile(NamedTuple):
    pieces: Tuple[Tuple[RationalInterval, Fraction], ...]
    min_abs_slope: Fraction
    constant_abs_slope: Optional[Fraction]


@dataclass(frozen=True)
class PLMap:
    """Continuous piecewise-linear self-map of [0,1].

    Collinear interior breakpoints are dropped on construction, so two maps
    compare equal exactly when they agree as functions.
    """

    breakpoints: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]
    space: ClassVar[str] = INTERVAL

    def __post_init__(self):
        breakpoints = tuple(as_rational(point) for point in self.breakpoints)
        values = tuple(as_rational(value) for value in self.values)
        guard([
            (ConstructionError, 'a PL map needs at least two breakpoints', len(breakpoints) < 2),
            (ConstructionError, 'breakpoints and values differ in length', len(breakpoints) != len(values)),
        ])
        guard([
            (ConstructionError, 'breakpoints must run from 0 to 1', breakpoints[0] != ZERO or breakpoints[-1] != ONE),
            (ConstructionError, 'breakpoints must increase strictly', any(a >= b for a, b in zip(breakpoints, breakpoints[1:]))),
            (ConstructionError, 'values must lie in [0,1]', any(not ZERO <= value <= ONE for value in values)),
        ])
        kept_x, kept_y = [breakpoints[0]], [values[0]]
        for index in range(1, len(breakpoints) - 1):
            x, y = breakpoints[index], values[index]
            next_x, next_y = breakpoints[index + 1], values[index + 1]
            if (y - kept_y[-1]) * (next_x - x) == (next_y - y) * (x - kept_x[-1]):
                continue
            kept_x.append(x)
            kept_y.append(y)
        kept_x.append(breakpoints[-1])
        kept_y.append(values[-1])
        object.__setattr__(self, 'breakpoints', tuple(kept_x))
        object.__setattr__(self, 'values', tuple(kept_y))

    @classmethod
    def from_pairs(cls, *pairs) -> 'PLMap':
        return cls(tuple(x for x, _ in pairs), tuple(y for _, y in pairs))

    @cached_property
    def pieces(self) -> Tuple[Piece, ...]:
        return tuple(
            Piece(self.breakpoints[index], self.breakpoints[index + 1], self.values[index], self.values[index + 1])
            for index in range(len(self.breakpoints) - 1)
        )

    def piece_index(self, x: Fraction) -> int:
        if not ZERO <= x <= ONE:
            raise DomainError(f'{x} lies outside [0,1]')
        return min(bisect_right(self.breakpoints, x) - 1, len(self.pieces) - 1)

    def __call__(self, x: Fraction) -> Fraction:
        return self.pieces[self.piece_index(x)].at(x)

    def power(self, k: int, budget: int | None = None) -> 'PLMap | None':
        return pl_power(self, k, budget)

    def fixed_points(self) -> FixedPointSet:
        points, intervals = set(), []
        for piece in self.pieces:
            if piece.slope == ONE:
                if piece.intercept == ZERO:
                    intervals.append(piece.domain)
                continue
            x = piece.intercept / (1 - piece.slope)
            if piece.x0 <= x <= piece.x1:
                points.add(x)
        union = IntervalUnion.of(intervals)
        return FixedPointSet(tuple(sorted(x for x in points if not union.contains(x))), union)

    def preimage(self, y: Fraction) -> PreimageSet:
        points, intervals = set(), []
        for piece in self.pieces:
            if piece.slope == ZERO:
                if piece.y0 == y:
                    intervals.append(piece.domain)
                continue
            x = piece.solve(y)
            if piece.x0 <= x <= piece.x1:
                points.add(x)
        union = IntervalUnion.of(intervals)
        return PreimageSet(tuple(sorted(x for x in points if not union.contains(x))), union)

    def preimage_of_interval(self, target: RationalInterval) -> IntervalUnion:
        parts = []
        for piece in self.pieces:
            if piece.slope == ZERO:
                if target.contains(piece.y0):
                    parts.append(piece.domain)
                continue
            a, b = sorted((piece.solve(target.lo), piece.solve(target.hi)))
            lo, hi = max(a, piece.x0), min(b, piece.x1)
            if lo <= hi:
                parts.append(RationalInterval(lo, hi))
        return IntervalUnion.of(parts)

    def preimage_of_union(self, target: IntervalUnion) -> IntervalUnion:
        return IntervalUnion.of(part for item in target for part in self.preimage_of_interval(item))

    def image_of_interval(self, source: RationalInterval) -> RationalInterval:
        inner = self.breakpoints[bisect_right(self.breakpoints, source.lo):bisect_left(self.breakpoints, source.hi)]
        return hull_of_values(self(x) for x in (source.lo, source.hi, *inner))

    def image_of_union(self, source: IntervalUnion) -> IntervalUnion:
        return IntervalUnion.of(self.image_of_interval(item) for item in source)

    def slope_profile(self) -> SlopeProfile:
        slopes = [piece.slope for piece in self.pieces]
        magnitudes = {abs(slope) for slope in slopes}
        return SlopeProfile(
            tuple((piece.domain, piece.slope) for piece in self.pieces),
            min(magnitudes),
            magnitudes.pop() if len(magnitudes) == 1 else None,
        )

    @property
    def is_surjective(self) -> bool:
        return min(self.values) == ZERO and max(self.values) == ONE

    def plateaus(self) -> List[RationalInterval]:
        return [piece.domain for piece in self.pieces if piece.slope == ZERO]

    @property
    def has_plateau(self) -> bool:
        return any(piece.slope == ZERO for piece in self.pieces)

    @property
    def is_increasing_homeomorphism(self) -> bool:
        return all(piece.slope > 0 for piece in self.pieces) and self.values[0] == ZERO and self.values[-1] == ONE

    @property
    def is_decreasing_homeomorphism(self) -> bool:
        return all(piece.slope < 0 for piece in self.pieces) and self.values[0] == ONE and self.values[-1] == ZERO

    def inverse(self) -> 'PLMap':
        if self.is_increasing_homeomorphism:
            return PLMap(self.values, self.breakpoints)
        if self.is_decreasing_homeomorphism:
            return PLMap(self.values[::-1], self.breakpoints[::-1])
        raise ConstructionError('only PL homeomorphisms of [0,1] have an inverse')

    def __str__(self) -> str:
        return 'PL(' + ', '.join(f'{x}->{y}' for x, y in zip(self.breakpoints, self.values)) + ')'


IDENTITY = PLMap((ZERO, ONE), (ZERO, ONE))
TENT = PLMap((ZERO, Fraction(1, 2), ONE), (ZERO, ONE, ZERO))


def compose(g: PLMap, f: PLMap) -> PLMap:
    """Exact g o f: f's breakpoints plus the f-preimages of g's breakpoints."""
    xs = set(f.breakpoints)
    for piece in f.pieces:
        lo, hi = piece.value_range
        for b in g.breakpoints[bisect_right(g.breakpoints, lo):bisect_left(g.breakpoints, hi)]:
            xs.add(piece.solve(b))
    ordered = sorted(xs)
    return PLMap(tuple(ordered), tuple(g(f(x)) for x in ordered))


def compose_within(g: PLMap, f: PLMap, budget: int | None) -> PLMap | None:
    """g o f, or None when its piece count could exceed the budget."""
    if budget is not None and len(f.pieces) * len(g.pieces) > budget:
        return None
    return compose(g, f)


def pl_power(f: PLMap, k: int, budget: int | None = None) -> PLMap | None:
    guard([(DomainError, f'iterate count must be nonnegative, got {k}', k < 0)])
    result = IDENTITY
    for _ in range(k):
        result = compose_within(f, result, budget)
        if result is None:
            return None
    return result


def sup_distance_pl(f: PLMap, g: PLMap) -> Fraction:
    xs = set(f.breakpoints) | set(g.breakpoints)
    return max(abs(f(x) - g(x)) for x in xs)


def agreement_set_pl(f: PLMap, g: PLMap, region: RationalInterval) -> IntervalUnion:
    """Closed intervals of `region` on which f and g coincide; isolated crossings are dropped."""
    inner = {x for x in (*f.breakpoints, *g.breakpoints) if region.lo < x < region.hi}
    xs = sorted({region.lo, region.hi} | inner)
    agree = [f(x) == g(x) for x in xs]
    return IntervalUnion.of(
        RationalInterval(xs[index], xs[index + 1])
        for index in range(len(xs) - 1)
        if agree[index] and agree[index + 1]
    )


def continued_fraction_convergents(name: str) -> Iterator[Fraction]:
    if name not in NAMED_IRRATIONALS:
        raise UsageError(f'unknown irrational {name!r}; expected one of {sorted(NAMED_IRRATIONALS)}')
    head, repeated = NAMED_IRRATIONALS[name]
    h_prev, h = 1, head
    k_prev, k = 0, 1
    yield Fraction(h, k)
    while True:
        h_prev, h = h, repeated * h + h_prev
        k_prev, k = k, repeated * k + k_prev
        yield Fraction(h, k)


def irrational_surrogate(name: str) -> Fraction:
    for convergent in continued_fraction_convergents(name):
        if convergent.denominator > SURROGATE_MIN_DENOMINATOR:
            return convergent


@dataclass(frozen=True)
class RotationMap:
    """Rotation of the circle of circumference 1 by `fraction`."""

    fraction: Fraction
    exactness: str = RATIONAL
    label: str = ''
    space: ClassVar[str] = CIRCLE

    def __post_init__(self):
        guard([(ConstructionError, f'unknown exactness tag {self.exactness!r}', self.exactness not in (RATIONAL, IRRATIONAL_APPROX))])
        object.__setattr__(self, 'fraction', as_rational(self.fraction) % 1)

    @classmethod
    def named(cls, name: str) -> 'RotationMap':
        return cls(irrational_surrogate(name), IRRATIONAL_APPROX, name)

    @property
    def is_exact(self) -> bool:
        return self.exactness == RATIONAL

    @property
    def period(self) -> int | None:
        return self.fraction.denominator if self.is_exact else None

    def __call__(self, x: Fraction) -> Fraction:
        return (x + self.fraction) % 1

    def power(self, k: int, budget: int | None = None) -> 'RotationMap':
        return RotationMap(self.fraction * k, self.exactness)

    def then(self, other: 'RotationMap') -> 'RotationMap':
        """other o self."""
        exactness = RATIONAL if self.is_exact and other.is_exact else IRRATIONAL_APPROX
        return RotationMap(self.fraction + other.fraction, exactness)

    def fixed_points(self) -> FixedPointSet:
        if self.fraction == ZERO:
            return FixedPointSet((), IntervalUnion.of([RationalInterval(ZERO, ONE)]))
        return FixedPointSet((), IntervalUnion())

    def __str__(self) -> str:
        return f'R({self.label or self.fraction})'


@dataclass(frozen=True)
class AddingMachineMap:
    """Binary odometer adding `increment` on the first `truncation` symbols
    (all `word_length` symbols when the truncation is None)."""

    word_length: int
    truncation: int | None = None
    increment: int = 1
    space: ClassVar[str] = CANTOR

    def __post_init__(self):
        guard([
            (ConstructionError, 'word length must be positive', self.word_length < 1),
            (ConstructionError, 'truncation must be positive', self.truncation is not None and self.truncation < 1),
            (ConstructionError, 'increment must be nonnegative', self.increment < 0),
        ])

    @property
    def active_symbols(self) -> int:
        if self.truncation is None:
            return self.word_length
        return min(self.truncation, self.word_length)

    @property
    def is_full(self) -> bool:
        return self.truncation is None

    def step(self, word: CantorWord) -> Tuple[CantorWord, bool]:
        """Image of `word` and whether a carry fell off the last symbol."""
        if word.length != self.word_length:
            raise UsageError(f'word of length {word.length} fed to an adding machine on {self.word_length} symbols')
        width = self.active_symbols
        mask = (1 << width) - 1
        total = (word.bits & mask) + self.increment
        saturated = self.is_full and total > mask
        return CantorWord((word.bits & ~mask) | (total & mask), word.length), saturated

    def __call__(self, word: CantorWord) -> CantorWord:
        return self.step(word)[0]

    def power(self, k: int, budget: int | None = None) -> 'AddingMachineMap':
        return AddingMachineMap(self.word_length, self.truncation, self.increment * k)

    def __str__(self) -> str:
        scope = 'full' if self.is_full else f'first_{self.truncation}'
        return f'A({scope}, +{self.increment}, L={self.word_length})'


def adding_machine_distance(f: AddingMachineMap, g: AddingMachineMap) -> Fraction:
    """Exact sup of the first-difference metric between two odometers with the same increment.

    The narrower one (m1 active symbols) agrees with the wider one (m2) on the
    first m1 symbols; beyond that the wider one adds the carry c out of the
    first m1 symbols, which first shows at symbol m1 + v2(c) + 1.
    """
    guard([
        (UsageError, 'adding machines act on different word lengths', f.word_length != g.word_length),
        (UnsupportedOperation, 'adding machines with different increments', f.increment != g.increment),
    ])
    narrow, wide = sorted((f.active_symbols, g.active_symbols))
    width = wide - narrow
    if width == 0 or f.increment == 0:
        return ZERO
    carries = range(f.increment >> narrow, ((f.increment + (1 << narrow) - 1) >> narrow) + 1)
    indices = [narrow + (carry & -carry).bit_length() for carry in carries if carry % (1 << width)]
    return Fraction(1, min(indices)) if indices else ZERO


@dataclass(frozen=True)
class CompositeMap:
    """Point evaluator for maps[-1] o ... o maps[0]."""

    maps: Tuple[object, ...]
    space: str = INTERVAL

    def step(self, x):
        saturated = False
        for f in self.maps:
            x, flagged = apply_flagged(f, x)
            saturated = saturated or flagged
        return x, saturated

    def __call__(self, x):
        for f in self.maps:
            x = f(x)
        return x

    def __str__(self) -> str:
        return ' o '.join(str(f) for f in reversed(self.maps)) or 'id'


def apply_flagged(f, x):
    step = getattr(f, 'step', None)
    return step(x) if step is not None else (f(x), False)


def raw_coordinate(point: Point):
    if isinstance(point, IntervalPoint):
        return point.value
    if isinstance(point, CirclePoint):
        return point.fraction
    return point


def as_point(space: str, raw) -> Point:
    if space == INTERVAL:
        return IntervalPoint(raw)
    if space == CIRCLE:
        return CirclePoint(raw)
    return raw


def evaluate(f, point: Point) -> Point:
    check_points(f.space, point)
    raw, saturated = apply_flagged(f, raw_coordinate(point))
    if saturated:
        logger.debug('precision-saturated evaluation of %s at %s', f, point)
    return as_point(f.space, raw)


def sup_distance(f, g) -> Fraction:
    if f.space != g.space:
        raise UsageError(f'cannot compare a map on {f.space} with a map on {g.space}')
    if isinstance(f, PLMap) and isinstance(g, PLMap):
        return sup_distance_pl(f, g)
    if isinstance(f, RotationMap) and isinstance(g, RotationMap):
        return circle_distance(f.fraction, g.fraction)
    if isinstance(f, AddingMachineMap) and isinstance(g, AddingMachineMap):
        return adding_machine_distance(f, g)
    for left, right in ((f, g), (g, f)):
        method = getattr(left, 'sup_distance_to', None)
        if method is not None:
            return method(right)
    raise UnsupportedOperation(f'no exact sup distance between {type(f).__name__} and {type(g).__name__}')


def _require(f, name: str):
    method = getattr(f, name, None)
    if method is None:
        raise UnsupportedOperation(f'{type(f).__name__} does not support {name}')
    return method


def fixed_points(f) -> FixedPointSet:
    return _require(f, 'fixed_points')()


def preimage(f, y: Fraction) -> PreimageSet:
    return _require(f, 'preimage')(as_rational(y))


def image_of_interval(f, source: RationalInterval) -> RationalInterval:
    return _require(f, 'image_of_interval')(source)


def slope_profile(f) -> SlopeProfile:
    return _require(f, 'slope_profile')()


def preimage_tree(f, y: Fraction, depth: int) -> PreimageSet:
    """f^{-depth}(y) by breadth-first expansion; plateau hits propagate as intervals."""
    guard([(DomainError, f'depth must be nonnegative, got {depth}', depth < 0)])
    points, intervals = (as_rational(y),), IntervalUnion()
    for level in range(depth):
        next_points, next_intervals = set(), list(f.preimage_of_union(intervals)) if intervals else []
        for point in points:
            found = f.preimage(point)
            next_points.update(found.points)
            next_intervals.extend(found.intervals)
        intervals = IntervalUnion.of(next_intervals)
        points = tuple(sorted(x for x in next_points if not intervals.contains(x)))
        logger.debug('preimage tree level %d: %d points, %d intervals', level + 1, len(points), len(intervals))
    return PreimageSet(points, intervals)


def first_arrival_set(f, p: Fraction, depth: int) -> Tuple[Fraction, ...]:
    """Isolated points x with f^depth(x) = p and f^(depth-1)(x) != p."""
    p = as_rational(p)
    if depth == 0:
        return (p,)
    result = []
    for x in preimage_tree(f, p, depth).points:
        value = x
        for _ in range(depth - 1):
            value = f(value)
        if value != p:
            result.append(x)
    return tuple(result)

