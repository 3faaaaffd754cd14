"""Piecewise-linear interval maps with infinitely many pieces.

A `LazyPLMap` is pinned at finitely many anchors and carries block sequences
that accumulate at anchors from the left. Block n of a sequence is the image of
a generator block under

    x -> c - r^(n-1) (c - x),    y -> d + s^(n-1) (y - d),

where c is the accumulation anchor and d = f(c). Between consecutive blocks,
and between anchors and the first block of a sequence, the map is the linear
join of the neighbouring nodes. A variant replaces the generator from a given
block index on; that is how the modified members of a family are built.
"""
from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import ClassVar, Dict, Iterator, List, NamedTuple, Optional, Tuple

from ..exceptions import ConstructionError, DomainError, UnsupportedOperation, UsageError, guard
from .maps import FixedPointSet, Piece, PreimageSet, SlopeProfile
from .phase_spaces import INTERVAL, ONE, ZERO, IntervalUnion, RationalInterval, as_rational, hull_of_values

logger = logging.getLogger(__name__)

Node = Tuple[Fraction, Fraction]

ANCHOR = 'anchor'
BLOCK = 'block'
JOIN = 'join'
ELSEWHERE = 'elsewhere'

# Scans for fixed points stop here when the tail never separates from the diagonal.
MAX_BLOCK_SCAN = 4096


def _nodes(pairs) -> Tuple[Node, ...]:
    return tuple((as_rational(x), as_rational(y)) for x, y in pairs)


def _segment(left: Node, right: Node) -> Piece:
    return Piece(left[0], right[0], left[1], right[1])


class PieceLocation(NamedTuple):
    kind: str
    sequence: Optional[str]
    index: Optional[int]
    left: Node
    right: Node

    def value_at(self, x: Fraction) -> Fraction:
        if self.left[0] == self.right[0]:
            return self.left[1]
        return _segment(self.left, self.right).at(x)


@dataclass(frozen=True)
class BlockSequence:
    name: str
    accumulation: Fraction
    limit_value: Fraction
    x_ratio: Fraction
    y_ratio: Fraction
    generator: Tuple[Node, ...]
    variants: Tuple[Tuple[int, Tuple[Node, ...]], ...] = ()

    def __post_init__(self):
        for field in ('accumulation', 'limit_value', 'x_ratio', 'y_ratio'):
            object.__setattr__(self, field, as_rational(getattr(self, field)))
        object.__setattr__(self, 'generator', _nodes(self.generator))
        variants = tuple(sorted((int(start), _nodes(nodes)) for start, nodes in self.variants))
        object.__setattr__(self, 'variants', variants)
        c, d = self.accumulation, self.limit_value
        xs = [x for x, _ in self.generator]
        guard([
            (ConstructionError, f'{self.name}: ratios must lie strictly between 0 and 1', not (ZERO < self.x_ratio < ONE and ZERO < self.y_ratio < ONE)),
            (ConstructionError, f'{self.name}: a generator block needs at least two nodes', len(self.generator) < 2),
        ])
        guard([
            (ConstructionError, f'{self.name}: generator nodes must increase strictly', any(a >= b for a, b in zip(xs, xs[1:]))),
            (ConstructionError, f'{self.name}: generator must lie left of the accumulation point', not ZERO <= xs[0] or xs[-1] >= c),
            (ConstructionError, f'{self.name}: consecutive blocks overlap', self.contract_x(xs[0], 2) <= xs[-1]),
        ])
        base_xs = tuple(xs)
        for start, nodes in ((1, self.generator), *variants):
            values = [y for _, y in nodes]
            guard([
                (ConstructionError, f'{self.name}: variant start must be positive', start < 1),
                (ConstructionError, f'{self.name}: variant from {start} moves block nodes', tuple(x for x, _ in nodes) != base_xs),
                (ConstructionError, f'{self.name}: variant from {start} moves block endpoints', (nodes[0][1], nodes[-1][1]) != (self.generator[0][1], self.generator[-1][1])),
                (ConstructionError, f'{self.name}: block values must lie in [0,1]', any(not ZERO <= y <= ONE for y in values)),
                (ConstructionError, f'{self.name}: block values touch the limit value {d}', any(y == d for y in values)),
                (ConstructionError, f'{self.name}: block values straddle the limit value {d}', min(values) < d < max(values)),
            ])
        sides = {self.generator[0][1] > d} | {nodes[0][1] > d for _, nodes in variants}
        guard([(ConstructionError, f'{self.name}: variants lie on different sides of {d}', len(sides) > 1)])

    @property
    def first_x(self) -> Fraction:
        return self.generator[0][0]

    @property
    def stable_index(self) -> int:
        """From this block on every block uses the same generator."""
        return self.variants[-1][0] if self.variants else 1

    @property
    def domain(self) -> RationalInterval:
        """Closure of the x-range covered by blocks and joins."""
        return RationalInterval(self.first_x, self.accumulation)

    def contract_x(self, x: Fraction, n: int) -> Fraction:
        return self.accumulation - self.x_ratio ** (n - 1) * (self.accumulation - x)

    def contract_y(self, y: Fraction, n: int) -> Fraction:
        return self.limit_value + self.y_ratio ** (n - 1) * (y - self.limit_value)

    def generator_for(self, n: int) -> Tuple[Node, ...]:
        nodes = self.generator
        for start, variant in self.variants:
            if start <= n:
                nodes = variant
        return nodes

    def with_variant(self, start: int, nodes) -> 'BlockSequence':
        return replace(self, variants=self.variants + ((start, _nodes(nodes)),))

    @lru_cache(maxsize=4096)
    def block_nodes(self, n: int) -> Tuple[Node, ...]:
        guard([(DomainError, f'block index must be positive, got {n}', n < 1)])
        return tuple((self.contract_x(x, n), self.contract_y(y, n)) for x, y in self.generator_for(n))

    def block_domain(self, n: int) -> RationalInterval:
        nodes = self.block_nodes(n)
        return RationalInterval(nodes[0][0], nodes[-1][0])

    def block_pieces(self, n: int) -> List[Piece]:
        """Pieces of block n followed by the join to block n + 1."""
        nodes = self.block_nodes(n)
        pieces = [_segment(left, right) for left, right in zip(nodes, nodes[1:])]
        pieces.append(_segment(nodes[-1], self.block_nodes(n + 1)[0]))
        return pieces

    def tail_hull(self, n: int) -> RationalInterval:
        """Values taken on block n, its successors and the joins between them."""
        return hull_of_values([y for _, y in self.block_nodes(n)] + [self.limit_value])

    def index_of(self, x: Fraction) -> int:
        """n such that x lies in block n or in the join after it; O(log(1/(c - x)))."""
        guard([(DomainError, f'{x} is outside the range of {self.name}', not self.first_x <= x < self.accumulation)])
        distance = self.accumulation - x
        n, scale = 1, self.accumulation - self.first_x
        while distance <= scale * self.x_ratio:
            scale *= self.x_ratio
            n += 1
        return n

    def locate(self, x: Fraction) -> PieceLocation:
        n = self.index_of(x)
        nodes = self.block_nodes(n)
        if x <= nodes[-1][0]:
            position = max(bisect_right([node[0] for node in nodes], x) - 1, 0)
            position = min(position, len(nodes) - 2)
            return PieceLocation(BLOCK, self.name, n, nodes[position], nodes[position + 1])
        return PieceLocation(JOIN, self.name, n, nodes[-1], self.block_nodes(n + 1)[0])

    def same_geometry(self, other: 'BlockSequence') -> bool:
        return (self.name, self.accumulation, self.limit_value, self.x_ratio, self.y_ratio, self.generator) == (
            other.name, other.accumulation, other.limit_value, other.x_ratio, other.y_ratio, other.generator)


@dataclass(frozen=True)
class LazyPLMap:
    anchors: Tuple[Node, ...]
    sequences: Tuple[BlockSequence, ...]
    label: str = ''
    space: ClassVar[str] = INTERVAL

    def __post_init__(self):
        anchors = tuple(sorted(_nodes(self.anchors)))
        object.__setattr__(self, 'anchors', anchors)
        xs = [x for x, _ in anchors]
        pinned = dict(anchors)
        guard([
            (ConstructionError, 'anchors must include 0 and 1', not xs or xs[0] != ZERO or xs[-1] != ONE),
            (ConstructionError, 'anchors must have distinct positions', len(set(xs)) != len(xs)),
            (ConstructionError, 'anchor values must lie in [0,1]', any(not ZERO <= y <= ONE for _, y in anchors)),
            (ConstructionError, 'sequence names must be unique', len({seq.name for seq in self.sequences}) != len(self.sequences)),
        ])
        for seq in self.sequences:
            guard([
                (ConstructionError, f'{seq.name}: accumulation point {seq.accumulation} is not an anchor', seq.accumulation not in pinned),
                (ConstructionError, f'{seq.name}: limit value disagrees with the anchor value', pinned.get(seq.accumulation) != seq.limit_value),
                (ConstructionError, f'{seq.name}: an anchor lies inside the block range', any(seq.first_x <= x < seq.accumulation for x in xs)),
            ])
        ranges = sorted((seq.first_x, seq.accumulation, seq.name) for seq in self.sequences)
        for (_, hi, left), (lo, _, right) in zip(ranges, ranges[1:]):
            guard([(ConstructionError, f'sequences {left} and {right} overlap', lo < hi)])

    def sequence(self, name: str) -> BlockSequence:
        for seq in self.sequences:
            if seq.name == name:
                return seq
        raise UsageError(f'{self.label or "lazy map"} has no block sequence {name!r}')

    def with_variant(self, name: str, start: int, nodes, label: str = '') -> 'LazyPLMap':
        sequences = tuple(seq.with_variant(start, nodes) if seq.name == name else seq for seq in self.sequences)
        return LazyPLMap(self.anchors, sequences, label or self.label)

    def _outer_nodes(self) -> List[Node]:
        return sorted(list(self.anchors) + [seq.generator[0] for seq in self.sequences])

    def elsewhere_pieces(self) -> List[Piece]:
        starts = {seq.first_x for seq in self.sequences}
        nodes = self._outer_nodes()
        return [_segment(left, right) for left, right in zip(nodes, nodes[1:]) if left[0] not in starts]

    def locate(self, x) -> PieceLocation:
        x = as_rational(x)
        if not ZERO <= x <= ONE:
            raise DomainError(f'{x} lies outside [0,1]')
        for anchor in self.anchors:
            if anchor[0] == x:
                return PieceLocation(ANCHOR, None, None, anchor, anchor)
        for seq in self.sequences:
            if seq.first_x <= x < seq.accumulation:
                return seq.locate(x)
        nodes = self._outer_nodes()
        position = bisect_right([node[0] for node in nodes], x) - 1
        if position < 0 or position + 1 >= len(nodes):
            raise ConstructionError(f'{x} is not covered by any piece of {self.label or "lazy map"}')
        return PieceLocation(ELSEWHERE, None, None, nodes[position], nodes[position + 1])

    def __call__(self, x: Fraction) -> Fraction:
        return self.locate(x).value_at(x)

    def image_of_interval(self, source: RationalInterval) -> RationalInterval:
        lo, hi = source.lo, source.hi
        values = [self(lo), self(hi)]
        values.extend(y for x, y in self._outer_nodes() if lo < x < hi)
        for seq in self.sequences:
            start = max(lo, seq.first_x)
            if not (start < hi and start < seq.accumulation):
                continue
            first = seq.index_of(start)
            if hi >= seq.accumulation:
                stable = max(first + 1, seq.stable_index)
                for n in range(first, stable):
                    values.extend(y for x, y in seq.block_nodes(n) if lo < x < hi)
                tail = seq.tail_hull(stable)
                values.extend((tail.lo, tail.hi))
            else:
                for n in range(first, seq.index_of(hi) + 1):
                    values.extend(y for x, y in seq.block_nodes(n) if lo < x < hi)
        return hull_of_values(values)

    def image_of_union(self, source: IntervalUnion) -> IntervalUnion:
        return IntervalUnion.of(self.image_of_interval(item) for item in source)

    def _sequence_pieces(self, seq: BlockSequence, stop) -> Iterator[Tuple[int, List[Piece]]]:
        n = 1
        while not (n >= seq.stable_index and stop(seq, n)):
            if n > MAX_BLOCK_SCAN:
                raise UnsupportedOperation(f'{seq.name}: no cutoff found within {MAX_BLOCK_SCAN} blocks')
            yield n, seq.block_pieces(n)
            n += 1

    def preimage(self, y: Fraction) -> PreimageSet:
        y = as_rational(y)
        points, intervals = {x for x, value in self.anchors if value == y}, []
        pieces = list(self.elsewhere_pieces())
        for seq in self.sequences:
            if y == seq.limit_value:
                continue
            for _, block in self._sequence_pieces(seq, lambda s, n: not s.tail_hull(n).contains(y)):
                pieces.extend(block)
        for piece in pieces:
            if piece.slope == ZERO:
                if piece.y0 == y:
                    intervals.append(piece.domain)
                continue
            x = piece.solve(y)
            if piece.x0 <= x <= piece.x1:
                points.add(x)
        union = IntervalUnion.of(intervals)
        return PreimageSet(tuple(sorted(x for x in points if not union.contains(x))), union)

    def preimage_of_union(self, target: IntervalUnion) -> IntervalUnion:
        raise UnsupportedOperation('preimages of intervals under maps with infinitely many pieces')

    def fixed_points(self) -> FixedPointSet:
        def separated(seq: BlockSequence, n: int) -> bool:
            values = seq.tail_hull(n)
            return values.hi < seq.block_domain(n).lo or values.lo > seq.accumulation

        points, intervals = {x for x, value in self.anchors if value == x}, []
        pieces = list(self.elsewhere_pieces())
        for seq in self.sequences:
            for _, block in self._sequence_pieces(seq, separated):
                pieces.extend(block)
        for piece in pieces:
            if piece.slope == ONE:
                if piece.intercept == ZERO:
                    intervals.append(piece.domain)
                continue
            x = piece.intercept / (1 - piece.slope)
            if piece.x0 <= x <= piece.x1:
                points.add(x)
        union = IntervalUnion.of(intervals)
        return FixedPointSet(tuple(sorted(x for x in points if not union.contains(x))), union)

    def slope_profile(self) -> SlopeProfile:
        """Slopes of the elsewhere pieces and of every distinct block; blocks
        repeat their slopes only when both ratios agree."""
        if any(seq.x_ratio != seq.y_ratio for seq in self.sequences):
            raise UnsupportedOperation('block slopes are unbounded when the x and y ratios differ')
        pieces = list(self.elsewhere_pieces())
        for seq in self.sequences:
            for n in range(1, seq.stable_index + 1):
                pieces.extend(seq.block_pieces(n))
        magnitudes = {abs(piece.slope) for piece in pieces}
        return SlopeProfile(
            tuple((piece.domain, piece.slope) for piece in pieces),
            min(magnitudes),
            magnitudes.pop() if len(magnitudes) == 1 else None,
        )

    def _check_compatible(self, other) -> None:
        if not isinstance(other, LazyPLMap):
            raise UnsupportedOperation(f'cannot compare a lazy PL map with {type(other).__name__}')
        compatible = self.anchors == other.anchors and len(self.sequences) == len(other.sequences) and all(
            mine.same_geometry(theirs) for mine, theirs in zip(self.sequences, other.sequences))
        guard([(UnsupportedOperation, 'lazy maps differ outside block variants', not compatible)])

    def block_sup_distance(self, other: 'LazyPLMap', name: str, n: int) -> Fraction:
        mine, theirs = self.sequence(name), other.sequence(name)
        return max(abs(a[1] - b[1]) for a, b in zip(mine.block_nodes(n), theirs.block_nodes(n)))

    def sup_distance_to(self, other) -> Fraction:
        """Differences live on block nodes only and shrink by s past the last variant."""
        self._check_compatible(other)
        best = ZERO
        for mine, theirs in zip(self.sequences, other.sequences):
            stable = max(mine.stable_index, theirs.stable_index)
            for n in range(1, stable + 1):
                best = max(best, self.block_sup_distance(other, mine.name, n))
        return best

    def agreement_measure_to(self, other, region: RationalInterval) -> Fraction:
        """Length of {x in region : self(x) == other(x)}, tails summed as a geometric series."""
        self._check_compatible(other)
        lo, hi = region.lo, region.hi

        def agreeing(mine: Piece, theirs: Piece) -> Fraction:
            a, b = max(mine.x0, lo), min(mine.x1, hi)
            if a >= b or mine.at(a) != theirs.at(a) or mine.at(b) != theirs.at(b):
                return ZERO
            return b - a

        total = sum(
            (agreeing(piece, piece) for piece in self.elsewhere_pieces()),
            ZERO,
        )
        for mine, theirs in zip(self.sequences, other.sequences):
            start = max(lo, mine.first_x)
            if not (start < hi and start < mine.accumulation):
                continue
            first = mine.index_of(start)
            if hi >= mine.accumulation:
                stable = max(first + 1, mine.stable_index, theirs.stable_index)
                last = stable - 1
            else:
                stable, last = None, mine.index_of(hi)
            for n in range(first, last + 1):
                total += sum((agreeing(a, b) for a, b in zip(mine.block_pieces(n), theirs.block_pieces(n))), ZERO)
            if stable is not None:
                period = sum((agreeing(a, b) for a, b in zip(mine.block_pieces(stable), theirs.block_pieces(stable))), ZERO)
                total += period / (1 - mine.x_ratio)
        return total

    def __str__(self) -> str:
        return self.label or 'LazyPL'


def accumulating_family(m: int | None = None) -> LazyPLMap:
    """The transitive limit f (m=None) or its member f_m of the accumulating family.

    f is 2x on [0, 3/8], peaks at f(1/2) = 1, vanishes at 0 and 1, and carries
    two block sequences with ratio 1/4: tent-shaped bumps below 1 accumulating
    at 1/2 and bumps above 0 accumulating at 1. f_m turns the bumps at 1/2 of
    index n >= m into V shapes whose square agrees with f squared.
    """
    quarter = Fraction(1, 4)
    left = BlockSequence(
        name='left',
        accumulation=Fraction(1, 2),
        limit_value=ONE,
        x_ratio=quarter,
        y_ratio=quarter,
        generator=(
            (Fraction(12, 32), Fraction(12, 16)),
            (Fraction(13, 32), Fraction(13, 16)),
            (Fraction(14, 32), Fraction(12, 16)),
        ),
    )
    right = BlockSequence(
        name='right',
        accumulation=ONE,
        limit_value=ZERO,
        x_ratio=quarter,
        y_ratio=quarter,
        generator=(
            (Fraction(11, 16), Fraction(6, 16)),
            (Fraction(12, 16), Fraction(8, 16)),
            (Fraction(13, 16), Fraction(6, 16)),
        ),
    )
    limit = LazyPLMap(((ZERO, ZERO), (Fraction(1, 2), ONE), (ONE, ZERO)), (left, right), 'accumulating-f')
    if m is None:
        return limit
    guard([(DomainError, f'family index must be positive, got {m}', m < 1)])
    modified = (
        (Fraction(12, 32), Fraction(12, 16)),
        (Fraction(13, 32), Fraction(11, 16)),
        (Fraction(14, 32), Fraction(12, 16)),
    )
    return limit.with_variant('left', m, modified, f'accumulating-f_{m}')


LAZY_FAMILIES: Dict[str, object] = {
    'accumulating-pl': accumulating_family,
}


def lazy_family(name: str, m: int | None = None) -> LazyPLMap:
    if name not in LAZY_FAMILIES:
        raise UsageError(f'unknown lazy family {name!r}; expected one of {sorted(LAZY_FAMILIES)}')
    return LAZY_FAMILIES[name](m)
