"""Grid-level dynamics: transitivity, sensitivity, invariant intervals, agreement
of fixed-point structure and the instance checks that tie the convergence
conditions to transitivity of the limit and of the system.

Basic open sets are the eps-grid intervals (i/m, (i+1)/m), circle arcs of the
same width, or cylinders of the Cantor space; every verdict carries the grid
and horizon it was obtained on.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..exceptions import DomainError, PreconditionError, UnsupportedOperation, UsageError, guard
from . import defaults
from .conditions import FAILS, check_CC, check_CCstar, check_DO, check_L, net_coverage
from .lazy_maps import LazyPLMap
from .maps import (
    AddingMachineMap,
    PLMap,
    RotationMap,
    agreement_set_pl,
    compose,
    first_arrival_set,
    pl_power,
    preimage_tree,
    sup_distance,
)
from .phase_spaces import (
    CANTOR,
    CIRCLE,
    INTERVAL,
    ONE,
    ZERO,
    CantorWord,
    CircleArc,
    IntervalUnion,
    RationalInterval,
    as_rational,
    cantor_net_prefix,
    epsilon_net,
    hull,
)
from .systems import ORBIT, NDSystem, orbit

logger = logging.getLogger(__name__)

TRANSITIVE = 'transitive-on-grid'
FAILS_WITH_PAIR = 'fails-with-pair'

EXACT_PL = 'exact-PL'
ROTATION = 'rotation'
ODOMETER = 'odometer'

SENSITIVE = 'sensitive-on-points'
NO_WITNESS = 'no-witness'

STABILIZED = 'stabilized'
CYCLE = 'cycle'
INCONCLUSIVE = 'inconclusive'

CONFIRMED = 'confirmed'
DISCREPANCY = 'discrepancy'

EVENTUALLY_EQUAL = 'eventually-equal'
CC_STAR_VIOLATED = 'cc-star-violated'
THEOREM_CHECK_FAILURE = 'theorem-check-failure'

CONSISTENT = 'consistent'
INSTANCE_CHECK_FAILURE = 'instance-check-failure'
HYPOTHESIS_UNMET = 'hypothesis-unmet'

# Largest cylinder prefix used as a transitivity grid on the Cantor space.
MAX_CYLINDER_PREFIX = 8
# Offsets per side of the ball around a point when searching sensitivity witnesses.
BALL_OFFSETS = 64


@dataclass
class TransitivityReport:
    mode: str
    eps: Fraction
    horizon: int
    verdict: str
    grid: List[object]
    table: List[List[Optional[int]]]
    witness: Optional[Dict[str, object]] = None
    notes: List[str] = field(default_factory=list)

    @property
    def transitive(self) -> bool:
        return self.verdict == TRANSITIVE

    @property
    def max_n(self) -> Optional[int]:
        hits = [n for row in self.table for n in row if n is not None]
        return max(hits) if hits else None


@dataclass
class SensitivityReport:
    delta: Fraction
    radius: Fraction
    horizon: int
    verdict: str
    witnesses: List[Dict[str, object]] = field(default_factory=list)
    failures: List[Fraction] = field(default_factory=list)
    mode: str = EXACT_PL
    notes: List[str] = field(default_factory=list)


@dataclass
class InvariantIntervalResult:
    verdict: str
    seed: RationalInterval
    interval: Optional[RationalInterval]
    cycle: List[RationalInterval] = field(default_factory=list)
    rounds: int = 0


@dataclass
class FixInclusionReport:
    verdict: str
    j_max: int
    fixed_points: List[Fraction]
    fixed_intervals: List[RationalInterval]
    not_fixed: List[Fraction] = field(default_factory=list)
    discrepancy: Optional[Dict[str, object]] = None
    notes: List[str] = field(default_factory=list)


@dataclass
class PrefixAgreementReport:
    point: Fraction
    depth: int
    N_max: int
    entries: List[Dict[str, object]]

    @property
    def n0(self) -> Optional[int]:
        values = [entry['n0'] for entry in self.entries]
        return None if None in values else max(values, default=1)


@dataclass
class EventualEqualityReport:
    status: str
    N_max: int
    n0: Optional[int]
    agreement: List[Tuple[int, Fraction]]
    cc_star: Optional[object] = None
    notes: List[str] = field(default_factory=list)


@dataclass
class InstanceReport:
    verdict: str
    parameters: Dict[str, object]
    checks: Dict[str, Optional[bool]]
    details: Dict[str, object] = field(default_factory=dict)


def _check_eps(eps, name: str = 'eps') -> Fraction:
    eps = as_rational(eps)
    guard([(DomainError, f'{name} must be positive, got {eps}', eps <= 0)])
    return eps


def interval_grid(eps: Fraction) -> List[RationalInterval]:
    steps = math.ceil(1 / eps)
    return [RationalInterval(Fraction(index, steps), Fraction(index + 1, steps)) for index in range(steps)]


def arc_grid(eps: Fraction) -> List[CircleArc]:
    steps = math.ceil(1 / eps)
    return [CircleArc(Fraction(index, steps), Fraction(1, steps)) for index in range(steps)]


def _first_hits(images: Sequence[RationalInterval], grid: Sequence[RationalInterval]) -> List[Optional[int]]:
    row = []
    for target in grid:
        row.append(next((n for n, image in enumerate(images, start=1) if image.meets_open(target.lo, target.hi)), None))
    return row


def _interval_images(maps, source: RationalInterval, horizon: int) -> List[RationalInterval]:
    """Hulls of f_1(U), f_2 f_1(U), ...; stops once the image is the whole interval."""
    images, current = [], source
    for n in range(horizon):
        current = maps(n + 1).image_of_interval(current)
        images.append(current)
        if current.lo == ZERO and current.hi == ONE:
            break
    return images


def _pair_report(mode: str, eps: Fraction, horizon: int, grid, table, notes=()) -> TransitivityReport:
    report = TransitivityReport(mode, eps, horizon, TRANSITIVE, [str(item) for item in grid], table, notes=list(notes))
    for row_index, row in enumerate(table):
        if None in row:
            report.verdict = FAILS_WITH_PAIR
            report.witness = {'U': str(grid[row_index]), 'V': str(grid[row.index(None)])}
            break
    return report


def _cylinders(eps: Fraction, word_length: int) -> int:
    prefix = cantor_net_prefix(eps, word_length)
    guard([(DomainError, f'cylinder grids stop at prefix length {MAX_CYLINDER_PREFIX}, eps={eps} needs {prefix}', prefix > MAX_CYLINDER_PREFIX)])
    return prefix


def _cylinder_step(f: AddingMachineMap, prefix_bits: int, prefix: int) -> int:
    """The cylinder f([u]) for a prefix u of `prefix` symbols, as its prefix bits."""
    mask = (1 << min(f.active_symbols, prefix)) - 1
    return (prefix_bits & ~mask) | ((prefix_bits + f.increment) & mask)


def _odometer_transitivity(f: AddingMachineMap, eps: Fraction, horizon: int) -> TransitivityReport:
    prefix = _cylinders(eps, f.word_length)
    size = 1 << prefix
    active = min(f.active_symbols, prefix)
    period = (1 << active) if f.increment % 2 else None
    table = []
    for u in range(size):
        row = []
        for v in range(size):
            if period is None or (u >> active) != (v >> active):
                row.append(None)
            else:
                row.append(((v - u) % period) or period)
        table.append(row)
    grid = [CantorWord(bits, prefix) for bits in range(size)]
    report = _pair_report(ODOMETER, eps, horizon, grid, table, ['closed-form minimal n, independent of the horizon'])
    if f.is_full and f.increment == 1:
        report.verdict, report.witness = TRANSITIVE, None
    else:
        width = f.active_symbols
        if width < f.word_length:
            report.verdict = FAILS_WITH_PAIR
            report.witness = {'U': '0' * (width + 1), 'V': '0' * width + '1'}
        report.notes.append('truncated odometers never change the symbols past their truncation')
    return report


def _rotation_transitivity(f: RotationMap, eps: Fraction, horizon: int) -> TransitivityReport:
    grid = arc_grid(eps)
    table = [
        [next((n for n in range(1, horizon + 1) if source.shifted(n * f.fraction).meets(target)), None) for target in grid]
        for source in grid
    ]
    report = _pair_report(ROTATION, eps, horizon, grid, table)
    if f.is_exact:
        q = f.fraction.denominator
        report.verdict = FAILS_WITH_PAIR
        report.witness = {'U': f'(0, 1/{2 * q})', 'V': f'(1/{2 * q}, 1/{q})'}
        report.notes.append(f'rational rotation with period {q}: every orbit is finite')
    else:
        report.notes.append('irrational rotation: transitive, grid table from its rational surrogate')
    return report


def test_transitivity(f, eps, horizon: int | None = None) -> TransitivityReport:
    """Minimal n with f^n(U) meeting V for every ordered pair of grid sets."""
    eps = _check_eps(eps)
    horizon = horizon or defaults.horizon()
    if isinstance(f, RotationMap):
        report = _rotation_transitivity(f, eps, horizon)
    elif isinstance(f, AddingMachineMap):
        report = _odometer_transitivity(f, eps, horizon)
    elif isinstance(f, (PLMap, LazyPLMap)):
        grid = interval_grid(eps)
        table = defaults.parallel_map(lambda source: _first_hits(_interval_images(lambda n: f, source, horizon), grid), grid)
        report = _pair_report(EXACT_PL, eps, horizon, grid, table)
    else:
        raise UnsupportedOperation(f'no exact transitivity test for {type(f).__name__}')
    logger.info('transitivity of %s at eps=%s, horizon %d: %s', f, eps, horizon, report.verdict)
    return report


def test_nds_transitivity(system: NDSystem, eps, horizon: int | None = None) -> TransitivityReport:
    """Minimal n with f_1^n(U) meeting V, by successive exact fiber images."""
    eps = _check_eps(eps)
    horizon = horizon or defaults.horizon()
    if system.space == INTERVAL:
        fibers = [system.fiber(n) for n in range(1, horizon + 1)]
        if not all(isinstance(f, (PLMap, LazyPLMap)) for f in fibers):
            raise UnsupportedOperation('interval systems need PL fibers for exact images')
        grid = interval_grid(eps)
        table = defaults.parallel_map(
            lambda source: _first_hits(_interval_images(lambda n: fibers[n - 1], source, horizon), grid), grid)
        report = _pair_report(EXACT_PL, eps, horizon, grid, table)
    elif system.space == CIRCLE:
        shifts, total = [], ZERO
        for n in range(1, horizon + 1):
            total += system.fiber(n).fraction
            shifts.append(total)
        grid = arc_grid(eps)
        table = [
            [next((n for n, shift in enumerate(shifts, start=1) if source.shifted(shift).meets(target)), None) for target in grid]
            for source in grid
        ]
        report = _pair_report(ROTATION, eps, horizon, grid, table)
    else:
        prefix = _cylinders(eps, system.limit.word_length)
        fibers = [system.fiber(n) for n in range(1, horizon + 1)]
        table = []
        for u in range(1 << prefix):
            states, current = [], u
            for f in fibers:
                current = _cylinder_step(f, current, prefix)
                states.append(current)
            table.append([next((n for n, state in enumerate(states, start=1) if state == v), None) for v in range(1 << prefix)])
        report = _pair_report(ODOMETER, eps, horizon, [CantorWord(bits, prefix) for bits in range(1 << prefix)], table)
    logger.info('nonautonomous transitivity of %s at eps=%s, horizon %d: %s', system, eps, horizon, report.verdict)
    return report


def orbit_coverage(system: NDSystem, x, eps, N: int | None = None) -> Dict[str, object]:
    """Share of the eps-net met by the orbit f_1^n(x), n <= N."""
    eps = _check_eps(eps)
    N = N or defaults.n_max()
    length = system.limit.word_length if system.space == CANTOR else None
    net = epsilon_net(system.space, eps, length)
    record = orbit(system, x, N, ORBIT)
    covered, trace = net_coverage(system.space, net, record.entries, eps)
    result = {'coverage': trace[-1][1], 'coverage_trace': trace, 'witness': None}
    if not all(covered):
        result['witness'] = str(net[covered.index(False)])
    logger.debug('orbit of %s under %s covers %s of the %s-net', x, system, result['coverage'], eps)
    return result


def _ball_candidates(f, x: Fraction, ball: RationalInterval, radius: Fraction, n: int) -> List[Fraction]:
    offsets = (x + radius * Fraction(j, BALL_OFFSETS) for j in range(1 - BALL_OFFSETS, BALL_OFFSETS))
    candidates = {y for y in offsets if ball.lo <= y <= ball.hi and y != x}
    if isinstance(f, PLMap):
        power = pl_power(f, n, defaults.breakpoint_budget())
        if power is not None:
            candidates.update(b for b in power.breakpoints if abs(b - x) < radius and b != x)
    return sorted(candidates)


def _witness_near(f, x: Fraction, delta: Fraction, radius: Fraction, horizon: int) -> Optional[Dict[str, object]]:
    ball = RationalInterval(max(ZERO, x - radius), min(ONE, x + radius))
    image, fx = ball, x
    for n in range(1, horizon + 1):
        image, fx = f.image_of_interval(image), f(fx)
        if image.length <= delta:
            continue
        for y in _ball_candidates(f, x, ball, radius, n):
            fy = y
            for _ in range(n):
                fy = f(fy)
            if abs(fy - fx) > delta:
                return {'x': x, 'y': y, 'n': n, 'distance': abs(fy - fx)}
    return None


def test_sensitivity(f, delta, radius, horizon: int | None = None, points: Sequence | None = None) -> SensitivityReport:
    """Search, for each point x, a y with |x - y| < radius and |f^n x - f^n y| > delta."""
    delta, radius = _check_eps(delta, 'delta'), _check_eps(radius, 'radius')
    horizon = horizon or defaults.horizon()
    if isinstance(f, (RotationMap, AddingMachineMap)):
        report = SensitivityReport(delta, radius, horizon, NO_WITNESS, mode='isometry',
                                   notes=['isometries preserve every distance'])
        logger.info('sensitivity of %s: isometry, no witnesses', f)
        return report
    if not isinstance(f, (PLMap, LazyPLMap)):
        raise UnsupportedOperation(f'no sensitivity search for {type(f).__name__}')
    points = [as_rational(x) for x in points] if points is not None else [Fraction(j, 32) for j in range(33)]
    found = defaults.parallel_map(lambda x: _witness_near(f, x, delta, radius, horizon), points)
    report = SensitivityReport(delta, radius, horizon, NO_WITNESS)
    for x, witness in zip(points, found):
        if witness is None:
            report.failures.append(x)
        else:
            report.witnesses.append(witness)
    if report.witnesses and not report.failures:
        report.verdict = SENSITIVE
    logger.info('sensitivity of %s at delta=%s: %d witnesses, %d failures', f, delta, len(report.witnesses), len(report.failures))
    return report


def _iterated_image(f, interval: RationalInterval, times: int) -> RationalInterval:
    for _ in range(times):
        interval = f.image_of_interval(interval)
    return interval


def _hull_iteration(f, seed: RationalInterval, period: int, max_rounds: int) -> Tuple[Optional[RationalInterval], int]:
    current = seed
    for rounds in range(1, max_rounds + 1):
        grown = hull((current, _iterated_image(f, current, period)))
        if grown == current:
            return current, rounds
        current = grown
    return None, max_rounds


def _disjoint_interiors(intervals: Sequence[RationalInterval]) -> bool:
    ordered = sorted(intervals, key=lambda item: item.lo)
    return all(a.hi <= b.lo for a, b in zip(ordered, ordered[1:]))


def find_invariant_interval(f, seed: RationalInterval, max_rounds: int = 64, max_period: int = 4) -> InvariantIntervalResult:
    """Smallest closed interval K containing the seed with f(K) inside K, plus a
    cycle of intervals when some f^p stabilizes a piece whose images are disjoint."""
    guard([(PreconditionError, f'invariant intervals need an exact PL map, got {type(f).__name__}',
            not isinstance(f, (PLMap, LazyPLMap)))])
    interval, rounds = _hull_iteration(f, seed, 1, max_rounds)
    if interval is None:
        logger.debug('hull iteration from %s did not stabilize within %d rounds', seed, max_rounds)
        return InvariantIntervalResult(INCONCLUSIVE, seed, None, rounds=rounds)
    result = InvariantIntervalResult(STABILIZED, seed, interval, rounds=rounds)
    for period in range(2, max_period + 1):
        piece, rounds = _hull_iteration(f, seed, period, max_rounds)
        if piece is None:
            continue
        cycle = [_iterated_image(f, piece, step) for step in range(period)]
        if all(not item.is_degenerate for item in cycle) and _disjoint_interiors(cycle):
            result.verdict, result.cycle = CYCLE, cycle
            break
    return result


def rescaled_restriction(f: PLMap, interval: RationalInterval) -> Optional[PLMap]:
    """f|J carried to [0,1] by the affine map J -> [0,1]; None unless f(J) lies in J."""
    if interval.is_degenerate or not interval.covers(f.image_of_interval(interval)):
        return None
    inner = [x for x in f.breakpoints if interval.lo < x < interval.hi]
    xs = [interval.lo, *inner, interval.hi]
    scale = interval.length
    return PLMap(tuple((x - interval.lo) / scale for x in xs), tuple((f(x) - interval.lo) / scale for x in xs))


def _require_pl(*maps) -> None:
    for f in maps:
        if not isinstance(f, PLMap):
            raise UsageError(f'expected an interval PL map, got {type(f).__name__}')


def check_fix_inclusion(f: PLMap, fn: PLMap, j_max: int = 3) -> FixInclusionReport:
    """Fix(f) inside Fix(f_n), and equal preimage trees and first-arrival sets of Fix(f)."""
    _require_pl(f, fn)
    fixed = f.fixed_points()
    report = FixInclusionReport(CONFIRMED, j_max, list(fixed.points), list(fixed.intervals))
    report.not_fixed = [p for p in fixed.points if fn(p) != p]
    for item in fixed.intervals:
        if fn(item.lo) != item.lo or fn(item.hi) != item.hi or agreement_set_pl(f, fn, item).length != item.length:
            report.notes.append(f'fixed interval {item} is not fixed by f_n')
    if report.not_fixed:
        report.verdict = DISCREPANCY
        return report
    for p in fixed.points:
        for j in range(1, j_max + 1):
            mine, theirs = set(preimage_tree(f, p, j).points), set(preimage_tree(fn, p, j).points)
            first_mine, first_theirs = set(first_arrival_set(f, p, j)), set(first_arrival_set(fn, p, j))
            if mine != theirs or first_mine != first_theirs:
                report.verdict = DISCREPANCY
                report.discrepancy = {
                    'p': p, 'j': j,
                    'only_f': sorted((mine - theirs) | (first_mine - first_theirs)),
                    'only_fn': sorted((theirs - mine) | (first_theirs - first_mine)),
                }
                logger.info('preimage trees of %s differ at depth %d', p, j)
                return report
    logger.info('fix inclusion confirmed to depth %d for %d fixed points', j_max, len(fixed.points))
    return report


def prefix_points(f, p: Fraction, depth: int) -> List[Tuple[Fraction, int]]:
    """Points x with f^j(x) = p for some j <= depth, each with its smallest such j."""
    found: Dict[Fraction, int] = {p: 0}
    for j in range(1, depth + 1):
        for x in preimage_tree(f, p, j).points:
            found.setdefault(x, j)
    return sorted(found.items())


def check_prefix_agreement(system: NDSystem, p, depth: int = 3, N_max: int | None = None) -> PrefixAgreementReport:
    """For each prefix point x of p, the smallest n0 with f_n(x) = f(x) for all n0 <= n <= N_max."""
    guard([(UsageError, 'prefix agreement needs an interval system', system.space != INTERVAL)])
    p = as_rational(getattr(p, 'value', p))
    N_max = N_max or defaults.n_max()
    f = system.limit_map
    guard([(PreconditionError, f'{p} is not a fixed point of the limit', f(p) != p)])
    entries = []
    for x, j in prefix_points(f, p, depth):
        disagree = [n for n in range(1, N_max + 1) if system.fiber(n)(x) != f(x)]
        last = max(disagree, default=0)
        entries.append({
            'x': x, 'j': j,
            'n0': last + 1 if last < N_max else None,
            'counterexample': last or None,
        })
    logger.info('prefix agreement around %s: %d tree points up to depth %d', p, len(entries), depth)
    return PrefixAgreementReport(p, depth, N_max, entries)


def agreement_set(f, g, region: RationalInterval | None = None) -> IntervalUnion:
    region = region or RationalInterval(ZERO, ONE)
    _require_pl(f, g)
    return agreement_set_pl(f, g, region)


def agreement_measure(f, g, region: RationalInterval | None = None) -> Fraction:
    """Total length of {x in region : f(x) = g(x)}."""
    region = region or RationalInterval(ZERO, ONE)
    if isinstance(f, LazyPLMap) and isinstance(g, LazyPLMap):
        return f.agreement_measure_to(g, region)
    return agreement_set(f, g, region).length


def check_eventual_equality(system: NDSystem, N_max: int | None = None, eps=None, K_max: int | None = None,
                            limit_transitive: bool | None = None, grid_eps=None, horizon: int | None = None) -> EventualEqualityReport:
    """Smallest n0 with f_n = f for n0 <= n <= N_max; without one, the (CC*) check must fail."""
    f = system.limit_map
    guard([(PreconditionError, 'eventual equality needs a PL limit with finitely many pieces', not isinstance(f, PLMap))])
    guard([(PreconditionError, 'the limit does not have constant slope', f.slope_profile().constant_abs_slope is None)])
    N_max = N_max or defaults.n_max()
    eps = as_rational(eps) if eps is not None else defaults.eps_grid()[0]
    if limit_transitive is None:
        limit_transitive = test_transitivity(f, grid_eps or eps, horizon).transitive
    guard([(PreconditionError, 'the limit is not transitive on the grid', not limit_transitive)])
    full = RationalInterval(ZERO, ONE)
    agreement = [(n, agreement_measure(system.fiber(n), f, full)) for n in range(1, N_max + 1)]
    last = max((n for n, measure in agreement if measure != ONE), default=0)
    if last < N_max:
        report = EventualEqualityReport(EVENTUALLY_EQUAL, N_max, last + 1, agreement)
    else:
        cc_star = check_CCstar(system, eps, N_max, K_max)
        status = CC_STAR_VIOLATED if cc_star.verdict == FAILS else THEOREM_CHECK_FAILURE
        report = EventualEqualityReport(status, N_max, None, agreement, cc_star)
        if status == THEOREM_CHECK_FAILURE:
            logger.error('%s: no eventual equality up to %d although (CC*) holds at eps=%s', system, N_max, eps)
    logger.info('eventual equality of %s: %s (n0=%s)', system, report.status, report.n0)
    return report


def conjugate_system(system: NDSystem, h: PLMap) -> NDSystem:
    """The system g_n = h o f_n o h^-1 with limit h o f o h^-1."""
    guard([
        (UsageError, 'conjugation needs an interval system', system.space != INTERVAL),
        (PreconditionError, 'conjugacy must be a PL map', not isinstance(h, PLMap)),
    ])
    guard([(PreconditionError, f'{h} is not a homeomorphism of [0,1]',
            not (h.is_increasing_homeomorphism or h.is_decreasing_homeomorphism))])
    guard([(PreconditionError, 'lazy PL systems cannot be conjugated exactly', not isinstance(system.limit, PLMap))])
    conjugacy = h if system.conjugacy is None else compose(h, system.conjugacy)
    return dataclasses.replace(system, conjugacy=conjugacy, name=f'{system}^h')


def modulus_of_continuity(h: PLMap, delta) -> Fraction:
    """sup |h(x) - h(y)| over |x - y| <= delta for a PL homeomorphism h."""
    delta = _check_eps(delta, 'delta')
    guard([(PreconditionError, f'{h} is not a homeomorphism of [0,1]',
            not (h.is_increasing_homeomorphism or h.is_decreasing_homeomorphism))])
    if delta >= ONE:
        return ONE
    candidates = {x for b in h.breakpoints for x in (b, b - delta) if ZERO <= x <= ONE - delta}
    return max(abs(h(x + delta) - h(x)) for x in candidates)


def _window_hits(system: NDSystem, eps: Fraction, horizon: int) -> Optional[bool]:
    """Whether every grid pair has f_n^n(U) meeting V for some n <= horizon."""
    if system.space == CIRCLE:
        grid = arc_grid(eps)
        shifts = [sum((system.fiber(j).fraction for j in range(n, 2 * n)), ZERO) for n in range(1, horizon + 1)]
        return all(any(source.shifted(shift).meets(target) for shift in shifts) for source in grid for target in grid)
    if system.space == INTERVAL:
        grid = interval_grid(eps)
        for source in grid:
            images = []
            for n in range(1, horizon + 1):
                image = source
                for j in range(n, 2 * n):
                    image = system.fiber(j).image_of_interval(image)
                images.append(image)
            if None in _first_hits(images, grid):
                return False
        return True
    raise UnsupportedOperation('window hitting is implemented for interval and circle systems')


def check_equivalence_instance(system: NDSystem, eps, N_max: int | None = None, horizon: int | None = None) -> InstanceReport:
    """Under (L): window hitting, a dense diagonal orbit and transitivity of the limit agree."""
    eps = _check_eps(eps)
    N_max = N_max or defaults.n_max()
    horizon = horizon or defaults.horizon()
    parameters = {'eps': eps, 'N_max': N_max, 'horizon': horizon}
    l_report = check_L(system, N_max)
    if l_report.verdict == FAILS:
        logger.info('%s: (L) fails on the truncation, instance check skipped', system)
        return InstanceReport(HYPOTHESIS_UNMET, parameters, {'hitting': None, 'dense': None, 'transitive': None},
                              {'L': l_report.witness})
    transitive = test_transitivity(system.limit_map, eps, horizon).transitive
    hitting = _window_hits(system, eps, horizon)
    length = system.limit.word_length if system.space == CANTOR else None
    dense, base = False, None
    for x0 in epsilon_net(system.space, eps, length):
        if check_DO(system, x0, eps, N_max).coverage == ONE:
            dense, base = True, str(x0)
            break
    checks = {'hitting': hitting, 'dense': dense, 'transitive': transitive}
    verdict = CONSISTENT if len(set(checks.values())) == 1 else INSTANCE_CHECK_FAILURE
    if verdict == INSTANCE_CHECK_FAILURE:
        logger.error('%s: window hitting, dense orbit and transitivity disagree: %s', system, checks)
    return InstanceReport(verdict, parameters, checks, {'dense_base_point': base})


def _feebly_open(f) -> bool:
    if isinstance(f, PLMap):
        return not f.has_plateau
    return isinstance(f, (RotationMap, AddingMachineMap, LazyPLMap))


def check_fiber_inheritance(system: NDSystem, eps, N_max: int | None = None, K_max: int | None = None,
                            grid_eps=None, horizon: int | None = None) -> InstanceReport:
    """(CC*) together with transitive fibers forces a transitive limit."""
    eps = _check_eps(eps)
    grid_eps = as_rational(grid_eps) if grid_eps is not None else eps
    N_max = N_max or defaults.n_max()
    cc_star = check_CCstar(system, eps, N_max, K_max)
    start = cc_star.n0 or 1
    fibers = [test_transitivity(system.fiber(n), grid_eps, horizon).transitive for n in range(start, N_max + 1)]
    limit = test_transitivity(system.limit_map, grid_eps, horizon).transitive
    checks = {'cc_star': cc_star.holds, 'fibers_transitive': all(fibers), 'limit_transitive': limit}
    failed = cc_star.holds and all(fibers) and not limit
    if failed:
        logger.error('%s: transitive fibers under (CC*) with a non-transitive limit', system)
    return InstanceReport(INSTANCE_CHECK_FAILURE if failed else CONSISTENT,
                          {'eps': eps, 'grid_eps': grid_eps, 'N_max': N_max, 'from_n': start}, checks)


def check_nds_inheritance(system: NDSystem, eps, N_max: int | None = None, K_max: int | None = None,
                          grid_eps=None, horizon: int | None = None) -> InstanceReport:
    """Under (CC) with feebly open fibers, f is transitive exactly when the system is."""
    eps = _check_eps(eps)
    grid_eps = as_rational(grid_eps) if grid_eps is not None else eps
    N_max = N_max or defaults.n_max()
    cc = check_CC(system, eps, N_max, K_max)
    open_fibers = all(_feebly_open(system.fiber(n)) for n in range(1, N_max + 1))
    limit = test_transitivity(system.limit_map, grid_eps, horizon).transitive
    nds = test_nds_transitivity(system, grid_eps, horizon).transitive
    checks = {'cc': cc.holds, 'feebly_open': open_fibers, 'limit_transitive': limit, 'nds_transitive': nds}
    if not (cc.holds and open_fibers):
        verdict = HYPOTHESIS_UNMET
    else:
        verdict = CONSISTENT if limit == nds else INSTANCE_CHECK_FAILURE
    if verdict == INSTANCE_CHECK_FAILURE:
        logger.error('%s: limit transitive=%s but system transitive=%s under (CC)', system, limit, nds)
    return InstanceReport(verdict, {'eps': eps, 'grid_eps': grid_eps, 'N_max': N_max}, checks)


def check_invariant_intervals(system: NDSystem, eps, N_max: int | None = None, grid_eps=None,
                              horizon: int | None = None) -> InstanceReport:
    """For each fiber an invariant J_n containing (eps, 1 - eps), with transitivity of
    the limit and of the fiber restricted to J_n. The limit's restriction is the one
    the inheritance statement names; the fiber's is reported alongside."""
    eps = _check_eps(eps)
    guard([(DomainError, f'eps must be below 1/2, got {eps}', eps >= Fraction(1, 2))])
    grid_eps = as_rational(grid_eps) if grid_eps is not None else Fraction(1, 8)
    N_max = N_max or defaults.n_max()
    f = system.limit_map
    _require_pl(f)
    seed = RationalInterval(eps, 1 - eps)
    rows = []
    for n in range(1, N_max + 1):
        fiber = system.fiber(n)
        _require_pl(fiber)
        found = find_invariant_interval(fiber, seed)
        row = {'n': n, 'J': found.interval, 'fiber_transitive': None, 'limit_transitive': None}
        if found.interval is not None:
            for key, g in (('fiber_transitive', fiber), ('limit_transitive', f)):
                restricted = rescaled_restriction(g, found.interval)
                if restricted is not None:
                    row[key] = test_transitivity(restricted, grid_eps, horizon).transitive
        rows.append(row)
    complete = all(row['J'] is not None for row in rows)
    logger.info('invariant intervals of %s: %d fibers, all found=%s', system, N_max, complete)
    return InstanceReport(CONSISTENT if complete else INCONCLUSIVE,
                          {'eps': eps, 'grid_eps': grid_eps, 'N_max': N_max},
                          {'all_found': complete}, {'rows': rows, 'names': 'limit restriction'})


def sup_distance_trace(system: NDSystem, N_max: int) -> List[Tuple[int, Fraction]]:
    """D(f_n, f) for n <= N_max."""
    return [(n, sup_distance(system.fiber(n), system.limit_map)) for n in range(1, N_max + 1)]
