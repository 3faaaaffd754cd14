"""Checkers for the six convergence conditions of a nonautonomous system.

(CC)/(CC*) compare window compositions / fiber powers with iterates of the
limit uniformly in k, (L)/(L*) follow the diagonal distances D(f_n^n, f^n) /
D((f_n)^n, f^n), and (DO)/(DO*) measure how densely the diagonal sequences
cover an eps-net. Every verdict is relative to the stated truncation unless a
closed-form certificate is attached.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple

from ..exceptions import DomainError, UsageError, guard
from . import defaults
from .lazy_maps import LazyPLMap
from .maps import (
    AddingMachineMap,
    PLMap,
    RotationMap,
    adding_machine_distance,
    apply_flagged,
    compose_within,
    raw_coordinate,
    sup_distance_pl,
)
from .phase_spaces import (
    CANTOR,
    CIRCLE,
    INTERVAL,
    ONE,
    ZERO,
    CantorWord,
    as_rational,
    cantor_distance,
    circle_distance,
    epsilon_net,
    metric,
)
from .systems import DIAGONAL, DIAGONAL_FIBER, NDSystem, orbit

logger = logging.getLogger(__name__)

CC = 'CC'
CC_STAR = 'CCstar'
L = 'L'
L_STAR = 'Lstar'
DO = 'DO'
DO_STAR = 'DOstar'
CONDITION_CHOICES = [
    (CC, 'Uniform convergence of windows'),
    (CC_STAR, 'Orbital convergence of fiber powers'),
    (L, 'Vanishing diagonal window distance'),
    (L_STAR, 'Vanishing diagonal fiber distance'),
    (DO, 'Dense diagonal window orbit'),
    (DO_STAR, 'Dense diagonal fiber orbit'),
]

HOLDS = 'holds-on-truncation'
FAILS = 'fails-with-witness'
EXACT_PROOF = 'exact-proof'

EXACT = 'exact'
SAMPLE = 'sample'
CLOSED_FORM = 'closed-form'
MODE_CHOICES = [(EXACT, 'Exact'), (SAMPLE, 'Sampled grid')]

WINDOW = 'window'
FIBER = 'fiber'

GRID_LOWER_BOUND = 'grid-lower-bound'


@dataclass
class ConditionReport:
    condition: str
    verdict: str
    parameters: Dict[str, object]
    witness: Optional[Dict[str, object]] = None
    witnesses: List[Dict[str, object]] = field(default_factory=list)
    trace: List[Tuple[int, Fraction]] = field(default_factory=list)
    n0: Optional[int] = None
    certificate: Optional[str] = None
    mode: str = EXACT
    coverage: Optional[Fraction] = None
    coverage_trace: List[Tuple[int, Fraction]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict != FAILS


class SupResult(NamedTuple):
    value: Fraction
    attained: bool
    k: Optional[int]
    x: object
    mode: str
    certificate: Optional[str] = None

    def below(self, eps: Fraction) -> bool:
        return self.value < eps or (self.value == eps and not self.attained)


def _raw_distance(space: str, a, b) -> Fraction:
    if space == INTERVAL:
        return abs(a - b)
    if space == CIRCLE:
        return circle_distance(a, b)
    return cantor_distance(a, b)


def sample_points(system: NDSystem, n: int) -> List[object]:
    """Grid points plus the breakpoints and block nodes the fibers are built on."""
    grid = defaults.sample_grid()
    if system.space == CANTOR:
        length = system.limit.word_length
        words = {CantorWord(0, length), CantorWord((1 << length) - 1, length)}
        words.update(CantorWord((1 << j) - 1, length) for j in range(1, length))
        words.add(CantorWord(sum(1 << j for j in range(0, length, 2)), length))
        words.add(CantorWord(sum(1 << j for j in range(1, length, 2)), length))
        return sorted(words, key=lambda word: word.bits)
    points = {Fraction(j, grid) for j in range(grid + (1 if system.space == INTERVAL else 0))}
    if system.space == INTERVAL:
        for f in (system.fiber(n), system.limit_map):
            if isinstance(f, PLMap):
                points.update(f.breakpoints)
            elif isinstance(f, LazyPLMap):
                points.update(x for x, _ in f.anchors)
                for seq in f.sequences:
                    for index in range(1, n + 2):
                        points.update(x for x, _ in seq.block_nodes(index))
    return sorted(points)


def _fiber_at(system: NDSystem, n: int, step: int, kind: str):
    return system.fiber(n + step - 1) if kind == WINDOW else system.fiber(n)


def sampled_sup(system: NDSystem, n: int, K: int, kind: str, eps: Fraction | None = None, exactly: bool = False) -> SupResult:
    """max over sample points of d(g_k(x), f^k(x)) for k <= K (or k == K when `exactly`).

    Joint orbits that revisit a state under an autonomous step are cut short.
    """
    f = system.limit_map
    tail = system.tail_start
    autonomous_from = 1 if kind == FIBER else (max(tail - n + 1, 1) if tail is not None else None)
    best = SupResult(ZERO, True, None, None, SAMPLE)
    for x in sample_points(system, n):
        a = b = x
        seen = set()
        for k in range(1, K + 1):
            a, _ = apply_flagged(_fiber_at(system, n, k, kind), a)
            b, _ = apply_flagged(f, b)
            if exactly and k < K:
                continue
            distance = _raw_distance(system.space, a, b)
            if distance > best.value:
                best = SupResult(distance, True, k, x, SAMPLE)
                if eps is not None and distance >= eps:
                    return best
            if not exactly and autonomous_from is not None and k >= autonomous_from:
                if (a, b) in seen:
                    break
                seen.add((a, b))
    return best


def _dyadic_sup(system: NDSystem, n: int, K: int, kind: str) -> SupResult:
    m = n + system.family_params['shift']
    if kind == WINDOW:
        if m >= 2:
            bound = Fraction(1, 2 ** (m - 1))
            return SupResult(bound, False, K, ZERO, CLOSED_FORM,
                             f'd(f_n^k, id) = 2^-(n+shift-1) (1 - 2^-k) < 2^-(n+shift-1) = {bound}')
        return SupResult(Fraction(1, 2), True, 1, ZERO, CLOSED_FORM, 'd(f_1^1, id) = 1/2')
    return SupResult(Fraction(1, 2), True, 2 ** (m - 1), ZERO, CLOSED_FORM,
                     f'(f_n)^k with k = 2^(n+shift-1) = {2 ** (m - 1)} is the half turn')


def _adding_machine_sup(system: NDSystem, n: int) -> SupResult:
    length = system.limit.word_length
    if n >= length:
        return SupResult(ZERO, True, None, None, CLOSED_FORM, f'f_n = f on {length} symbols for n >= {length}')
    witness = CantorWord((1 << n) - 1, length)
    return SupResult(Fraction(1, n + 1), True, 1, witness, CLOSED_FORM,
                     'fibers agree with the odometer on the first n symbols; a carry shows at symbol n + 1')


def _accumulating_sup(system: NDSystem, n: int, K: int) -> SupResult | None:
    fiber, limit = system.fiber(n), system.limit_map
    value = fiber.sup_distance_to(limit)
    middle = limit.sequence('left').block_nodes(n)[1][0]
    sampled = sampled_sup(system, n, min(K, 8), FIBER)
    if sampled.value > value:
        logger.warning('sampled distance %s exceeds the closed form %s at n=%d', sampled.value, value, n)
        return None
    return SupResult(value, True, 1, middle, CLOSED_FORM,
                     f'f^2 = (f_n)^2 on the modified blocks, so sup_k d((f_n)^k, f^k) = D(f_n, f) = {value}')


def closed_form_sup(system: NDSystem, n: int, K: int, kind: str) -> SupResult | None:
    tail = system.tail_start
    if tail is not None and n >= tail:
        return SupResult(ZERO, True, None, None, CLOSED_FORM, f'f_n = f for n >= {tail}')
    if system.conjugacy is not None or n <= len(system.prefix):
        return None
    if system.family_name == 'dyadic-rotations':
        return _dyadic_sup(system, n, K, kind)
    if system.family_name == 'adding-machine':
        return _adding_machine_sup(system, n)
    if system.family_name == 'accumulating-pl' and kind == FIBER:
        return _accumulating_sup(system, n, K)
    return None


def _rotation_sup(system: NDSystem, n: int, K: int, kind: str, eps: Fraction | None) -> SupResult:
    phi = system.limit_map.fraction
    best = SupResult(ZERO, True, None, None, EXACT)
    if kind == FIBER:
        delta = (system.fiber(n).fraction - phi) % 1
        steps = range(1, min(K, delta.denominator) + 1)
        offsets = (k * delta for k in steps)
    else:
        offsets = _running_offsets(system, n, K, phi)
    for k, offset in enumerate(offsets, start=1):
        distance = circle_distance(offset, ZERO)
        if distance > best.value:
            best = SupResult(distance, True, k, ZERO, EXACT)
            if eps is not None and distance >= eps:
                break
    return best


def _running_offsets(system: NDSystem, n: int, K: int, phi: Fraction):
    offset = ZERO
    for k in range(1, K + 1):
        offset = (offset + system.fiber(n + k - 1).fraction - phi) % 1
        yield offset


def _pl_sup(system: NDSystem, n: int, K: int, kind: str, eps: Fraction | None) -> SupResult:
    budget = defaults.breakpoint_budget()
    f = system.limit_map
    window = power = None
    best = SupResult(ZERO, True, None, None, EXACT)
    for k in range(1, K + 1):
        step = _fiber_at(system, n, k, kind)
        window = step if window is None else compose_within(step, window, budget)
        power = f if power is None else compose_within(f, power, budget)
        if window is None or power is None:
            logger.debug('budget exhausted at n=%d k=%d, sampling the remaining iterates', n, k)
            sampled = sampled_sup(system, n, K, kind, eps)
            return sampled if sampled.value > best.value else best._replace(mode=SAMPLE)
        distance = sup_distance_pl(window, power)
        if distance > best.value:
            x = max(set(window.breakpoints) | set(power.breakpoints), key=lambda point: abs(window(point) - power(point)))
            best = SupResult(distance, True, k, x, EXACT)
            if eps is not None and distance >= eps:
                break
    return best


def _odometer_fiber_sup(system: NDSystem, n: int, K: int, eps: Fraction | None) -> SupResult:
    fiber, f = system.fiber(n), system.limit_map
    best = SupResult(ZERO, True, None, None, EXACT)
    for k in range(1, K + 1):
        distance = adding_machine_distance(fiber.power(k), f.power(k))
        if distance > best.value:
            best = SupResult(distance, True, k, None, EXACT)
            if eps is not None and distance >= eps:
                break
    return best


def sup_over_k(system: NDSystem, n: int, K: int, kind: str, eps: Fraction | None = None, mode: str = EXACT) -> SupResult:
    """sup_{1 <= k <= K} D(g_k, f^k) with g_k the window f_n^k or the fiber power (f_n)^k."""
    closed = closed_form_sup(system, n, K, kind)
    if closed is not None:
        return closed
    if mode == SAMPLE:
        return sampled_sup(system, n, K, kind, eps)
    fiber, limit = system.fiber(n), system.limit_map
    if isinstance(fiber, RotationMap) and isinstance(limit, RotationMap):
        return _rotation_sup(system, n, K, kind, eps)
    if isinstance(fiber, PLMap) and isinstance(limit, PLMap) and (kind == FIBER or system.is_pl(n, min(K, 4))):
        return _pl_sup(system, n, K, kind, eps)
    if kind == FIBER and isinstance(fiber, AddingMachineMap) and isinstance(limit, AddingMachineMap) and fiber.increment == limit.increment:
        return _odometer_fiber_sup(system, n, K, eps)
    return sampled_sup(system, n, K, kind, eps)


def distance_at(system: NDSystem, n: int, k: int, kind: str, mode: str = EXACT) -> SupResult:
    """D(g_k, f^k) for the single iterate count k."""
    tail = system.tail_start
    if tail is not None and n >= tail:
        return SupResult(ZERO, True, k, None, CLOSED_FORM, f'f_n = f for n >= {tail}')
    fiber, limit = system.fiber(n), system.limit_map
    if mode == EXACT and isinstance(fiber, RotationMap) and isinstance(limit, RotationMap):
        if kind == FIBER:
            offset = k * (fiber.fraction - limit.fraction)
        else:
            offset = sum((system.fiber(j).fraction for j in range(n, n + k)), ZERO) - k * limit.fraction
        return SupResult(circle_distance(offset % 1, ZERO), True, k, ZERO, EXACT)
    if mode == EXACT and kind == FIBER and isinstance(fiber, AddingMachineMap) and isinstance(limit, AddingMachineMap):
        return SupResult(adding_machine_distance(fiber.power(k), limit.power(k)), True, k, None, EXACT)
    if mode == EXACT and system.family_name == 'adding-machine' and n > len(system.prefix):
        return _adding_machine_sup(system, n)._replace(k=k)
    if mode == EXACT and kind == FIBER and system.family_name == 'accumulating-pl' and n > len(system.prefix):
        closed = _accumulating_sup(system, n, k)
        if closed is not None:
            return closed._replace(k=k)
    if mode == EXACT and all(isinstance(_fiber_at(system, n, j, kind), PLMap) for j in range(1, k + 1)) and isinstance(limit, PLMap):
        budget = defaults.breakpoint_budget()
        window = power = None
        for j in range(1, k + 1):
            step = _fiber_at(system, n, j, kind)
            window = step if window is None else compose_within(step, window, budget)
            power = limit if power is None else compose_within(limit, power, budget)
            if window is None or power is None:
                break
        else:
            return SupResult(sup_distance_pl(window, power), True, k, None, EXACT)
    return sampled_sup(system, n, k, kind, exactly=True)


def _check_params(eps, N_max: int, K_max: int | None, mode: str):
    guard([
        (DomainError, f'N_max must be at least 1, got {N_max}', N_max < 1),
        (DomainError, f'K_max must be at least 1, got {K_max}', K_max is not None and K_max < 1),
        (UsageError, f'unknown mode {mode!r}', mode not in (EXACT, SAMPLE)),
    ])
    if eps is None:
        return None
    eps = as_rational(eps)
    guard([(DomainError, f'eps must be positive, got {eps}', eps <= 0)])
    return eps


def _witness_record(n: int, result: SupResult) -> Dict[str, object]:
    return {'n': n, 'k': result.k, 'x': None if result.x is None else str(result.x), 'distance': result.value}


def _uniform_check(condition: str, kind: str, system: NDSystem, eps, N_max: int | None, K_max: int | None, mode: str) -> ConditionReport:
    N_max = N_max or defaults.n_max()
    K_max = K_max or defaults.k_max()
    eps = _check_params(eps, N_max, K_max, mode)
    results = defaults.parallel_map(lambda n: sup_over_k(system, n, K_max, kind, eps, mode), range(1, N_max + 1))
    n0 = None
    for n in range(N_max, 0, -1):
        if not results[n - 1].below(eps):
            break
        n0 = n
    used = {result.mode for result in results}
    report = ConditionReport(
        condition=condition,
        verdict=FAILS if n0 is None else HOLDS,
        parameters={'eps': eps, 'N_max': N_max, 'K_max': K_max, 'mode': mode, 'grid': defaults.sample_grid()},
        witnesses=[_witness_record(n, result) for n, result in enumerate(results, start=1) if not result.below(eps)],
        trace=[(n, result.value) for n, result in enumerate(results, start=1)],
        n0=n0,
        mode=SAMPLE if SAMPLE in used else (CLOSED_FORM if used == {CLOSED_FORM} else EXACT),
    )
    if n0 is None:
        report.witness = _witness_record(N_max, results[-1])
    if used == {CLOSED_FORM}:
        report.certificate = results[-1].certificate if n0 is None else results[n0 - 1].certificate
        if n0 is not None:
            report.verdict = EXACT_PROOF
    if SAMPLE in used:
        report.notes.append(GRID_LOWER_BOUND)
    if any(result.k is not None and result.k > K_max for result in results):
        report.notes.append('closed-form witnesses lie beyond K_max')
    logger.info('%s on %s at eps=%s: %s (n0=%s)', condition, system, eps, report.verdict, n0)
    return report


def check_CC(system: NDSystem, eps, N_max: int | None = None, K_max: int | None = None, mode: str = EXACT) -> ConditionReport:
    return _uniform_check(CC, WINDOW, system, eps, N_max, K_max, mode)


def check_CCstar(system: NDSystem, eps, N_max: int | None = None, K_max: int | None = None, mode: str = EXACT) -> ConditionReport:
    return _uniform_check(CC_STAR, FIBER, system, eps, N_max, K_max, mode)


def dyadic_trace_formula(system: NDSystem, n: int, kind: str) -> Fraction:
    shift = system.family_params['shift']
    if kind == FIBER:
        total = Fraction(n, 2 ** (n + shift))
    else:
        total = sum((Fraction(1, 2 ** (j + shift)) for j in range(n, 2 * n)), ZERO)
    return circle_distance(total % 1, ZERO)


def _decay_check(condition: str, kind: str, system: NDSystem, N_max: int | None, mode: str, threshold) -> ConditionReport:
    N_max = N_max or defaults.n_max()
    _check_params(None, N_max, None, mode)
    threshold = defaults.trace_threshold() if threshold is None else as_rational(threshold)
    results = defaults.parallel_map(lambda n: distance_at(system, n, n, kind, mode), range(1, N_max + 1))
    trace = [(n, result.value) for n, result in enumerate(results, start=1)]
    values = [value for _, value in trace]
    tail = values[len(values) // 2:]
    decreasing = all(a >= b for a, b in zip(tail, tail[1:]))
    below = values[-1] <= threshold
    report = ConditionReport(
        condition=condition,
        verdict=HOLDS if decreasing and below else FAILS,
        parameters={'N_max': N_max, 'mode': mode, 'threshold': threshold, 'grid': defaults.sample_grid()},
        trace=trace,
        mode=SAMPLE if any(result.mode == SAMPLE for result in results) else EXACT,
    )
    if report.verdict == FAILS:
        if not below:
            report.witness = {'n': N_max, 'distance': values[-1], 'reason': f'trace above threshold {threshold}'}
        else:
            n = next(index for index in range(len(tail) - 1) if tail[index] < tail[index + 1]) + len(values) // 2 + 2
            report.witness = {'n': n, 'distance': values[n - 1], 'reason': 'trace increases on its tail'}
    if system.family_name == 'dyadic-rotations' and not system.prefix:
        formula = 'min(n/2^n, 1 - n/2^n)' if kind == FIBER else 'sum_{j=n}^{2n-1} 2^-j'
        matches = all(value == dyadic_trace_formula(system, n, kind) for n, value in trace)
        report.certificate = f'trace(n) = {formula} (shift {system.family_params["shift"]})'
        report.notes.append('formula matches' if matches else 'formula mismatch')
    if report.mode == SAMPLE:
        report.notes.append(GRID_LOWER_BOUND)
    logger.info('%s on %s: %s, trace(%d) = %s', condition, system, report.verdict, N_max, values[-1])
    return report


def check_L(system: NDSystem, N_max: int | None = None, mode: str = EXACT, threshold=None) -> ConditionReport:
    return _decay_check(L, WINDOW, system, N_max, mode, threshold)


def check_Lstar(system: NDSystem, N_max: int | None = None, mode: str = EXACT, threshold=None) -> ConditionReport:
    return _decay_check(L_STAR, FIBER, system, N_max, mode, threshold)


def net_coverage(space: str, net, entries, eps: Fraction) -> Tuple[List[bool], List[Tuple[int, Fraction]]]:
    """Which net points lie strictly within eps of an entry, and the covered share after each entry."""
    covered = [False] * len(net)
    trace = []
    for n, point in entries:
        for index, net_point in enumerate(net):
            if not covered[index] and metric(space, net_point, point) < eps:
                covered[index] = True
        trace.append((n, Fraction(sum(covered), len(net))))
    return covered, trace


def _dense_check(condition: str, kind: str, system: NDSystem, x0, eps, N_max: int | None) -> ConditionReport:
    N_max = N_max or defaults.n_max()
    eps = _check_params(eps, N_max, None, EXACT)
    length = system.limit.word_length if system.space == CANTOR else None
    net = epsilon_net(system.space, eps, length)
    record = orbit(system, x0, N_max, kind)
    covered, coverage_trace = net_coverage(system.space, net, record.entries, eps)
    coverage = coverage_trace[-1][1]
    report = ConditionReport(
        condition=condition,
        verdict=HOLDS if coverage == ONE else FAILS,
        parameters={'eps': eps, 'N_max': N_max, 'x0': str(x0), 'net_size': len(net)},
        coverage=coverage,
        coverage_trace=coverage_trace,
    )
    if coverage != ONE:
        missing = net[covered.index(False)]
        nearest = min(metric(system.space, missing, point) for point in record.points())
        report.witness = {'point': str(missing), 'nearest_distance': nearest}
    if record.saturated:
        report.notes.append(f'precision-saturated entries {list(record.saturated)}')
    logger.info('%s on %s from %s at eps=%s: coverage %s', condition, system, x0, eps, coverage)
    return report


def check_DO(system: NDSystem, x0, eps, N_max: int | None = None) -> ConditionReport:
    return _dense_check(DO, DIAGONAL, system, x0, eps, N_max)


def check_DOstar(system: NDSystem, x0, eps, N_max: int | None = None) -> ConditionReport:
    return _dense_check(DO_STAR, DIAGONAL_FIBER, system, x0, eps, N_max)


def replay_witness(system: NDSystem, condition: str, witness: Dict[str, object]) -> Fraction:
    """Recompute d(g_k(x), f^k(x)) for a (CC)/(CC*) witness by pointwise iteration."""
    guard([(UsageError, f'{condition} witnesses are not pointwise', condition not in (CC, CC_STAR))])
    kind = WINDOW if condition == CC else FIBER
    n, k = witness['n'], witness['k']
    x = _parse_raw(system.space, witness['x'])
    fiber = system.fiber(n)
    if kind == FIBER and isinstance(fiber, (RotationMap, AddingMachineMap)):
        a = fiber.power(k)(x)
    else:
        a = x
        for step in range(1, k + 1):
            a = _fiber_at(system, n, step, kind)(a)
    limit = system.limit_map
    b = limit.power(k)(x) if isinstance(limit, (RotationMap, AddingMachineMap)) else x
    if not isinstance(limit, (RotationMap, AddingMachineMap)):
        for _ in range(k):
            b = limit(b)
    return _raw_distance(system.space, a, b)


def _parse_raw(space: str, text: str):
    if space == CANTOR:
        return CantorWord.from_string(text)
    return raw_coordinate(as_rational(text)) if not isinstance(text, Fraction) else text
