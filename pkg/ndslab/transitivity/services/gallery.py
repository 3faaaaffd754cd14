"""Named example systems, each bundled with machine-checkable assertions.

Assertions are lazy: building an entry constructs the system and describes
what must hold, evaluating an assertion runs the checkers.
"""
from __future__ import annotations

import logging
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

from ..exceptions import ConfigurationError, DynamicsError, guard
from . import analysis, conditions, defaults
from .lazy_maps import accumulating_family
from .maps import TENT, PLMap, fixed_points, preimage_tree, sup_distance
from .phase_spaces import (
    HALF,
    ONE,
    ZERO,
    CantorWord,
    CirclePoint,
    IntervalPoint,
    RationalInterval,
    as_rational,
    cantor_distance,
    circle_distance,
)
from .systems import NDSystem

logger = logging.getLogger(__name__)

CLOSED_FORM = 'closed-form'
DERIVED = 'derived'
TRIVIAL = 'trivial'

ROTATIONS_TO_IDENTITY = 'G1-rotations-to-identity'
RATIONAL_TO_IRRATIONAL = 'G2-rational-to-irrational-rotation'
CANTOR_ADDING_MACHINE = 'G3-cantor-adding-machine'
ACCUMULATING_PL = 'G4-accumulating-pl-family'
TENT_CONSTANT_SLOPE = 'G5-tent-constant-slope'
COLLAPSED_FIRST_MAP = 'G6-collapsed-first-map'


@dataclass(frozen=True)
class AssertionResult:
    description: str
    expected: object
    actual: object
    passed: bool
    provenance: str
    error: str = ''


@dataclass(frozen=True)
class Assertion:
    description: str
    expected: object
    provenance: str
    measure: Callable[[], object]
    compare: Callable[[object, object], bool] = operator.eq

    def evaluate(self) -> AssertionResult:
        try:
            actual = self.measure()
            passed = bool(self.compare(actual, self.expected))
        except DynamicsError as exc:
            logger.warning('assertion %r raised %s', self.description, exc)
            return AssertionResult(self.description, self.expected, None, False, self.provenance, str(exc))
        return AssertionResult(self.description, self.expected, actual, passed, self.provenance)


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    title: str
    defaults: Dict[str, object]
    builder: Callable[..., Tuple[NDSystem, List[Assertion]]]
    notes: Tuple[str, ...] = ()

    def resolve(self, params: Dict[str, object] | None) -> Dict[str, object]:
        params = dict(params or {})
        unknown = sorted(set(params) - set(self.defaults))
        guard([(ConfigurationError, f'{self.id}: unknown parameters {unknown}', bool(unknown))])
        resolved = dict(self.defaults)
        for key, value in params.items():
            resolved[key] = _coerce(self.defaults[key], value, key)
        return resolved


@dataclass
class EntryResult:
    id: str
    params: Dict[str, object]
    results: List[AssertionResult] = field(default_factory=list)
    notes: Tuple[str, ...] = ()
    error: str = ''

    @property
    def passed(self) -> bool:
        return not self.error and all(result.passed for result in self.results)


@dataclass
class GallerySummary:
    entries: List[EntryResult]

    @property
    def failures(self) -> int:
        return sum(1 for entry in self.entries for result in entry.results if not result.passed) + sum(
            1 for entry in self.entries if entry.error)

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _coerce(default, value, key: str):
    try:
        if isinstance(default, bool):
            return value if isinstance(value, bool) else str(value).lower() in ('1', 'true', 'yes')
        if isinstance(default, int):
            return int(value)
        if isinstance(default, Fraction):
            return as_rational(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f'parameter {key}: {exc}') from exc
    return value


def _in_range(entry_id: str, checks) -> None:
    guard([(ConfigurationError, f'{entry_id}: {message}', failed) for message, failed in checks])


def _all_equal(actual, expected) -> bool:
    return list(actual) == list(expected)


def _rotations_to_identity(N: int, shift: int, eps: Fraction, x0: Fraction) -> Tuple[NDSystem, List[Assertion]]:
    _in_range(ROTATIONS_TO_IDENTITY, [
        ('N must be at least 2', N < 2),
        ('shift must be nonnegative', shift < 0),
    ])
    system = NDSystem.from_family('dyadic-rotations', {'shift': shift}, name=ROTATIONS_TO_IDENTITY)
    point = CirclePoint(x0)
    lstar_expected = [(n, min(Fraction(n, 2 ** n), 1 - Fraction(n, 2 ** n))) for n in range(1, N + 1)]
    l_expected = [(n, sum((Fraction(1, 2 ** j) for j in range(n, 2 * n)), ZERO)) for n in range(1, N + 1)]

    def star_witnesses():
        report = conditions.check_CCstar(system, eps, N)
        return [(item['k'], item['distance']) for item in report.witnesses]

    def far_half(report) -> bool:
        uncovered = as_rational(report.witness['point'])
        return report.coverage < ONE and circle_distance(uncovered, x0) >= HALF - eps

    return system, [
        Assertion('L* trace equals min(n/2^n, 1 - n/2^n)', lstar_expected, CLOSED_FORM,
                  lambda: conditions.check_Lstar(system, N).trace, _all_equal),
        Assertion('L trace equals 2^-n + ... + 2^-(2n-1)', l_expected, CLOSED_FORM,
                  lambda: conditions.check_L(system, N).trace, _all_equal),
        Assertion(f'(CC) holds with a closed-form certificate at eps={eps}', conditions.EXACT_PROOF, CLOSED_FORM,
                  lambda: conditions.check_CC(system, eps, N).verdict),
        Assertion('(CC*) fails at every n with k = 2^(n-1) and distance 1/2',
                  [(2 ** (n - 1), HALF) for n in range(1, N + 1)], CLOSED_FORM, star_witnesses, _all_equal),
        Assertion('(DO*) misses the half circle opposite x0', True, CLOSED_FORM,
                  lambda: far_half(conditions.check_DOstar(system, point, eps, N))),
        Assertion('(DO) misses the half circle opposite x0', True, CLOSED_FORM,
                  lambda: far_half(conditions.check_DO(system, point, eps, N))),
        Assertion('rational fibers have finite orbits and are not transitive', [False] * min(N, 4), DERIVED,
                  lambda: [analysis.test_transitivity(system.fiber(n), eps).transitive for n in range(1, min(N, 4) + 1)],
                  _all_equal),
    ]


def _rational_to_irrational(N: int, irrational: str, offset: int, eps: Fraction, horizon: int) -> Tuple[NDSystem, List[Assertion]]:
    _in_range(RATIONAL_TO_IRRATIONAL, [('N must be at least 2', N < 2), ('offset must be nonnegative', offset < 0)])
    system = NDSystem.from_family('convergent-rotations', {'irrational': irrational, 'offset': offset},
                                  name=RATIONAL_TO_IRRATIONAL)
    return system, [
        Assertion('the limit rotation is transitive', True, CLOSED_FORM,
                  lambda: analysis.test_transitivity(system.limit_map, eps, horizon).transitive),
        Assertion('the rational fibers are not transitive', [False] * 3, CLOSED_FORM,
                  lambda: [analysis.test_transitivity(system.fiber(n), eps, horizon).transitive for n in range(1, 4)],
                  _all_equal),
        Assertion('(L*) holds on the truncation', conditions.HOLDS, DERIVED,
                  lambda: conditions.check_Lstar(system, N).verdict),
        Assertion(f'(DO*) covers the {eps}-net', ONE, DERIVED,
                  lambda: conditions.check_DOstar(system, CirclePoint(ZERO), eps, N).coverage),
        Assertion('window hitting, dense orbit and limit transitivity agree', analysis.CONSISTENT, DERIVED,
                  lambda: analysis.check_equivalence_instance(system, eps, N, horizon).verdict),
    ]


def _cantor_adding_machine(L: int, n: int, k: int, eps: Fraction) -> Tuple[NDSystem, List[Assertion]]:
    _in_range(CANTOR_ADDING_MACHINE, [
        (f'word length must be at least 2, got {L}', L < 2),
        (f'fiber index must satisfy 1 <= n < L, got n={n}, L={L}', not 1 <= n < L),
        ('k must be positive', k < 1),
    ])
    system = NDSystem.from_family('adding-machine', {'word_length': L}, name=CANTOR_ADDING_MACHINE)
    fiber, f = system.fiber(n), system.limit_map
    word = CantorWord((1 << n) - 1, L)
    samples = [word, CantorWord(0, L), CantorWord((1 << L) - 1, L), CantorWord(sum(1 << j for j in range(0, L, 3)), L)]
    return system, [
        Assertion(f'rho((f_n)^k x, f^k x) <= 1/(n+1) at x = 1^n 0^(L-n)', Fraction(1, n + 1), CLOSED_FORM,
                  lambda: cantor_distance(fiber.power(k)(word), f.power(k)(word)), operator.le),
        Assertion('every tested word is periodic under f_n with period dividing 2^n', True, CLOSED_FORM,
                  lambda: all(fiber.power(2 ** n)(x) == x for x in samples)),
        Assertion(f'(CC*) holds with a closed-form certificate at eps={eps}', conditions.EXACT_PROOF, CLOSED_FORM,
                  lambda: conditions.check_CCstar(system, eps, min(L, defaults.n_max())).verdict),
        Assertion('the full odometer is transitive and the truncation f_n is not', (True, False), CLOSED_FORM,
                  lambda: (analysis.test_transitivity(f, Fraction(1, 4)).transitive,
                           analysis.test_transitivity(fiber, Fraction(1, 4)).transitive)),
    ]


def _accumulating_pl(m: int, pieces: int, samples: int, eps: Fraction, grid_eps: Fraction, horizon: int) -> Tuple[NDSystem, List[Assertion]]:
    _in_range(ACCUMULATING_PL, [('m must be at least 1', m < 1), ('pieces must be at least 1', pieces < 1)])
    system = NDSystem.from_family('accumulating-pl', name=ACCUMULATING_PL)
    f, fm = accumulating_family(), accumulating_family(m)
    left = f.sequence('left')
    indices = range(m, m + pieces)

    def squares_agree() -> bool:
        for index in indices:
            block = left.block_domain(index)
            for j in range(1, samples + 1):
                x = block.lo + block.length * Fraction(j, samples + 1)
                if f(f(x)) != fm(fm(x)):
                    return False
        return True

    return system, [
        Assertion('f and f_m agree off the modified blocks', True, DERIVED,
                  lambda: all(f(x) == fm(x) for index in range(1, m) for x, _ in left.block_nodes(index))
                  and all(f(x) == fm(x) for x in (ZERO, Fraction(1, 4), HALF, Fraction(3, 4), ONE))),
        Assertion('f^2 = (f_m)^2 on the modified blocks', True, CLOSED_FORM, squares_agree),
        Assertion('block sup distance equals 1/2^(2n+1)', [Fraction(1, 2 ** (2 * n + 1)) for n in indices], CLOSED_FORM,
                  lambda: [f.block_sup_distance(fm, 'left', n) for n in indices], _all_equal),
        Assertion('agreement measure equals 1 - sum_{n>=m} 2/2^(2n+3)', 1 - Fraction(1, 3 * 4 ** m), DERIVED,
                  lambda: analysis.agreement_measure(f, fm, RationalInterval(ZERO, ONE))),
        Assertion(f'(CC*) holds with a closed-form certificate at eps={eps}', conditions.EXACT_PROOF, CLOSED_FORM,
                  lambda: conditions.check_CCstar(system, eps, 8).verdict),
        Assertion(f'f is transitive on the {grid_eps}-grid within {horizon} iterates', True, DERIVED,
                  lambda: analysis.test_transitivity(f, grid_eps, horizon).transitive),
        Assertion('f differs from every f_n', True, CLOSED_FORM,
                  lambda: all(sup_distance(f, accumulating_family(n)) > 0 for n in range(1, m + pieces))),
    ]


def _tent_constant_slope(eps: Fraction, horizon: int, delta: Fraction, radius: Fraction) -> Tuple[NDSystem, List[Assertion]]:
    system = NDSystem.constant(TENT, name=TENT_CONSTANT_SLOPE)
    third = Fraction(1, 3)
    return system, [
        Assertion(f'tent is transitive on the {eps}-grid with every minimal n <= 6', (True, True), DERIVED,
                  lambda: (lambda report: (report.transitive, report.max_n <= 6))(analysis.test_transitivity(TENT, eps, horizon))),
        Assertion('Fix(T) = {0, 2/3}', (ZERO, 2 * third), CLOSED_FORM, lambda: fixed_points(TENT).points),
        Assertion('T^-2(2/3) = {1/6, 1/3, 2/3, 5/6}', (third / 2, third, 2 * third, 5 * third / 2), CLOSED_FORM,
                  lambda: preimage_tree(TENT, 2 * third, 2).points),
        Assertion(f'every point of the 1/32 grid has a sensitivity witness for delta={delta}', analysis.SENSITIVE, DERIVED,
                  lambda: analysis.test_sensitivity(TENT, delta, radius, horizon).verdict),
    ]


COLLAPSED_FIRST = PLMap(
    (ZERO, Fraction(1, 4), Fraction(3, 8), HALF, ONE),
    (ZERO, Fraction(2, 3), Fraction(2, 3), ONE, ZERO),
)


def _collapsed_first_map(eps: Fraction, N: int, grid_eps: Fraction, horizon: int) -> Tuple[NDSystem, List[Assertion]]:
    system = NDSystem(TENT.space, TENT, (COLLAPSED_FIRST,), name=COLLAPSED_FIRST_MAP)
    start = IntervalPoint(Fraction(3, 664))
    plateau = RationalInterval(Fraction(1, 4), Fraction(3, 8))
    return system, [
        Assertion('f_1 is surjective with a plateau at the fixed point 2/3', (True, [plateau]), TRIVIAL,
                  lambda: (COLLAPSED_FIRST.is_surjective, COLLAPSED_FIRST.plateaus())),
        Assertion(f'the orbit of 3/664 covers the {eps}-net', ONE, DERIVED,
                  lambda: analysis.orbit_coverage(system, start, eps, N)['coverage']),
        Assertion('the system is not transitive: the plateau collapses to 2/3', (False, str(plateau)), DERIVED,
                  lambda: (lambda report: (report.transitive, report.witness['U']))(
                      analysis.test_nds_transitivity(system, grid_eps, horizon))),
    ]


ENTRIES: Dict[str, GalleryEntry] = {
    entry.id: entry for entry in (
        GalleryEntry(
            ROTATIONS_TO_IDENTITY, 'Dyadic rotations converging to the identity',
            {'N': 8, 'shift': 0, 'eps': Fraction(1, 8), 'x0': ZERO},
            _rotations_to_identity,
            ('Rational rotations are periodic, so no fiber is transitive; the assertions '
             'check finite orbits rather than fiber transitivity.',),
        ),
        GalleryEntry(
            RATIONAL_TO_IRRATIONAL, 'Convergent rotations converging to an irrational rotation',
            {'N': 32, 'irrational': 'golden', 'offset': 2, 'eps': Fraction(1, 20), 'horizon': 32},
            _rational_to_irrational,
            ('The fibers converge to the irrational rotation g itself.',),
        ),
        GalleryEntry(
            CANTOR_ADDING_MACHINE, 'Truncated adding machines on {0,1}^L',
            {'L': 32, 'n': 3, 'k': 5, 'eps': Fraction(1, 8)},
            _cantor_adding_machine,
        ),
        GalleryEntry(
            ACCUMULATING_PL, 'PL maps with blocks accumulating at 1/2 and 1',
            {'m': 1, 'pieces': 6, 'samples': 50, 'eps': Fraction(1, 8), 'grid_eps': Fraction(1, 16), 'horizon': 40},
            _accumulating_pl,
        ),
        GalleryEntry(
            TENT_CONSTANT_SLOPE, 'Tent map baseline',
            {'eps': Fraction(1, 8), 'horizon': 16, 'delta': Fraction(1, 4), 'radius': Fraction(1, 32)},
            _tent_constant_slope,
        ),
        GalleryEntry(
            COLLAPSED_FIRST_MAP, 'Tent system whose first map collapses an interval',
            {'eps': Fraction(1, 32), 'N': 100, 'grid_eps': Fraction(1, 8), 'horizon': 16},
            _collapsed_first_map,
            ('A dense orbit does not make the system transitive.',),
        ),
    )
}


def entry(entry_id: str) -> GalleryEntry:
    if entry_id not in ENTRIES:
        raise ConfigurationError(f'unknown gallery entry {entry_id!r}; expected one of {sorted(ENTRIES)}')
    return ENTRIES[entry_id]


def build(entry_id: str, params: Dict[str, object] | None = None) -> Tuple[NDSystem, List[Assertion]]:
    definition = entry(entry_id)
    return definition.builder(**definition.resolve(params))


def run(entry_id: str, params: Dict[str, object] | None = None) -> EntryResult:
    definition = entry(entry_id)
    resolved = definition.resolve(params)
    result = EntryResult(entry_id, resolved, notes=definition.notes)
    try:
        _, assertions = definition.builder(**resolved)
    except DynamicsError as exc:
        result.error = str(exc)
        return result
    result.results = [assertion.evaluate() for assertion in assertions]
    failed = [item.description for item in result.results if not item.passed]
    if failed:
        logger.warning('%s: %d assertions failed: %s', entry_id, len(failed), failed)
    logger.info('%s: %d/%d assertions passed', entry_id, len(result.results) - len(failed), len(result.results))
    return result


def run_all(config: Dict[str, Dict[str, object]] | None = None) -> GallerySummary:
    """Every entry at its configured parameters; failures are collected, not raised."""
    config = config or {}
    unknown = sorted(set(config) - set(ENTRIES))
    guard([(ConfigurationError, f'unknown gallery entries {unknown}', bool(unknown))])
    return GallerySummary(defaults.parallel_map(lambda entry_id: run(entry_id, config.get(entry_id)), sorted(ENTRIES)))
