from fractions import Fraction

from django.test import SimpleTestCase

from transitivity.exceptions import ConfigurationError, DomainError, UnsupportedOperation, UsageError
from transitivity.services.maps import IDENTITY, TENT, AddingMachineMap, PLMap, RotationMap, compose
from transitivity.services.phase_spaces import CantorWord, CirclePoint, IntervalPoint, IntervalUnion, RationalInterval
from transitivity.services.systems import (
    AUTONOMOUS,
    DIAGONAL,
    DIAGONAL_FIBER,
    ORBIT,
    NDSystem,
    collapsing_tent,
    fiber_power,
    inverse_window_set,
    limit_power,
    orbit,
    window_compose,
)

from . import factories


def dyadic():
    return NDSystem.from_family('dyadic-rotations')


class NDSystemTests(SimpleTestCase):
    def test_family_fibers_and_limit(self):
        system = dyadic()
        self.assertEqual(system.fiber(3), RotationMap(Fraction(1, 8)))
        self.assertEqual(system.limit_map, RotationMap(0))
        self.assertIsNone(system.tail_start)
        shifted = NDSystem.from_family('dyadic-rotations', {'shift': 1})
        self.assertEqual(shifted.fiber(3), RotationMap(Fraction(1, 16)))

    def test_prefix_then_limit(self):
        system = NDSystem(TENT.space, TENT, (IDENTITY, IDENTITY))
        self.assertEqual(system.fiber(2), IDENTITY)
        self.assertEqual(system.fiber(3), TENT)
        self.assertEqual(system.tail_start, 3)
        with self.assertRaises(DomainError):
            system.fiber(0)

    def test_adding_machine_tail(self):
        system = NDSystem.from_family('adding-machine', {'word_length': 8})
        self.assertEqual(system.fiber(3), AddingMachineMap(8, 3))
        self.assertEqual(system.tail_start, 8)

    def test_invalid_systems(self):
        with self.assertRaises(UsageError):
            NDSystem(TENT.space, RotationMap(0))
        with self.assertRaises(UsageError):
            NDSystem(TENT.space, TENT, (RotationMap(0),))
        with self.assertRaises(ConfigurationError):
            NDSystem.from_family('no-such-family')
        with self.assertRaises(ConfigurationError):
            NDSystem.from_family('dyadic-rotations', {'speed': 2})

    def test_non_surjective_maps_are_logged(self):
        with self.assertLogs('transitivity.services.systems', 'WARNING'):
            NDSystem.constant(PLMap((0, 1), (0, '1/2')))

    def test_collapsing_tent(self):
        f = collapsing_tent(1, depth=2)
        self.assertEqual(f.plateaus(), [RationalInterval(0, '1/8')])
        self.assertEqual(f(Fraction(1, 4)), Fraction(1, 2))
        with self.assertRaises(ConfigurationError):
            collapsing_tent(1, side='middle')


class CompositionTests(SimpleTestCase):
    def test_window_of_rotations(self):
        self.assertEqual(window_compose(dyadic(), 2, 3), RotationMap(Fraction(7, 16)))
        self.assertEqual(window_compose(dyadic(), 4, 0), RotationMap(0))
        self.assertEqual(fiber_power(dyadic(), 3, 4), RotationMap(Fraction(1, 2)))
        self.assertEqual(limit_power(dyadic(), 9), RotationMap(0))

    def test_window_of_pl_maps(self):
        system = NDSystem(TENT.space, TENT, (IDENTITY,))
        self.assertEqual(window_compose(system, 1, 3), compose(TENT, TENT))
        with self.assertRaises(DomainError):
            window_compose(system, 0, 1)

    def test_cocycle_identity(self):
        fake = factories.make_faker(17)
        for _ in range(factories.INSTANCES):
            system = factories.pl_system(fake)
            n, k, j = fake.random_int(1, 3), fake.random_int(0, 2), fake.random_int(0, 2)
            whole = window_compose(system, n, k + j)
            parts = compose(window_compose(system, n + k, j), window_compose(system, n, k))
            self.assertEqual(whole, parts)


class OrbitTests(SimpleTestCase):
    def test_orbit_kinds(self):
        system = dyadic()
        start = CirclePoint(0)
        self.assertEqual(orbit(system, start, 3, ORBIT).points(), [CirclePoint('1/2'), CirclePoint('3/4'), CirclePoint('7/8')])
        self.assertEqual(orbit(system, start, 2, DIAGONAL).points(), [CirclePoint('1/2'), CirclePoint('3/8')])
        self.assertEqual(orbit(system, start, 3, DIAGONAL_FIBER).points(), [CirclePoint('1/2'), CirclePoint('1/2'), CirclePoint('3/8')])
        self.assertEqual(orbit(system, start, 2, AUTONOMOUS).points(), [start, start])

    def test_saturated_entries_are_flagged(self):
        system = NDSystem.from_family('adding-machine', {'word_length': 2})
        record = orbit(system, CantorWord.from_string('11'), 2, AUTONOMOUS)
        self.assertEqual(record.saturated, (1,))

    def test_invalid_orbits(self):
        with self.assertRaises(UsageError):
            orbit(dyadic(), CirclePoint(0), 3, 'sideways')
        with self.assertRaises(DomainError):
            orbit(dyadic(), CirclePoint(0), 0)
        with self.assertRaises(UsageError):
            orbit(dyadic(), IntervalPoint(0), 3)


class InverseWindowTests(SimpleTestCase):
    def test_preimage_of_a_half(self):
        system = NDSystem.constant(TENT)
        found = inverse_window_set(system, 1, IntervalUnion.of([RationalInterval(0, '1/2')]))
        self.assertEqual(list(found), [RationalInterval(0, '1/4'), RationalInterval('3/4', 1)])

    def test_needs_pl_fibers(self):
        with self.assertRaises(UnsupportedOperation):
            inverse_window_set(dyadic(), 1, IntervalUnion.of([RationalInterval(0, '1/2')]))


class WindowPropertyTests(SimpleTestCase):
    def test_windows_of_surjective_fibers_are_surjective(self):
        fake = factories.make_faker(41)
        full = RationalInterval(0, 1)
        for _ in range(factories.INSTANCES):
            system = factories.pl_system(fake)
            n, k = fake.random_int(1, 5), fake.random_int(1, 3)
            self.assertEqual(window_compose(system, n, k).image_of_interval(full), full)

    def test_inverse_windows_land_inside_the_target(self):
        fake = factories.make_faker(43)
        for _ in range(factories.INSTANCES):
            system = factories.pl_system(fake)
            n, k = fake.random_int(1, 4), fake.random_int(1, 3)
            target = RationalInterval(*sorted((factories.rational(fake), factories.rational(fake))))
            found = inverse_window_set(system, n, IntervalUnion.of([target]), k)
            self.assertTrue(found)
            window = window_compose(system, n, k)
            for part in found:
                self.assertTrue(target.covers(window.image_of_interval(part)), f'{part} -> {target}')
