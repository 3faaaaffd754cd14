from fractions import Fraction

from django.test import SimpleTestCase

from transitivity.exceptions import ConfigurationError, DomainError, PreconditionError, UnsupportedOperation, UsageError
from transitivity.services import analysis
from transitivity.services.conditions import FIBER, sup_over_k
from transitivity.services.gallery import COLLAPSED_FIRST
from transitivity.services.lazy_maps import accumulating_family
from transitivity.services.maps import IDENTITY, TENT, AddingMachineMap, CompositeMap, PLMap, RotationMap
from transitivity.services.phase_spaces import INTERVAL, CirclePoint, IntervalPoint, RationalInterval
from transitivity.services.systems import NDSystem

from . import factories

EIGHTH = Fraction(1, 8)
CLIPPED_TENT = PLMap((0, '1/2', '3/4', 1), (0, 1, '1/2', '1/2'))
STRETCH = PLMap((0, '1/2', 1), (0, '1/4', 1))


def collapsed_system():
    return NDSystem(TENT.space, TENT, (COLLAPSED_FIRST,))


class TransitivityTests(SimpleTestCase):
    def test_tent_is_transitive_on_the_grid(self):
        report = analysis.test_transitivity(TENT, EIGHTH, 16)
        self.assertTrue(report.transitive)
        self.assertEqual(report.mode, analysis.EXACT_PL)
        self.assertEqual(len(report.table), 8)
        self.assertLessEqual(report.max_n, 6)

    def test_rational_rotation_has_finite_orbits(self):
        report = analysis.test_transitivity(RotationMap('1/4'), EIGHTH, 16)
        self.assertEqual(report.verdict, analysis.FAILS_WITH_PAIR)
        self.assertEqual(report.witness['U'], '(0, 1/8)')

    def test_irrational_rotation(self):
        report = analysis.test_transitivity(RotationMap.named('golden'), EIGHTH, 32)
        self.assertTrue(report.transitive)
        self.assertIn('irrational rotation', report.notes[0])

    def test_odometers(self):
        self.assertTrue(analysis.test_transitivity(AddingMachineMap(8), '1/4').transitive)
        truncated = analysis.test_transitivity(AddingMachineMap(8, 2), '1/4')
        self.assertEqual(truncated.verdict, analysis.FAILS_WITH_PAIR)
        self.assertEqual(truncated.witness, {'U': '000', 'V': '001'})
        with self.assertRaises(DomainError):
            analysis.test_transitivity(AddingMachineMap(16), '1/16')

    def test_unsupported_maps_and_parameters(self):
        with self.assertRaises(UnsupportedOperation):
            analysis.test_transitivity(CompositeMap((TENT, TENT), INTERVAL), EIGHTH)
        with self.assertRaises(DomainError):
            analysis.test_transitivity(TENT, 0)

    def test_collapsed_first_map_breaks_system_transitivity(self):
        report = analysis.test_nds_transitivity(collapsed_system(), EIGHTH, 16)
        self.assertFalse(report.transitive)
        self.assertEqual(report.witness['U'], str(RationalInterval('1/4', '3/8')))

    def test_rotations_to_identity_are_not_transitive(self):
        report = analysis.test_nds_transitivity(NDSystem.from_family('dyadic-rotations'), EIGHTH, 16)
        self.assertEqual(report.verdict, analysis.FAILS_WITH_PAIR)

    def test_orbit_coverage(self):
        rotation = NDSystem.constant(RotationMap('1/4'))
        result = analysis.orbit_coverage(rotation, CirclePoint(0), '1/4', 4)
        self.assertEqual([share for _, share in result['coverage_trace']], [Fraction(k, 4) for k in range(1, 5)])
        self.assertIsNone(result['witness'])

        result = analysis.orbit_coverage(NDSystem.constant(IDENTITY), IntervalPoint('1/2'), '1/4', 4)
        self.assertEqual(result['coverage'], Fraction(1, 5))
        self.assertEqual(result['witness'], str(IntervalPoint(0)))


class SensitivityTests(SimpleTestCase):
    def test_tent_separates_every_point(self):
        report = analysis.test_sensitivity(TENT, '1/4', '1/32', 16, points=[0, '1/3', '1/2', '5/8'])
        self.assertEqual(report.verdict, analysis.SENSITIVE)
        for witness in report.witnesses:
            self.assertLess(abs(witness['x'] - witness['y']), Fraction(1, 32))
            self.assertGreater(witness['distance'], Fraction(1, 4))

    def test_isometries_have_no_witness(self):
        for f in (RotationMap('1/3'), AddingMachineMap(8)):
            report = analysis.test_sensitivity(f, '1/4', '1/32')
            self.assertEqual(report.verdict, analysis.NO_WITNESS)
            self.assertEqual(report.mode, 'isometry')

    def test_identity_is_not_sensitive(self):
        report = analysis.test_sensitivity(IDENTITY, '1/4', '1/32', 8, points=['1/2'])
        self.assertEqual(report.verdict, analysis.NO_WITNESS)
        self.assertEqual(report.failures, [Fraction(1, 2)])

    def test_invalid_delta(self):
        with self.assertRaises(DomainError):
            analysis.test_sensitivity(TENT, 0, '1/32')


class InvariantIntervalTests(SimpleTestCase):
    def test_hull_iteration_stabilizes(self):
        constant = PLMap((0, 1), ('1/2', '1/2'))
        result = analysis.find_invariant_interval(constant, RationalInterval('1/4', '1/4'))
        self.assertEqual(result.verdict, analysis.STABILIZED)
        self.assertEqual(result.interval, RationalInterval('1/4', '1/2'))
        self.assertEqual(result.rounds, 2)

    def test_tent_spreads_to_the_whole_interval(self):
        result = analysis.find_invariant_interval(TENT, RationalInterval('1/4', '3/4'))
        self.assertEqual(result.interval, RationalInterval(0, 1))
        self.assertEqual(result.verdict, analysis.STABILIZED)

    def test_flip_yields_a_two_cycle(self):
        flip = PLMap((0, 1), (1, 0))
        result = analysis.find_invariant_interval(flip, RationalInterval(0, '1/3'))
        self.assertEqual(result.verdict, analysis.CYCLE)
        self.assertEqual(result.cycle, [RationalInterval(0, '1/3'), RationalInterval('2/3', 1)])

    def test_needs_a_pl_map(self):
        with self.assertRaises(PreconditionError):
            analysis.find_invariant_interval(RotationMap(0), RationalInterval(0, '1/2'))

    def test_rescaled_restriction(self):
        self.assertEqual(analysis.rescaled_restriction(TENT, RationalInterval(0, 1)), TENT)
        self.assertIsNone(analysis.rescaled_restriction(TENT, RationalInterval(0, '1/2')))

    def test_invariant_intervals_of_a_constant_system(self):
        report = analysis.check_invariant_intervals(NDSystem.constant(TENT), '1/4', 2)
        self.assertEqual(report.verdict, analysis.CONSISTENT)
        row = report.details['rows'][0]
        self.assertEqual(row['J'], RationalInterval(0, 1))
        self.assertTrue(row['limit_transitive'])
        with self.assertRaises(DomainError):
            analysis.check_invariant_intervals(NDSystem.constant(TENT), '1/2', 2)


class FixedPointStructureTests(SimpleTestCase):
    def test_identical_maps_confirm(self):
        report = analysis.check_fix_inclusion(TENT, TENT)
        self.assertEqual(report.verdict, analysis.CONFIRMED)
        self.assertEqual(report.fixed_points, [0, Fraction(2, 3)])

    def test_collapsed_map_moves_a_preimage(self):
        report = analysis.check_fix_inclusion(TENT, COLLAPSED_FIRST)
        self.assertEqual(report.verdict, analysis.DISCREPANCY)
        self.assertEqual(report.not_fixed, [])
        self.assertEqual(report.discrepancy, {
            'p': 0, 'j': 3, 'only_f': [Fraction(1, 4)], 'only_fn': [Fraction(3, 16)],
        })

    def test_fixed_intervals_and_lost_preimages(self):
        report = analysis.check_fix_inclusion(IDENTITY, TENT)
        self.assertEqual(report.verdict, analysis.CONFIRMED)
        self.assertIn('fixed interval [0, 1] is not fixed by f_n', report.notes)
        report = analysis.check_fix_inclusion(TENT, CLIPPED_TENT)
        self.assertEqual(report.verdict, analysis.DISCREPANCY)
        self.assertEqual(report.not_fixed, [])

    def test_prefix_agreement_finds_late_disagreement(self):
        report = analysis.check_prefix_agreement(collapsed_system(), 0, 3, 8)
        self.assertEqual(report.n0, 2)
        entry = next(item for item in report.entries if item['x'] == Fraction(1, 4))
        self.assertEqual((entry['j'], entry['counterexample']), (3, 1))
        with self.assertRaises(PreconditionError):
            analysis.check_prefix_agreement(collapsed_system(), '1/2')
        with self.assertRaises(UsageError):
            analysis.check_prefix_agreement(NDSystem.from_family('dyadic-rotations'), 0)

    def test_agreement_measures(self):
        self.assertEqual(analysis.agreement_measure(TENT, CLIPPED_TENT), Fraction(3, 4))
        self.assertEqual(list(analysis.agreement_set(TENT, CLIPPED_TENT)), [RationalInterval(0, '3/4')])
        self.assertEqual(analysis.agreement_measure(accumulating_family(), accumulating_family(1)), Fraction(11, 12))
        with self.assertRaises(UsageError):
            analysis.agreement_measure(TENT, RotationMap(0))


class EventualEqualityTests(SimpleTestCase):
    N_MAX = 32
    K_MAX = 4096

    def test_tail_constant_families_are_eventually_equal(self):
        fake = factories.make_faker(29)
        for _ in range(20):
            n0 = fake.random_int(2, 8)
            system = factories.tail_constant_system(fake, n0)
            report = analysis.check_eventual_equality(system, self.N_MAX, EIGHTH, self.K_MAX, limit_transitive=True)
            self.assertEqual(report.status, analysis.EVENTUALLY_EQUAL)
            self.assertEqual(report.n0, n0)
            self.assertEqual(analysis.check_prefix_agreement(system, '2/3', 3, self.N_MAX).n0, 1)

    def test_persistent_bumps_violate_orbital_convergence(self):
        fake = factories.make_faker(31)
        for _ in range(20):
            system = factories.persistent_system(fake)
            bump = system.fiber(1)
            self.assertIsNone(system.tail_start)
            for n in (2, self.N_MAX, self.N_MAX + 1):
                self.assertEqual(system.fiber(n), bump)
            self.assertNotEqual(bump, TENT)
            report = analysis.check_eventual_equality(system, self.N_MAX, EIGHTH, self.K_MAX, limit_transitive=True)
            self.assertEqual(report.status, analysis.CC_STAR_VIOLATED)
            self.assertIsNone(report.n0)
            self.assertEqual(len(report.cc_star.witnesses), self.N_MAX)
            self.assertLess(analysis.agreement_measure(bump, TENT), 1)
            self.assertEqual(analysis.check_prefix_agreement(system, 0, 3, self.N_MAX).n0, 1)

    def test_perturbed_tent_parameters(self):
        with self.assertRaises(ConfigurationError):
            NDSystem.from_family('perturbed-tent', {'cell': 24})
        with self.assertRaises(ConfigurationError):
            NDSystem.from_family('perturbed-tent', {'height': 0})

    def test_limit_transitivity_is_computed_when_not_given(self):
        system = NDSystem(TENT.space, TENT, (IDENTITY, IDENTITY))
        report = analysis.check_eventual_equality(system, 6, EIGHTH, grid_eps=EIGHTH, horizon=16)
        self.assertEqual((report.status, report.n0), (analysis.EVENTUALLY_EQUAL, 3))
        self.assertEqual(report.agreement[0], (1, 0))

    def test_preconditions(self):
        with self.assertRaises(PreconditionError):
            analysis.check_eventual_equality(NDSystem.constant(COLLAPSED_FIRST), 4, EIGHTH, limit_transitive=True)
        with self.assertRaises(PreconditionError):
            analysis.check_eventual_equality(NDSystem.from_family('accumulating-pl'), 4, EIGHTH, limit_transitive=True)
        with self.assertRaises(PreconditionError):
            analysis.check_eventual_equality(NDSystem.constant(TENT), 4, EIGHTH, limit_transitive=False)


class ConjugationTests(SimpleTestCase):
    def test_conjugate_system_carries_the_dynamics(self):
        conjugate = analysis.conjugate_system(NDSystem.constant(TENT), STRETCH)
        g = conjugate.limit_map
        for x in (0, Fraction(1, 3), Fraction(1, 2), Fraction(3, 4)):
            self.assertEqual(g(STRETCH(x)), STRETCH(TENT(x)))
        self.assertTrue(analysis.test_transitivity(g, EIGHTH, 16).transitive)

    def test_conjugacy_must_be_a_homeomorphism(self):
        with self.assertRaises(PreconditionError):
            analysis.conjugate_system(NDSystem.constant(TENT), TENT)
        with self.assertRaises(UsageError):
            analysis.conjugate_system(NDSystem.from_family('dyadic-rotations'), STRETCH)

    def test_modulus_of_continuity(self):
        self.assertEqual(analysis.modulus_of_continuity(STRETCH, '1/4'), Fraction(3, 8))
        self.assertEqual(analysis.modulus_of_continuity(STRETCH, 2), 1)
        with self.assertRaises(PreconditionError):
            analysis.modulus_of_continuity(TENT, '1/4')

    def test_orbital_distances_move_by_the_modulus(self):
        fake = factories.make_faker(47)
        for _ in range(10):
            system = factories.tail_constant_system(fake, fake.random_int(2, 4))
            conjugated = analysis.conjugate_system(system, STRETCH)
            for n in range(1, 5):
                original = sup_over_k(system, n, 4, FIBER).value
                moved = sup_over_k(conjugated, n, 4, FIBER).value
                if original == 0:
                    self.assertEqual(moved, 0)
                else:
                    self.assertLessEqual(moved, analysis.modulus_of_continuity(STRETCH, original))


class InstanceCheckTests(SimpleTestCase):
    def test_rotations_to_identity_agree_on_every_check(self):
        for eps, N_max, horizon in ((EIGHTH, 8, 16), ('1/20', 32, 32)):
            with self.subTest(eps=eps):
                report = analysis.check_equivalence_instance(NDSystem.from_family('dyadic-rotations'), eps, N_max, horizon)
                self.assertEqual(report.verdict, analysis.CONSISTENT)
                self.assertEqual(report.checks, {'hitting': False, 'dense': False, 'transitive': False})

    def test_fiber_inheritance_without_convergence(self):
        report = analysis.check_fiber_inheritance(NDSystem.from_family('dyadic-rotations'), EIGHTH, 8)
        self.assertEqual(report.verdict, analysis.CONSISTENT)
        self.assertFalse(report.checks['cc_star'])

    def test_system_inheritance(self):
        report = analysis.check_nds_inheritance(NDSystem.constant(TENT), EIGHTH, 4, horizon=16)
        self.assertEqual(report.verdict, analysis.CONSISTENT)
        self.assertTrue(report.checks['nds_transitive'])
        report = analysis.check_nds_inheritance(collapsed_system(), EIGHTH, 4, K_max=16, horizon=16)
        self.assertEqual(report.verdict, analysis.HYPOTHESIS_UNMET)
        self.assertFalse(report.checks['feebly_open'])

    def test_sup_distance_trace(self):
        trace = analysis.sup_distance_trace(NDSystem.from_family('dyadic-rotations'), 3)
        self.assertEqual(trace, [(1, Fraction(1, 2)), (2, Fraction(1, 4)), (3, Fraction(1, 8))])

    def test_convergent_rotations_agree_on_every_check(self):
        system = NDSystem.from_family('convergent-rotations')
        report = analysis.check_equivalence_instance(system, '1/20', 32, 32)
        self.assertEqual(report.verdict, analysis.CONSISTENT)
        self.assertEqual(report.checks, {'hitting': True, 'dense': True, 'transitive': True})
