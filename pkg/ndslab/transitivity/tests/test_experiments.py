from fractions import Fraction

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from transitivity.exceptions import UsageError
from transitivity.forms import CHECK_CHOICES
from transitivity.services import conditions, defaults, experiments
from transitivity.services.systems import NDSystem


def rotations():
    return NDSystem.from_family('dyadic-rotations')


class RunCheckTests(SimpleTestCase):
    def test_every_form_choice_has_a_runner(self):
        self.assertEqual({name for name, _ in CHECK_CHOICES}, set(experiments.RUNNERS))

    def test_unmet_expectation_fails_the_check(self):
        outcome = experiments.run_check(0, rotations(), {'check': 'CCstar', 'N_max': 8, 'expect': conditions.HOLDS}, {})
        self.assertTrue(outcome.failed)
        self.assertEqual(outcome.status, conditions.FAILS)
        self.assertFalse(outcome.record['passed'])

    def test_truncation_supplies_the_defaults(self):
        outcome = experiments.run_check(1, rotations(), {'check': 'CC'}, {'N_max': 8, 'eps': [Fraction(1, 8)]})
        self.assertEqual(outcome.status, conditions.EXACT_PROOF)
        self.assertEqual(outcome.record['report']['parameters']['eps'], '1/8')
        self.assertEqual(outcome.record['report']['n0'], 4)

    def test_computed_reports(self):
        system = NDSystem.from_family('collapsing-tent')
        outcome = experiments.run_check(0, system, {'check': 'agreement-measure', 'n': 1}, {})
        self.assertEqual(outcome.status, 'computed')
        self.assertFalse(outcome.failed)
        self.assertEqual(outcome.record['parameters'], {'n': 1})

    def test_unknown_check(self):
        with self.assertRaises(UsageError):
            experiments.run_check(0, rotations(), {'check': 'entropy'}, {})

    def test_summary_rows(self):
        outcomes = experiments.run_checks(rotations(), [
            {'check': 'CC', 'eps': Fraction(1, 8), 'N_max': 8},
            {'check': 'DOstar', 'eps': Fraction(1, 8), 'N_max': 8},
        ], {})
        rows = experiments.summary_rows(outcomes)
        self.assertEqual(rows[0], [0, 'CC', conditions.EXACT_PROOF, 'yes', 4, '', ''])
        self.assertEqual(rows[1], [1, 'DOstar', conditions.FAILS, 'yes', '', '5/8', '0.625'])


class ParallelMapTests(SimpleTestCase):
    def test_order_is_kept_with_workers(self):
        with override_settings(NDSLAB={**settings.NDSLAB, 'WORKERS': 4}):
            self.assertEqual(defaults.workers(), 4)
            self.assertEqual(defaults.parallel_map(lambda x: x * x, range(20)), [x * x for x in range(20)])

    def test_parallel_reports_match_serial_ones(self):
        checks = [{'check': 'Lstar', 'N_max': 8}, {'check': 'CC', 'eps': Fraction(1, 8), 'N_max': 8}]
        serial = [outcome.record for outcome in experiments.run_checks(rotations(), checks, {})]
        with override_settings(NDSLAB={**settings.NDSLAB, 'WORKERS': 3}):
            parallel = [outcome.record for outcome in experiments.run_checks(rotations(), checks, {})]
        self.assertEqual(serial, parallel)


class DefaultsTests(SimpleTestCase):
    @override_settings(NDSLAB={key: value for key, value in settings.NDSLAB.items() if key != 'BREAKPOINT_BUDGET'})
    def test_missing_keys_fall_back_to_the_documented_defaults(self):
        self.assertEqual(defaults.breakpoint_budget(), 10 ** 6)
