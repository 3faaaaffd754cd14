import tempfile
from fractions import Fraction
from pathlib import Path

from django.test import SimpleTestCase

from transitivity.exceptions import ConfigurationError, UsageError
from transitivity.services import conditions, gallery, reports
from transitivity.services.analysis import conjugate_system
from transitivity.services.lazy_maps import accumulating_family
from transitivity.services.maps import TENT, AddingMachineMap, PLMap, RotationMap
from transitivity.services.phase_spaces import CirclePoint, RationalInterval
from transitivity.services.systems import NDSystem


class TextTests(SimpleTestCase):
    def test_fractions_always_carry_a_denominator(self):
        self.assertEqual(reports.fraction_text(3), '3/1')
        self.assertEqual(reports.fraction_text(Fraction(-2, 6)), '-1/3')

    def test_decimals_use_twelve_significant_digits(self):
        self.assertEqual(reports.decimal_text(Fraction(1, 3)), '0.333333333333')
        self.assertEqual(reports.decimal_text('1/8'), '0.125')

    def test_records_of_values(self):
        self.assertEqual(reports.to_record({'x': CirclePoint('1/4'), 'J': RationalInterval(0, '1/2')}),
                         {'x': '1/4', 'J': '[0, 1/2]'})
        self.assertEqual(reports.to_record([(1, Fraction(1, 2))]), [[1, '1/2']])
        with self.assertRaises(UsageError):
            reports.to_record(object())


class MapRecordTests(SimpleTestCase):
    def test_maps_rebuild_from_their_records(self):
        maps = (TENT, RotationMap('3/8'), RotationMap.named('golden'), RotationMap.named('sqrt2').power(2),
                AddingMachineMap(8), AddingMachineMap(8, 3), AddingMachineMap(8, None, 5))
        for f in maps:
            with self.subTest(f=str(f)):
                self.assertEqual(reports.map_from_record(reports.map_record(f)), f)

    def test_config_records(self):
        records = [
            ({'kind': 'pl', 'breakpoints': ['0/1', '1/2', '1/1'], 'values': ['0/1', '1/1', '0/1']}, TENT),
            ({'kind': 'rotation', 'fraction': '3/8'}, RotationMap('3/8')),
            ({'kind': 'rotation', 'fraction': 'golden'}, RotationMap.named('golden')),
            ({'kind': 'adding_machine', 'truncation': 'full', 'word_length': 8}, AddingMachineMap(8)),
            ({'kind': 'adding_machine', 'truncation': 3, 'word_length': 8}, AddingMachineMap(8, 3)),
        ]
        for record, expected in records:
            with self.subTest(record=record):
                f = reports.map_from_record(record)
                self.assertEqual(f, expected)
                self.assertEqual(reports.map_record(f), record)

    def test_lazy_maps_rebuild_from_their_family(self):
        limit = reports.map_from_record({'kind': 'lazy_pl', 'family': gallery.ACCUMULATING_PL})
        self.assertEqual(limit.label, accumulating_family().label)
        self.assertEqual(reports.map_record(limit), {'kind': 'lazy_pl', 'family': gallery.ACCUMULATING_PL})

        original = accumulating_family(3)
        record = reports.map_record(original)
        self.assertEqual(record, {'kind': 'lazy_pl', 'family': gallery.ACCUMULATING_PL, 'm': 3})
        rebuilt = reports.map_from_record(record)
        self.assertEqual(rebuilt.label, 'accumulating-f_3')
        for x in (Fraction(13, 32), Fraction(61, 128), Fraction(3, 4)):
            self.assertEqual(rebuilt(x), original(x))

    def test_bad_map_records(self):
        records = [
            {'kind': 'spiral'},
            {'kind': ['pl']},
            {'kind': 'pl', 'breakpoints': ['0/1', '1/1']},
            {'kind': 'pl', 'breakpoints': 5, 'values': [0, 1]},
            {'kind': 'pl', 'breakpoints': ['0/1', 'x'], 'values': ['0/1', '1/1']},
            {'kind': 'pl', 'breakpoints': ['0/1', '1/1'], 'values': ['0/1', '1/1'], 'colour': 'red'},
            {'kind': 'rotation', 'fraction': 0.5},
            {'kind': 'rotation', 'fraction': 'pi'},
            {'kind': 'rotation', 'fraction': '1/3', 'exactness': 'fuzzy'},
            {'kind': 'adding_machine', 'truncation': 'half', 'word_length': 8},
            {'kind': 'adding_machine', 'truncation': 0, 'word_length': 8},
            {'kind': 'adding_machine', 'truncation': 'full', 'word_length': 'abc'},
            {'kind': 'adding_machine', 'truncation': 'full', 'word_length': True},
            {'kind': 'adding_machine', 'truncation': 'full'},
            {'kind': 'lazy_pl', 'family': 'G9-nothing'},
            {'kind': 'lazy_pl', 'family': gallery.ACCUMULATING_PL, 'm': 0},
            {'kind': 'lazy_pl', 'family': gallery.ACCUMULATING_PL, 'm': '2'},
            ['pl'],
        ]
        for record in records:
            with self.subTest(record=record):
                with self.assertRaises(ConfigurationError):
                    reports.map_from_record(record)


class SystemRecordTests(SimpleTestCase):
    def test_gallery_systems_rebuild(self):
        for entry_id in (gallery.ROTATIONS_TO_IDENTITY, gallery.COLLAPSED_FIRST_MAP, gallery.CANTOR_ADDING_MACHINE):
            with self.subTest(entry=entry_id):
                system, _ = gallery.build(entry_id)
                self.assertEqual(reports.system_from_record(reports.system_record(system)), system)

    def test_conjugacy_is_kept(self):
        system = conjugate_system(NDSystem.constant(TENT), PLMap((0, '1/2', 1), (0, '1/4', 1)))
        rebuilt = reports.system_from_record(reports.system_record(system))
        self.assertEqual(rebuilt.limit_map, system.limit_map)

    def test_explicit_systems_need_a_limit(self):
        with self.assertRaises(ConfigurationError):
            reports.system_from_record({'prefix': []})

    def test_unknown_and_malformed_fields(self):
        tent = {'kind': 'pl', 'breakpoints': ['0/1', '1/2', '1/1'], 'values': ['0/1', '1/1', '0/1']}
        records = [
            {'family': 'dyadic-rotations', 'bogus': 1},
            {'limit': {**tent, 'colour': 'red'}},
            {'limit': tent, 'prefix': tent},
            {'family': 'dyadic-rotations', 'params': [1, 2]},
            {'family': 'adding-machine', 'params': {'word_length': 'abc'}},
            {'family': 'dyadic-rotations', 'params': {'speed': 2}},
        ]
        for record in records:
            with self.subTest(record=record):
                with self.assertRaises(ConfigurationError):
                    reports.system_from_record(record)


class JsonLinesTests(SimpleTestCase):
    def test_round_trip(self):
        report = conditions.check_Lstar(NDSystem.from_family('dyadic-rotations'), 4)
        record = {'index': 0, 'report': reports.to_record(report)}
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'nested' / 'report.jsonl'
            self.assertEqual(reports.write_jsonl(path, [record, record]), 2)
            self.assertEqual(reports.read_jsonl(path), [record, record])
            first = path.read_text(encoding='utf-8').splitlines()[0]
        self.assertEqual(first, reports.dumps(record))
        self.assertIn('"trace":[[1,"1/2"],[2,"1/2"]', first)

    def test_missing_report(self):
        with self.assertRaises(UsageError):
            reports.read_jsonl('/nonexistent/report.jsonl')


class PlotRowTests(SimpleTestCase):
    def test_pair_matrix_marks_misses(self):
        record = {'report': {'grid': ['a', 'b'], 'table': [[1, None], [2, 3]]}}
        header, rows = reports.plot_rows(record, reports.PAIR_MATRIX)
        self.assertEqual(header, ['U', 'a', 'b'])
        self.assertEqual(rows, [['a', 1, -1], ['b', 2, 3]])

    def test_trace_rows_carry_decimals(self):
        header, rows = reports.plot_rows({'trace': [[3, '3/8']]}, reports.TRACE)
        self.assertEqual(header, ['n', 'value', 'decimal'])
        self.assertEqual(rows, [[3, '3/8', '0.375']])

    def test_missing_series_and_unknown_kinds(self):
        self.assertIsNone(reports.plot_rows({'report': {'trace': [[1, '1/2']]}}, reports.COVERAGE))
        with self.assertRaises(UsageError):
            reports.plot_rows({}, 'histogram')
