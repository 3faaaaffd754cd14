from fractions import Fraction

from django.test import SimpleTestCase

from transitivity.exceptions import ConstructionError, UnsupportedOperation, UsageError
from transitivity.services.lazy_maps import (
    ANCHOR,
    BLOCK,
    ELSEWHERE,
    JOIN,
    BlockSequence,
    LazyPLMap,
    accumulating_family,
    lazy_family,
)
from transitivity.services.maps import TENT, sup_distance
from transitivity.services.phase_spaces import RationalInterval


class AccumulatingFamilyTests(SimpleTestCase):
    def setUp(self):
        self.f = accumulating_family()
        self.left = self.f.sequence('left')

    def test_values_at_anchors_and_blocks(self):
        self.assertEqual(self.f(0), 0)
        self.assertEqual(self.f(Fraction(1, 2)), 1)
        self.assertEqual(self.f(1), 0)
        self.assertEqual(self.f(Fraction(3, 16)), Fraction(3, 8))
        self.assertEqual(self.f(Fraction(13, 32)), Fraction(13, 16))
        self.assertEqual(accumulating_family(1)(Fraction(13, 32)), Fraction(11, 16))

    def test_blocks_contract_towards_the_anchor(self):
        self.assertEqual(self.left.block_nodes(2)[0], (Fraction(15, 32), Fraction(15, 16)))
        self.assertEqual(self.left.index_of(Fraction(13, 32)), 1)
        self.assertEqual(self.left.index_of(Fraction(15, 32)), 2)

    def test_locate_classifies_pieces(self):
        self.assertEqual(self.f.locate(Fraction(1, 2)).kind, ANCHOR)
        self.assertEqual(self.f.locate(Fraction(13, 32)).kind, BLOCK)
        self.assertEqual(self.f.locate(Fraction(29, 64)).kind, JOIN)
        self.assertEqual(self.f.locate(Fraction(1, 8)).kind, ELSEWHERE)

    def test_image_of_an_interval_reaching_the_anchor(self):
        self.assertEqual(self.f.image_of_interval(RationalInterval('3/8', '1/2')), RationalInterval('3/4', 1))
        self.assertEqual(self.f.image_of_interval(RationalInterval(0, 1)), RationalInterval(0, 1))

    def test_fixed_points_and_preimages(self):
        self.assertEqual(self.f.fixed_points().points, (0, Fraction(8, 13)))
        self.assertEqual(self.f.preimage(1).points, (Fraction(1, 2),))
        with self.assertRaises(UnsupportedOperation):
            self.f.preimage_of_union(None)

    def test_member_differs_on_modified_blocks_only(self):
        for m in range(1, 5):
            fm = accumulating_family(m)
            self.assertEqual(fm.label, f'accumulating-f_{m}')
            self.assertEqual(sup_distance(self.f, fm), Fraction(1, 2 ** (2 * m + 1)))
            for n in range(m, m + 6):
                self.assertEqual(self.f.block_sup_distance(fm, 'left', n), Fraction(1, 2 ** (2 * n + 1)))
            for n in range(1, m):
                self.assertEqual(self.f.block_sup_distance(fm, 'left', n), 0)

    def test_agreement_measure_sums_the_tail(self):
        full = RationalInterval(0, 1)
        for m in range(1, 5):
            self.assertEqual(self.f.agreement_measure_to(accumulating_family(m), full), 1 - Fraction(1, 3 * 4 ** m))

    def test_squares_agree_on_modified_blocks(self):
        fm = accumulating_family(2)
        for n in range(2, 6):
            block = self.left.block_domain(n)
            for j in range(1, 11):
                x = block.lo + block.length * Fraction(j, 11)
                self.assertEqual(self.f(self.f(x)), fm(fm(x)))

    def test_incomparable_maps(self):
        with self.assertRaises(UnsupportedOperation):
            self.f.sup_distance_to(TENT)
        with self.assertRaises(UsageError):
            self.f.sequence('middle')
        with self.assertRaises(UsageError):
            lazy_family('unknown')


class LazyConstructionTests(SimpleTestCase):
    def test_variant_must_keep_block_nodes(self):
        f = accumulating_family()
        moved = ((Fraction(12, 32), Fraction(12, 16)), (Fraction(27, 64), Fraction(11, 16)), (Fraction(14, 32), Fraction(12, 16)))
        with self.assertRaises(ConstructionError):
            f.with_variant('left', 2, moved)
        touching = ((Fraction(12, 32), Fraction(12, 16)), (Fraction(13, 32), 1), (Fraction(14, 32), Fraction(12, 16)))
        with self.assertRaises(ConstructionError):
            f.with_variant('left', 2, touching)

    def test_ratios_must_contract(self):
        with self.assertRaises(ConstructionError):
            BlockSequence('bad', Fraction(1, 2), 1, 1, Fraction(1, 4), ((Fraction(1, 4), Fraction(3, 4)), (Fraction(3, 8), Fraction(3, 4))))

    def test_accumulation_point_must_be_an_anchor(self):
        f = accumulating_family()
        with self.assertRaises(ConstructionError):
            LazyPLMap(((0, 0), (1, 0)), f.sequences)
