"""Seeded random instances for the property and falsification suites."""
from fractions import Fraction

from faker import Faker

from transitivity.services import systems
from transitivity.services.maps import TENT, PLMap
from transitivity.services.phase_spaces import (
    ONE,
    ZERO,
    CantorWord,
    CirclePoint,
    IntervalPoint,
)
from transitivity.services.systems import NDSystem

SEED = 20251018
INSTANCES = 200

# Tree points of 0 and 2/3 under the tent map, to depth 3, are multiples of 1/24.
TREE_GRID = 24
SMALL_HEIGHTS = tuple(Fraction(1, 2 ** r) for r in range(6, 10))
LARGE_HEIGHTS = (Fraction(1, 8), Fraction(3, 16), Fraction(1, 4))
# Cells whose tent values stay inside [1/4, 3/4], so a large bump keeps values in [0,1].
MIDDLE_CELLS = tuple(range(3, 9)) + tuple(range(15, 21))


def make_faker(seed=SEED):
    fake = Faker()
    fake.seed_instance(seed)
    return fake


def rational(fake, denominator=48):
    return Fraction(fake.random_int(0, denominator), denominator)


def interval_point(fake, denominator=48):
    return IntervalPoint(rational(fake, denominator))


def circle_point(fake, denominator=64):
    return CirclePoint(Fraction(fake.random_int(0, denominator - 1), denominator))


def cantor_word(fake, length=16):
    return CantorWord(fake.random_int(0, (1 << length) - 1), length)


def pl_map(fake, pieces=None, denominator=12, surjective=True):
    pieces = pieces or fake.random_int(1, 4)
    interior = sorted(fake.random_sample(elements=tuple(range(1, denominator)), length=pieces - 1)) if pieces > 1 else []
    xs = [Fraction(0), *(Fraction(x, denominator) for x in interior), Fraction(1)]
    ys = [Fraction(fake.random_int(0, denominator), denominator) for _ in xs]
    if surjective:
        low, high = fake.random_sample(elements=tuple(range(len(xs))), length=2)
        ys[low], ys[high] = ZERO, ONE
    return PLMap(tuple(xs), tuple(ys))


def tent_bump(fake, heights=SMALL_HEIGHTS, cells=tuple(range(TREE_GRID))):
    height = fake.random_element(elements=heights) * fake.random_element(elements=(1, -1))
    return systems.tent_bump(fake.random_element(elements=cells), height)


def tail_constant_system(fake, n0):
    """Perturbed tent maps up to n0 - 1, the tent map itself from n0 on."""
    prefix = tuple(tent_bump(fake) for _ in range(n0 - 1))
    return NDSystem(TENT.space, TENT, prefix, name=f'tail-constant-{n0}')


def persistent_system(fake):
    """The same large bump in every fiber, so no fiber ever equals the tent map."""
    height = fake.random_element(elements=LARGE_HEIGHTS) * fake.random_element(elements=(1, -1))
    params = {'cell': fake.random_element(elements=MIDDLE_CELLS), 'height': height}
    return NDSystem.from_family('perturbed-tent', params, name='persistent')


def pl_system(fake, length=4):
    prefix = tuple(pl_map(fake) for _ in range(length))
    return NDSystem(TENT.space, pl_map(fake), prefix, name='random-pl')
