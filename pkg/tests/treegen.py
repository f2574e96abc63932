"""Random valid trees and code pairs for tests."""
import random
from fractions import Fraction

from aifv2.codec import CodePair
from aifv2.codetree import T0, T1
from aifv2.numeric import random_dist
from aifv2.treeopt import enumerate_shapes

_SHAPES = {}


def shapes(n, kind):
    key = (n, kind)
    if key not in _SHAPES:
        _SHAPES[key] = list(enumerate_shapes(n, kind))
    return _SHAPES[key]


def random_tree(rng, n, kind):
    shape = rng.choice(shapes(n, kind))
    perm = list(range(n))
    rng.shuffle(perm)
    return shape.tree(perm)


def random_pair(rng, n):
    return CodePair(random_tree(rng, n, T0), random_tree(rng, n, T1))


def random_instance(rng, max_n=6, max_b=6):
    n = rng.randint(2, max_n)
    b = rng.randint(max(1, (n - 1).bit_length()), max_b)
    return random_dist(rng, n, b)
