"""Shared fixtures: the two worked interval systems plus small random builders."""

from fractions import Fraction

import pytest

import tractable_dyn as td


def _complex(*vertices):
    return td.IntervalComplex(tuple(Fraction(v) for v in vertices))


@pytest.fixture
def make_complex():
    return _complex


@pytest.fixture
def example_a():
    """Two unit intervals, each folded onto itself by a full-height tent.

    The orientation is forced: vertex 1 belongs to both intervals, so it must
    map to 1, which pins every other image.
    """
    k = _complex(0, 1, 2)
    kstar = _complex(0, Fraction(1, 2), 1, Fraction(3, 2), 2)
    vmap = {
        Fraction(0): Fraction(1),
        Fraction(1, 2): Fraction(0),
        Fraction(1): Fraction(1),
        Fraction(3, 2): Fraction(2),
        Fraction(2): Fraction(1),
    }
    return td.build_system(k, kstar, vmap)


@pytest.fixture
def example_b():
    """Three unit intervals: I1 and I3 absorb, I2 leaks half its mass to I3."""
    k = _complex(0, 1, 2, 3)
    kstar = _complex(0, Fraction(1, 2), 1, Fraction(3, 2), 2, Fraction(5, 2), 3)
    vmap = {
        Fraction(0): Fraction(1),
        Fraction(1, 2): Fraction(0),
        Fraction(1): Fraction(1),
        Fraction(3, 2): Fraction(2),
        Fraction(2): Fraction(3),
        Fraction(5, 2): Fraction(2),
        Fraction(3): Fraction(3),
    }
    return td.build_system(k, kstar, vmap)


@pytest.fixture
def relation_b():
    return td.FiniteRelation.from_labels(
        ("I1", "I2", "I3"),
        [("I1", "I1"), ("I2", "I2"), ("I2", "I3"), ("I3", "I3")],
    )


@pytest.fixture
def cover_b(relation_b):
    # equal out-neighbor weights coincide with the length-induced cover here
    return td.uniform_cover(relation_b)


@pytest.fixture
def full_shift():
    # gamma(ab) = b in first-symbol-first packing
    return td.ShiftLikeSystem(2, 1, 1, (0, 0, 1, 1))


_CUTS = [Fraction(i, 8) for i in range(1, 8)]


def _random_pl_system(rng, max_coarse_edges=3, max_parts=3):
    n_edges = rng.randint(1, max_coarse_edges)
    vertices = [Fraction(0)]
    for _ in range(n_edges):
        vertices.append(vertices[-1] + Fraction(rng.randint(1, 4), rng.randint(1, 2)))
    fine = []
    for lo, hi in zip(vertices, vertices[1:]):
        fine.append(lo)
        parts = rng.randint(2, max_parts)
        for cut in sorted(rng.sample(_CUTS, parts - 1)):
            fine.append(lo + (hi - lo) * cut)
    fine.append(vertices[-1])

    # images follow a lazy +-1 walk on coarse vertex indices, so every fine
    # edge lands exactly on one coarse edge
    pos = rng.randint(0, n_edges)
    images = [pos]
    for _ in range(len(fine) - 1):
        if pos == 0:
            pos = 1
        elif pos == n_edges:
            pos = n_edges - 1
        else:
            pos += rng.choice((-1, 1))
        images.append(pos)
    vmap = {x: vertices[i] for x, i in zip(fine, images)}
    return td.build_system(
        td.IntervalComplex(tuple(vertices)),
        td.IntervalComplex(tuple(fine)),
        vmap,
    )


@pytest.fixture
def random_pl_system():
    """Factory: a valid random 1-D system driven by a caller-owned RNG."""
    return _random_pl_system
