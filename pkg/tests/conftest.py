import math
import pathlib

import numpy as np
import pytest

from stabhull.geom_core import ConvexObject

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

TRIANGLE = [
    ConvexObject.segment((0.0, 0.0), (1.0, 0.0)),
    ConvexObject.segment((1.0, 0.0), (0.5, math.sqrt(3) / 2)),
    ConvexObject.segment((0.5, math.sqrt(3) / 2), (0.0, 0.0)),
]


def three_rays():
    return [
        ConvexObject.ray((-1.0, 0.0), (-5.0, -4.0)),
        ConvexObject.ray((-1.0, 1.0), (1.0, 0.0)),
        ConvexObject.ray((2.0, 0.0), (1.0, 0.0)),
    ]


def three_ray_tour_length(eps):
    return math.sqrt(1 + eps * eps) + 2 * math.sqrt(1.5 ** 2 + 1) + math.sqrt(4 + eps * eps)


def random_segments(seed, n):
    """n segments with endpoints uniform in the unit square."""
    rng = np.random.default_rng(seed)
    return [ConvexObject.segment(rng.random(2), rng.random(2)) for _ in range(n)]


def segment_instances(count, lo=3, hi=5, seed=0):
    """Seeded batch of random segment instances with lo..hi segments each."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(lo, hi + 1))
        out.append(random_segments(1000 * seed + k, n))
    return out


def unstabbable_instances(count, lo=3, hi=4, seed=0):
    """Random segment instances that no single line meets (rejection sampling)."""
    from stabhull.fptas_area import line_stab

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(lo, hi + 1))
        objs = [ConvexObject.segment(rng.random(2), rng.random(2)) for _ in range(n)]
        if line_stab(objs) is None:
            out.append(objs)
    return out


@pytest.fixture
def triangle():
    return list(TRIANGLE)
