"""
Shared test helpers: fixture models and random generators.
"""

import os
from fractions import Fraction

from et_opacity.durset import DurationSet, Interval, merge
from et_opacity.model import (AtomicConstraint, Constraint, Edge, EQ, GE, GT,
                              INF, LE, LT, Model, apply_valuation)
from et_opacity.parser import read_model

TESTDIR = os.path.dirname(os.path.abspath(__file__))


def fixture_path(name):
    return os.path.join(TESTDIR, name)


def load(name, **params):
    """ Read fixture `name`, binding `params` given as strings or numbers. """
    model = read_model(fixture_path(name))
    if params:
        model = apply_valuation(model, dict((k, Fraction(v))
                                            for k, v in params.items()))
    return model


def half_grid(limit, scale=1):
    """ Points ``k / (2*scale)`` from 0 to `limit`. """
    steps = int(Fraction(limit) * 2 * scale)
    return [Fraction(k, 2 * scale) for k in range(steps + 1)]


def _int(rng, *bounds):
    return int(rng.randint(*bounds))


def _random_intervals(rng, lo, hi, count):
    found = []
    for _ in range(count):
        a = _int(rng, lo, hi + 1)
        b = _int(rng, lo, hi + 1)
        a, b = min(a, b), max(a, b)
        item = Interval.make(a, bool(rng.randint(2)), b, bool(rng.randint(2)))
        if item is not None and item.hi <= hi and \
           not (item.hi == hi and item.hi_closed):
            found.append(item)
    return merge(found)


def random_durset(rng):
    """ Random normalized duration set, scale 1 or 2. """
    scale = 1 + _int(rng, 2)
    if rng.randint(3) == 0:
        top = _int(rng, 1, 8)
        initial = _random_intervals(rng, 0, top, rng.randint(4))
        if rng.randint(3) == 0:
            start = _int(rng, top, top + 3)
            initial = merge(initial + [Interval(start, bool(rng.randint(2)),
                                                INF, False)])
        return DurationSet(initial, scale=scale).normalize()
    threshold = _int(rng, 0, 5)
    period = _int(rng, 1, 4)
    initial = _random_intervals(rng, 0, threshold, rng.randint(3))
    base = _random_intervals(rng, threshold, threshold + period,
                             1 + rng.randint(2))
    return DurationSet(initial, threshold, period, base, scale).normalize()


def random_model(rng, strict=False):
    """
    Random parameter-free model with at most 2 clocks, constants <= 3 and
    at most 5 locations. Guards use ``<=``, ``>=`` and ``=`` only unless
    `strict`.
    """
    clocks = ('x', 'y')[:1 + rng.randint(2)]
    locations = ['l%d' % i for i in range(3 + rng.randint(3))]
    relations = (LE, GE, EQ, LT, GT) if strict else (LE, GE, EQ)

    def guard():
        return Constraint(tuple(
            AtomicConstraint(clocks[rng.randint(len(clocks))],
                             relations[rng.randint(len(relations))], (),
                             _int(rng, 4))
            for _ in range(rng.randint(3))))

    def resets():
        return frozenset(c for c in clocks if rng.randint(3) == 0)

    invariants = {}
    for loc in locations:
        if loc != 'l2' and rng.randint(5) < 2:
            invariants[loc] = Constraint((AtomicConstraint(
                clocks[rng.randint(len(clocks))], LE, (),
                1 + _int(rng, 3)),))
    pairs = [('l0', 'l1'), ('l1', 'l2'), ('l0', 'l2')]
    for _ in range(rng.randint(4)):
        source = locations[rng.randint(len(locations))]
        if source == 'l2':
            continue
        pairs.append((source, locations[rng.randint(len(locations))]))
    edges = [Edge(source, guard(), 'a%d' % i, resets(), target)
             for i, (source, target) in enumerate(pairs)]
    return Model(locations, 'l0', 'l1', 'l2', clocks, (), invariants, edges)
