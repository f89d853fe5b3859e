"""
Regions: the finite time-abstract bisimulation quotient of clock valuations.

A region fixes, for every clock, either its integer part (bounded by the
clock's cap) and whether its fractional part is zero, or that the clock is
above its cap. Clocks with a nonzero fraction are ordered by fractional part
through an ordered partition (ascending). Guards are rectangular, so every
atomic constraint is uniformly true or false on a region and can be decided
from integer parts and fraction flags alone.
"""

import enum
import math
from dataclasses import dataclass

from et_opacity.model import EQ, GE, GT, LE, LT


class FracClass(enum.Enum):
    """ Position of a bounded clock inside its unit cell. """
    ZERO = 'zero'
    OPEN = 'open'
    ONE = 'one'


@dataclass(frozen=True)
class Region(object):
    """
    `clocks` is the sorted clock tuple, `ints` the integer part of each clock
    (None when above its cap) and `fracs` the ascending ordered partition of
    clocks with a nonzero fractional part. Clocks in neither `fracs` nor above
    their cap have fraction zero.
    """

    clocks: tuple
    ints: tuple
    fracs: tuple = ()

    def index(self, clock):
        return self.clocks.index(clock)

    def is_above(self, clock):
        return self.ints[self.index(clock)] is None

    def describe(self, clock):
        """
        Return ``(n, zero)`` for a bounded clock, or None above the cap.
        """
        if self.is_above(clock):
            return None
        zero = not any(clock in cls for cls in self.fracs)
        return self.ints[self.index(clock)], zero

    @property
    def is_maximal(self):
        return all(n is None for n in self.ints)

    def __str__(self):
        parts = []
        for clock, n in zip(self.clocks, self.ints):
            if n is None:
                parts.append('%s>cap' % clock)
            elif any(clock in cls for cls in self.fracs):
                parts.append('%s in (%d,%d)' % (clock, n, n + 1))
            else:
                parts.append('%s=%d' % (clock, n))
        order = ' < '.join('frac{%s}' % ','.join(sorted(cls))
                           for cls in self.fracs)
        return '[%s%s]' % (', '.join(parts), '; ' + order if order else '')


def region_bound(caps):
    """
    Upper bound on the number of regions for the clocks in `caps`.

    caps: dict
        Maps each clock to its cap.
    """
    n = len(caps)
    bound = math.factorial(n) * 2 ** n
    for cap in caps.values():
        bound *= 2 * cap + 2
    return bound


def initial_region(clocks, caps):
    """
    Region of the valuation assigning 0 to every clock.

    clocks: iterable of string
        Clock names.

    caps: dict
        Maps each clock to its cap (unused, kept for a uniform signature).
    """
    clocks = tuple(sorted(clocks))
    return Region(clocks, tuple(0 for _ in clocks), ())


def delay_successor(region, caps):
    """
    Return the next region in the time-flow order. The maximal region (every
    clock above its cap) is its own successor.

    region: :class:`Region`
        Current region.

    caps: dict
        Maps each clock to its cap.
    """
    ints = list(region.ints)
    moving = set()
    for cls in region.fracs:
        moving.update(cls)
    zero = [i for i, clock in enumerate(region.clocks)
            if ints[i] is not None and clock not in moving]
    if zero:
        leaving = []
        for i in zero:
            if ints[i] >= caps[region.clocks[i]]:
                ints[i] = None
            else:
                leaving.append(region.clocks[i])
        fracs = region.fracs
        if leaving:
            fracs = (frozenset(leaving),) + fracs
        return Region(region.clocks, tuple(ints), fracs)
    if region.fracs:
        for clock in region.fracs[-1]:
            ints[region.index(clock)] += 1
        return Region(region.clocks, tuple(ints), region.fracs[:-1])
    return region


def atom_holds(region, atom):
    """
    Decide a parameter-free atomic constraint with integer constant on
    `region`.

    region: :class:`Region`
        Region to test.

    atom: :class:`AtomicConstraint`
        Constraint on one clock.
    """
    if atom.coeffs or atom.constant.denominator != 1:
        raise ValueError('constraint %s must be integer and parameter-free'
                         % atom)
    c = int(atom.constant)
    rel = atom.relation
    desc = region.describe(atom.clock)
    if desc is None:
        # x > cap >= c, since caps are the largest constants.
        return rel in (GE, GT)
    n, zero = desc
    if zero:
        if rel == LT:
            return n < c
        if rel == LE:
            return n <= c
        if rel == EQ:
            return n == c
        if rel == GE:
            return n >= c
        return n > c
    # n < x < n + 1
    if rel in (LT, LE):
        return n + 1 <= c
    if rel == EQ:
        return False
    return n >= c


def satisfies(region, constraint):
    """ True if every conjunct of `constraint` holds on `region`. """
    return all(atom_holds(region, atom) for atom in constraint)


def reset(region, clocks):
    """
    Set `clocks` to zero.

    region: :class:`Region`
        Current region.

    clocks: iterable of string
        Clocks to reset.
    """
    clocks = frozenset(clocks)
    if not clocks:
        return region
    ints = tuple(0 if clock in clocks else n
                 for clock, n in zip(region.clocks, region.ints))
    fracs = tuple(cls - clocks for cls in region.fracs if cls - clocks)
    return Region(region.clocks, ints, fracs)


def discrete_successor(region, guard, resets, caps):
    """
    Region after taking an edge, or None when no valuation of `region`
    satisfies `guard`.

    region: :class:`Region`
        Current region.

    guard: :class:`Constraint`
        Integer, parameter-free guard.

    resets: iterable of string
        Clocks reset by the edge.

    caps: dict
        Maps each clock to its cap.
    """
    if not satisfies(region, guard):
        return None
    return reset(region, resets)


def t_class(region, clock):
    """
    Classify a clock with cap 1 as 0, inside ``(0, 1)`` or 1.

    region: :class:`Region`
        Current region.

    clock: string
        Clock bounded by ``clock <= 1``.
    """
    desc = region.describe(clock)
    if desc is None:
        raise ValueError('clock %s is above its cap' % clock)
    n, zero = desc
    if n == 0:
        return FracClass.ZERO if zero else FracClass.OPEN
    if n == 1 and zero:
        return FracClass.ONE
    raise ValueError('clock %s is not bounded by 1 in %s' % (clock, region))
