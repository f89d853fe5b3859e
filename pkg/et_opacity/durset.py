"""
Duration sets: eventually periodic unions of rational intervals over the
non-negative reals.

A :class:`DurationSet` holds an `initial` list of intervals below its
`threshold` and, when periodic, a `base` list of intervals inside the window
``[threshold, threshold + period)`` that repeats every `period`. All
endpoints, the threshold and the period are in scaled units; real values are
obtained by dividing by `scale`. Binary operations first bring both operands
to a common scale, threshold and period, then work window by window.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from et_opacity.model import INF, format_rational, parse_rational
from et_opacity.region import FracClass


@dataclass(frozen=True)
class Interval(object):
    """ Nonempty interval; `hi` may be INF (then `hi_closed` is False). """

    lo: object
    lo_closed: bool
    hi: object
    hi_closed: bool

    @staticmethod
    def make(lo, lo_closed, hi, hi_closed):
        """ Return the interval, or None if it is empty. """
        if hi == INF:
            hi_closed = False
        if lo < hi or (lo == hi and lo_closed and hi_closed):
            return Interval(lo, lo_closed, hi, hi_closed)
        return None

    @staticmethod
    def point(value):
        return Interval(value, True, value, True)

    @property
    def is_point(self):
        return self.lo == self.hi

    def contains(self, value):
        if value < self.lo or (value == self.lo and not self.lo_closed):
            return False
        return value < self.hi or (value == self.hi and self.hi_closed)

    def shifted(self, offset):
        return Interval(self.lo + offset, self.lo_closed,
                        self.hi + offset if self.hi != INF else INF,
                        self.hi_closed)

    def scaled(self, factor):
        return Interval(self.lo * factor, self.lo_closed,
                        self.hi * factor if self.hi != INF else INF,
                        self.hi_closed)

    def intersect(self, other):
        if self.lo > other.lo or (self.lo == other.lo and not self.lo_closed):
            lo, lo_closed = self.lo, self.lo_closed
        else:
            lo, lo_closed = other.lo, other.lo_closed
        if self.hi < other.hi or (self.hi == other.hi and not self.hi_closed):
            hi, hi_closed = self.hi, self.hi_closed
        else:
            hi, hi_closed = other.hi, other.hi_closed
        return Interval.make(lo, lo_closed, hi, hi_closed)

    def text(self, scale=1):
        lo = format_rational(Fraction(self.lo) / scale)
        if self.is_point:
            return '{%s}' % lo
        hi = 'inf' if self.hi == INF else format_rational(Fraction(self.hi)
                                                          / scale)
        return '%s%s, %s%s' % ('[' if self.lo_closed else '(', lo, hi,
                               ']' if self.hi_closed else ')')

    def __str__(self):
        return self.text()


def _lo_key(interval):
    return (interval.lo, 0 if interval.lo_closed else 1)


def merge(intervals):
    """ Sort `intervals` and merge overlapping or touching ones. """
    result = []
    for item in sorted(intervals, key=_lo_key):
        if result:
            last = result[-1]
            if item.lo < last.hi or (item.lo == last.hi and
                                     (item.lo_closed or last.hi_closed)):
                if item.hi > last.hi or (item.hi == last.hi and
                                         item.hi_closed):
                    result[-1] = Interval(last.lo, last.lo_closed,
                                          item.hi, item.hi_closed)
                continue
        result.append(item)
    return result


def intersect_lists(first, second):
    """ Intersection of two merged interval lists. """
    found = []
    for a in first:
        for b in second:
            part = a.intersect(b)
            if part is not None:
                found.append(part)
    return merge(found)


def complement_list(intervals, lo, hi):
    """
    Complement of the merged list `intervals` inside the window ``[lo, hi)``.
    """
    found = []
    start, start_closed = lo, True
    for item in intervals:
        gap = Interval.make(start, start_closed, item.lo, not item.lo_closed)
        if gap is not None:
            found.append(gap)
        start, start_closed = item.hi, not item.hi_closed
    if start != INF:
        gap = Interval.make(start, start_closed, hi, False)
        if gap is not None:
            found.append(gap)
    return found


def clip(intervals, lo, hi):
    """ Restrict `intervals` to ``[lo, hi)``. """
    window = Interval.make(lo, True, hi, False)
    if window is None:
        return []
    return intersect_lists(intervals, [window])


class DurationSet(object):
    """
    Exact eventually periodic set of durations.

    initial: list[:class:`Interval`]
        Sorted disjoint intervals, below `threshold` when periodic. After
        :meth:`normalize` the last one may end at `threshold`, closed.

    threshold: int or None
        Start of the periodic part (scaled units).

    period: int or None
        Length of the repeating window (scaled units).

    base: list[:class:`Interval`]
        Intervals inside ``[threshold, threshold + period)``.

    scale: int
        Positive divisor turning stored values into real durations.
    """

    def __init__(self, initial=(), threshold=None, period=None, base=(),
                 scale=1):
        self.initial = tuple(initial)
        self.threshold = threshold
        self.period = period
        self.base = tuple(base)
        self.scale = scale

    @staticmethod
    def empty(scale=1):
        return DurationSet(scale=scale)

    @staticmethod
    def of(intervals, scale=1):
        """ Non-periodic set from a list of intervals (scaled units). """
        return DurationSet(merge(intervals), scale=scale).normalize()

    @property
    def is_periodic(self):
        return self.threshold is not None

    def is_empty(self):
        return not self.initial and not self.base

    def contains(self, duration):
        """
        Exact membership of the real duration `duration`.

        duration: Fraction or int
            Non-negative duration in real units.
        """
        value = Fraction(duration) * self.scale
        if value < 0:
            return False
        if self.is_periodic and value >= self.threshold:
            value = self.threshold + (value - self.threshold) % self.period
            return any(item.contains(value) for item in self.base)
        return any(item.contains(value) for item in self.initial)

    __contains__ = contains

    def rescaled(self, scale):
        """ Same set with `scale`, which must be a multiple of this scale. """
        if scale == self.scale:
            return self
        if scale % self.scale:
            raise ValueError('scale %d is not a multiple of %d'
                             % (scale, self.scale))
        factor = scale // self.scale
        return DurationSet(
            [i.scaled(factor) for i in self.initial],
            None if self.threshold is None else self.threshold * factor,
            None if self.period is None else self.period * factor,
            [i.scaled(factor) for i in self.base], scale)

    def _tail_start(self):
        """ Integer point after which the non-periodic part is constant. """
        finite = [0]
        for item in self.initial:
            finite.append(item.lo)
            if item.hi != INF:
                finite.append(item.hi)
        return math.floor(max(finite)) + 1

    def unroll(self, lo, hi):
        """ Members inside ``[lo, hi)`` as a merged list; `hi` finite. """
        found = list(clip(self.initial, lo, hi))
        if self.is_periodic:
            shift = 0
            if lo > self.threshold:
                shift = ((lo - self.threshold) // self.period) * self.period
            while self.threshold + shift < hi:
                found.extend(clip([i.shifted(shift) for i in self.base],
                                  lo, hi))
                shift += self.period
        return merge(found)

    def _layout(self, threshold, period):
        return (self.unroll(0, threshold),
                self.unroll(threshold, threshold + period))

    def _alignment(self, other):
        threshold = 0
        period = 1
        for item in (self, other):
            if item.is_periodic:
                threshold = max(threshold, item.threshold)
                period = math.lcm(period, item.period)
            else:
                threshold = max(threshold, item._tail_start())
        return threshold, period

    def _common(self, other):
        scale = math.lcm(self.scale, other.scale)
        return self.rescaled(scale), other.rescaled(scale), scale

    def union(self, other):
        a, b, scale = self._common(other)
        threshold, period = a._alignment(b)
        init_a, base_a = a._layout(threshold, period)
        init_b, base_b = b._layout(threshold, period)
        return DurationSet(merge(init_a + init_b), threshold, period,
                           merge(base_a + base_b), scale).normalize()

    def intersect(self, other):
        a, b, scale = self._common(other)
        threshold, period = a._alignment(b)
        init_a, base_a = a._layout(threshold, period)
        init_b, base_b = b._layout(threshold, period)
        return DurationSet(intersect_lists(init_a, init_b), threshold,
                           period, intersect_lists(base_a, base_b),
                           scale).normalize()

    def complement(self):
        """ Complement within the non-negative reals. """
        threshold, period = self._alignment(self)
        initial, base = self._layout(threshold, period)
        return DurationSet(complement_list(initial, 0, threshold), threshold,
                           period,
                           complement_list(base, threshold,
                                           threshold + period),
                           self.scale).normalize()

    def difference(self, other):
        return self.intersect(other.complement())

    def is_subset(self, other):
        return self.difference(other).is_empty()

    def equals(self, other):
        return self.is_subset(other) and other.is_subset(self)

    def __eq__(self, other):
        if not isinstance(other, DurationSet):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def normalize(self):
        """
        Canonical representation: merged lists, smallest period, smallest
        threshold, and a periodic part only when it is neither empty nor the
        whole window. An initial interval ending at the threshold is closed
        there when the base starts with the threshold point.
        """
        initial = merge(self.initial)
        base = merge(self.base)
        if self.threshold is None or not base:
            if self.threshold is not None:
                initial = clip(initial, 0, self.threshold)
            return DurationSet(initial, scale=self.scale)
        threshold, period = self.threshold, self.period

        for divisor in range(1, period):
            if period % divisor:
                continue
            part = clip(base, threshold, threshold + divisor)
            copies = []
            for k in range(period // divisor):
                copies.extend(i.shifted(k * divisor) for i in part)
            if merge(copies) == base:
                period = divisor
                base = part
                break

        while threshold > 0:
            below = clip(initial, threshold - 1, threshold)
            tail = [i.shifted(-period) for i in
                    clip(base, threshold + period - 1, threshold + period)]
            if below != tail:
                break
            threshold -= 1
            rotated = tail + clip(base, threshold + 1, threshold + period)
            base = merge(rotated)
            initial = clip(initial, 0, threshold)

        if base == [Interval(threshold, True, threshold + period, False)]:
            return DurationSet(merge(initial + [Interval(threshold, True,
                                                         INF, False)]),
                               scale=self.scale)
        if initial and base[0].lo == threshold and base[0].lo_closed:
            last = initial[-1]
            if last.hi == threshold and not last.hi_closed:
                # close the seam: the threshold point is also in base
                initial = initial[:-1] + [Interval(last.lo, last.lo_closed,
                                                   threshold, True)]
        return DurationSet(initial, threshold, period, base, self.scale)

    def witness(self):
        """
        Least member when it exists, otherwise the midpoint of the first
        open unit cell of the set (real units). None when empty.
        """
        if self.is_empty():
            return None
        first = self.initial[0] if self.initial else self.base[0]
        if first.lo_closed:
            value = Fraction(first.lo)
        else:
            hi = min(first.hi, math.floor(first.lo) + 1)
            value = (Fraction(first.lo) + Fraction(hi)) / 2
        return value / self.scale

    def to_json(self):
        def encode(items):
            return [{'lo': format_rational(i.lo), 'lo_closed': i.lo_closed,
                     'hi': format_rational(i.hi), 'hi_closed': i.hi_closed}
                    for i in items]

        return {'scale': self.scale,
                'initial': encode(self.initial),
                'threshold': self.threshold,
                'period': self.period,
                'base': encode(self.base)}

    @staticmethod
    def from_json(data):
        """ Inverse of :meth:`to_json`. """
        def decode(items):
            return [Interval(parse_rational(i['lo']), i['lo_closed'],
                             parse_rational(i['hi']), i['hi_closed'])
                    for i in items]

        return DurationSet(decode(data['initial']), data['threshold'],
                           data['period'], decode(data['base']),
                           data['scale'])

    def __str__(self):
        if self.is_empty():
            return '{}'
        parts = [i.text(self.scale) for i in self.initial]
        if self.is_periodic:
            parts.append('(%s) + %s*k' % (
                ' U '.join(i.text(self.scale) for i in self.base),
                format_rational(Fraction(self.period, self.scale))))
        return ' U '.join(parts)

    def __repr__(self):
        return 'DurationSet(%s)' % self


def _contribution(fclass, count):
    if fclass is FracClass.ZERO:
        return Interval.point(count)
    if fclass is FracClass.OPEN:
        return Interval(count, False, count + 1, False)
    return Interval.point(count + 1)


def from_annotations(entries, scale=1):
    """
    Duration set of the accepting annotations of an explored observer.

    entries: iterable of (:class:`FracClass`, EventuallyPeriodicIntSet)
        Tick counts per position of the tick clock.

    scale: int
        Rescaling factor of the explored model.
    """
    result = DurationSet.empty(scale)
    for fclass, counts in entries:
        finite = [_contribution(fclass, k) for k in counts.finite]
        result = result.union(DurationSet.of(finite, scale))
        if counts.threshold is not None:
            threshold = counts.threshold
            if fclass is FracClass.ONE:
                threshold += 1
            base = [_contribution(fclass, counts.threshold + r)
                    for r in counts.residues]
            result = result.union(
                DurationSet([], threshold, counts.period, merge(base),
                            scale).normalize())
    return result
