"""
Brute-force ground truth on the concrete semantics.

:func:`digitized_durations` enumerates every run whose delays are multiples
of ``1/q`` up to a horizon and records the durations at which the final
location is first entered. :func:`random_runs` samples runs with arbitrary
rational delays. Both only use guard and invariant evaluation on concrete
valuations, never the region machinery, so they can be used to check the
symbolic results.
"""

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy

from et_opacity.errors import BudgetExceeded
from et_opacity.model import INF, format_rational, has_strict_constraints

DEFAULT_BUDGET = 5000000

PRIVATE = 'visit'
PUBLIC = 'avoid'
SECRET = 'secret'
LATE = 'late'

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConcreteState(object):
    """
    Location, clock values (in model clock order), private-visit flag,
    current time and time of the last private entry (None before any).
    """

    location: str
    valuation: tuple
    flag: bool
    now: Fraction
    last_private: object = None


def _satisfied(constraint, clocks, valuation):
    values = dict(zip(clocks, valuation))
    return all(atom.holds(values[atom.clock]) for atom in constraint)


def _classes(state, delta):
    if not state.flag:
        return (PUBLIC,)
    if delta is None:
        return (PRIVATE,)
    if delta == INF or state.now - state.last_private <= delta:
        return (PRIVATE, SECRET)
    return (PRIVATE, LATE)


def _take(model, state, edge, track=True):
    """
    State after `edge`, or None if its guard or target invariant fails. The
    time of the last private entry is only kept when `track`.
    """
    if not _satisfied(edge.guard, model.clocks, state.valuation):
        return None
    valuation = tuple(Fraction(0) if clock in edge.resets else value
                      for clock, value in zip(model.clocks, state.valuation))
    if not _satisfied(model.invariant(edge.target), model.clocks, valuation):
        return None
    entering = edge.target == model.private
    return ConcreteState(edge.target, valuation, state.flag or entering,
                         state.now,
                         state.now if entering and track
                         else state.last_private)


def _ceilings(model):
    """
    Per clock, a value above every constant the clock is compared with.
    """
    found = dict((clock, Fraction(0)) for clock in model.clocks)
    for constraint in model.constraints():
        for atom in constraint:
            found[atom.clock] = max(found[atom.clock], atom.constant)
    return tuple(found[clock] + 1 for clock in model.clocks)


def _wait(model, state, delay, ceilings=None):
    """
    State after `delay`, or None if the invariant fails at the end (it holds
    at the start and is convex). Clock values are clamped to `ceilings`.
    """
    valuation = tuple(value + delay for value in state.valuation)
    if ceilings is not None:
        valuation = tuple(min(value, top)
                          for value, top in zip(valuation, ceilings))
    if not _satisfied(model.invariant(state.location), model.clocks,
                      valuation):
        return None
    return ConcreteState(state.location, valuation, state.flag,
                         state.now + delay, state.last_private)


def _start(model):
    valuation = tuple(Fraction(0) for _ in model.clocks)
    if not _satisfied(model.invariant(model.init), model.clocks, valuation):
        return None
    return ConcreteState(model.init, valuation, False, Fraction(0))


class SampleReport(object):
    """
    Durations found by the digitized enumeration.

    granularity: int
        Delays are multiples of ``1/granularity``.

    horizon: Fraction
        Largest duration explored.

    delta: Fraction or INF or None
        Expiration date, if classes secret and late were recorded.

    hits: dict
        Maps a class name to the set of durations found.

    exact: bool
        True when the model has no strict constraints, so that at a fine
        enough granularity grid misses are meaningful too.
    """

    def __init__(self, granularity, horizon, delta=None, exact=False):
        self.granularity = granularity
        self.horizon = horizon
        self.delta = delta
        self.exact = exact
        self.hits = dict((name, set()) for name in self.classes())
        self.states = 0

    def classes(self):
        if self.delta is None:
            return (PRIVATE, PUBLIC)
        return (PRIVATE, PUBLIC, SECRET, LATE)

    def grid(self):
        """ Every explored grid point, ascending. """
        steps = int(self.horizon * self.granularity)
        return [Fraction(k, self.granularity) for k in range(steps + 1)]

    def record(self, duration, names):
        for name in names:
            self.hits[name].add(duration)

    def members(self, name):
        return sorted(self.hits[name])

    def to_json(self):
        grid = self.grid()
        data = {'granularity': self.granularity,
                'horizon': format_rational(self.horizon),
                'delta': None if self.delta is None
                else format_rational(self.delta),
                'grid': [format_rational(point) for point in grid]}
        for name in self.classes():
            data[name] = [point in self.hits[name] for point in grid]
        return data


def digitized_durations(model, granularity, horizon, max_steps=1000,
                        delta=None, budget=DEFAULT_BUDGET):
    """
    Enumerate runs with delays in ``1/granularity`` steps up to `horizon`.

    model: :class:`Model`
        Parameter-free model.

    granularity: int
        Positive number of grid points per time unit.

    horizon: Fraction
        Largest duration considered.

    max_steps: int
        Largest number of discrete transitions on a run.

    delta: Fraction or INF or None
        Expiration date for the secret/late split.

    budget: int
        Maximum number of stored concrete states.
    """
    if model.params:
        raise ValueError('oracle needs a parameter-free model')
    if granularity <= 0:
        raise ValueError('granularity must be positive')
    horizon = Fraction(horizon)
    report = SampleReport(granularity, horizon, delta,
                          not has_strict_constraints(model))
    start = _start(model)
    if start is None:
        return report
    ceilings = _ceilings(model)
    step = Fraction(1, granularity)
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        state, steps = queue.popleft()
        if state.location == model.final:
            report.record(state.now, _classes(state, delta))
            continue
        found = []
        if state.now + step <= horizon:
            found.append((_wait(model, state, step, ceilings), steps))
        if steps < max_steps:
            for edge in model.edges_from(state.location):
                found.append((_take(model, state, edge, delta is not None),
                              steps + 1))
        for nxt, count in found:
            if nxt is None or nxt in seen:
                continue
            seen.add(nxt)
            if budget is not None and len(seen) > budget:
                report.states = len(seen)
                raise BudgetExceeded('oracle exceeded %d concrete states'
                                     % budget, partial=report)
            queue.append((nxt, count))
    report.states = len(seen)
    _logger.info('oracle: %d concrete states at granularity %d',
                 report.states, granularity)
    return report


def _delay_candidates(model, state):
    """ Delays reaching each constant, with midpoints and one beyond. """
    constants = set()
    for constraint in model.constraints():
        for atom in constraint:
            constants.add(atom.constant)
    points = {Fraction(0)}
    for value in state.valuation:
        for c in constants:
            if c > value:
                points.add(c - value)
    points = sorted(points)
    extra = [(a + b) / 2 for a, b in zip(points, points[1:])]
    extra.append(points[-1] + Fraction(1, 2))
    return sorted(set(points) | set(extra))


def _random_run(model, rng, max_steps, delta):
    state = _start(model)
    if state is None:
        return None
    for _ in range(max_steps):
        if state.location == model.final:
            return state.now, _classes(state, delta)
        options = []
        for delay in _delay_candidates(model, state):
            waited = _wait(model, state, delay)
            if waited is None:
                continue
            for edge in model.edges_from(state.location):
                nxt = _take(model, waited, edge)
                if nxt is not None:
                    options.append(nxt)
        if not options:
            return None
        state = options[rng.randint(len(options))]
    if state.location == model.final:
        return state.now, _classes(state, delta)
    return None


def random_runs(model, count, seed=0, max_steps=50, delta=None):
    """
    Sample `count` random runs and return ``(duration, classes)`` for those
    that reach the final location. Reproducible for a given `seed`.

    model: :class:`Model`
        Parameter-free model.

    count: int
        Number of runs to attempt.

    seed: int
        Seed of the random generator.
    """
    if model.params:
        raise ValueError('oracle needs a parameter-free model')
    rng = numpy.random.RandomState(seed)
    found = []
    for _ in range(count):
        result = _random_run(model, rng, max_steps, delta)
        if result is not None:
            found.append(result)
    return found


def replay_run(model, steps, delta=None):
    """
    Replay a scripted run and return ``(duration, classes)``.

    model: :class:`Model`
        Parameter-free model.

    steps: iterable of (Fraction, string)
        Delay followed by the action of the edge taken.
    """
    state = _start(model)
    if state is None:
        raise ValueError('initial invariant does not hold')
    for delay, action in steps:
        waited = _wait(model, state, Fraction(delay))
        if waited is None:
            raise ValueError('invariant of %s violated after %s'
                             % (state.location, format_rational(delay)))
        for edge in model.edges_from(state.location):
            if edge.action != action:
                continue
            nxt = _take(model, waited, edge)
            if nxt is not None:
                state = nxt
                break
        else:
            raise ValueError('no enabled %s edge from %s at time %s'
                             % (action, state.location,
                                format_rational(waited.now)))
    if state.location != model.final:
        raise ValueError('run ends in %s, not in the final location'
                         % state.location)
    return state.now, _classes(state, delta)


@dataclass(frozen=True)
class Disagreement(object):
    duration: Fraction
    name: str
    oracle: bool
    symbolic: bool

    def __str__(self):
        return '%s at %s: oracle %s, symbolic %s' % (
            self.name, format_rational(self.duration), self.oracle,
            self.symbolic)


def crosscheck(report, sets, exact=None):
    """
    Compare oracle hits with symbolic duration sets on the grid. A duration
    found by the oracle but missing from the set is always reported; the
    converse only when `exact`.

    report: :class:`SampleReport`
        Oracle result.

    sets: :class:`DurationReport`
        Symbolic duration sets of the same model.

    exact: bool or None
        Defaults to: closed model and granularity a multiple of twice the
        symbolic scale.
    """
    if exact is None:
        exact = report.exact and \
            report.granularity % (2 * sets.scale) == 0
    symbolic = dict(sets.sets())
    found = []
    for point in report.grid():
        for name in report.classes():
            if name not in symbolic:
                continue
            hit = point in report.hits[name]
            member = symbolic[name].contains(point)
            if hit and not member or exact and member and not hit:
                found.append(Disagreement(point, name, hit, member))
    return found


def check_samples(samples, sets):
    """
    Return a :class:`Disagreement` for every sampled ``(duration, classes)``
    that is missing from the matching symbolic set.
    """
    symbolic = dict(sets.sets())
    found = []
    for duration, names in samples:
        for name in names:
            if name in symbolic and not symbolic[name].contains(duration):
                found.append(Disagreement(duration, name, True, False))
    return found
