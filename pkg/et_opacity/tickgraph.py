"""
Observer construction and region-graph exploration.

The observer extends a parameter-free, integer-rescaled model with

- a tick clock ``t`` bounded by ``t <= 1`` everywhere, and a self-loop
  ``t = 1`` resetting ``t`` on every non-final location, so that the number
  of tick firings counts elapsed whole time units;
- a private-visit flag, realized by duplicating each location into a flag-0
  and a flag-1 copy (edges into the private location lead to flag 1);
- in expiring mode, a clock ``y`` reset on every edge entering the private
  location, measuring the time since the last private entry.

The final location is made absorbing, so entering it is always a first
entry. Exploring the region graph of the observer gives a unary automaton
over the letter ``tick`` whose accepting states are entries into the final
location, each annotated with its run class and the position of ``t`` in its
unit cell. The tick-count sets of accepting states are eventually periodic
and, together with the position of ``t``, determine the duration sets
exactly.
"""

import enum
import logging
import math
from collections import deque
from dataclasses import dataclass

from et_opacity.errors import BudgetExceeded
from et_opacity.model import (AtomicConstraint, Constraint, Edge, EQ, INF, LE,
                              fresh_name, max_constants)
from et_opacity.region import (atom_holds, delay_successor, discrete_successor,
                               initial_region, region_bound, satisfies,
                               t_class)

TICK = 'tick'
EPSILON = 'eps'


class RunClass(enum.Enum):
    PRIVATE = 'private'
    PUBLIC = 'public'
    SECRET = 'secret'
    LATE = 'late'


@dataclass(frozen=True)
class EventuallyPeriodicIntSet(object):
    """
    ``finite`` plus, when `threshold` is not None, every
    ``threshold + r + j*period`` for ``r`` in `residues` and ``j >= 0``.
    Members of `finite` are below `threshold` whenever a periodic part
    exists.
    """

    finite: frozenset = frozenset()
    threshold: object = None
    period: object = None
    residues: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'finite', frozenset(self.finite))
        object.__setattr__(self, 'residues', frozenset(self.residues))
        if not self.residues:
            object.__setattr__(self, 'threshold', None)
            object.__setattr__(self, 'period', None)

    @property
    def is_periodic(self):
        return self.threshold is not None

    def __contains__(self, k):
        if k in self.finite:
            return True
        if self.threshold is None or k < self.threshold:
            return False
        return (k - self.threshold) % self.period in self.residues

    def up_to(self, limit):
        """ Sorted members ``<= limit``. """
        return [k for k in range(limit + 1) if k in self]

    def _layout(self, threshold, period):
        finite = set(k for k in self.finite if k < threshold)
        if self.threshold is not None:
            finite.update(k for k in range(self.threshold, threshold)
                          if k in self)
        residues = frozenset(r for r in range(period)
                             if threshold + r in self)
        return finite, residues

    def union(self, other):
        """ Return the union with `other`. """
        if not self.is_periodic and not other.is_periodic:
            return EventuallyPeriodicIntSet(self.finite | other.finite)
        periodic = [s for s in (self, other) if s.is_periodic]
        threshold = max([s.threshold for s in periodic] +
                        [max(s.finite) + 1 for s in (self, other)
                         if s.finite])
        period = 1
        for s in periodic:
            period = math.lcm(period, s.period)
        fin_a, res_a = self._layout(threshold, period)
        fin_b, res_b = other._layout(threshold, period)
        return EventuallyPeriodicIntSet(fin_a | fin_b, threshold, period,
                                        res_a | res_b)

    def __str__(self):
        parts = [str(k) for k in sorted(self.finite)]
        if self.is_periodic:
            parts.append('%s + %dj' % (
                '{%s}' % ','.join(str(self.threshold + r)
                                  for r in sorted(self.residues)),
                self.period))
        return '{%s}' % ', '.join(parts) if parts else '{}'


@dataclass(frozen=True)
class SymbolicState(object):
    """ Observer location (with its flag) and region. """

    location: str
    flag: bool
    region: object


class Observer(object):
    """
    Tick/flag observer of a parameter-free model with integer constants.
    Built by :func:`build_observer`.
    """

    def __init__(self, source, locations, origin, init, finals, clocks,
                 invariants, edges, tick_clock, tick_action, expiring_clock,
                 delta, caps):
        self.source = source
        self.locations = locations
        self.origin = origin
        self.init = init
        self.finals = finals
        self.clocks = clocks
        self.invariants = invariants
        self.edges = edges
        self.tick_clock = tick_clock
        self.tick_action = tick_action
        self.expiring_clock = expiring_clock
        self.delta = delta
        self.caps = caps
        self._outgoing = dict((loc, []) for loc in locations)
        for edge in edges:
            self._outgoing[edge.source].append(edge)

    @property
    def expiring(self):
        return self.expiring_clock is not None

    def invariant(self, location):
        return self.invariants[location]

    def edges_from(self, location):
        return self._outgoing[location]

    def flag(self, location):
        return self.origin[location][1]


def _flagged(location, flag):
    return '%s@%d' % (location, 1 if flag else 0)


def build_observer(model, delta=None):
    """
    Build the observer of `model`. With `delta` None the observer is plain;
    otherwise it is expiring with expiration date `delta` (a non-negative
    integer in scaled units, or INF).

    model: :class:`Model`
        Parameter-free model with integer constants.

    delta: int or Fraction or INF or None
        Expiration date in scaled units.
    """
    if model.params:
        raise ValueError('observer needs a parameter-free model')
    if delta is not None and delta != INF and delta.denominator != 1:
        raise ValueError('expiration date must be an integer after rescaling')
    names = set(model.clocks) | set(model.params)
    tick = fresh_name('t', names)
    names.add(tick)
    expiring_clock = fresh_name('y', names) if delta is not None else None
    tick_action = fresh_name(TICK, model.actions)

    caps = max_constants(model, delta, expiring_clock)
    caps[tick] = 1
    clocks = tuple(model.clocks) + (tick,)
    if expiring_clock is not None:
        clocks += (expiring_clock,)

    bound_tick = Constraint((AtomicConstraint(tick, LE, (), 1),))
    tick_guard = Constraint((AtomicConstraint(tick, EQ, (), 1),))
    locations = []
    origin = {}
    invariants = {}
    for flag in (False, True):
        for loc in model.locations:
            name = _flagged(loc, flag)
            locations.append(name)
            origin[name] = (loc, flag)
            invariants[name] = model.invariant(loc).conjoin(bound_tick)

    edges = []
    for edge in model.edges:
        if edge.source == model.final:
            continue
        entering = edge.target == model.private
        resets = edge.resets
        if entering and expiring_clock is not None:
            resets = resets | {expiring_clock}
        for flag in (False, True):
            edges.append(Edge(_flagged(edge.source, flag), edge.guard,
                              edge.action, resets,
                              _flagged(edge.target, flag or entering)))
    finals = frozenset(_flagged(model.final, flag) for flag in (False, True))
    for name in locations:
        if name not in finals:
            edges.append(Edge(name, tick_guard, tick_action, {tick}, name))

    return Observer(model, tuple(locations), origin,
                    _flagged(model.init, False), finals, clocks, invariants,
                    tuple(edges), tick, tick_action, expiring_clock, delta,
                    caps)


class TickNfa(object):
    """
    Unary automaton over ``tick`` (plus silent moves) whose states are the
    reachable symbolic states of an observer.

    states: list[:class:`SymbolicState`]
        States by index.

    initial: int
        Index of the initial state.

    transitions: list[(int, string, int)]
        ``(source, letter, target)`` with letter :data:`TICK` or
        :data:`EPSILON`.

    accepting: dict
        Maps accepting state indices to frozensets of
        ``(RunClass, FracClass)``.

    budget: int
        State budget of the exploration. It also bounds the number of
        distinct tick subsets iterated by :meth:`tick_counts`, or None.
    """

    def __init__(self, states, initial, transitions, accepting, budget=None):
        self.states = states
        self.initial = initial
        self.transitions = transitions
        self.accepting = accepting
        self._budget = budget
        self._sequence = None
        self._logger = logging.getLogger(__name__)

    def _closures(self):
        eps = dict((i, []) for i in range(len(self.states)))
        for src, letter, dst in self.transitions:
            if letter == EPSILON:
                eps[src].append(dst)
        closures = {}
        for start in eps:
            seen = {start}
            stack = [start]
            while stack:
                for nxt in eps[stack.pop()]:
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            closures[start] = frozenset(seen)
        return closures

    def _subset_sequence(self):
        """
        Return ``(sequence, threshold, period)`` where ``sequence[k]`` is the
        set of states reachable with exactly ``k`` ticks, iterated until a set
        repeats.
        """
        if self._sequence is not None:
            return self._sequence
        closures = self._closures()
        tick_next = dict((i, set()) for i in range(len(self.states)))
        for src, letter, dst in self.transitions:
            if letter == TICK:
                tick_next[src].update(closures[dst])
        current = closures[self.initial]
        seen = {current: 0}
        sequence = [current]
        while True:
            nxt = set()
            for state in current:
                nxt.update(tick_next[state])
            nxt = frozenset(nxt)
            if nxt in seen:
                threshold = seen[nxt]
                period = len(sequence) - threshold
                break
            seen[nxt] = len(sequence)
            sequence.append(nxt)
            current = nxt
            if self._budget is not None and len(sequence) > self._budget:
                raise BudgetExceeded('tick-count iteration exceeded %d steps'
                                     % self._budget)
        self._logger.debug('tick subsets repeat after %d steps (period %d)',
                           len(sequence), period)
        self._sequence = (sequence, threshold, period)
        return self._sequence

    def tick_counts(self, state):
        """
        Exact set of tick counts of paths reaching `state`.

        state: int
            State index.
        """
        sequence, threshold, period = self._subset_sequence()
        finite = [k for k in range(threshold) if state in sequence[k]]
        residues = [r for r in range(period)
                    if state in sequence[threshold + r]]
        return EventuallyPeriodicIntSet(finite, threshold, period, residues)

    def class_counts(self, run_class):
        """
        Return a dict mapping each :class:`FracClass` to the union of tick
        counts of accepting states annotated with ``(run_class, FracClass)``.

        run_class: :class:`RunClass`
            Class of runs to collect.
        """
        counts = {}
        for state in sorted(self.accepting):
            for rclass, fclass in self.accepting[state]:
                if rclass is run_class:
                    found = self.tick_counts(state)
                    if fclass in counts:
                        found = counts[fclass].union(found)
                    counts[fclass] = found
        return counts


def _classify(observer, state):
    fclass = t_class(state.region, observer.tick_clock)
    if not state.flag:
        return frozenset([(RunClass.PUBLIC, fclass)])
    classes = {(RunClass.PRIVATE, fclass)}
    if observer.expiring:
        delta = observer.delta
        if delta == INF or atom_holds(state.region, AtomicConstraint(
                observer.expiring_clock, LE, (), delta)):
            classes.add((RunClass.SECRET, fclass))
        else:
            classes.add((RunClass.LATE, fclass))
    return frozenset(classes)


def state_bound(observer):
    """ Upper bound on the number of symbolic states of `observer`. """
    return len(observer.locations) * region_bound(observer.caps)


def explore(observer, budget=None):
    """
    Explore the reachable region graph of `observer` into a :class:`TickNfa`.
    Final locations are absorbing: their states are accepting and are not
    expanded.

    observer: :class:`Observer`
        Observer to explore.

    budget: int
        Maximum number of symbolic states, or None. Passed on to the
        result as its tick-subset iteration bound.
    """
    logger = logging.getLogger(__name__)
    caps = observer.caps
    start = SymbolicState(observer.init, False,
                          initial_region(observer.clocks, caps))
    states = [start]
    index = {start: 0}
    transitions = []
    accepting = {}
    if not satisfies(start.region, observer.invariant(start.location)):
        return TickNfa(states, 0, transitions, accepting, budget)

    def add(state):
        found = index.get(state)
        if found is None:
            found = index[state] = len(states)
            states.append(state)
            queue.append(found)
            if budget is not None and len(states) > budget:
                raise BudgetExceeded('region exploration exceeded %d states'
                                     % budget)
        return found

    queue = deque([0])
    while queue:
        current = queue.popleft()
        state = states[current]
        loc = state.location
        if loc in observer.finals:
            accepting[current] = _classify(observer, state)
            continue
        region = state.region
        successor = delay_successor(region, caps)
        if successor != region and \
           satisfies(successor, observer.invariant(loc)):
            transitions.append((current, EPSILON,
                                add(SymbolicState(loc, state.flag,
                                                  successor))))
        for edge in observer.edges_from(loc):
            target = discrete_successor(region, edge.guard, edge.resets, caps)
            if target is None or \
               not satisfies(target, observer.invariant(edge.target)):
                continue
            letter = TICK if edge.action == observer.tick_action else EPSILON
            transitions.append((current, letter,
                                add(SymbolicState(edge.target,
                                                  observer.flag(edge.target),
                                                  target))))
    logger.info('region graph: %d states (bound %d), %d transitions, '
                '%d accepting', len(states), state_bound(observer),
                len(transitions), len(accepting))
    return TickNfa(states, 0, transitions, accepting, budget)


def dump_graph(nfa, stream):
    """
    Write one line per transition of `nfa` to `stream`.

    nfa: :class:`TickNfa`
        Explored graph.

    stream: file
        Text output.
    """
    def name(i):
        state = nfa.states[i]
        return 's%d %s %s' % (i, state.location, state.region)

    for src, letter, dst in nfa.transitions:
        stream.write('%s --%s--> %s\n' % (name(src), letter, name(dst)))
    for state in sorted(nfa.accepting):
        marks = ', '.join('%s/%s' % (r.value, f.value)
                          for r, f in sorted(nfa.accepting[state],
                                             key=lambda a: (a[0].value,
                                                            a[1].value)))
        stream.write('%s accepting %s\n' % (name(state), marks))
