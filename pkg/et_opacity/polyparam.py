"""
Parametric analysis: convex polyhedra over clocks and parameters, symbolic
reachability synthesis, and parameter synthesis for existential opacity by
self-composition.

Polyhedra are kept as conjunctions of linear inequalities with exact
rational coefficients. Every test (emptiness, inclusion, projection) is done
by Fourier-Motzkin elimination; a derived inequality is strict iff one of
its two parents is.
"""

import logging
from collections import deque
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property

from et_opacity.errors import BudgetExceeded, UsageError
from et_opacity.model import (AtomicConstraint, Constraint, Edge, EQ, GE, GT,
                              LE, LT, Model, classify_lu, format_rational,
                              fresh_name)
from et_opacity.opacity import decide_exists
from et_opacity.parser import parse_inequality

_logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 200


@dataclass(frozen=True)
class LinearConstraint(object):
    """ ``sum(coeffs[i] * v[i]) < bound`` if `strict`, else ``<=``. """

    coeffs: tuple
    bound: Fraction
    strict: bool = False

    @property
    def is_trivial(self):
        return not any(self.coeffs)

    @property
    def trivially_true(self):
        return self.bound > 0 or (self.bound == 0 and not self.strict)

    def normalized(self):
        """ Divide by the magnitude of the first nonzero coefficient. """
        lead = next((c for c in self.coeffs if c), None)
        if lead is None or abs(lead) == 1:
            return self
        mag = abs(lead)
        return LinearConstraint(tuple(c / mag for c in self.coeffs),
                                self.bound / mag, self.strict)

    def negated(self):
        return LinearConstraint(tuple(-c for c in self.coeffs), -self.bound,
                                not self.strict)

    def holds(self, point):
        total = sum(c * v for c, v in zip(self.coeffs, point))
        return total < self.bound if self.strict else total <= self.bound

    def text(self, names):
        """ Readable form with positive terms on the left. """
        def side(terms):
            out = []
            for name, coeff in terms:
                term = name if coeff == 1 else '%s*%s' % (
                    format_rational(coeff), name)
                out.append(term)
            return ' + '.join(out)

        left = [(n, c) for n, c in zip(names, self.coeffs) if c > 0]
        right = [(n, -c) for n, c in zip(names, self.coeffs) if c < 0]
        rel = '<' if self.strict else '<='
        if not left:
            flip = '>' if self.strict else '>='
            return '%s %s %s' % (side(right), flip,
                                 format_rational(-self.bound))
        if not right:
            return '%s %s %s' % (side(left), rel, format_rational(self.bound))
        rhs = side(right)
        if self.bound > 0:
            rhs += ' + ' + format_rational(self.bound)
        elif self.bound < 0:
            rhs += ' - ' + format_rational(-self.bound)
        return '%s %s %s' % (side(left), rel, rhs)


def _tighter(a, b):
    return a.bound < b.bound or (a.bound == b.bound and a.strict)


class _Elimination(object):
    """
    Fourier-Motzkin elimination of several variables in sequence. Every row
    carries the set of input rows it combines; after `k` eliminations a row
    combining more than ``k + 1`` inputs is redundant and dropped
    (Chernikov's rule).
    """

    def __init__(self, poly):
        self.poly = poly
        self.infeasible = poly.infeasible
        self.rows = [] if self.infeasible else \
            [(row, frozenset([n])) for n, row in enumerate(poly.constraints)]
        self.steps = 0

    def cost(self, i):
        pos = sum(1 for row, _ in self.rows if row.coeffs[i] > 0)
        neg = sum(1 for row, _ in self.rows if row.coeffs[i] < 0)
        return pos * neg - pos - neg

    def eliminate(self, i):
        if self.infeasible:
            return
        self.steps += 1
        pos, neg, keep = [], [], []
        for item in self.rows:
            if item[0].coeffs[i] > 0:
                pos.append(item)
            elif item[0].coeffs[i] < 0:
                neg.append(item)
            else:
                keep.append(item)
        for p, p_from in pos:
            a = p.coeffs[i]
            for n, n_from in neg:
                combined = p_from | n_from
                if len(combined) > self.steps + 1:
                    continue
                b = -n.coeffs[i]
                row = LinearConstraint(
                    tuple(pc / a + nc / b
                          for pc, nc in zip(p.coeffs, n.coeffs)),
                    p.bound / a + n.bound / b, p.strict or n.strict)
                if row.is_trivial:
                    if not row.trivially_true:
                        self.infeasible = True
                        self.rows = []
                        return
                    continue
                keep.append((row.normalized(), combined))
        tightest = {}
        for row, used in keep:
            found = tightest.get(row.coeffs)
            if found is None or _tighter(row, found[0]) or \
               (row == found[0] and len(used) < len(found[1])):
                tightest[row.coeffs] = (row, used)
        self.rows = list(tightest.values())

    def result(self):
        poly = self.poly._with(row for row, _ in self.rows)
        if self.infeasible:
            poly.infeasible = True
            poly.constraints = ()
        return poly


class Polyhedron(object):
    """
    Conjunction of linear constraints over ``clocks + params``.

    clocks: tuple of string
        Clock variables, first in the variable order.

    params: tuple of string
        Parameter variables.

    constraints: iterable of :class:`LinearConstraint`
        Constraints, canonicalized on construction.
    """

    def __init__(self, clocks, params, constraints=()):
        self.clocks = tuple(clocks)
        self.params = tuple(params)
        self.infeasible = False
        tightest = {}
        for item in constraints:
            item = item.normalized()
            if item.is_trivial:
                if not item.trivially_true:
                    self.infeasible = True
                continue
            found = tightest.get(item.coeffs)
            if found is None or _tighter(item, found):
                tightest[item.coeffs] = item
        self.constraints = () if self.infeasible else tuple(tightest.values())

    @property
    def variables(self):
        return self.clocks + self.params

    def index(self, name):
        return self.variables.index(name)

    def _with(self, constraints):
        return Polyhedron(self.clocks, self.params, constraints)

    @staticmethod
    def universe(clocks, params):
        return Polyhedron(clocks, params)

    @staticmethod
    def initial(clocks, params):
        """ Every clock is 0 and every parameter is non-negative. """
        poly = Polyhedron(clocks, params)
        found = []
        for name in clocks:
            found.extend(poly.bound(name, LE, 0))
            found.extend(poly.bound(name, GE, 0))
        for name in params:
            found.extend(poly.bound(name, GE, 0))
        return poly._with(found)

    def unit(self, name, coeff=1):
        coeffs = [Fraction(0)] * len(self.variables)
        coeffs[self.index(name)] = Fraction(coeff)
        return coeffs

    def bound(self, name, relation, constant):
        """ Constraints for ``name relation constant``. """
        return self.atom(AtomicConstraint(name, relation, (), constant))

    def atom(self, atom):
        """ Linear constraints equivalent to an :class:`AtomicConstraint`. """
        coeffs = self.unit(atom.clock)
        for param, coeff in atom.coeffs:
            coeffs[self.index(param)] -= coeff
        upper = LinearConstraint(tuple(coeffs), atom.constant,
                                 atom.relation == LT)
        lower = LinearConstraint(tuple(-c for c in coeffs), -atom.constant,
                                 atom.relation == GT)
        if atom.relation in (LT, LE):
            return [upper]
        if atom.relation in (GT, GE):
            return [lower]
        return [upper, lower]

    def holds(self, point):
        """
        point: dict
            Maps every variable to a rational.
        """
        values = [Fraction(point[name]) for name in self.variables]
        return not self.infeasible and \
            all(c.holds(values) for c in self.constraints)

    def eliminated(self, *names):
        """
        Existentially quantify `names` away, in order (their columns stay,
        all 0).
        """
        elimination = _Elimination(self)
        for name in names:
            elimination.eliminate(self.index(name))
        return elimination.result()

    @cached_property
    def is_empty(self):
        elimination = _Elimination(self)
        remaining = set(range(len(self.variables)))
        while remaining and elimination.rows and not elimination.infeasible:
            i = min(remaining, key=elimination.cost)
            remaining.discard(i)
            elimination.eliminate(i)
        return elimination.infeasible

    def minimized(self):
        """ Same polyhedron without redundant constraints. """
        if self.is_empty:
            return self
        kept = list(self.constraints)
        for item in list(kept):
            others = [c for c in kept if c is not item]
            if self._with(others + [item.negated()]).is_empty:
                kept = others
        return self._with(kept)

    def restricted(self, clocks, params):
        """
        Drop every variable not in `clocks` + `params`; their coefficients
        must already be zero.
        """
        keep = [self.index(v) for v in tuple(clocks) + tuple(params)]
        result = Polyhedron(clocks, params, [
            LinearConstraint(tuple(c.coeffs[i] for i in keep), c.bound,
                             c.strict) for c in self.constraints])
        result.infeasible = result.infeasible or self.infeasible
        return result

    def __str__(self):
        if self.infeasible:
            return 'false'
        if not self.constraints:
            return 'true'
        return ' && '.join(c.text(self.variables) for c in self.constraints)


def poly_meet(poly, other):
    """
    Conjunction of `poly` with a :class:`Polyhedron` over the same
    variables, or with a model :class:`Constraint`.
    """
    if isinstance(other, Polyhedron):
        extra = list(other.constraints)
        if other.infeasible:
            extra.append(LinearConstraint((Fraction(0),) *
                                          len(poly.variables), Fraction(-1)))
    else:
        extra = []
        for atom in other:
            extra.extend(poly.atom(atom))
    if not extra:
        return poly
    result = poly._with(list(poly.constraints) + extra)
    if poly.infeasible:
        result.infeasible = True
        result.constraints = ()
    return result


def poly_elapse(poly):
    """
    Let time pass: every clock grows by the same non-negative delay,
    parameters are unchanged.
    """
    if poly.infeasible or not poly.clocks:
        return poly
    delay = fresh_name('delay', poly.variables)
    clock_set = set(poly.clocks)
    found = []
    for item in poly.constraints:
        drift = -sum(c for name, c in zip(poly.variables, item.coeffs)
                     if name in clock_set)
        found.append(LinearConstraint(item.coeffs + (drift,), item.bound,
                                      item.strict))
    widened = Polyhedron(poly.clocks, poly.params + (delay,), found)
    widened = widened._with(list(widened.constraints) +
                            widened.bound(delay, GE, 0))
    return widened.eliminated(delay).restricted(poly.clocks, poly.params)


def poly_reset(poly, clocks):
    """ Set every clock in `clocks` to 0. """
    clocks = sorted(clocks)
    if not clocks:
        return poly
    return poly_meet(poly.eliminated(*clocks), Constraint(tuple(
        AtomicConstraint(clock, EQ, (), 0) for clock in clocks)))


def poly_is_empty(poly):
    return poly.is_empty


def poly_project_params(poly):
    """ Existential projection onto the parameters. """
    return poly.eliminated(*poly.clocks).restricted((), poly.params)


def poly_includes(outer, inner):
    """ True if every point of `inner` lies in `outer`. """
    if inner.is_empty:
        return True
    if outer.infeasible:
        return False
    for item in outer.constraints:
        if not inner._with(list(inner.constraints) +
                           [item.negated()]).is_empty:
            return False
    return True


class ParamConstraint(object):
    """
    Finite union of non-empty polyhedra over parameters.

    params: tuple of string
        Parameter names.
    """

    def __init__(self, params, disjuncts=()):
        self.params = tuple(params)
        self.disjuncts = []
        for poly in disjuncts:
            self.add(poly)

    def add(self, poly):
        """ Add a disjunct unless already covered; drop covered ones. """
        if poly.is_empty:
            return
        if any(poly_includes(old, poly) for old in self.disjuncts):
            return
        self.disjuncts = [old for old in self.disjuncts
                          if not poly_includes(poly, old)]
        self.disjuncts.append(poly)

    def is_empty(self):
        return not self.disjuncts

    def contains(self, valuation):
        """
        valuation: dict
            Maps every parameter to a rational.
        """
        return any(poly.holds(valuation) for poly in self.disjuncts)

    @staticmethod
    def _texts(poly):
        found = []
        for item in poly.minimized().constraints:
            # p >= 0 holds for every parameter
            if [c for c in item.coeffs if c] == [-1] and item.bound == 0 \
               and not item.strict:
                continue
            found.append(item.text(poly.variables))
        return found

    def to_json(self):
        return [self._texts(poly) for poly in self.disjuncts]

    @staticmethod
    def from_json(params, data):
        """
        Inverse of :meth:`to_json`; parameters are taken non-negative.

        params: tuple of string
            Parameter names.

        data: list
            Disjuncts as lists of inequality strings.
        """
        result = ParamConstraint(params)
        for texts in data:
            poly = Polyhedron.initial((), params)
            found = list(poly.constraints)
            for text in texts:
                coeffs, relation, constant = parse_inequality(text)
                unknown = sorted(set(coeffs) - set(params))
                if unknown:
                    raise ValueError('unknown parameter(s) %s in %r'
                                     % (', '.join(unknown), text))
                row = tuple(Fraction(coeffs.get(p, 0)) for p in params)
                constant = Fraction(constant)
                if relation in (LT, LE, EQ):
                    found.append(LinearConstraint(row, constant,
                                                  relation == LT))
                if relation in (GT, GE, EQ):
                    found.append(LinearConstraint(tuple(-c for c in row),
                                                  -constant, relation == GT))
            result.add(Polyhedron((), params, found))
        return result

    def __str__(self):
        if not self.disjuncts:
            return 'false'
        parts = []
        for texts in self.to_json():
            parts.append(' && '.join(texts) if texts else 'true')
        if len(parts) == 1:
            return parts[0]
        return ' || '.join('(%s)' % part for part in parts)


def self_compose(model):
    """
    Product of `model` with a copy of itself for existential opacity
    synthesis. Returns ``(product, target)``.

    The first copy tracks whether the private location was visited, the
    second copy has the private location removed. Both copies share the
    parameters and the flow of time; a fresh urgency clock forbids waiting
    in a final location, so the copies must reach it at the same instant,
    after which a shared `finish` action leads both to an end location. The
    target is reachable for a valuation iff some duration is achieved both
    by a private run and by a public run.

    model: :class:`Model`
        Validated model, possibly parametric.
    """
    names = set(model.clocks) | set(model.params)
    first = {}
    second = {}
    for clock in model.clocks:
        first[clock] = fresh_name(clock + '_1', names)
        names.add(first[clock])
        second[clock] = fresh_name(clock + '_2', names)
        names.add(second[clock])
    urgent = fresh_name('z', names)
    end = fresh_name('end', model.locations)
    finish = fresh_name('finish', model.actions)

    def a_name(loc, flag):
        return '%s@%d' % (loc, 1 if flag else 0)

    # (location, flag) moves of the first copy
    a_moves = {}
    for edge in model.edges:
        if edge.source == model.final:
            continue
        for flag in (False, True):
            target_flag = flag or edge.target == model.private
            resets = frozenset(first[c] for c in edge.resets)
            if edge.target == model.final:
                resets |= {urgent}
            a_moves.setdefault(a_name(edge.source, flag), []).append(
                (edge.guard.renamed(first), edge.action, resets,
                 a_name(edge.target, target_flag)))
    b_moves = {}
    for edge in model.edges:
        if edge.source == model.final or model.private in (edge.source,
                                                          edge.target):
            continue
        resets = frozenset(second[c] for c in edge.resets)
        if edge.target == model.final:
            resets |= {urgent}
        b_moves.setdefault(edge.source, []).append(
            (edge.guard.renamed(second), edge.action, resets, edge.target))

    a_final = frozenset(a_name(model.final, flag) for flag in (False, True))
    hold = Constraint((AtomicConstraint(urgent, LE, (), 0),))

    def origin(a_loc):
        return a_loc.rsplit('@', 1)[0]

    def invariant(a_loc, b_loc):
        inv = Constraint()
        if a_loc in a_final or b_loc == model.final:
            inv = hold
        if not a_loc.startswith(end + '@'):
            inv = inv.conjoin(model.invariant(origin(a_loc)).renamed(first))
        if b_loc != end:
            inv = inv.conjoin(model.invariant(b_loc).renamed(second))
        return inv

    def pair(a_loc, b_loc):
        return '%s|%s' % (a_loc, b_loc)

    start = (a_name(model.init, False), model.init)
    seen = {start}
    queue = deque([start])
    locations = []
    invariants = {}
    edges = []
    while queue:
        a_loc, b_loc = queue.popleft()
        here = pair(a_loc, b_loc)
        locations.append(here)
        invariants[here] = invariant(a_loc, b_loc)
        steps = []
        for guard, action, resets, target in a_moves.get(a_loc, ()):
            steps.append((guard, action, resets, (target, b_loc)))
        for guard, action, resets, target in b_moves.get(b_loc, ()):
            steps.append((guard, action, resets, (a_loc, target)))
        if a_loc in a_final and b_loc == model.final:
            steps.append((Constraint(), finish, frozenset(),
                          (a_name(end, a_loc.endswith('@1')), end)))
        for guard, action, resets, target in steps:
            edges.append(Edge(here, guard, action, resets, pair(*target)))
            if target not in seen:
                seen.add(target)
                queue.append(target)

    target = pair(a_name(end, True), end)
    if target not in locations:
        locations.append(target)
    clocks = tuple(first[c] for c in model.clocks) + \
        tuple(second[c] for c in model.clocks) + (urgent,)
    product = Model(locations, pair(*start), None, target, clocks,
                    model.params, invariants, edges)
    _logger.debug('self-composition: %d locations, %d edges',
                  len(locations), len(edges))
    return product, target


@dataclass(frozen=True)
class PSymState(object):
    """ Location with a polyhedron over clocks and parameters. """

    location: str
    zone: Polyhedron
    depth: int = 0


def _successor(model, zone, edge):
    zone = poly_meet(zone, edge.guard)
    if zone.is_empty:
        return None
    zone = poly_meet(poly_reset(zone, edge.resets),
                     model.invariant(edge.target))
    if zone.is_empty:
        return None
    zone = poly_meet(poly_elapse(zone), model.invariant(edge.target))
    return None if zone.is_empty else zone.minimized()


def synth_reach(model, target, depth_limit=DEFAULT_DEPTH, pruning=True,
                budget=None):
    """
    Parameter valuations for which `target` is reachable. Returns
    ``(ParamConstraint, complete)``; when `complete` is False some path was
    cut at `depth_limit` edges and the constraint may be too small.

    model: :class:`Model`
        Parametric model (parameters are taken non-negative).

    target: string
        Location to reach.

    depth_limit: int or None
        Maximum number of edges on an explored path.

    pruning: bool
        Skip states included in an already explored state at the same
        location.

    budget: int
        Maximum number of stored symbolic states.
    """
    result = ParamConstraint(model.params)
    start = poly_meet(Polyhedron.initial(model.clocks, model.params),
                      model.invariant(model.init))
    if start.is_empty:
        return result, True
    start = poly_meet(poly_elapse(start), model.invariant(model.init))
    start = start.minimized()
    passed = {model.init: [start]}
    waiting = deque([PSymState(model.init, start)])
    stored = 1
    complete = True
    while waiting:
        state = waiting.popleft()
        if state.location == target:
            result.add(poly_project_params(state.zone))
            continue
        edges = model.edges_from(state.location)
        if depth_limit is not None and state.depth >= depth_limit:
            if any(_successor(model, state.zone, e) is not None
                   for e in edges):
                complete = False
            continue
        for edge in edges:
            zone = _successor(model, state.zone, edge)
            if zone is None:
                continue
            seen = passed.setdefault(edge.target, [])
            if pruning and any(poly_includes(old, zone) for old in seen):
                continue
            seen.append(zone)
            stored += 1
            if budget is not None and stored > budget:
                raise BudgetExceeded('synthesis exceeded %d symbolic states'
                                     % budget, partial=(result, False))
            waiting.append(PSymState(edge.target, zone, state.depth + 1))
    _logger.info('synthesis explored %d symbolic states (complete: %s)',
                 stored, complete)
    return result, complete


def synth_exists_opaque(model, depth_limit=DEFAULT_DEPTH, pruning=True,
                        budget=None):
    """
    Parameter valuations making `model` existentially opaque: some duration
    is achieved both by a run through the private location and by a run
    avoiding it. Returns ``(ParamConstraint, complete)``.
    """
    product, target = self_compose(model)
    return synth_reach(product, target, depth_limit, pruning, budget)


def extremal_model(model):
    """
    Parameter-free model of an L/U model with lower-bound parameters at 0
    and every constraint on an upper-bound parameter dropped.
    """
    verdict = classify_lu(model)
    if not verdict.is_lu:
        atom, param = verdict.witness
        raise UsageError('not an L/U model: parameter %s in %s' % (param,
                                                                   atom))
    upper = set(verdict.upper_params())

    def fold(constraint):
        return Constraint(tuple(
            AtomicConstraint(a.clock, a.relation, (), a.constant)
            for a in constraint if not upper & set(a.params)))

    return replace(model, params=(),
                   invariants=dict((loc, fold(inv))
                                   for loc, inv in model.invariants.items()),
                   edges=tuple(replace(e, guard=fold(e.guard))
                               for e in model.edges))


def lu_exists_nonempty(model, budget=None):
    """
    True if some parameter valuation makes the L/U model `model`
    existentially opaque. Decreasing lower-bound parameters and increasing
    upper-bound ones only adds runs, and any pair of runs sharing a duration
    uses finitely many constraints, so the extremal model answers for every
    valuation at once.
    """
    return decide_exists(extremal_model(model), budget).answer
