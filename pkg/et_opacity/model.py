"""
Domain types for (parametric) timed automata.

A :class:`Model` is a timed automaton with a distinguished initial, private
and final location. Guards and invariants are conjunctions of atomic
constraints ``x ~ a1*p1 + ... + aM*pM + d`` comparing one clock with a linear
term over the parameters. A model without parameters is a plain timed
automaton; :func:`apply_valuation` turns a parametric model into one.

All numbers are exact :class:`fractions.Fraction` values. ``INF`` stands for
+infinity wherever a bound may be unbounded (expiration dates, interval
upper ends); it is only ever compared, never used in arithmetic.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from et_opacity.errors import Diagnostic, ModelError

INF = math.inf

LT = '<'
LE = '<='
EQ = '='
GE = '>='
GT = '>'
RELATIONS = (LT, LE, EQ, GE, GT)

_logger = logging.getLogger(__name__)


def format_rational(value):
    """
    Return exact string form of `value`: ``inf``, a decimal when the value
    has a finite decimal expansion, otherwise ``a/b``.

    value: Fraction or int or INF
        Value to format.
    """
    if value == INF:
        return 'inf'
    value = Fraction(value)
    num, den = value.numerator, value.denominator
    if den == 1:
        return str(num)
    rest = den
    twos = fives = 0
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return '%d/%d' % (num, den)
    digits = max(twos, fives)
    scaled = abs(num) * (10 ** digits) // den
    text = str(scaled).rjust(digits + 1, '0')
    text = '%s.%s' % (text[:-digits], text[-digits:])
    return '-' + text if num < 0 else text


def parse_rational(text):
    """
    Parse a rational written as ``2.5``, ``5/2``, ``3`` or ``inf``.

    text: string
        Text to parse.
    """
    text = text.strip()
    if text == 'inf':
        return INF
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError('invalid rational %r' % text)


def parse_delta(text):
    """
    Parse an expiration date: a non-negative rational or ``inf``.

    text: string
        Text to parse.
    """
    delta = parse_rational(text)
    if delta != INF and delta < 0:
        raise ValueError('expiration date must be >= 0, got %s' % text)
    return delta


@dataclass(frozen=True)
class AtomicConstraint(object):
    """
    ``clock relation sum(coeff * param) + constant``.

    `coeffs` is a sorted tuple of ``(param, int)`` pairs with nonzero
    coefficients.
    """

    clock: str
    relation: str
    coeffs: tuple = ()
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError('unknown relation %r' % self.relation)
        coeffs = tuple(sorted((p, int(a)) for p, a in self.coeffs if a))
        object.__setattr__(self, 'coeffs', coeffs)
        object.__setattr__(self, 'constant', Fraction(self.constant))

    @property
    def params(self):
        """ Names of parameters with a nonzero coefficient. """
        return tuple(p for p, _ in self.coeffs)

    def holds(self, value):
        """
        Evaluate on a concrete clock value (parameter-free constraints only).

        value: Fraction
            Clock value.
        """
        if self.coeffs:
            raise ValueError('constraint %s still has parameters' % self)
        c = self.constant
        if self.relation == LT:
            return value < c
        if self.relation == LE:
            return value <= c
        if self.relation == EQ:
            return value == c
        if self.relation == GE:
            return value >= c
        return value > c

    def renamed(self, clocks):
        """ Return copy with the clock renamed through the `clocks` map. """
        return replace(self, clock=clocks.get(self.clock, self.clock))

    def __str__(self):
        return '%s %s %s' % (self.clock, self.relation,
                             format_linear(self.coeffs, self.constant))


def format_linear(coeffs, constant):
    """
    Format ``sum(coeff * name) + constant`` the way the model reader
    accepts it.

    coeffs: iterable of (string, number)
        Terms with nonzero coefficients.

    constant: Fraction
        Constant term.
    """
    parts = []
    for name, coeff in coeffs:
        mag = abs(coeff)
        term = name if mag == 1 else '%s*%s' % (format_rational(mag), name)
        if not parts:
            parts.append(term if coeff > 0 else '-' + term)
        else:
            parts.append(('+ ' if coeff > 0 else '- ') + term)
    if not parts:
        return format_rational(constant)
    if constant > 0:
        parts.append('+ ' + format_rational(constant))
    elif constant < 0:
        parts.append('- ' + format_rational(-constant))
    return ' '.join(parts)


@dataclass(frozen=True)
class Constraint(object):
    """ Conjunction of atomic constraints; no conjuncts means true. """

    conjuncts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'conjuncts', tuple(self.conjuncts))

    @property
    def is_true(self):
        return not self.conjuncts

    def conjoin(self, other):
        """ Return ``self && other``. """
        return Constraint(self.conjuncts + other.conjuncts)

    def renamed(self, clocks):
        return Constraint(tuple(a.renamed(clocks) for a in self.conjuncts))

    def __iter__(self):
        return iter(self.conjuncts)

    def __str__(self):
        if not self.conjuncts:
            return 'true'
        return ' && '.join(str(a) for a in self.conjuncts)


TRUE = Constraint()


@dataclass(frozen=True)
class Edge(object):
    """ ``source --guard, action, resets--> target``. """

    source: str
    guard: Constraint
    action: str
    resets: frozenset
    target: str

    def __post_init__(self):
        object.__setattr__(self, 'resets', frozenset(self.resets))


@dataclass(frozen=True, eq=True)
class Model(object):
    """
    Timed automaton, possibly parametric.

    `locations`, `clocks`, `params` and `edges` keep declaration order.
    `invariants` maps a location to its :class:`Constraint`; locations
    without an entry have invariant true. `private` is None only for
    internally built product automata.
    """

    locations: tuple
    init: str
    private: object
    final: str
    clocks: tuple = ()
    params: tuple = ()
    invariants: dict = field(default_factory=dict)
    edges: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'locations', tuple(self.locations))
        object.__setattr__(self, 'clocks', tuple(self.clocks))
        object.__setattr__(self, 'params', tuple(self.params))
        object.__setattr__(self, 'edges', tuple(self.edges))
        invariants = dict((loc, inv) for loc, inv in self.invariants.items()
                          if not inv.is_true)
        object.__setattr__(self, 'invariants', invariants)
        outgoing = dict((loc, []) for loc in self.locations)
        for edge in self.edges:
            outgoing.setdefault(edge.source, []).append(edge)
        object.__setattr__(self, '_outgoing',
                           dict((k, tuple(v)) for k, v in outgoing.items()))

    __hash__ = None

    @property
    def actions(self):
        """ Set of action names used on edges. """
        return frozenset(edge.action for edge in self.edges)

    @property
    def is_parametric(self):
        return bool(self.params)

    def invariant(self, location):
        """ Return the invariant of `location`. """
        return self.invariants.get(location, TRUE)

    def edges_from(self, location):
        """ Return the edges leaving `location`. """
        return self._outgoing.get(location, ())

    def constraints(self):
        """ Iterate over every guard and invariant. """
        for loc in self.locations:
            yield self.invariant(loc)
        for edge in self.edges:
            yield edge.guard


def validate_model(model):
    """
    Check the structural rules on a model built in code and raise
    :class:`ModelError` listing every violation.

    model: :class:`Model`
        Model to check.
    """
    problems = []
    locations = set(model.locations)
    if len(locations) != len(model.locations):
        problems.append('duplicate location declaration')
    roles = (('init', model.init), ('private', model.private),
             ('final', model.final))
    for role, loc in roles:
        if loc is None:
            problems.append('missing %s location' % role)
        elif loc not in locations:
            problems.append('%s location %s is not declared' % (role, loc))
    named = [loc for _, loc in roles if loc is not None]
    if len(set(named)) != len(named):
        problems.append('init, private and final locations must be distinct')
    clocks = set(model.clocks)
    params = set(model.params)
    if clocks & params:
        problems.append('names declared as both clock and parameter: %s'
                        % ', '.join(sorted(clocks & params)))
    for loc in model.locations:
        problems.extend(_check_constraint(model.invariant(loc), clocks, params,
                                          'invariant of %s' % loc))
    for edge in model.edges:
        where = 'edge %s -> %s' % (edge.source, edge.target)
        for end in (edge.source, edge.target):
            if end not in locations:
                problems.append('%s: undeclared location %s' % (where, end))
        problems.extend(_check_constraint(edge.guard, clocks, params, where))
        for clock in sorted(edge.resets - clocks):
            problems.append('%s: undeclared clock %s in reset' % (where, clock))
    if problems:
        raise ModelError([Diagnostic(0, 0, msg) for msg in problems])
    return model


def _check_constraint(constraint, clocks, params, where):
    problems = []
    for atom in constraint:
        if atom.clock not in clocks:
            problems.append('%s: undeclared clock %s' % (where, atom.clock))
        for param in atom.params:
            if param not in params:
                problems.append('%s: undeclared parameter %s' % (where, param))
    return problems


def apply_valuation(model, valuation):
    """
    Replace every parameter by its value and return the parameter-free model.

    model: :class:`Model`
        Parametric model.

    valuation: dict
        Maps every parameter of `model` to a non-negative rational.
    """
    missing = [p for p in model.params if p not in valuation]
    if missing:
        raise ValueError('no value for parameter(s) %s' % ', '.join(missing))
    unknown = sorted(set(valuation) - set(model.params))
    if unknown:
        raise ValueError('unknown parameter(s) %s' % ', '.join(unknown))
    values = {}
    for param, value in valuation.items():
        value = Fraction(value)
        if value < 0:
            raise ValueError('parameter %s must be >= 0, got %s'
                             % (param, format_rational(value)))
        values[param] = value

    def fold(constraint):
        return Constraint(tuple(
            AtomicConstraint(a.clock, a.relation, (),
                             a.constant + sum(coeff * values[p]
                                              for p, coeff in a.coeffs))
            for a in constraint))

    return replace(model, params=(),
                   invariants=dict((loc, fold(inv))
                                   for loc, inv in model.invariants.items()),
                   edges=tuple(replace(e, guard=fold(e.guard))
                               for e in model.edges))


def rescale_to_integers(model, delta=None):
    """
    Multiply every constant (and a finite `delta`) by the lcm of their
    denominators. Returns ``(model, delta, scale)``; durations computed on
    the result are in scaled units and must be divided by `scale`.

    model: :class:`Model`
        Parameter-free model.

    delta: Fraction or INF or None
        Optional expiration date.
    """
    if model.params:
        raise ValueError('rescaling needs a parameter-free model')
    scale = 1
    for constraint in model.constraints():
        for atom in constraint:
            scale = math.lcm(scale, atom.constant.denominator)
    if delta is not None and delta != INF:
        delta = Fraction(delta)
        scale = math.lcm(scale, delta.denominator)
    if scale == 1:
        return model, delta, 1

    def grow(constraint):
        return Constraint(tuple(replace(a, constant=a.constant * scale)
                                for a in constraint))

    scaled = replace(model,
                     invariants=dict((loc, grow(inv))
                                     for loc, inv in model.invariants.items()),
                     edges=tuple(replace(e, guard=grow(e.guard))
                                 for e in model.edges))
    if delta is not None and delta != INF:
        delta = delta * scale
    _logger.debug('rescaled constants by %d', scale)
    return scaled, delta, scale


def max_constants(model, delta=None, expiring_clock=None):
    """
    Return the largest constant compared with each clock (0 if never
    compared). `expiring_clock`, if given, also gets a finite `delta`.

    model: :class:`Model`
        Parameter-free model with integer constants.

    delta: Fraction or INF or None
        Expiration date in scaled units.

    expiring_clock: string
        Clock measuring the time since the last private entry.
    """
    caps = dict((clock, 0) for clock in model.clocks)
    for constraint in model.constraints():
        for atom in constraint:
            if atom.coeffs or atom.constant.denominator != 1:
                raise ValueError('constraint %s is not integer and '
                                 'parameter-free' % atom)
            caps[atom.clock] = max(caps.get(atom.clock, 0),
                                   int(atom.constant))
    if expiring_clock is not None:
        cap = caps.get(expiring_clock, 0)
        if delta is not None and delta != INF:
            cap = max(cap, int(delta))
        caps[expiring_clock] = cap
    return caps


def has_strict_constraints(model):
    """ True if any guard or invariant uses ``<`` or ``>``. """
    return any(atom.relation in (LT, GT)
               for constraint in model.constraints() for atom in constraint)


class ParamRole(enum.Enum):
    LOWER = 'lower'
    UPPER = 'upper'


class LUVerdict(object):
    """
    Result of :func:`classify_lu`.

    roles: dict or None
        Maps each parameter to a :class:`ParamRole` when the model is L/U.

    witness: tuple or None
        ``(AtomicConstraint, param)`` for the first violation found.
    """

    def __init__(self, roles=None, witness=None):
        self.roles = roles
        self.witness = witness

    @property
    def is_lu(self):
        return self.witness is None

    def lower_params(self):
        return sorted(p for p, r in self.roles.items() if r is ParamRole.LOWER)

    def upper_params(self):
        return sorted(p for p, r in self.roles.items() if r is ParamRole.UPPER)


def _uses(atom):
    """ Yield ``(param, role)`` for every parameter use in `atom`. """
    for param, coeff in atom.coeffs:
        if atom.relation == EQ:
            yield param, None
        elif (atom.relation in (LT, LE)) == (coeff > 0):
            yield param, ParamRole.UPPER
        else:
            yield param, ParamRole.LOWER


def classify_lu(model):
    """
    Split parameters into lower-bound and upper-bound ones, or report the
    first constraint using a parameter in both roles. An equality on a
    parameter always violates. Unused parameters are reported as lower-bound.

    model: :class:`Model`
        Model to classify.
    """
    roles = {}
    for constraint in model.constraints():
        for atom in constraint:
            for param, role in _uses(atom):
                if role is None or roles.get(param, role) is not role:
                    return LUVerdict(witness=(atom, param))
                roles[param] = role
    for param in model.params:
        roles.setdefault(param, ParamRole.LOWER)
    return LUVerdict(roles=roles)


def fresh_name(base, taken):
    """
    Return `base`, or `base` with a numeric suffix, not in `taken`.

    base: string
        Preferred name.

    taken: container
        Names already in use.
    """
    name = base
    count = 1
    while name in taken:
        name = '%s_%d' % (base, count)
        count += 1
    return name
