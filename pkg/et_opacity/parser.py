"""
Reader and writer for the textual model format::

    clocks: x;
    params: p1, p2;           # omit line for plain TA
    init: l0; private: l2; final: l1;
    loc l0 inv x <= 3;
    loc l1;
    loc l2;
    edge l0 -> l2 when x >= p1 sync a;
    edge l2 -> l1 when x <= p2 sync b;
    edge l0 -> l1 sync c;

Statements end with ``;`` and may share a line; ``#`` starts a comment.
A missing ``when`` clause means ``true``, ``do {x, y}`` lists the clocks
reset by an edge and conjuncts are joined by ``&&``. Declarations may appear
in any order.
"""

import re
from collections import namedtuple
from fractions import Fraction

from et_opacity.errors import Diagnostic, ModelError
from et_opacity.model import (AtomicConstraint, Constraint, Edge, Model, TRUE,
                              EQ, GE, GT, LE, LT, validate_model)

Token = namedtuple('Token', 'kind text line col')

_TOKEN_RE = re.compile(r'''
      (?P<ws>[ \t\r\f]+)
    | (?P<nl>\n)
    | (?P<comment>\#[^\n]*)
    | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
    | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>->|<=|>=|==|&&|[<>=;,:{}+\-*])
''', re.VERBOSE)

_RELOPS = {'<': LT, '<=': LE, '=': EQ, '==': EQ, '>=': GE, '>': GT}

_KEYWORDS = ('clocks', 'params', 'init', 'private', 'final', 'loc', 'edge',
             'inv', 'when', 'sync', 'do', 'true')


class _SyntaxError(Exception):

    def __init__(self, token, message):
        super(_SyntaxError, self).__init__(message)
        self.token = token


def tokenize(text):
    """
    Split `text` into tokens. Returns ``(tokens, diagnostics)``; unknown
    characters are reported and skipped.

    text: string
        Model source.
    """
    tokens = []
    diags = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if match is None:
            diags.append(Diagnostic(line, col,
                                    'unexpected character %r' % text[pos]))
            pos += 1
            continue
        kind = match.lastgroup
        if kind == 'nl':
            line += 1
            line_start = match.end()
        elif kind in ('num', 'id', 'op'):
            tokens.append(Token(kind, match.group(), line, col))
        pos = match.end()
    tokens.append(Token('eof', '', line, pos - line_start + 1))
    return tokens, diags


class _TokenReader(object):
    """ Cursor over a token list with the expression grammar. """

    def __init__(self, tokens, integer_coeffs=True):
        self._tokens = tokens
        self._pos = 0
        self._integer_coeffs = integer_coeffs
        self.references = []  # (kind, name, token)

    @property
    def current(self):
        return self._tokens[self._pos]

    def advance(self):
        token = self._tokens[self._pos]
        if token.kind != 'eof':
            self._pos += 1
        return token

    def at(self, text):
        token = self.current
        return token.kind in ('op', 'id') and token.text == text

    def expect(self, text):
        if not self.at(text):
            raise _SyntaxError(self.current, "expected '%s', found %s"
                               % (text, _describe(self.current)))
        return self.advance()

    def ident(self, what):
        token = self.current
        if token.kind != 'id' or token.text in _KEYWORDS:
            raise _SyntaxError(token, 'expected %s name, found %s'
                               % (what, _describe(token)))
        return self.advance()

    def skip_statement(self):
        """ Resynchronize after the next ';'. """
        while self.current.kind != 'eof' and not self.at(';'):
            self.advance()
        if self.at(';'):
            self.advance()

    def number(self):
        token = self.current
        if token.kind != 'num':
            raise _SyntaxError(token, 'expected number, found %s'
                               % _describe(token))
        self.advance()
        try:
            return Fraction(token.text)
        except ZeroDivisionError:
            raise _SyntaxError(token, 'division by zero in %s' % token.text)

    def linear(self):
        """
        Read ``[+-] term {(+|-) term}`` where a term is ``n``, ``name`` or
        ``n*name``. Returns ``(coeffs, constant)``.
        """
        coeffs = {}
        constant = Fraction(0)
        sign = 1
        if self.at('-') or self.at('+'):
            sign = -1 if self.advance().text == '-' else 1
        while True:
            token = self.current
            if token.kind == 'num':
                value = self.number()
                if self.at('*'):
                    self.advance()
                    name = self.ident('parameter')
                    if self._integer_coeffs and value.denominator != 1:
                        raise _SyntaxError(token, 'parameter coefficients '
                                           'must be integers')
                    self.references.append(('param', name.text, name))
                    coeffs[name.text] = coeffs.get(name.text, 0) + sign * value
                else:
                    constant += sign * value
            elif token.kind == 'id' and token.text not in _KEYWORDS:
                self.advance()
                self.references.append(('param', token.text, token))
                coeffs[token.text] = coeffs.get(token.text, 0) + sign
            else:
                raise _SyntaxError(token, 'expected term, found %s'
                                   % _describe(token))
            if self.at('+') or self.at('-'):
                sign = -1 if self.advance().text == '-' else 1
            else:
                break
        if self._integer_coeffs:
            coeffs = dict((k, int(v)) for k, v in coeffs.items())
        return coeffs, constant

    def relation(self):
        token = self.current
        if token.kind != 'op' or token.text not in _RELOPS:
            raise _SyntaxError(token, 'expected comparison, found %s'
                               % _describe(token))
        self.advance()
        return _RELOPS[token.text]

    def constraint(self):
        """ Read ``true`` or ``atom {&& atom}``. """
        if self.at('true'):
            self.advance()
            return TRUE
        atoms = [self.atom()]
        while self.at('&&'):
            self.advance()
            atoms.append(self.atom())
        return Constraint(tuple(atoms))

    def atom(self):
        clock = self.ident('clock')
        self.references.append(('clock', clock.text, clock))
        relation = self.relation()
        coeffs, constant = self.linear()
        return AtomicConstraint(clock.text, relation, tuple(coeffs.items()),
                                constant)


def _describe(token):
    if token.kind == 'eof':
        return 'end of input'
    return "'%s'" % token.text


class _ModelReader(object):
    """ Parses one model text, collecting diagnostics. """

    def __init__(self, text):
        tokens, self._diags = tokenize(text)
        self._reader = _TokenReader(tokens)
        self._clocks = []
        self._params = []
        self._locations = []
        self._invariants = {}
        self._edges = []
        self._roles = {}       # role -> token
        self._declared = {}    # name -> kind

    def _error(self, token, message):
        self._diags.append(Diagnostic(token.line, token.col, message))

    def parse(self):
        reader = self._reader
        while reader.current.kind != 'eof':
            try:
                self._statement()
            except _SyntaxError as err:
                self._error(err.token, str(err))
                reader.skip_statement()
        self._check(reader.current)
        if self._diags:
            self._diags.sort(key=lambda d: (d.line, d.column))
            raise ModelError(self._diags)
        return Model(locations=self._locations,
                     init=self._roles['init'].text,
                     private=self._roles['private'].text,
                     final=self._roles['final'].text,
                     clocks=self._clocks, params=self._params,
                     invariants=self._invariants, edges=self._edges)

    def _declare(self, token, kind):
        if token.text in self._declared:
            self._error(token, 'duplicate declaration of %s (already a %s)'
                        % (token.text, self._declared[token.text]))
            return False
        self._declared[token.text] = kind
        return True

    def _names(self, kind):
        reader = self._reader
        names = []
        if not reader.at(';'):
            names.append(reader.ident(kind))
            while reader.at(','):
                reader.advance()
                names.append(reader.ident(kind))
        reader.expect(';')
        return names

    def _statement(self):
        reader = self._reader
        head = reader.current
        if head.kind != 'id':
            raise _SyntaxError(head, 'expected declaration, found %s'
                               % _describe(head))
        keyword = head.text
        if keyword in ('clocks', 'params'):
            reader.advance()
            reader.expect(':')
            kind = 'clock' if keyword == 'clocks' else 'parameter'
            for token in self._names(kind):
                if self._declare(token, kind):
                    (self._clocks if kind == 'clock'
                     else self._params).append(token.text)
        elif keyword in ('init', 'private', 'final'):
            reader.advance()
            reader.expect(':')
            name = reader.ident('location')
            reader.expect(';')
            if keyword in self._roles:
                self._error(head, 'duplicate %s declaration' % keyword)
            else:
                self._roles[keyword] = name
        elif keyword == 'loc':
            reader.advance()
            name = reader.ident('location')
            invariant = TRUE
            if reader.at('inv'):
                reader.advance()
                invariant = reader.constraint()
            reader.expect(';')
            if self._declare(name, 'location'):
                self._locations.append(name.text)
                self._invariants[name.text] = invariant
        elif keyword == 'edge':
            self._edge()
        else:
            raise _SyntaxError(head, 'unknown declaration %s' % _describe(head))

    def _edge(self):
        reader = self._reader
        reader.advance()
        source = reader.ident('location')
        reader.expect('->')
        target = reader.ident('location')
        guard, action, resets = None, None, None
        while not reader.at(';'):
            clause = reader.current
            if reader.at('when') and guard is None:
                reader.advance()
                guard = reader.constraint()
            elif reader.at('sync') and action is None:
                reader.advance()
                action = reader.ident('action').text
            elif reader.at('do') and resets is None:
                reader.advance()
                reader.expect('{')
                resets = []
                if not reader.at('}'):
                    resets.append(reader.ident('clock'))
                    while reader.at(','):
                        reader.advance()
                        resets.append(reader.ident('clock'))
                reader.expect('}')
                for token in resets:
                    reader.references.append(('clock', token.text, token))
            else:
                raise _SyntaxError(clause, 'unexpected %s in edge'
                                   % _describe(clause))
        reader.expect(';')
        if action is None:
            self._error(source, 'edge %s -> %s has no sync action'
                        % (source.text, target.text))
            return
        reader.references.append(('location', source.text, source))
        reader.references.append(('location', target.text, target))
        self._edges.append(Edge(source.text, guard or TRUE, action,
                                frozenset(t.text for t in resets or ()),
                                target.text))

    def _check(self, eof):
        clocks = set(self._clocks)
        params = set(self._params)
        locations = set(self._locations)
        for kind, name, token in self._reader.references:
            if kind == 'clock' and name not in clocks:
                self._error(token, 'undeclared clock %s' % name)
            elif kind == 'param' and name not in params:
                if name in clocks:
                    self._error(token, 'clock %s on the right-hand side '
                                '(diagonal constraints are not supported)'
                                % name)
                else:
                    self._error(token, 'undeclared parameter %s' % name)
            elif kind == 'location' and name not in locations:
                self._error(token, 'undeclared location %s' % name)
        seen = {}
        for role in ('init', 'private', 'final'):
            token = self._roles.get(role)
            if token is None:
                self._error(eof, 'missing %s declaration' % role)
                continue
            if token.text not in locations:
                self._error(token, 'undeclared location %s' % token.text)
            if token.text in seen:
                self._error(token, '%s location %s is also the %s location; '
                            'init, private and final must be distinct'
                            % (role, token.text, seen[token.text]))
            seen.setdefault(token.text, role)


def parse_model(text):
    """
    Parse and validate a model. Raises :class:`ModelError` listing every
    problem with its line and column.

    text: string
        Model source.
    """
    return validate_model(_ModelReader(text).parse())


def read_model(path):
    """
    Parse the model stored in file `path`.

    path: string
        File to read.
    """
    with open(path, 'r') as inp:
        return parse_model(inp.read())


def serialize_model(model):
    """
    Return the text form of `model`; :func:`parse_model` reads it back to an
    equal model.

    model: :class:`Model`
        Model with init, private and final locations.
    """
    if model.private is None:
        raise ValueError('product automata have no text form')
    lines = []
    if model.clocks:
        lines.append('clocks: %s;' % ', '.join(model.clocks))
    if model.params:
        lines.append('params: %s;' % ', '.join(model.params))
    lines.append('init: %s; private: %s; final: %s;'
                 % (model.init, model.private, model.final))
    for loc in model.locations:
        inv = model.invariant(loc)
        if inv.is_true:
            lines.append('loc %s;' % loc)
        else:
            lines.append('loc %s inv %s;' % (loc, inv))
    for edge in model.edges:
        text = 'edge %s -> %s' % (edge.source, edge.target)
        if not edge.guard.is_true:
            text += ' when %s' % edge.guard
        text += ' sync %s' % edge.action
        if edge.resets:
            text += ' do {%s}' % ', '.join(sorted(edge.resets))
        lines.append(text + ';')
    return '\n'.join(lines) + '\n'


def parse_inequality(text):
    """
    Parse ``lhs op rhs`` over named variables with rational coefficients.
    Returns ``(coeffs, relation, constant)`` for ``sum(coeffs) op constant``.

    text: string
        Inequality such as ``p1 <= p2`` or ``2*p1 - p2 < 3``.
    """
    tokens, diags = tokenize(text)
    if diags:
        raise ModelError(diags)
    reader = _TokenReader(tokens, integer_coeffs=False)
    try:
        lhs, lconst = reader.linear()
        relation = reader.relation()
        rhs, rconst = reader.linear()
        if reader.current.kind != 'eof':
            raise _SyntaxError(reader.current, 'unexpected %s'
                               % _describe(reader.current))
    except _SyntaxError as err:
        raise ModelError([Diagnostic(err.token.line, err.token.col, str(err))])
    coeffs = dict(lhs)
    for name, value in rhs.items():
        coeffs[name] = coeffs.get(name, 0) - value
    return coeffs, relation, rconst - lconst
