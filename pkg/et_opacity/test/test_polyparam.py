import unittest
from fractions import Fraction

import numpy

from et_opacity.errors import BudgetExceeded, UsageError
from et_opacity.model import (AtomicConstraint, Constraint, GE, LE, LT,
                              apply_valuation)
from et_opacity.opacity import decide_exists
from et_opacity.parser import parse_model
from et_opacity.polyparam import (LinearConstraint, ParamConstraint,
                                  Polyhedron, extremal_model,
                                  lu_exists_nonempty, poly_elapse,
                                  poly_includes, poly_is_empty, poly_meet,
                                  poly_project_params, poly_reset,
                                  self_compose, synth_exists_opaque,
                                  synth_reach)
from et_opacity.test.fixtures import half_grid, load


def _poly(clocks, params, *atoms):
    poly = Polyhedron.universe(clocks, params)
    return poly_meet(poly, Constraint(tuple(
        AtomicConstraint(clock, rel, coeffs, constant)
        for clock, rel, coeffs, constant in atoms)))


def _random_poly(rng, names, rows):
    found = []
    for _ in range(1 + rng.randint(rows)):
        coeffs = tuple(Fraction(int(rng.randint(-2, 3))) for _ in names)
        found.append(LinearConstraint(coeffs,
                                      Fraction(int(rng.randint(-3, 4))),
                                      bool(rng.randint(2))))
    return Polyhedron(names, (), found)


def _lifts(rows, x):
    """ True if some y satisfies every ``a*x + b*y <= c`` row at `x`. """
    lo, lo_strict, hi, hi_strict = None, False, None, False
    for row in rows:
        a, b = row.coeffs
        rest = row.bound - a * x
        if b == 0:
            if rest < 0 or (rest == 0 and row.strict):
                return False
        elif b > 0:
            value = rest / b
            if hi is None or value < hi or (value == hi and row.strict):
                hi, hi_strict = value, row.strict
        else:
            value = rest / b
            if lo is None or value > lo or (value == lo and row.strict):
                lo, lo_strict = value, row.strict
    if lo is None or hi is None:
        return True
    return lo < hi or (lo == hi and not lo_strict and not hi_strict)


class TestCase(unittest.TestCase):
    """ Test polyhedra and parametric synthesis. """

    def test_emptiness(self):
        self.assertTrue(_poly(('x',), (), ('x', LE, (), 1),
                              ('x', GE, (), 2)).is_empty)
        self.assertTrue(poly_is_empty(_poly(('x',), (), ('x', LT, (), 1),
                                            ('x', GE, (), 1))))
        self.assertFalse(_poly(('x',), (), ('x', LE, (), 1),
                               ('x', GE, (), 1)).is_empty)
        self.assertTrue(Polyhedron(('x',), (), [
            LinearConstraint((Fraction(0),), Fraction(-1))]).infeasible)

    def test_elapse(self):
        poly = _poly(('x', 'y'), (), ('x', LE, (), 0), ('x', GE, (), 0),
                     ('y', LE, (), 1), ('y', GE, (), 1))
        later = poly_elapse(poly)
        self.assertEqual(later.variables, ('x', 'y'))
        self.assertTrue(later.holds({'x': 2, 'y': 3}))
        self.assertTrue(later.holds({'x': 0, 'y': 1}))
        self.assertFalse(later.holds({'x': 2, 'y': 2}))
        self.assertFalse(later.holds({'x': -1, 'y': 0}))

        start = Polyhedron.initial(('x', 'y'), ())
        diagonal = poly_elapse(start)
        self.assertTrue(diagonal.holds({'x': Fraction(7, 2),
                                        'y': Fraction(7, 2)}))
        self.assertFalse(diagonal.holds({'x': 1, 'y': 2}))

    def test_reset(self):
        poly = poly_elapse(_poly(('x', 'y'), (), ('x', LE, (), 0),
                                 ('x', GE, (), 0), ('y', LE, (), 1),
                                 ('y', GE, (), 1)))
        after = poly_reset(poly, {'x'})
        self.assertTrue(after.holds({'x': 0, 'y': 5}))
        self.assertFalse(after.holds({'x': 1, 'y': 5}))
        self.assertFalse(after.holds({'x': 0, 'y': Fraction(1, 2)}))
        self.assertIs(poly_reset(poly, ()), poly)

    def test_project(self):
        poly = _poly(('x',), ('p',), ('x', LE, (('p', 1),), 0),
                     ('x', GE, (), 2))
        projected = poly_project_params(poly)
        self.assertEqual(projected.variables, ('p',))
        self.assertEqual(str(projected), 'p >= 2')
        self.assertTrue(projected.holds({'p': 2}))
        self.assertFalse(projected.holds({'p': Fraction(3, 2)}))

    def test_includes(self):
        inner = _poly(('x',), (), ('x', GE, (), 1), ('x', LE, (), 2))
        outer = _poly(('x',), (), ('x', LE, (), 3))
        self.assertTrue(poly_includes(outer, inner))
        self.assertFalse(poly_includes(inner, outer))
        self.assertFalse(poly_includes(_poly(('x',), (), ('x', LT, (), 2)),
                                       inner))
        half_open = _poly(('x',), (), ('x', GE, (), 1), ('x', LT, (), 2))
        self.assertTrue(poly_includes(_poly(('x',), (), ('x', LE, (), 2)),
                                      half_open))
        empty = _poly(('x',), (), ('x', LE, (), 1), ('x', GE, (), 2))
        self.assertTrue(poly_includes(inner, empty))

    def test_elimination_samples(self):
        rng = numpy.random.RandomState(5)
        grid = [Fraction(k, 2) - 3 for k in range(13)]
        for _ in range(50):
            rows = []
            for _ in range(1 + rng.randint(4)):
                coeffs = (Fraction(int(rng.randint(-2, 3))),
                          Fraction(int(rng.randint(-2, 3))))
                rows.append(LinearConstraint(
                    coeffs, Fraction(int(rng.randint(-3, 4))),
                    bool(rng.randint(2))))
            poly = Polyhedron(('x', 'y'), (), rows)
            shadow = poly.eliminated('y')
            hit = False
            for x in grid:
                for y in grid:
                    if poly.holds({'x': x, 'y': y}):
                        hit = True
                        self.assertTrue(shadow.holds({'x': x, 'y': 0}))
            if hit:
                self.assertFalse(poly.is_empty)

    def test_elimination_witness(self):
        # every point of the shadow lifts back to a point of the polyhedron
        rng = numpy.random.RandomState(6)
        grid = [Fraction(k, 4) - 3 for k in range(25)]
        for _ in range(60):
            poly = _random_poly(rng, ('x', 'y'), 2)
            shadow = poly.eliminated('y')
            for x in grid:
                if shadow.holds({'x': x, 'y': 0}):
                    self.assertTrue(_lifts(poly.constraints, x),
                                    (str(poly), x))

    def test_elimination_sequence(self):
        rng = numpy.random.RandomState(8)
        for _ in range(40):
            poly = _random_poly(rng, ('x', 'y', 'z'), 6)
            together = poly.eliminated('y', 'z')
            stepwise = poly.eliminated('y').eliminated('z')
            self.assertTrue(poly_includes(together, stepwise), str(poly))
            self.assertTrue(poly_includes(stepwise, together), str(poly))
            self.assertTrue(len(together.constraints) <=
                            len(stepwise.constraints))

    def test_elapse_and_meet_laws(self):
        rng = numpy.random.RandomState(12)
        for _ in range(40):
            poly = _random_poly(rng, ('x', 'y'), 3)
            other = _random_poly(rng, ('x', 'y'), 2)
            later = poly_elapse(poly)
            again = poly_elapse(later)
            self.assertTrue(poly_includes(later, again), str(poly))
            self.assertTrue(poly_includes(again, later), str(poly))
            self.assertTrue(poly_includes(later, poly), str(poly))
            both = poly_meet(poly, other)
            self.assertTrue(poly_includes(poly, both))
            self.assertTrue(poly_includes(other, both))

    def test_minimized(self):
        poly = _poly(('x', 'y'), (), ('x', LE, (), 1), ('x', GE, (), 0),
                     ('y', LE, (), 1), ('y', GE, (), 0))
        # x + y <= 3 is implied by the box
        extra = poly_meet(poly, Polyhedron(('x', 'y'), (), [
            LinearConstraint((Fraction(1), Fraction(1)), Fraction(3))]))
        self.assertEqual(len(extra.constraints), 5)
        self.assertEqual(str(extra.minimized()), str(poly))
        self.assertEqual(str(poly), 'x <= 1 && x >= 0 && y <= 1 && y >= 0')

    def test_self_compose(self):
        product, target = self_compose(load('fig2.ta'))
        self.assertEqual(target, 'end@1|end')
        self.assertTrue(target in product.locations)
        self.assertIsNone(product.private)
        self.assertEqual(product.clocks, ('x_1', 'x_2', 'z'))
        self.assertEqual(product.params, ('p1', 'p2'))
        self.assertTrue('finish' in product.actions)
        self.assertEqual(product.init, 'l0@0|l0')
        # the second copy never enters the private location
        self.assertFalse(any(loc.endswith('|l2') for loc in product.locations))

    def test_fig2_synthesis(self):
        model = load('fig2.ta')
        constraint, complete = synth_exists_opaque(model)
        self.assertTrue(complete)
        self.assertEqual([sorted(texts) for texts in constraint.to_json()],
                         [['p1 <= 3', 'p1 <= p2']])
        unpruned, complete = synth_exists_opaque(model, pruning=False)
        self.assertTrue(complete)
        for p1 in half_grid(4):
            for p2 in half_grid(4):
                valuation = {'p1': p1, 'p2': p2}
                expected = decide_exists(apply_valuation(model,
                                                         valuation)).answer
                self.assertEqual(constraint.contains(valuation), expected,
                                 str(valuation))
                self.assertEqual(unpruned.contains(valuation), expected)

    def test_depth_limit(self):
        constraint, complete = synth_exists_opaque(load('fig2.ta'),
                                                   depth_limit=0)
        self.assertFalse(complete)
        self.assertTrue(constraint.is_empty())
        self.assertEqual(str(constraint), 'false')

    def test_budget(self):
        try:
            synth_exists_opaque(load('fig2.ta'), budget=2)
        except BudgetExceeded as err:
            constraint, complete = err.partial
            self.assertFalse(complete)
            self.assertTrue(constraint.is_empty())
        else:
            self.fail('expected BudgetExceeded')

    def test_unreachable_target(self):
        model = load('fig1.ta')
        constraint, complete = synth_reach(model, 'nowhere')
        self.assertTrue(complete)
        self.assertTrue(constraint.is_empty())

    def test_lu(self):
        model = load('fig2.ta')
        plain = extremal_model(model)
        self.assertEqual(plain.params, ())
        self.assertEqual([str(e.guard) for e in plain.edges],
                         ['x >= 0', 'true', 'true'])
        self.assertTrue(lu_exists_nonempty(model))

        hidden = parse_model('clocks: x; params: p;\n'
                             'init: l0; private: l2; final: l1;\n'
                             'loc l0; loc l1; loc l2;\n'
                             'edge l0 -> l2 when x >= p sync a;\n'
                             'edge l2 -> l1 sync b;\n')
        self.assertFalse(lu_exists_nonempty(hidden))

        both = parse_model('clocks: x; params: p;\n'
                           'init: l0; private: l2; final: l1;\n'
                           'loc l0; loc l1; loc l2;\n'
                           'edge l0 -> l2 when x >= p sync a;\n'
                           'edge l2 -> l1 when x <= p sync b;\n')
        self.assertRaises(UsageError, lu_exists_nonempty, both)

    def test_param_constraint(self):
        params = ('p1', 'p2')
        constraint = ParamConstraint.from_json(params,
                                               [['p1 <= p2', 'p1 <= 3']])
        self.assertTrue(constraint.contains({'p1': 1, 'p2': 2}))
        self.assertFalse(constraint.contains({'p1': 2, 'p2': 1}))
        self.assertFalse(constraint.contains({'p1': -1, 'p2': 1}))
        again = ParamConstraint.from_json(params, constraint.to_json())
        self.assertEqual([sorted(t) for t in again.to_json()],
                         [['p1 <= 3', 'p1 <= p2']])

        split = ParamConstraint.from_json(('p',), [['p <= 1'], ['p >= 3']])
        self.assertEqual(str(split), '(p <= 1) || (p >= 3)')
        self.assertEqual(str(ParamConstraint.from_json(('p',), [[]])), 'true')
        self.assertRaises(ValueError, ParamConstraint.from_json, ('p',),
                          [['q <= 1']])

        # a covered disjunct is dropped
        wide = ParamConstraint.from_json(('p',), [['p <= 1'], ['p <= 2']])
        self.assertEqual(wide.to_json(), [['p <= 2']])


if __name__ == '__main__':
    unittest.main()
