import unittest
from fractions import Fraction

import numpy

from et_opacity.durset import DurationSet, Interval
from et_opacity.errors import UsageError
from et_opacity.model import (INF, Model, apply_valuation,
                              rescale_to_integers)
from et_opacity.opacity import (EXISTS, EXISTS_EXP, FULL, FULL_EXP, WEAK,
                                WEAK_EXP, compute_opaque_times, decide,
                                decide_exists, decide_full, decide_full_exp,
                                decide_weak, decide_weak_exp,
                                duration_report, sweep_delta)
from et_opacity.test.fixtures import half_grid, load, random_model


def _interval(lo, lo_closed, hi, hi_closed):
    return DurationSet.of([Interval(Fraction(lo), lo_closed, Fraction(hi),
                                    hi_closed)])


class TestCase(unittest.TestCase):
    """ Test opacity decisions and computations. """

    def test_fig1(self):
        model = load('fig1.ta')
        report = duration_report(model)
        self.assertEqual(str(report.d_visit), '[1, 2]')
        self.assertEqual(str(report.d_avoid), '[0, 3]')
        self.assertFalse(report.expiring)
        self.assertEqual([name for name, _ in report.sets()],
                         ['visit', 'avoid'])

        exists = decide_exists(model)
        self.assertTrue(exists.answer)
        self.assertEqual(exists.witness, 1)
        self.assertTrue(decide_weak(model).answer)
        full = decide_full(model)
        self.assertFalse(full.answer)
        self.assertEqual(full.witness, 0)
        self.assertEqual(full.to_json(), {'problem': 'full', 'delta': None,
                                          'answer': False, 'witness': '0'})
        self.assertEqual(str(compute_opaque_times(model)), '[1, 2]')

    def test_fig2_valuations(self):
        self.assertTrue(decide_full(load('fig2.ta', p1=0, p2=3)).answer)
        model = load('fig2.ta', p1=1, p2=2)
        self.assertFalse(decide_full(model).answer)
        self.assertTrue(decide_weak(model).answer)

        weak = decide_weak(load('fig2.ta', p1=1, p2=4))
        self.assertFalse(weak.answer)
        self.assertEqual(weak.witness, Fraction(7, 2))
        self.assertFalse(decide_exists(load('fig2.ta', p1=4, p2=5)).answer)

    def test_unbound(self):
        self.assertRaises(UsageError, duration_report, load('fig2.ta'))

    def test_unreachable(self):
        model = Model(['l0', 'l1', 'l2'], 'l0', 'l1', 'l2', ['x'])
        report = duration_report(model, 1)
        for _, dset in report.sets():
            self.assertTrue(dset.is_empty())
        self.assertFalse(decide(report, EXISTS).answer)
        self.assertTrue(decide(report, WEAK).answer)
        self.assertTrue(decide(report, FULL).answer)
        self.assertTrue(compute_opaque_times(model).is_empty())

    def test_expiring(self):
        model = load('fig2.ta', p1=1, p2='2.5')
        report = duration_report(model, 1)
        self.assertTrue(report.expiring)
        self.assertEqual(report.scale, 2)
        self.assertTrue(report.d_avoid.equals(_interval(0, True, 3, True)))
        self.assertTrue(report.d_late.equals(
            _interval(2, False, Fraction(5, 2), True)))
        self.assertTrue(report.d_secret.equals(
            _interval(1, True, Fraction(5, 2), True)))
        self.assertEqual(sorted(report.to_json()),
                         ['avoid', 'delta', 'late', 'secret', 'visit'])

        self.assertTrue(decide(report, EXISTS_EXP).answer)
        self.assertTrue(decide_weak_exp(model, 1).answer)
        full = decide_full_exp(model, 1)
        self.assertFalse(full.answer)
        self.assertEqual(full.to_json()['delta'], '1')
        self.assertRaises(ValueError, decide, duration_report(model), WEAK_EXP)
        self.assertRaises(ValueError, decide, report, 'partial')

    def test_infinite_delta(self):
        for params in ((1, 4), (0, 3), (1, 2), (4, 5)):
            model = load('fig2.ta', p1=params[0], p2=params[1])
            report = duration_report(model, INF)
            self.assertTrue(report.d_late.is_empty())
            self.assertTrue(report.d_secret.equals(report.d_visit))
            for plain, exp in ((EXISTS, EXISTS_EXP), (WEAK, WEAK_EXP),
                               (FULL, FULL_EXP)):
                self.assertEqual(decide(report, plain).answer,
                                 decide(report, exp).answer)
                self.assertEqual(decide(report, plain).witness,
                                 decide(report, exp).witness)

    def test_full_exp_grid(self):
        # full expiring opacity of fig2 holds exactly on
        # p1 = 0 and (delta <= 3 and 3 <= p2 <= delta + 3 or p2 = 3 < delta)
        source = load('fig2.ta')
        grid = half_grid(4)
        for p1 in grid:
            for p2 in grid:
                model = apply_valuation(source, {'p1': p1, 'p2': p2})
                for delta in grid:
                    expected = p1 == 0 and (
                        (delta <= 3 and 3 <= p2 <= delta + 3) or
                        (p2 < delta and p2 == 3))
                    verdict = decide(duration_report(model, delta), FULL_EXP)
                    self.assertEqual(verdict.answer, expected,
                                     'p1=%s p2=%s delta=%s' % (p1, p2, delta))

    def test_looping(self):
        times = compute_opaque_times(load('looping.ta'))
        self.assertEqual((times.threshold, times.period), (1, 1))
        self.assertTrue(2 in times)
        self.assertTrue(1 in times)
        self.assertFalse(Fraction(5, 2) in times)
        self.assertFalse(0 in times)
        self.assertEqual(str(times), '({1}) + 1*k')

    def test_rescale_invariance(self):
        model = load('fig2.ta', p1=1, p2='2.5')
        scaled, _, scale = rescale_to_integers(model)
        self.assertEqual(scale, 2)
        small = duration_report(model)
        large = duration_report(scaled)
        self.assertTrue(large.d_visit.equals(_interval(2, True, 5, True)))
        self.assertTrue(small.d_visit.equals(
            _interval(1, True, Fraction(5, 2), True)))
        for problem in (EXISTS, WEAK, FULL):
            self.assertEqual(decide(small, problem).answer,
                             decide(large, problem).answer)

    def test_random_implications(self):
        rng = numpy.random.RandomState(3)
        for _ in range(60):
            model = random_model(rng)
            report = duration_report(model, 1)
            visit, avoid = report.d_visit, report.d_avoid
            self.assertTrue(report.d_secret.union(report.d_late)
                            .equals(visit))
            full, weak = decide(report, FULL), decide(report, WEAK)
            exists = decide(report, EXISTS)
            if full.answer:
                self.assertTrue(weak.answer)
            if weak.answer and not visit.is_empty():
                self.assertTrue(exists.answer)
            if exists.answer:
                self.assertTrue(exists.witness in visit and
                                exists.witness in avoid)
            if not weak.answer:
                self.assertTrue(weak.witness in visit and
                                weak.witness not in avoid)
            public = report.d_late.union(avoid)
            full_exp = decide(report, FULL_EXP)
            if full_exp.answer:
                self.assertTrue(decide(report, WEAK_EXP).answer)
                if not public.is_empty():
                    self.assertTrue(decide(report, EXISTS_EXP).answer)
            if weak.answer:
                # a private duration hidden by public runs stays hidden
                # when some of its private runs expire
                self.assertTrue(decide(report, WEAK_EXP).answer)

    def test_sweep(self):
        model = load('fig2.ta', p1=1, p2='2.5')
        with self.assertLogs('et_opacity.opacity', 'WARNING'):
            samples = sweep_delta(model, 3, Fraction(1, 2))
        self.assertEqual([d for d, _ in samples],
                         [Fraction(k, 2) for k in range(7)] + [INF])
        self.assertTrue(all(answer for _, answer in samples))

        with self.assertLogs('et_opacity.opacity', 'WARNING'):
            samples = sweep_delta(model, 0, 1, FULL)
        self.assertEqual(samples, [(0, False), (INF, False)])
        self.assertRaises(ValueError, sweep_delta, model, 3, 0)
        self.assertRaises(ValueError, sweep_delta, model, 3, 1, 'partial')


if __name__ == '__main__':
    unittest.main()
