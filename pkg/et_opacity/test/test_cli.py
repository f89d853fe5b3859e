import io
import json
import os
import shutil
import tempfile
import unittest

from et_opacity.cli import (ERROR_PREFIX, EXIT_BUDGET, EXIT_OK, EXIT_USAGE,
                            dispatch)
from et_opacity.render import SWEEP_NOTE, UNDER_APPROXIMATION
from et_opacity.test.fixtures import fixture_path

FIG1 = fixture_path('fig1.ta')
FIG2 = fixture_path('fig2.ta')
KEEPDIRS = os.environ.get('OPAQ_KEEPDIRS', False)


class TestCase(unittest.TestCase):
    """ Test the opaq command line. """

    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix=self.id().split('.')[-1]+'_')

    def tearDown(self):
        if not KEEPDIRS:
            shutil.rmtree(self.tempdir, ignore_errors=True)

    def run_opaq(self, *argv):
        out = io.StringIO()
        err = io.StringIO()
        status = dispatch(list(argv), out, err)
        return status, out.getvalue(), err.getvalue()

    def test_check(self):
        status, out, err = self.run_opaq('check', '--problem', 'full',
                                         '--param', 'p1=0', '--param', 'p2=3',
                                         '--format', 'json', FIG2)
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(json.loads(out), {'problem': 'full', 'delta': None,
                                           'answer': True, 'witness': None})
        self.assertTrue('"answer":true' in out)

        status, out, err = self.run_opaq('check', '--problem', 'full', FIG1)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(out, 'full: false, witness 0\n')

    def test_check_expiring(self):
        status, out, err = self.run_opaq('check', '--problem', 'weak',
                                         '--delta', '1', '--param', 'p1=1',
                                         '--param', 'p2=2.5', '--format',
                                         'json', FIG2)
        self.assertEqual(status, EXIT_OK, err)
        data = json.loads(out)
        self.assertEqual((data['problem'], data['delta'], data['answer']),
                         ('weak_exp', '1', True))

    def test_unbound(self):
        status, out, err = self.run_opaq('check', '--problem', 'weak', FIG2)
        self.assertEqual(status, EXIT_USAGE)
        self.assertEqual(out, '')
        self.assertTrue(err.startswith(ERROR_PREFIX +
                                       'unbound parameter(s): p1, p2'))
        status, out, err = self.run_opaq('check', '--problem', 'weak',
                                         '--param', 'p1=1', FIG1)
        self.assertEqual(status, EXIT_USAGE)

    def test_durations(self):
        graph = os.path.join(self.tempdir, 'graph.txt')
        status, out, err = self.run_opaq('durations', '--dump-graph', graph,
                                         FIG1)
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(out.splitlines(), ['DVisit_priv = [1, 2]',
                                            'DAvoid_priv = [0, 3]'])
        with open(graph) as inp:
            self.assertTrue('accepting' in inp.read())

        status, out, err = self.run_opaq('durations', '--delta', '1',
                                         '--param', 'p1=1', '--param',
                                         'p2=2.5', FIG2)
        self.assertEqual(status, EXIT_OK, err)
        self.assertTrue('DLate_priv = (2, 2.5]' in out.splitlines())
        self.assertTrue('DSecret_priv = [1, 2.5]' in out.splitlines())
        self.assertTrue('delta = 1' in out.splitlines())

    def test_opaque_times(self):
        status, out, err = self.run_opaq('opaque-times',
                                         fixture_path('looping.ta'))
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(out, 'opaque durations = ({1}) + 1*k\n')

    def test_synth_exists(self):
        status, out, err = self.run_opaq('synth-exists', '--format', 'json',
                                         FIG2)
        self.assertEqual(status, EXIT_OK, err)
        data = json.loads(out)
        self.assertTrue(data['complete'])
        self.assertEqual([sorted(d) for d in data['constraint']],
                         [['p1 <= 3', 'p1 <= p2']])

        status, out, err = self.run_opaq('synth-exists', '--depth', '0', FIG2)
        self.assertEqual(status, EXIT_BUDGET)
        lines = out.splitlines()
        self.assertEqual(lines[0], 'false')
        self.assertTrue(lines[1].startswith(UNDER_APPROXIMATION))

    def test_lu(self):
        status, out, err = self.run_opaq('lu-classify', '--format', 'json',
                                         FIG2)
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(json.loads(out), {'lu': True,
                                           'roles': {'p1': 'lower',
                                                     'p2': 'upper'}})
        status, out, err = self.run_opaq('lu-exists', FIG2)
        self.assertEqual(out, 'lu-exists: true\n')

    def test_sweep(self):
        status, out, err = self.run_opaq('sweep-delta', '--max', '1',
                                         '--step', '1', '--param', 'p1=1',
                                         '--param', 'p2=2.5', FIG2)
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(out.splitlines(), ['delta 0: true', 'delta 1: true',
                                            'delta inf: true', SWEEP_NOTE])
        self.assertTrue('WARNING' in err)

        quiet = os.path.join(self.tempdir, 'quiet.cfg')
        with open(quiet, 'w') as cfg:
            cfg.write('[opaq]\nsweep_warning: false\n')
        status, out, err = self.run_opaq('sweep-delta', '--max', '1',
                                         '--step', '1', '--config', quiet,
                                         '--param', 'p1=1', '--param',
                                         'p2=2.5', FIG2)
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(out.splitlines()[-1], SWEEP_NOTE)
        self.assertFalse('WARNING' in err)

        status, out, err = self.run_opaq('sweep-delta', '--max', '1',
                                         '--step', '0', '--param', 'p1=1',
                                         '--param', 'p2=2.5', FIG2)
        self.assertEqual(status, EXIT_USAGE)

    def test_oracle(self):
        status, out, err = self.run_opaq('oracle', '--horizon', '4', FIG1)
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(out.splitlines()[0], 'visit: {1, 1.5, 2}')

        status, out, err = self.run_opaq('crosscheck', '--horizon', '4',
                                         '--runs', '10', FIG1)
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(out, 'no disagreements (exact)\n')

        status, out, err = self.run_opaq('crosscheck', '--horizon', '4',
                                         '--runs', '5', '--format', 'json',
                                         fixture_path('strict.ta'))
        data = json.loads(out)
        self.assertEqual(data['disagreements'], [])
        self.assertFalse(data['exact'])

    def test_repeatable(self):
        args = ('crosscheck', '--horizon', '3', '--runs', '25', '--seed', '3',
                '--format', 'json', FIG1)
        first = self.run_opaq(*args)
        self.assertEqual(first[0], EXIT_OK, first[2])
        self.assertEqual(self.run_opaq(*args)[1], first[1])
        args = ('synth-exists', '--format', 'json', FIG2)
        self.assertEqual(self.run_opaq(*args)[1], self.run_opaq(*args)[1])

    def test_budget(self):
        small = os.path.join(self.tempdir, 'small.cfg')
        with open(small, 'w') as cfg:
            cfg.write('[opaq]\nstate_budget: 3\n')
        for command in ('check', 'durations'):
            argv = [command, '--config', small, FIG1]
            if command == 'check':
                argv[1:1] = ['--problem', 'exists']
            status, out, err = self.run_opaq(*argv)
            self.assertEqual(status, EXIT_BUDGET)
            self.assertEqual(out, '')
            self.assertTrue(err.startswith(ERROR_PREFIX + 'budget exceeded'))
            self.assertFalse(UNDER_APPROXIMATION in err)

        status, out, err = self.run_opaq('oracle', '--horizon', '4',
                                         '--config', small, FIG1)
        self.assertEqual(status, EXIT_BUDGET)
        self.assertTrue(out.startswith('visit: {'))
        self.assertTrue(err.startswith(ERROR_PREFIX + UNDER_APPROXIMATION))

    def test_param_rejected(self):
        for command in ('synth-exists', 'lu-classify', 'lu-exists'):
            status, out, err = self.run_opaq(command, '--param', 'p1=1', FIG2)
            self.assertEqual(status, EXIT_USAGE)
            self.assertEqual(out, '')
            self.assertTrue(err.startswith(ERROR_PREFIX))

    def test_config(self):
        status, out, err = self.run_opaq('lu-exists', '--config',
                                         fixture_path('opaq.cfg'), FIG2)
        self.assertEqual(status, EXIT_OK, err)
        self.assertEqual(out, '{"nonempty":true}\n')

        status, out, err = self.run_opaq('lu-exists', '--config',
                                         fixture_path('missing.cfg'), FIG2)
        self.assertEqual(status, EXIT_USAGE)

    def test_bad_input(self):
        status, out, err = self.run_opaq('check', '--problem', 'strong', FIG1)
        self.assertEqual(status, EXIT_USAGE)
        self.assertTrue(err.startswith(ERROR_PREFIX))

        status, out, err = self.run_opaq('frobnicate', FIG1)
        self.assertEqual(status, EXIT_USAGE)

        status, out, err = self.run_opaq('check', '--problem', 'weak',
                                         '--param', 'p1', FIG2)
        self.assertEqual(status, EXIT_USAGE)

        bad = os.path.join(self.tempdir, 'bad.ta')
        with open(bad, 'w') as out:
            out.write('clocks: x;\nloc a inv y <= 1;\n')
        status, out, err = self.run_opaq('durations', bad)
        self.assertEqual(status, EXIT_USAGE)
        self.assertTrue(ERROR_PREFIX + bad + ': 2:' in err)

        status, out, err = self.run_opaq('durations',
                                         os.path.join(self.tempdir, 'none'))
        self.assertEqual(status, EXIT_USAGE)
        self.assertTrue(err.startswith(ERROR_PREFIX))


if __name__ == '__main__':
    unittest.main()
