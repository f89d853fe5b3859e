"""
Command line front end::

    opaq check --problem full --param p1=0 --param p2=3 fig2.ta
    opaq durations --delta 1 --param p1=1 --param p2=2.5 fig2.ta
    opaq synth-exists --depth 50 fig2.ta

Exit status is 0 when the analysis ran (the verdict is in the output), 1 for
usage and model errors, 2 when a budget or depth limit cut the analysis
short; partial results are then printed marked ``UNDER-APPROXIMATION``.
"""

import argparse
import logging
import sys

from et_opacity import __version__
from et_opacity.config import read_settings
from et_opacity.errors import (BudgetExceeded, ModelError, OpacityError,
                               UsageError)
from et_opacity.model import (apply_valuation, classify_lu, parse_delta,
                              parse_rational, rescale_to_integers)
from et_opacity.opacity import (FULL, EXISTS, WEAK, compute_opaque_times,
                                decide, duration_report, sweep_delta)
from et_opacity.oracle import (check_samples, crosscheck,
                               digitized_durations, random_runs)
from et_opacity.parser import read_model
from et_opacity.polyparam import lu_exists_nonempty, synth_exists_opaque
from et_opacity.render import (CrosscheckResult, LUExists, OpaqueTimes,
                               SweepResult, SynthesisResult,
                               UNDER_APPROXIMATION, render)
from et_opacity.tickgraph import build_observer, dump_graph, explore

ERROR_PREFIX = 'ERROR: '

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2

_LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s'
_LOG_DATEFMT = '%b %d %H:%M:%S'

_COMMANDS = {}


class _ArgumentParser(argparse.ArgumentParser):
    """ Report bad arguments as :class:`UsageError` instead of exiting. """

    def error(self, message):
        raise UsageError('%s\n%s' % (message, self.format_usage().rstrip()))


def _binding(text):
    name, sep, value = text.partition('=')
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError('expected name=value, got %r'
                                         % text)
    try:
        return name.strip(), parse_rational(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _rational(text):
    try:
        value = parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if value < 0:
        raise argparse.ArgumentTypeError('%s must be >= 0' % text)
    return value


def _delta(text):
    try:
        return parse_delta(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


class _Context(object):
    """ State shared by one command invocation. """

    def __init__(self, options, settings, out):
        self.options = options
        self.settings = settings
        self.out = out
        self.fmt = options.format or settings.format
        self.budget = settings.state_budget or None
        self.partial = False

    def emit(self, result):
        self.out.write(render(result, self.fmt))

    def emit_partial(self, result):
        """ Render what a command computed before its budget ran out. """
        self.emit(result)
        self.partial = True

    def model(self):
        return read_model(self.options.model)

    def bound_model(self):
        """ Model with every parameter replaced by its ``--param`` value. """
        model = self.model()
        bindings = dict(self.options.param or ())
        if not model.params:
            if bindings:
                raise UsageError('model has no parameters, got %s'
                                 % ', '.join(sorted(bindings)))
            return model
        unbound = [p for p in model.params if p not in bindings]
        if unbound:
            raise UsageError('unbound parameter(s): %s (use --param name=Q)'
                             % ', '.join(unbound))
        try:
            return apply_valuation(model, bindings)
        except ValueError as exc:
            raise UsageError(str(exc))


def _check(ctx):
    options = ctx.options
    problem = options.problem
    if options.delta is not None:
        problem += '_exp'
    report = duration_report(ctx.bound_model(), options.delta, ctx.budget)
    ctx.emit(decide(report, problem))
    return EXIT_OK


def _durations(ctx):
    model = ctx.bound_model()
    if ctx.options.dump_graph:
        scaled, delta, _ = rescale_to_integers(model, ctx.options.delta)
        nfa = explore(build_observer(scaled, delta), ctx.budget)
        with open(ctx.options.dump_graph, 'w') as out:
            dump_graph(nfa, out)
    ctx.emit(duration_report(model, ctx.options.delta, ctx.budget))
    return EXIT_OK


def _opaque_times(ctx):
    durations = compute_opaque_times(ctx.bound_model(), ctx.options.delta,
                                     ctx.budget)
    ctx.emit(OpaqueTimes(durations, ctx.options.delta))
    return EXIT_OK


def _synth_exists(ctx):
    depth = ctx.options.depth
    if depth is None:
        depth = ctx.settings.depth_limit
    try:
        constraint, complete = synth_exists_opaque(ctx.model(), depth,
                                                   budget=ctx.budget)
    except BudgetExceeded as exc:
        constraint, complete = exc.partial
        ctx.emit_partial(SynthesisResult(constraint, complete, depth))
        raise
    ctx.emit(SynthesisResult(constraint, complete, depth))
    return EXIT_OK if complete else EXIT_BUDGET


def _lu_classify(ctx):
    ctx.emit(classify_lu(ctx.model()))
    return EXIT_OK


def _lu_exists(ctx):
    ctx.emit(LUExists(lu_exists_nonempty(ctx.model(), ctx.budget)))
    return EXIT_OK


def _sweep_delta(ctx):
    options = ctx.options
    if options.step <= 0:
        raise UsageError('--step must be positive')
    samples = sweep_delta(ctx.bound_model(), options.max, options.step,
                          options.mode, ctx.budget,
                          warn=ctx.settings.sweep_warning)
    ctx.emit(SweepResult(options.mode, samples))
    return EXIT_OK


def _granularity(ctx, model):
    if ctx.options.granularity is not None:
        if ctx.options.granularity <= 0:
            raise UsageError('--granularity must be positive')
        return ctx.options.granularity
    return 2 * rescale_to_integers(model, ctx.options.delta)[2]


def _max_steps(ctx):
    if ctx.options.max_steps is not None:
        return ctx.options.max_steps
    return ctx.settings.max_steps


def _oracle(ctx):
    model = ctx.bound_model()
    try:
        report = digitized_durations(model, _granularity(ctx, model),
                                     ctx.options.horizon, _max_steps(ctx),
                                     ctx.options.delta, ctx.budget)
    except BudgetExceeded as exc:
        ctx.emit_partial(exc.partial)
        raise
    ctx.emit(report)
    return EXIT_OK


def _crosscheck(ctx):
    options = ctx.options
    model = ctx.bound_model()
    sets = duration_report(model, options.delta, ctx.budget)
    report = digitized_durations(model, _granularity(ctx, model),
                                 options.horizon, _max_steps(ctx),
                                 options.delta, ctx.budget)
    found = crosscheck(report, sets)
    seed = options.seed if options.seed is not None else ctx.settings.seed
    samples = random_runs(model, options.runs, seed, delta=options.delta)
    found.extend(check_samples(samples, sets))
    exact = report.exact and report.granularity % (2 * sets.scale) == 0
    ctx.emit(CrosscheckResult(found, exact, len(samples)))
    return EXIT_OK


def _register():
    _COMMANDS['check'] = _check
    _COMMANDS['durations'] = _durations
    _COMMANDS['opaque-times'] = _opaque_times
    _COMMANDS['synth-exists'] = _synth_exists
    _COMMANDS['lu-classify'] = _lu_classify
    _COMMANDS['lu-exists'] = _lu_exists
    _COMMANDS['sweep-delta'] = _sweep_delta
    _COMMANDS['oracle'] = _oracle
    _COMMANDS['crosscheck'] = _crosscheck

_register()


def build_parser():
    """ Return the argument parser for all commands. """
    common = _ArgumentParser(add_help=False)
    common.add_argument('--format', choices=('text', 'json'), default=None,
                        help='output format (default from configuration)')
    common.add_argument('--config', default=None,
                        help='configuration file with an [opaq] section')
    common.add_argument('-d', '--debug', action='store_true',
                        help='Set logging level to DEBUG')

    parser = _ArgumentParser(prog='opaq', description='Execution-time '
                             'opacity analysis of timed automata.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command', metavar='command',
                                     parser_class=_ArgumentParser)
    commands.required = True

    def command(name, text, delta=True, params=True):
        sub = commands.add_parser(name, parents=[common], help=text,
                                  description=text)
        sub.add_argument('model', help='model file')
        if params:
            sub.add_argument('--param', type=_binding, action='append',
                             metavar='NAME=Q',
                             help='parameter value (repeatable)')
        if delta:
            sub.add_argument('--delta', type=_delta, default=None,
                             help='expiration date (rational or inf)')
        return sub

    sub = command('check', 'decide an opacity problem')
    sub.add_argument('--problem', choices=(EXISTS, WEAK, FULL),
                     required=True)
    sub = command('durations', 'print the exact duration sets')
    sub.add_argument('--dump-graph', default=None, metavar='PATH',
                     help='write the explored region graph to PATH')
    command('opaque-times', 'durations for which the model is opaque')
    sub = command('synth-exists', 'parameter valuations for existential '
                  'opacity', delta=False, params=False)
    sub.add_argument('--depth', type=int, default=None,
                     help='depth limit (default from configuration)')
    command('lu-classify', 'classify parameters as lower/upper bounds',
            delta=False, params=False)
    command('lu-exists', 'whether some valuation of an L/U model is '
            'existentially opaque', delta=False, params=False)
    sub = command('sweep-delta', 'sample expiring opacity over expiration '
                  'dates', delta=False)
    sub.add_argument('--max', type=_rational, required=True)
    sub.add_argument('--step', type=_rational, required=True)
    sub.add_argument('--mode', choices=(EXISTS, WEAK, FULL), default=WEAK)
    for name, text in (('oracle', 'enumerate runs on a time grid'),
                       ('crosscheck', 'compare grid runs with exact sets')):
        sub = command(name, text)
        sub.add_argument('--granularity', type=int, default=None,
                         help='grid points per time unit '
                              '(default twice the model scale)')
        sub.add_argument('--horizon', type=_rational, required=True)
        sub.add_argument('--max-steps', type=int, default=None)
        if name == 'crosscheck':
            sub.add_argument('--runs', type=int, default=100,
                             help='number of random runs also checked')
            sub.add_argument('--seed', type=int, default=None)
    return parser


def _setup_logging(err, debug):
    logger = logging.getLogger('et_opacity')
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    handler = logging.StreamHandler(err)
    handler.setFormatter(logging.Formatter(_LOG_FORMAT, _LOG_DATEFMT))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if debug else logging.WARNING)
    logger.propagate = False


def dispatch(argv, out=None, err=None):
    """
    Run one command and return its exit status.

    argv: list[string]
        Arguments without the program name.

    out: file
        Destination of results, stdout by default.

    err: file
        Destination of errors and log messages, stderr by default.
    """
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        options = build_parser().parse_args(argv)
    except UsageError as exc:
        err.write('%s%s\n' % (ERROR_PREFIX, exc))
        return EXIT_USAGE
    except SystemExit as exc:
        # --help and --version
        return exc.code or EXIT_OK
    _setup_logging(err, options.debug)
    logger = logging.getLogger(__name__)
    ctx = None
    try:
        ctx = _Context(options, read_settings(options.config), out)
        return _COMMANDS[options.command](ctx)
    except BudgetExceeded as exc:
        if ctx is not None and ctx.partial:
            err.write('%s%s: %s\n'
                      % (ERROR_PREFIX, UNDER_APPROXIMATION, exc))
        else:
            err.write('%sbudget exceeded: %s\n' % (ERROR_PREFIX, exc))
        return EXIT_BUDGET
    except ModelError as exc:
        for diag in exc.diagnostics:
            err.write('%s%s: %s\n' % (ERROR_PREFIX, options.model, diag))
        return EXIT_USAGE
    except (OpacityError, ValueError) as exc:
        err.write('%s%s\n' % (ERROR_PREFIX, exc))
        return EXIT_USAGE
    except (IOError, OSError) as exc:
        logger.debug('I/O failure', exc_info=True)
        err.write('%s%s\n' % (ERROR_PREFIX, exc))
        return EXIT_USAGE


def main():  # pragma no cover
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':  # pragma no cover
    main()
