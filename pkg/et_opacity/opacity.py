"""
Execution-time opacity of parameter-free models.

Every question reduces to the duration sets of one explored observer: the
durations of runs reaching the final location after visiting the private
location, those of runs avoiding it, and in expiring mode the split of the
private runs by whether the last private entry lies within the expiration
date of the end.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

from et_opacity.durset import from_annotations
from et_opacity.errors import UsageError
from et_opacity.model import INF, format_rational, rescale_to_integers
from et_opacity.tickgraph import RunClass, build_observer, explore

EXISTS = 'exists'
WEAK = 'weak'
FULL = 'full'
EXISTS_EXP = 'exists_exp'
WEAK_EXP = 'weak_exp'
FULL_EXP = 'full_exp'
PROBLEMS = (EXISTS, WEAK, FULL, EXISTS_EXP, WEAK_EXP, FULL_EXP)

_logger = logging.getLogger(__name__)


@dataclass
class DurationReport(object):
    """
    Duration sets of one model. `d_secret` and `d_late` are set iff `delta`
    is (expiring mode).
    """

    d_visit: object
    d_avoid: object
    d_secret: object = None
    d_late: object = None
    delta: object = None
    scale: int = 1
    states: int = 0

    @property
    def expiring(self):
        return self.delta is not None

    def sets(self):
        """ Return ``(name, DurationSet)`` pairs present in this report. """
        found = [('visit', self.d_visit), ('avoid', self.d_avoid)]
        if self.expiring:
            found.extend([('secret', self.d_secret), ('late', self.d_late)])
        return found

    def to_json(self):
        data = dict((name, dset.to_json()) for name, dset in self.sets())
        data['delta'] = None if self.delta is None \
            else format_rational(self.delta)
        return data


@dataclass
class Verdict(object):
    """
    Answer to one decision problem. `witness`, when set, is a duration of the
    set that justifies the answer: the intersection for the existential
    problems, the separating set when weak or full opacity fails.
    """

    problem: str
    answer: bool
    witness: object = None
    delta: object = None

    def to_json(self):
        return {'problem': self.problem,
                'delta': None if self.delta is None
                else format_rational(self.delta),
                'answer': self.answer,
                'witness': None if self.witness is None
                else format_rational(self.witness)}


def duration_report(model, delta=None, budget=None):
    """
    Compute the exact duration sets of `model`.

    model: :class:`Model`
        Parameter-free model.

    delta: Fraction or INF or None
        Expiration date; None for the plain sets only.

    budget: int
        Maximum number of explored symbolic states.
    """
    if model.params:
        raise UsageError('model has unbound parameters: %s'
                         % ', '.join(model.params))
    scaled, scaled_delta, scale = rescale_to_integers(model, delta)
    observer = build_observer(scaled, scaled_delta)
    nfa = explore(observer, budget)

    def collect(run_class):
        return from_annotations(nfa.class_counts(run_class).items(), scale)

    report = DurationReport(collect(RunClass.PRIVATE),
                            collect(RunClass.PUBLIC), scale=scale,
                            states=len(nfa.states))
    if delta is not None:
        report.delta = delta
        report.d_secret = collect(RunClass.SECRET)
        report.d_late = collect(RunClass.LATE)
    _logger.debug('durations (scale %d): visit %s, avoid %s', scale,
                  report.d_visit, report.d_avoid)
    return report


def _secret_and_public(report, expiring):
    if not expiring:
        return report.d_visit, report.d_avoid
    if not report.expiring:
        raise ValueError('report has no expiration date')
    return report.d_secret, report.d_late.union(report.d_avoid)


def decide(report, problem):
    """
    Answer `problem` (one of :data:`PROBLEMS`) from a computed report.

    report: :class:`DurationReport`
        Duration sets; expiring problems need an expiring report.

    problem: string
        Problem tag.
    """
    if problem not in PROBLEMS:
        raise ValueError('unknown problem %r' % problem)
    expiring = problem.endswith('_exp')
    secret, public = _secret_and_public(report, expiring)
    kind = problem[:-4] if expiring else problem
    if kind == EXISTS:
        common = secret.intersect(public)
        answer = not common.is_empty()
        witness = common.witness()
    elif kind == WEAK:
        leak = secret.difference(public)
        answer = leak.is_empty()
        witness = leak.witness()
    else:
        leak = secret.difference(public).union(public.difference(secret))
        answer = leak.is_empty()
        witness = leak.witness()
    return Verdict(problem, answer, witness,
                   report.delta if expiring else None)


def decide_exists(model, budget=None):
    """ Some duration is shared by private and public runs. """
    return decide(duration_report(model, budget=budget), EXISTS)


def decide_weak(model, budget=None):
    """ Every private duration is also a public one. """
    return decide(duration_report(model, budget=budget), WEAK)


def decide_full(model, budget=None):
    """ Private and public durations coincide. """
    return decide(duration_report(model, budget=budget), FULL)


def decide_exists_exp(model, delta, budget=None):
    return decide(duration_report(model, delta, budget), EXISTS_EXP)


def decide_weak_exp(model, delta, budget=None):
    return decide(duration_report(model, delta, budget), WEAK_EXP)


def decide_full_exp(model, delta, budget=None):
    return decide(duration_report(model, delta, budget), FULL_EXP)


def compute_opaque_times(model, delta=None, budget=None):
    """
    Largest set of durations for which `model` is opaque: the private
    durations that are also public. With `delta`, the secret durations that
    are also public or late.

    model: :class:`Model`
        Parameter-free model.

    delta: Fraction or INF or None
        Optional expiration date.

    budget: int
        Maximum number of explored symbolic states.
    """
    report = duration_report(model, delta, budget)
    secret, public = _secret_and_public(report, delta is not None)
    return secret.intersect(public)


def sweep_delta(model, delta_max, step, mode=WEAK, budget=None, warn=True):
    """
    Evaluate the expiring variant of `mode` at ``0, step, 2*step, ...`` up to
    `delta_max`, then at INF. The result only samples expiration dates and
    says nothing about the ones in between.

    model: :class:`Model`
        Parameter-free model.

    delta_max: Fraction
        Largest finite date sampled.

    step: Fraction
        Positive sampling step.

    mode: string
        ``exists``, ``weak`` or ``full``.

    warn: bool
        Log the non-exhaustiveness warning.
    """
    if mode not in (EXISTS, WEAK, FULL):
        raise ValueError('invalid sweep mode %r' % mode)
    step = Fraction(step)
    if step <= 0:
        raise ValueError('sweep step must be positive')
    delta_max = Fraction(delta_max)
    if delta_max < 0:
        raise ValueError('sweep maximum must be >= 0')
    problem = mode + '_exp'
    dates = []
    current = Fraction(0)
    while current <= delta_max:
        dates.append(current)
        current += step
    dates.append(INF)
    if warn:
        _logger.warning('expiration sweep samples %d dates only; it is not '
                        'an exhaustive search', len(dates))
    return [(date, decide(duration_report(model, date, budget),
                          problem).answer)
            for date in dates]
