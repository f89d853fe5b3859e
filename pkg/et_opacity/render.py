"""
Text and JSON rendering of analysis results.
"""

import json
from dataclasses import dataclass

from et_opacity.durset import DurationSet
from et_opacity.model import LUVerdict, format_rational
from et_opacity.opacity import DurationReport, Verdict
from et_opacity.oracle import SampleReport

UNDER_APPROXIMATION = 'UNDER-APPROXIMATION'
SWEEP_NOTE = 'NOTE: sampled expiration dates only, not an exhaustive search'

_SET_LABELS = {
    'visit': 'DVisit_priv',
    'avoid': 'DAvoid_priv',
    'secret': 'DSecret_priv',
    'late': 'DLate_priv',
}


@dataclass
class OpaqueTimes(object):
    durations: DurationSet
    delta: object = None


@dataclass
class SynthesisResult(object):
    constraint: object
    complete: bool
    depth_limit: object = None


@dataclass
class LUExists(object):
    answer: bool


@dataclass
class SweepResult(object):
    mode: str
    samples: list


@dataclass
class CrosscheckResult(object):
    disagreements: list
    exact: bool
    sampled: int = 0


def _bool(value):
    return 'true' if value else 'false'


def _opt(value):
    return None if value is None else format_rational(value)


def _report_text(report):
    lines = ['%s = %s' % (_SET_LABELS[name], dset)
             for name, dset in report.sets()]
    if report.expiring:
        lines.append('delta = %s' % format_rational(report.delta))
    return lines


def _verdict_text(verdict):
    head = verdict.problem
    if verdict.delta is not None:
        head += ' (delta %s)' % format_rational(verdict.delta)
    line = '%s: %s' % (head, _bool(verdict.answer))
    if verdict.witness is not None:
        line += ', witness %s' % format_rational(verdict.witness)
    return [line]


def _lu_text(verdict):
    if not verdict.is_lu:
        atom, param = verdict.witness
        return ['not L/U: parameter %s in %s' % (param, atom)]
    return ['%s: %s' % (param, verdict.roles[param].value)
            for param in sorted(verdict.roles)]


def _lu_json(verdict):
    if not verdict.is_lu:
        atom, param = verdict.witness
        return {'lu': False, 'parameter': param, 'constraint': str(atom)}
    return {'lu': True,
            'roles': dict((p, verdict.roles[p].value)
                          for p in sorted(verdict.roles))}


def _synthesis_text(result):
    lines = [str(result.constraint)]
    if not result.complete:
        lines.append('%s: depth limit %s reached, valuations may be missing'
                     % (UNDER_APPROXIMATION, result.depth_limit))
    return lines


def _synthesis_json(result):
    data = {'constraint': result.constraint.to_json(),
            'complete': result.complete}
    if not result.complete:
        data['marker'] = UNDER_APPROXIMATION
    return data


def _sweep_text(result):
    lines = ['delta %s: %s' % (format_rational(delta), _bool(answer))
             for delta, answer in result.samples]
    lines.append(SWEEP_NOTE)
    return lines


def _sweep_json(result):
    return {'mode': result.mode, 'exhaustive': False,
            'samples': [{'delta': format_rational(delta), 'answer': answer}
                        for delta, answer in result.samples]}


def _sample_text(report):
    lines = []
    for name in report.classes():
        points = ', '.join(format_rational(p) for p in report.members(name))
        lines.append('%s: {%s}' % (name, points))
    return lines


def _crosscheck_text(result):
    if not result.disagreements:
        return ['no disagreements (%s)' % ('exact' if result.exact
                                           else 'soundness only')]
    return [str(item) for item in result.disagreements]


def _crosscheck_json(result):
    return {'exact': result.exact, 'sampled': result.sampled,
            'disagreements': [{'duration': format_rational(d.duration),
                               'set': d.name, 'oracle': d.oracle,
                               'symbolic': d.symbolic}
                              for d in result.disagreements]}


# type -> (text lines, json data)
_RENDERERS = [
    (DurationReport, _report_text, lambda r: r.to_json()),
    (Verdict, _verdict_text, lambda r: r.to_json()),
    (DurationSet, lambda r: [str(r)], lambda r: r.to_json()),
    (OpaqueTimes, lambda r: ['opaque durations = %s' % r.durations],
     lambda r: {'delta': _opt(r.delta), 'durations': r.durations.to_json()}),
    (SynthesisResult, _synthesis_text, _synthesis_json),
    (LUVerdict, _lu_text, _lu_json),
    (LUExists, lambda r: ['lu-exists: %s' % _bool(r.answer)],
     lambda r: {'nonempty': r.answer}),
    (SweepResult, _sweep_text, _sweep_json),
    (SampleReport, _sample_text, lambda r: r.to_json()),
    (CrosscheckResult, _crosscheck_text, _crosscheck_json),
]


def to_json_text(data):
    return json.dumps(data, separators=(',', ':'))


def render(result, fmt='text'):
    """
    Return `result` rendered as text lines or as one JSON document.

    result: object
        Any analysis result of this package.

    fmt: string
        ``text`` or ``json``.
    """
    for cls, text, data in _RENDERERS:
        if isinstance(result, cls):
            if fmt == 'json':
                return to_json_text(data(result)) + '\n'
            return ''.join(line + '\n' for line in text(result))
    raise TypeError("can't render %r" % type(result).__name__)
