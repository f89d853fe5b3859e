"""
Run settings, read from an optional ``.cfg`` file with an ``[opaq]``
section, for example::

    [opaq]
    state_budget: 200000
    depth_limit: 50
    format: json

Values are layered: built-in defaults, then the file, then the
``OPAQ_STATE_BUDGET`` environment variable, then command line flags.
"""

import configparser
import logging
import os

from et_opacity.errors import UsageError

SECTION = 'opaq'
BUDGET_ENV = 'OPAQ_STATE_BUDGET'

_CONFIG_DEFAULTS = {
    'state_budget': '5000000',
    'depth_limit': '200',
    'max_steps': '1000',
    'format': 'text',
    'seed': '0',
    'sweep_warning': 'true',
}

_FORMATS = ('text', 'json')


class Settings(object):
    """
    Resolved settings.

    state_budget: int
        Maximum number of stored states for exploration and the oracle.

    depth_limit: int
        Default depth limit of parametric synthesis.

    max_steps: int
        Maximum number of discrete transitions per oracle run.

    format: string
        Default output format, ``text`` or ``json``.

    seed: int
        Default seed of random sampling.

    sweep_warning: bool
        Log the sampling warning of expiration sweeps. The note in the
        sweep output is always printed.
    """

    def __init__(self, config, source=None):
        self.source = source
        try:
            self.state_budget = config.getint(SECTION, 'state_budget')
            self.depth_limit = config.getint(SECTION, 'depth_limit')
            self.max_steps = config.getint(SECTION, 'max_steps')
            self.seed = config.getint(SECTION, 'seed')
            self.sweep_warning = config.getboolean(SECTION, 'sweep_warning')
        except ValueError as exc:
            raise UsageError('bad configuration%s: %s'
                             % (' in %r' % source if source else '', exc))
        self.format = config.get(SECTION, 'format')
        if self.format not in _FORMATS:
            raise UsageError('bad configuration: format must be one of %s'
                             % ', '.join(_FORMATS))
        for name in ('state_budget', 'depth_limit', 'max_steps'):
            if getattr(self, name) < 0:
                raise UsageError('bad configuration: %s must be >= 0' % name)


def read_settings(path=None, environ=None):
    """
    Return :class:`Settings` from defaults, `path` (if given) and the
    environment.

    path: string
        Configuration file.

    environ: dict
        Environment, ``os.environ`` by default.
    """
    config = configparser.ConfigParser(_CONFIG_DEFAULTS)
    config.add_section(SECTION)
    if path is not None:
        if not config.read(path):
            raise UsageError("can't read configuration %r" % path)
        logging.getLogger(__name__).debug('read configuration %s', path)
    if environ is None:
        environ = os.environ
    budget = environ.get(BUDGET_ENV)
    if budget:
        config.set(SECTION, 'state_budget', budget.strip())
    return Settings(config, path)
