import logging
from collections import namedtuple

from normalform.commands.utils.errors import NormalFormError
from normalform.commands.utils.errors import ParseError

logger = logging.getLogger(__name__)

DEFAULT_DEG = 6
DEFAULT_H_ORDER = 2
DEFAULT_SEED = 0


def int_option(options, flag, default=None):
    raw = options.get(flag)
    if raw is None:
        return default
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ParseError('%s expects an integer, got %r' % (flag, raw))


def exit_for(error):
    """SystemExit carrying the exit code of an engine error."""
    logger.error('%s: %s', type(error).__name__, error)
    return SystemExit(error.exit_code)


class RunConfig(namedtuple('RunConfig', [
        'command', 'input', 'deg', 'h_order', 'mode', 'seed', 'out', 'verbose'])):
    """
    Options shared by every command

    deg and h_order are the cuts N and N_h of the normal forms; mode
    overrides the coefficient kind of the input system.
    """
    __slots__ = ()

    @classmethod
    def from_options(cls, command, options):
        deg = int_option(options, '--deg', DEFAULT_DEG)
        h_order = int_option(options, '--h-order', DEFAULT_H_ORDER)
        if deg < 2:
            raise ParseError('--deg must be at least 2, got %d' % deg)
        if h_order < 0:
            raise ParseError('--h-order must be non-negative, got %d' % h_order)
        return cls(
            command,
            options.get('<system>'),
            deg,
            h_order,
            options.get('--mode'),
            int_option(options, '--seed', DEFAULT_SEED),
            options.get('--out'),
            bool(options.get('--verbose')),
        )


class BaseCommand(object):
    """
    BaseCommand represents the bare minimum each command needs to implement.
    """
    command_id = 'base'

    def __init__(self, options, *args, **kwargs):
        self.options = options
        self.args = args
        self.kwargs = kwargs
        self.config = RunConfig.from_options(self.command_id, options)

    def run(self):
        raise NotImplementedError('Run not implemented')

    def execute(self):
        """Run the command; engine errors leave with their exit code."""
        logger.info('Running %s operation', self.command_id)
        try:
            self.run()
        except NormalFormError as e:
            raise exit_for(e)
        logger.info('Completed %s operation', self.command_id)
