"""
Exception types shared by the analysis modules and the command line.
"""


class OpacityError(Exception):
    """ Base class for errors raised by this package. """


class Diagnostic(object):
    """
    One problem found while reading a model.

    line: int
        1-based line number (0 if not tied to a position).

    column: int
        1-based column number (0 if not tied to a position).

    message: string
        Description of the problem.
    """

    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        self.message = message

    def __eq__(self, other):
        return isinstance(other, Diagnostic) and \
            (self.line, self.column, self.message) == \
            (other.line, other.column, other.message)

    def __repr__(self):
        return 'Diagnostic(%d, %d, %r)' % (self.line, self.column, self.message)

    def __str__(self):
        if self.line:
            return '%d:%d: %s' % (self.line, self.column, self.message)
        return self.message


class ModelError(OpacityError, ValueError):
    """
    Raised when a model can't be parsed or fails validation.

    diagnostics: list[:class:`Diagnostic`]
        Everything that was found wrong, in source order.
    """

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [Diagnostic(0, 0, diagnostics)]
        self.diagnostics = list(diagnostics)
        super(ModelError, self).__init__(
            '\n'.join(str(diag) for diag in self.diagnostics))


class UsageError(OpacityError, ValueError):
    """ Raised for invalid invocations (bad flags, unbound parameters). """


class BudgetExceeded(OpacityError, RuntimeError):
    """
    Raised when an exploration exceeds its state budget.

    partial: object
        Whatever was computed before the budget ran out, or None.
    """

    def __init__(self, message, partial=None):
        super(BudgetExceeded, self).__init__(message)
        self.partial = partial
