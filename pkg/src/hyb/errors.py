"""Error types shared by the whole toolchain.

Compile-time problems exit with status 2, runtime problems with status 3;
the CLI maps the exception class to the exit code.
"""


class HybError(Exception):
    """Base class for all diagnosable errors."""

    exit_code = 1


class CompileError(HybError):
    """Lexing, parsing, or semantic-check failure.

    Rendered as ``file:line:col: message`` when a location is known.
    """

    exit_code = 2

    def __init__(self, message, line=None, col=None, filename=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename

    def __str__(self):
        parts = []
        if self.filename:
            parts.append(self.filename)
        if self.line is not None:
            parts.append(str(self.line))
            parts.append(str(self.col if self.col is not None else 0))
        if parts:
            return "%s: %s" % (":".join(parts), self.message)
        return self.message


class HybRuntimeError(HybError):
    """Any error raised while a program is executing.

    Carries an optional demand backtrace (innermost last) describing the
    chain of stream demands that led into the failure.
    """

    exit_code = 3

    def __init__(self, message, demand_trace=()):
        super().__init__(message)
        self.message = message
        self.demand_trace = tuple(demand_trace)

    def __str__(self):
        if not self.demand_trace:
            return self.message
        chain = " -> ".join(self.demand_trace)
        return "%s\n  demanded via: %s" % (self.message, chain)


class DemandCycleError(HybRuntimeError):
    """A stream demanded itself at the same point (black hole)."""


class TypeBridgeError(HybRuntimeError):
    """A value could not cross the host/stream type boundary."""
