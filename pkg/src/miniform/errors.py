"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line driver can map it
to the documented process status without a lookup table.
"""


class MiniformError(Exception):
    exit_code = 3

    def __init__(self, message, *, source=None, line=None):
        super().__init__(message)
        self.message = message
        self.source = source
        self.line = line

    def located(self, source=None, line=None):
        """Fill in position information if it is still missing."""
        if self.source is None:
            self.source = source
        if self.line is None:
            self.line = line
        return self

    def __str__(self):
        where = ""
        if self.source is not None and self.line is not None:
            where = f"{self.source}:{self.line}: "
        elif self.line is not None:
            where = f"line {self.line}: "
        elif self.source is not None:
            where = f"{self.source}: "
        return where + self.message


class UsageError(MiniformError):
    exit_code = 1


class SettingsError(MiniformError):
    exit_code = 1


class CompileError(MiniformError):
    exit_code = 2


class LexError(CompileError):
    pass


class PreprocessError(CompileError):
    pass


class ExecutionError(MiniformError):
    exit_code = 3


class TermError(ExecutionError):
    pass


class RewriteError(ExecutionError):
    pass


class NonTerminationError(RewriteError):
    pass


class SpillError(MiniformError):
    exit_code = 4


class OutputError(MiniformError):
    exit_code = 4
