"""Exception hierarchy.

Configuration problems (bad parameters, unsupported combinations) map to CLI
exit code 2; numerical failures map to exit code 3.
"""


class HKGLError(Exception):
    exit_code = 1


class ConfigError(HKGLError, ValueError):
    exit_code = 2


class DomainError(ConfigError):
    """A precondition on an operation's input was violated."""


class UnsupportedError(ConfigError):
    pass


class InfeasibleTimeError(DomainError):
    pass


class NumericalError(HKGLError, ArithmeticError):
    exit_code = 3

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateError(NumericalError):
    pass


class NonPositiveEntryError(NumericalError):
    pass
