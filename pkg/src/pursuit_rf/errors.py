"""Exception hierarchy for pursuit_rf."""


class PursuitError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateBasis(PursuitError, ValueError):
    pass


class AssumptionViolated(PursuitError, ValueError):
    """The pursuer's energy advantage ``rho**p - sigma**p * nu**p`` is not positive."""


class UnsupportedDimension(PursuitError, ValueError):
    pass


class AlreadyCaptured(PursuitError):
    """The free motion of the game already lies in the terminal ball."""


class BracketNotFound(PursuitError, RuntimeError):
    pass


class NonFinite(PursuitError, FloatingPointError):
    pass


class DegenerateXi(PursuitError, ValueError):
    pass


class NoRoot(PursuitError, RuntimeError):
    pass


class InsideTerminal(PursuitError, ValueError):
    pass


class DegenerateStart(PursuitError, ValueError):
    pass


class StepTooCoarse(PursuitError, ValueError):
    pass


class BadSpec(PursuitError, ValueError):
    pass


class ConfigError(PursuitError, ValueError):
    """Base for scenario file problems (maps to CLI exit code 2)."""


class ParseError(ConfigError):
    def __init__(self, message, path=None, line=None, column=None):
        loc = ""
        if path is not None:
            loc = str(path)
            if line is not None:
                loc += f":{line}:{column}"
            loc += ": "
        super().__init__(loc + message)
        self.path = path
        self.line = line
        self.column = column


class ValidationError(ConfigError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
