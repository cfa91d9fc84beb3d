"""Exception hierarchy shared by every warren module."""


class WarrenError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(WarrenError, ValueError):
    """A numeric parameter, or a combination of them, is out of range."""


class ShapeError(WarrenError, ValueError):
    """An array length does not match the shape it is paired with."""


class ValidationError(WarrenError, ValueError):
    """Input failed a structural check (interlacing, hermiticity, config keys)."""


class DomainError(WarrenError, ValueError):
    """An identity or transform was evaluated outside its domain."""


class DegenerateBandError(WarrenError, ArithmeticError):
    """A reflection band has lower > upper beyond the collapse tolerance."""


class PropagationError(WarrenError, ArithmeticError):
    """A NaN entered the simulation state."""


class StiffStepError(WarrenError, ArithmeticError):
    """The step-halving budget of a singular-drift SDE ran out."""


class UsageError(WarrenError, ValueError):
    """The command line could not be parsed (unknown flag, missing subcommand)."""
