"""Exception types shared across the package."""


class DflowError(Exception):
    """Base class for all numerical / domain errors raised by dflow."""


class PoleError(DflowError, ZeroDivisionError):
    """Evaluation requested at (or too close to) a pole or support point."""


class RootFindError(DflowError):
    """Simultaneous iteration failed to converge.

    Carries the best iterate and its residual so callers can inspect or
    retry with a looser configuration.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class CharacteristicError(DflowError):
    """Characteristics solve failed (shock / branch point reached).

    ``last_iterate`` holds the final s value of the failed continuation.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class SingularCharacteristicError(CharacteristicError):
    """The characteristic field 1/u0 blew up: u0(s) = 0 was hit."""


class BranchAmbiguityError(DflowError):
    """Two algebraic branches are equidistant from the continuation state."""


class InversionError(DflowError):
    """Stieltjes inversion or functional inversion did not converge."""


class MassMismatchError(DflowError):
    """Two measures that must carry equal total mass do not."""
