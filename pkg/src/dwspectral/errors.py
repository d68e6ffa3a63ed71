"""Exception hierarchy.

Every error carries a short machine-parsable ``category`` that the CLI prints
on stderr.
"""


class DwSpectralError(Exception):
    category = "error"


class InvalidParameterError(DwSpectralError, ValueError):
    category = "invalid-parameter"


class InvalidInputError(DwSpectralError, ValueError):
    category = "invalid-input"


class InvalidGeometryError(DwSpectralError, ValueError):
    category = "invalid-geometry"


class MissingClassError(DwSpectralError, ValueError):
    category = "missing-class"


class DivergenceError(DwSpectralError, ArithmeticError):
    category = "divergence"

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"non-finite training loss at epoch {epoch}")


class DegenerateDataError(DwSpectralError, ValueError):
    category = "degenerate-data"


class UndefinedKappaError(DwSpectralError, ZeroDivisionError):
    category = "undefined-kappa"


class FormatError(DwSpectralError, ValueError):
    category = "format"
