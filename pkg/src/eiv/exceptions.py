"""Exception hierarchy for the eiv toolkit.

``AssumptionViolation`` subclasses signal that an input breaks a model
requirement (the CLI maps these to exit code 2); plain ``EivError``
subclasses are ordinary usage/configuration failures (exit code 1).
"""


class EivError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(EivError):
    """Bad configuration file or key."""


class UnsupportedOrderError(EivError):
    """A pairing requires a derivative order the test function cannot supply."""


class InvalidIntervalError(EivError):
    """Interval union violates the separation rules for mollified windows."""


class ConstructionDegenerateError(EivError):
    """A constructed weight fails its numeric self-check (step too small)."""


class OverlapError(EivError):
    """Paired bumps overlap: the half-width must stay below the center offset."""


class InsufficientDataError(EivError):
    """Too few observations to populate any bin."""


class AssumptionViolation(EivError):
    """An input violates a runtime-checkable model assumption."""


class UnidentifiableBandError(AssumptionViolation):
    """More than half of the working band was trimmed away."""


class NoSignalError(AssumptionViolation):
    """The outcome spectrum is below the trim threshold on the whole band."""


class DivergentIntegrandError(AssumptionViolation):
    """The log-characteristic integral overflows inside the band."""

    def __init__(self, zeta: float, magnitude: float):
        self.zeta = zeta
        self.magnitude = magnitude
        super().__init__(
            f"integral of the log-derivative reaches |{magnitude:.3g}| at "
            f"zeta={zeta:.6g}; exp() would overflow"
        )


class CharFnZeroError(AssumptionViolation):
    """The error characteristic function vanishes inside the working band."""

    def __init__(self, zeta: float):
        self.zeta = zeta
        super().__init__(f"characteristic function is ~0 at zeta={zeta:.6g}")


class NonInvertibleGammaError(AssumptionViolation):
    """A singular-point coefficient matrix is not invertible at this theta."""


class WindowSelectionError(AssumptionViolation):
    """The ordinary spectrum part is ~0 on a proposed bump window."""
