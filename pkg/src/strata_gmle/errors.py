"""Exception types shared across the package."""


class EstimationError(Exception):
    """Base class for estimation failures."""


class EmptyData(EstimationError):
    """No observations were supplied where some were required."""


class AllStrataEmpty(EstimationError):
    """Every stratum has zero realized sample size."""


class ZeroLikelihoodRow(EstimationError):
    """An observation has zero probability under every grid point.

    Usually means the grid range excludes the data.
    """

    def __init__(self, row: int, message: str | None = None):
        self.row = row
        super().__init__(
            message
            or f"observation {row} has zero probability under every grid point"
        )


class NumericalUnderflow(EstimationError):
    """A mixture density evaluated to exactly zero."""


class InfeasibleConstraint(EstimationError):
    """Even the likelihood maximizer violates the confidence-set threshold."""


class InputError(EstimationError):
    """Malformed input file; message carries the offending line number."""
