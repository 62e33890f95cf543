"""Exception hierarchy shared across the package.

Numerical / statistical failures (everything below ``AntimeanError``) map to
CLI exit code 2; file and schema problems (``SchemaError``) map to exit 3.
"""


class AntimeanError(Exception):
    """Base class for all package errors."""


class InvalidInput(AntimeanError):
    """An argument violates a documented precondition."""


class FocalPointError(AntimeanError):
    """A block's two smallest eigenvalues are not separated: the farthest
    projection (and hence the antimean) is not well defined there."""

    def __init__(self, block: int, gap: float, tol: float):
        self.block = block
        self.gap = gap
        self.tol = tol
        super().__init__(
            f"focal point in axial block {block}: smallest-eigenvalue gap "
            f"{gap:.3e} <= tolerance {tol:.3e}"
        )


class ChartDomainError(AntimeanError):
    """A rotation chart was evaluated outside its domain (at or past the
    cut set of the identity)."""


class ShapeMismatch(AntimeanError):
    """Operands have incompatible numbers of axial components."""


class SingularCovarianceError(AntimeanError):
    """A covariance matrix required by a test statistic is numerically
    singular."""


class FrameDegenerateError(AntimeanError):
    """The five frame landmarks are not in general position."""


class BootstrapDegenerateError(AntimeanError):
    """Every bootstrap resample failed; no calibration is possible."""


class SchemaError(AntimeanError):
    """A data file does not conform to the documented format."""
