"""Exception types shared across the package."""


class GeometryError(ValueError):
    """A point, direction, or parameter is outside the domain of a space operation."""


class ConvexityError(RuntimeError):
    """Observed behaviour contradicts convexity (non-monotone slope quotients,
    or more than one boundary direction with negative asymptotic slope)."""


class SolverError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SublevelRangeError(ValueError):
    """The bracket passed to the sublevel-time search does not contain the target level."""

    def __init__(self, message: str, suggested_t_hi: float):
        super().__init__(message)
        self.suggested_t_hi = suggested_t_hi
