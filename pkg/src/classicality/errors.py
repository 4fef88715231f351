"""Exception and warning types shared across the package."""


class GridCoverageError(RuntimeError):
    """A grid does not cover the region a computation needs.

    Raised when a wave-packet constructor, an interval check or an
    evolution run would place non-negligible amplitude (or a required
    classical interval) outside the configured grid.
    """


class SequenceBudgetError(RuntimeError):
    """The composite-sequence enumeration exceeded its configured cap."""


class ConfigError(ValueError):
    """Invalid run configuration.

    Carries *all* validation failures, each as a ``(path, message)``
    pair, so a user can fix a config file in one pass.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.issues)
        super().__init__(f"invalid configuration: {lines}")


class AccuracyWarning(UserWarning):
    """A quadrature result may be degraded (e.g. boundary mass too large)."""
