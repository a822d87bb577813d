"""Exception types shared across the fitting pipeline."""


class FitError(Exception):
    """Base class for every error raised by this package."""


class EmptyHistogram(FitError):
    """Histogram has zero total count."""


class ImageTooSmall(FitError):
    """Image is smaller than a single transform block."""


class PointOutsideSupport(FitError):
    """A positive-weight observation lies outside the model support."""


class MissingDensities(FitError):
    """The operation needs per-point density estimates, none attached."""


class DegenerateSample(FitError):
    """Sample carries no usable information (e.g. every point is zero)."""


class NotACriticalPoint(FitError):
    """Curvature formula evaluated where the slope does not vanish."""


class NotAMaximum(FitError):
    """Observed information requested for a non-maximum critical point."""


class NoConvergence(FitError):
    """Neither the fixed-point iteration nor the fallback converged."""


class AllFitsFailed(FitError):
    """No alpha in the sweep produced a usable maximum."""
