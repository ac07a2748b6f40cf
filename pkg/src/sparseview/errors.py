"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all sparseview errors."""


class CameraModelError(PipelineError):
    """Camera parameters violate the model invariants."""


class BehindCameraError(PipelineError):
    """A point projected with non-positive camera-space depth."""


class InvalidDepthError(PipelineError):
    """A depth value that must be strictly positive was not."""


class DegenerateSkeletonError(PipelineError):
    """Skeleton geometry unusable, e.g. coincident hip and neck."""


class OutOfViewError(PipelineError):
    """A query point does not project in front of the camera."""


class ShapeMismatchError(PipelineError):
    """Array shapes inconsistent with the operation's contract."""


class InsufficientViewsError(PipelineError):
    """Fewer usable views than the operation requires."""


class NoGeometryError(PipelineError):
    """A pixel with no rendered geometry was used as a surface sample."""


class SolverDivergedError(PipelineError):
    """Optimization produced a non-finite residual.

    Carries the last iterate with a finite residual so callers can
    fall back to it.
    """

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConfigurationError(PipelineError):
    """Invalid configuration (unknown channel, bad resolution, ...)."""


class InputError(PipelineError):
    """Missing or malformed input artifact on disk."""


class MetricError(PipelineError):
    """Metric preconditions violated (empty mesh, size mismatch, ...)."""
