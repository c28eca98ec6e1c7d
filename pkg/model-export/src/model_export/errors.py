"""Exporter error types."""
from __future__ import annotations


class ExportError(Exception):
    """Base class for everything this package raises on purpose."""


class BadSceneError(ExportError):
    """A synthetic scene violates its own invariants."""


class EmptySegmentationError(ExportError):
    """A retained detection produced a mask with no pixels."""


class NoPersonDetectedError(ExportError):
    """A reference frame contains no person to read a depth from."""


class ExportDependencyError(ExportError):
    """A model backend needs packages that are not installed."""
