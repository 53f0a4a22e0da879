"""Exception types shared across the package."""

from __future__ import annotations


class ChernoffHeatError(ValueError):
    """Base class for all package-specific errors."""


class DegenerateGeometry(ChernoffHeatError):
    """Domain has no usable tubular neighbourhood (radius <= 0 or r(theta) <= 0)."""


class OutsideTubularNeighborhood(ChernoffHeatError):
    """Point is too far from the boundary for a unique closest-point projection."""


class NegativeArgument(ChernoffHeatError):
    """Kink profile evaluated at a negative distance or coupling."""


class GridTooCoarse(ChernoffHeatError):
    """Collar holds fewer grid layers than the interpolation stencil needs."""


class CollarTooWide(ChernoffHeatError):
    """Interior cutoff width reaches or exceeds the tubular radius."""


class StepTooSmall(ChernoffHeatError):
    """Kernel truncation radius falls under two grid spacings."""


class EdgeClipping(ChernoffHeatError):
    """Field varies inside the edge band that the convolution would fold."""


class MismatchedGrid(ChernoffHeatError):
    """Kernel plan and field disagree on spacing or dimension."""


class RootBracketFailure(ChernoffHeatError):
    """Sign change missing on a bracket that should contain an eigenvalue."""


class TruncationInsufficient(ChernoffHeatError):
    """Eigenexpansion tail estimate exceeds the requested tolerance."""


class StepRejected(ChernoffHeatError):
    """Reference time-stepper disagreement above the requested tolerance."""


class ReferenceUnavailable(ChernoffHeatError):
    """No reference solver covers the requested domain/variant pair."""


class ConfigError(ChernoffHeatError):
    """Experiment configuration fails schema or compatibility validation."""
