"""Domain error hierarchy for the dataset engine."""

from typing import Optional


class FuzzForgeError(ValueError):
    """Base class for every domain error raised by fuzzforge."""


class ConfigError(FuzzForgeError):
    """Pipeline configuration is malformed or names an unknown key."""


class InvalidBox(FuzzForgeError):
    """Bounding box with non-positive width or height."""


class DimensionMismatch(FuzzForgeError):
    """Raster or annotation dimensions do not agree."""


class EmptySprite(FuzzForgeError):
    """No pixel of a raster exceeds the alpha trim threshold."""


class InvalidStride(FuzzForgeError):
    """Frame sampling stride below 1."""


class EmptyCatalog(FuzzForgeError):
    """A generator needs at least one sprite."""


class EmptyVisibleRegion(FuzzForgeError):
    """An overlay contributes no visible alpha to the frame."""


class PlacementExhausted(FuzzForgeError):
    """Overlay placement retries ran out without meeting the visibility constraint."""


class ArtifactIOError(FuzzForgeError, OSError):
    """An artifact file could not be read or written."""


class ParseError(FuzzForgeError):
    """A structured input file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")


class InvalidConfidence(FuzzForgeError):
    """Detection confidence outside [0, 1]."""


class UnknownImage(FuzzForgeError):
    """An image name is missing from the manifest or cache it is looked up in."""


class EmptyInput(FuzzForgeError):
    """An aggregation received nothing to aggregate."""


class KTooLarge(FuzzForgeError):
    """Requested selection size exceeds the population."""


class PoolTooSmall(FuzzForgeError):
    """A mixture asks for more images than a pool holds."""


class PoolOverlap(FuzzForgeError):
    """Real and synthetic pools share image names."""


class InfeasibleBudget(FuzzForgeError):
    """No (n_real, n_synth) pair satisfies the budget."""


class PairingMismatch(FuzzForgeError):
    """Paired annotation runs do not line up."""
