"""Exception types shared across the renovation pipeline.

Everything raised on a contract violation derives from RenovationError so
the CLI runner can distinguish pipeline failures (reported in a
machine-readable error file) from programming errors.
"""

__all__ = [
    "RenovationError",
    "VocabularyError",
    "PredictionsFileError",
    "DuplicateCellError",
    "UnknownImageError",
    "UnknownMethodError",
    "MissingScoreError",
    "DegenerateGroundTruthError",
    "ConfigError",
]


class RenovationError(Exception):
    """Base class for pipeline contract violations."""


class VocabularyError(RenovationError):
    """Invalid vocabulary definition or vocabulary file."""


class PredictionsFileError(RenovationError):
    """A predictions file is mostly unparseable (probably the wrong file)."""


class DuplicateCellError(RenovationError):
    """Two prediction records claim the same (image, method) cell."""

    def __init__(self, image_id: str, method_id: str):
        super().__init__(f"duplicate prediction for image {image_id!r}, method {method_id!r}")
        self.image_id = image_id
        self.method_id = method_id


class UnknownImageError(RenovationError):
    """An image_id is not part of the declared image universe."""


class UnknownMethodError(RenovationError):
    """A method_id is not present in the prediction matrix."""


class MissingScoreError(RenovationError):
    """Score-based filtering hit a label that carries no score."""


class DegenerateGroundTruthError(RenovationError):
    """Ground truth is empty on the whole calibration slice; coverage undefined."""


class ConfigError(RenovationError):
    """Run configuration is invalid or references missing inputs."""
