"""Exception taxonomy shared across the package."""


class DriftTuneError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DriftTuneError):
    """Invalid configuration, parameters, or threshold strategy."""


class IngestError(DriftTuneError):
    """Malformed CSV input; the message names the offending line."""


class ModelError(DriftTuneError):
    """Classifier misuse: unfitted predict, empty chunk, dimension mismatch."""


class DetectorError(DriftTuneError):
    """Drift monitor misuse: out-of-range input or non-finite threshold."""


class PhaseError(DriftTuneError):
    """Race state machine misuse: candidate ops outside a comparison phase."""


class ReportError(DriftTuneError):
    """Summary over no results, or over results with mismatched shapes."""
