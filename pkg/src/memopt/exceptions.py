"""Exception hierarchy shared across the toolkit.

Every error category named by an operation contract maps to one class
here, so callers (and the CLI exit-code mapping) can distinguish them.
"""


class MemoptError(Exception):
    """Base class for all toolkit errors."""


class SpecError(MemoptError):
    """Structural problem: unknown parameter, malformed spec file, bad schema."""


class ParametrizationInvalid(MemoptError):
    """A parametrization violates choice sets or constraint rules."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class CompilerNotApplicable(MemoptError):
    """Fixed depth/width (or port config) outside a compiler's supported range."""


class EmptySearchSpace(MemoptError):
    """No applicable compiler produced any candidate solution."""


class SamplingExhausted(MemoptError):
    """Rejection sampling ran out of retries (e.g. exclusions cover all sizes)."""


class CoefficientMismatch(MemoptError):
    """Coefficient set belongs to a different compiler than the spec."""


class ModelNotFound(MemoptError):
    """Zoo lookup failed for (compiler_id, version)."""


class FormatVersionError(MemoptError):
    """Persisted artifact has an unsupported format_version."""


class FrozenRecordError(MemoptError):
    """Attempted mutation of a frozen model record."""


class MetricUndefined(MemoptError):
    """Metric precondition violated (zero or non-positive ground truth)."""


class StatTestInapplicable(MemoptError):
    """Statistical test preconditions not met (sample size, zero variance)."""


class FoldSizeError(MemoptError):
    """A cross-validation fold is too small to form a single mini-batch."""


class MissingModel(MemoptError):
    """An applicable compiler has no frozen model in the zoo."""


class TrainingDiverged(MemoptError):
    """Non-finite loss or gradient encountered during training."""
