"""Error types shared across the package.

Every error carries a short machine-readable ``code`` so the command line
layer can emit single-line, greppable failures and map them to exit codes.
"""
from __future__ import annotations


class MomentProbeError(Exception):
    """Base class; ``code`` identifies the failure kind."""

    code = "error"


class ConfigError(MomentProbeError):
    """Invalid configuration value or file; names the offending field path."""

    code = "config"


class UnsupportedProcessError(ConfigError):
    """Requested operation is not defined for this process kind."""

    code = "unsupported-process"


class NumericalError(MomentProbeError):
    """Base for failures of the numerics rather than the configuration."""

    code = "numerical"


class IllConditionedPlanError(NumericalError):
    """Sampling plan cannot resolve some radial band."""

    code = "ill-conditioned-plan"


class NonFiniteSampleError(NumericalError):
    """A probe response produced NaN or infinity."""

    code = "non-finite-sample"


class UnderDeterminedError(NumericalError):
    """Too few probes to identify the requested map."""

    code = "under-determined"


class DegenerateProbesError(NumericalError):
    """Probe means are collinear; the resource matrix is not invertible."""

    code = "degenerate-probes"


class TruncationError(NumericalError):
    """A truncated sum was requested beyond its reliable range."""

    code = "truncation"


class DimensionError(NumericalError):
    """Operands have incompatible index boxes."""

    code = "dimension"


class UndefinedForVacuumError(NumericalError):
    """Statistic requires nonzero mean photon number."""

    code = "undefined-for-vacuum"


class OrderUnsupportedError(NumericalError):
    """Moment order exceeds what the evaluator supports."""

    code = "order-unsupported"
