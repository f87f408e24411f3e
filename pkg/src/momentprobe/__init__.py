"""Process tomography for bosonic modes via normally-ordered moments.

Coherent probes turn a phase-insensitive linear map into a family of
polynomial (or analytic) radial profiles; this package estimates the
transfer tensor from such probes, evaluates closed-form tensors for a
catalog of common processes, identifies Gaussian channels from probe
means, and computes nonclassicality witnesses from moment tables.
"""
from .errors import (ConfigError, DegenerateProbesError, DimensionError,
                     IllConditionedPlanError, MomentProbeError,
                     NonFiniteSampleError, NumericalError,
                     OrderUnsupportedError, TruncationError,
                     UnderDeterminedError, UndefinedForVacuumError,
                     UnsupportedProcessError)
from .moments import (GaussianState, MomentTable, apply_tensor,
                      coherent_moments, fock_moments, gaussian_low_moments,
                      gaussian_moments, thermal_moments)
from .nonclassicality import (DiagnosticReport, decoherence_variance,
                              diagnose, mandel_q, q_after_nla,
                              quadrature_variance_x)
from .processes import (NLA, Attenuation, BeamSplitter, CatGeneration,
                        Decoherence, Displacement, GaussianChannel,
                        GaussianTriplet, Identity, PhotonAdd, PhotonSub,
                        ProcessSpec, ProcessTensor, as_gaussian_triplet,
                        catalog_tensor, gaussian_apply,
                        nla_success_probability, output_moments,
                        process_modes)
from .tomography import (IdentificationResult, ResourceMatrix, SamplingPlan,
                         default_gaussian_probes, default_plan,
                         estimate_tensor, fock_to_moment, identify_gaussian,
                         moment_to_fock, noisy_response, resource_matrix)

__version__ = "0.1.0"

__all__ = [
    "MomentProbeError", "ConfigError", "UnsupportedProcessError",
    "NumericalError", "IllConditionedPlanError", "NonFiniteSampleError",
    "UnderDeterminedError", "DegenerateProbesError", "TruncationError",
    "DimensionError", "UndefinedForVacuumError", "OrderUnsupportedError",
    "MomentTable", "GaussianState", "coherent_moments", "fock_moments",
    "thermal_moments", "gaussian_moments", "gaussian_low_moments",
    "apply_tensor",
    "ProcessTensor", "GaussianTriplet", "ProcessSpec", "Identity",
    "Attenuation", "Displacement", "PhotonAdd", "PhotonSub", "BeamSplitter",
    "CatGeneration", "NLA", "Decoherence", "GaussianChannel",
    "process_modes", "output_moments", "catalog_tensor", "gaussian_apply",
    "as_gaussian_triplet", "nla_success_probability",
    "SamplingPlan", "default_plan", "estimate_tensor", "noisy_response",
    "ResourceMatrix", "resource_matrix", "default_gaussian_probes",
    "IdentificationResult", "identify_gaussian", "fock_to_moment",
    "moment_to_fock",
    "mandel_q", "q_after_nla", "quadrature_variance_x",
    "decoherence_variance", "DiagnosticReport", "diagnose",
    "__version__",
]
