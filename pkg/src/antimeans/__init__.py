"""Extrinsic antimean estimation and anti-MANOVA testing on RP^m and
3D projective shape spaces (RP^3)^q."""

from .bootstrap import (
    BootstrapPlan,
    BootstrapResult,
    bootstrap_manova,
    bootstrap_one_sample,
    bootstrap_two_sample,
)
from .data import (
    FrameSpec,
    LandmarkConfig,
    SynthSpec,
    load_landmarks,
    projective_coordinates,
    synth_sample,
    synth_true_antimean,
    write_landmarks,
)
from .errors import (
    AntimeanError,
    BootstrapDegenerateError,
    ChartDomainError,
    FocalPointError,
    FrameDegenerateError,
    InvalidInput,
    SchemaError,
    ShapeMismatch,
    SingularCovarianceError,
)
from .estimation import (
    AntimeanEstimate,
    AxialEigensystem,
    PooledAntimean,
    anticovariance_vw,
    axial_moments,
    pooled_antimean,
    sample_antimean,
    tangent_basis,
    tangent_coords,
)
from .inference import (
    Hypotheses,
    TestResult,
    manova_statistic,
    manova_test,
    one_sample_statistic,
    one_sample_test,
    pairwise_manova,
    two_sample_statistic,
    two_sample_test,
)
from .manifold import (
    ProjectivePoint,
    ProjectiveShape,
    canonicalize,
    exp_chart,
    log_chart,
    quat_inv,
    quat_mul,
    shape_from_matrix,
    shape_group_op,
)
from .numerics import EigenDecomp, RngStream, chisq_cdf, chisq_quantile, eigh_sym, rng_draw_uniform_indices
from .vw import chord_dist_sq, farthest_project, frechet_value, vw_embed, vw_embed_shape

__version__ = "0.1.0"

__all__ = [
    "AntimeanError", "AntimeanEstimate", "AxialEigensystem", "BootstrapDegenerateError",
    "BootstrapPlan", "BootstrapResult", "ChartDomainError", "EigenDecomp",
    "FocalPointError", "FrameDegenerateError", "FrameSpec", "Hypotheses",
    "InvalidInput", "LandmarkConfig", "PooledAntimean", "ProjectivePoint",
    "ProjectiveShape", "RngStream", "SchemaError", "ShapeMismatch",
    "SingularCovarianceError", "SynthSpec", "TestResult",
    "anticovariance_vw", "axial_moments", "bootstrap_manova",
    "bootstrap_one_sample", "bootstrap_two_sample", "canonicalize",
    "chisq_cdf", "chisq_quantile", "chord_dist_sq", "eigh_sym", "exp_chart",
    "farthest_project", "frechet_value", "load_landmarks", "log_chart",
    "manova_statistic", "manova_test", "one_sample_statistic",
    "one_sample_test", "pairwise_manova", "pooled_antimean",
    "projective_coordinates", "quat_inv", "quat_mul",
    "rng_draw_uniform_indices", "sample_antimean", "shape_from_matrix",
    "shape_group_op", "synth_sample", "synth_true_antimean", "tangent_basis",
    "tangent_coords", "two_sample_statistic", "two_sample_test", "vw_embed",
    "vw_embed_shape", "write_landmarks",
]
