"""Ratio-of-affine maps: representation, black-box certification of
segment inclusion, and recovery of the representation from oracle
access, with cevian-concurrency machinery as the geometric backbone."""

__version__ = "0.1.0"

from cevarep.alpha import (
    AlphaSample,
    ExponentEstimate,
    LawReport,
    check_inverse_law,
    check_multiplicative_law,
    compute_alpha,
    estimate_exponent,
)
from cevarep.certify import (
    CertifyConfig,
    CertReport,
    Witness,
    certify,
    reverify_witness,
    zoo,
)
from cevarep.ceva import (
    CevaWeights,
    ceva_condition,
    ceva_point,
    cevian_intersection_bruteforce,
    cevian_points,
)
from cevarep.errors import CevarepError
from cevarep.extract import (
    BaseTriple,
    ExtractConfig,
    ExtractResult,
    PhiTable,
    build_phi_table,
    compute_phi,
    extract_representation,
    select_base_triple,
    verify_exponent_one,
)
from cevarep.fracaffine import (
    FracAffineMap,
    as_oracle,
    compose,
    lambda_inverse,
    lambda_reparam,
    random_fracaffine,
)
from cevarep.geom import (
    AffineFunctional,
    AffineMap,
    FitReport,
    Segment,
    Tolerances,
    convex_combine,
    fit_affine_scalar,
    fit_affine_vector,
    noncollinearity_measure,
    segment_coordinate,
)
from cevarep.oracle import Oracle, SamplingRegion

__all__ = [
    "AffineFunctional",
    "AffineMap",
    "AlphaSample",
    "BaseTriple",
    "CertReport",
    "CertifyConfig",
    "CevaWeights",
    "CevarepError",
    "ExponentEstimate",
    "ExtractConfig",
    "ExtractResult",
    "FitReport",
    "FracAffineMap",
    "LawReport",
    "Oracle",
    "PhiTable",
    "SamplingRegion",
    "Segment",
    "Tolerances",
    "Witness",
    "as_oracle",
    "build_phi_table",
    "certify",
    "ceva_condition",
    "ceva_point",
    "cevian_intersection_bruteforce",
    "cevian_points",
    "check_inverse_law",
    "check_multiplicative_law",
    "compose",
    "compute_alpha",
    "compute_phi",
    "convex_combine",
    "estimate_exponent",
    "extract_representation",
    "fit_affine_scalar",
    "fit_affine_vector",
    "lambda_inverse",
    "lambda_reparam",
    "noncollinearity_measure",
    "random_fracaffine",
    "reverify_witness",
    "segment_coordinate",
    "select_base_triple",
    "verify_exponent_one",
    "zoo",
]
