"""Robust Bayesian novelty detection (C++ core)."""

from ._core import (
    BrandError,
    ari,
    best_partition_vi,
    bspline_basis,
    consistency_factor,
    extract_class_priors,
    fit,
    fit_functional,
    simulate,
    vi_score,
)

__all__ = [
    "BrandError",
    "ari",
    "best_partition_vi",
    "bspline_basis",
    "consistency_factor",
    "extract_class_priors",
    "fit",
    "fit_functional",
    "simulate",
    "vi_score",
]
