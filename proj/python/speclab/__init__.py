"""Python access to the speclab C++ core."""

from ._core import (
    SpeclabError,
    asymptotics,
    classify,
    count_below_epsilon,
    count_relative,
    critical_alpha,
    derive,
    eigenvalues_in_window,
    h_spectrum,
    lower_bound_constant,
    mu_beta_zero,
    secular_defect,
)

__all__ = [
    "SpeclabError",
    "asymptotics",
    "classify",
    "count_below_epsilon",
    "count_relative",
    "critical_alpha",
    "derive",
    "eigenvalues_in_window",
    "h_spectrum",
    "lower_bound_constant",
    "mu_beta_zero",
    "secular_defect",
]
