"""Python access to the bergman library: geometry, kernels and the report-producing suites."""

from ._core import (
    HoloFun,
    atoms,
    bergman_kernel,
    bergman_metric,
    equiv,
    invariant_ball_volume,
    moebius,
    noniso_metric_d,
    normalizing_constant,
    project,
    pseudo_metric_rho,
    space_index,
    verify,
    weak_type,
)

__all__ = [
    "HoloFun",
    "atoms",
    "bergman_kernel",
    "bergman_metric",
    "equiv",
    "invariant_ball_volume",
    "moebius",
    "noniso_metric_d",
    "normalizing_constant",
    "project",
    "pseudo_metric_rho",
    "space_index",
    "verify",
    "weak_type",
]
