"""Heat kernel estimation on point clouds with the kernel-normalized graph Laplacian."""

from .density import ball_counts, kde, renormalize, weighted_l2_norm
from .errors import (ConfigError, DegenerateError, DomainError, HKGLError, InfeasibleTimeError,
                     NonPositiveEntryError, NumericalError, UnsupportedError)
from .experiments import convergence_run, fit_loglog_slope, pointwise_check, run_pipeline
from .geometry import (Circle, CosinePerturbed, FlatTorus, PointCloud, Sphere, Uniform,
                       analytic_eigenvalues, analytic_heat_kernel, analytic_spectrum,
                       geodesic_distance, sample)
from .graph import (GraphOperators, KernelConfig, ScheduleMode, build_operators, degree,
                    epsilon_schedule, gaussian_affinity)
from .heat import (HeatKernelEstimate, heat_kernel_entry, heat_kernel_matrix,
                   suggest_truncation, varadhan_geodesic)
from .spectral import SpectralDecomposition, eigendecompose, nystrom_extend

__all__ = [
    "ball_counts",
    "kde",
    "renormalize",
    "weighted_l2_norm",
    "ConfigError",
    "DegenerateError",
    "DomainError",
    "HKGLError",
    "InfeasibleTimeError",
    "NonPositiveEntryError",
    "NumericalError",
    "UnsupportedError",
    "convergence_run",
    "fit_loglog_slope",
    "pointwise_check",
    "run_pipeline",
    "Circle",
    "CosinePerturbed",
    "FlatTorus",
    "PointCloud",
    "Sphere",
    "Uniform",
    "analytic_eigenvalues",
    "analytic_heat_kernel",
    "analytic_spectrum",
    "geodesic_distance",
    "sample",
    "GraphOperators",
    "KernelConfig",
    "ScheduleMode",
    "build_operators",
    "degree",
    "epsilon_schedule",
    "gaussian_affinity",
    "HeatKernelEstimate",
    "heat_kernel_entry",
    "heat_kernel_matrix",
    "suggest_truncation",
    "varadhan_geodesic",
    "SpectralDecomposition",
    "eigendecompose",
    "nystrom_extend",
]

__version__ = "0.1.0"
