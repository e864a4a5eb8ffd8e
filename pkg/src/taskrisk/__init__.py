"""Occupation vulnerability screening from task-attribute data.

Pipeline stages: ingest and standardize an occupation-by-attribute
importance matrix, check factorability (Bartlett, KMO), extract and rotate
latent factors (parallel analysis + principal-axis factoring + varimax),
cluster occupations with PAM k-medoids validated by silhouettes, flag
vulnerable occupations by factor-score quantiles and cluster profiles, and
compare employment growth between the vulnerable and non-vulnerable groups.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
