"""Linear optimal transport: exact LP, Sinkhorn, closed forms, barycenters."""
from .barycenter import mccann_interpolate, sq_euclidean, wasserstein_barycenter
from .closed_forms import bures_squared, gaussian_w2, sqrtm_psd
from .exact import (OtSolution, is_monge, north_west_corner, solve_exact, wasserstein_1d,
                    wasserstein_1d_cost)
from .sinkhorn import SinkhornParams, entropic_objective, entropy, sinkhorn, sinkhorn_divergence

__all__ = [
    "OtSolution", "SinkhornParams", "bures_squared", "entropic_objective", "entropy",
    "gaussian_w2", "is_monge", "mccann_interpolate", "north_west_corner", "sinkhorn",
    "sinkhorn_divergence", "solve_exact", "sq_euclidean", "sqrtm_psd", "wasserstein_1d",
    "wasserstein_1d_cost", "wasserstein_barycenter",
]
