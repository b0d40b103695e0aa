"""Optimal transport across incomparable spaces.

Linear OT, Gromov-Wasserstein and its fused, sliced and Euclidean variants,
and CO-Optimal Transport, with barycenters and small brute-force oracles.
"""
from . import errors
from .coot import (CootSolution, cce, cocluster, coot_bcd, coot_cost, coot_dc_gw,
                   label_propagate, mask_cost)
from .euclidean_gw import (EuclideanGwSolution, inner_gw_1d, inner_gw_bcd, lgm_gaussian,
                           sq_gw_bcd)
from .fgw import (FgwParams, FgwSolution, adjacency_from_structure, fgw_barycenter, fgw_cost,
                  fgw_kmeans, fgw_line_search, fgw_solve, shortest_path_matrix, wl_relabel)
from .gromov import GwProblem, gw_barycenter, gw_cost, gw_entropic, gw_tensor_apply, tlb
from .linear import (SinkhornParams, gaussian_w2, mccann_interpolate, north_west_corner,
                     sinkhorn, sinkhorn_divergence, solve_exact, wasserstein_1d,
                     wasserstein_barycenter)
from .measures import (Coupling, DataMatrix, DiscreteMeasure, GaussianMeasure, StructuredObject,
                       make_histogram)
from .sliced import SliceConfig, gw_1d_uniform, risgw, sgw, sliced_wasserstein
from .stiefel import StiefelOptParams, stiefel_minimize

__version__ = "0.1.0"
