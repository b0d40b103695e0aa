"""Fused Gromov-Wasserstein for labeled graphs."""
from .barycenter import fgw_barycenter, fgw_distance, fgw_kmeans, update_features
from .graphs import (adjacency_from_structure, shortest_path_matrix, wl_relabel,
                     wl_relabel_many)
from .solver import (FgwParams, FgwSolution, feature_cost_matrix, fgw_cost, fgw_line_search,
                     fgw_solve)

__all__ = [
    "FgwParams", "FgwSolution", "adjacency_from_structure", "feature_cost_matrix",
    "fgw_barycenter", "fgw_cost", "fgw_distance", "fgw_kmeans", "fgw_line_search", "fgw_solve",
    "shortest_path_matrix", "update_features", "wl_relabel", "wl_relabel_many",
]
