"""Design-point generators and geometric quality measures on [-1, 1]^K.

For a design U the fill distance, separation radius and mesh ratio are

    h_U   = sup_{u in X} min_n ||u - u^n||,
    q_U   = 0.5 * min_{i != j} ||u^i - u^j||,
    rho_U = h_U / q_U  (>= 1 for reasonable designs).

The supremum over the continuum is estimated by probing a dense tensor grid;
for uniform tensor designs the estimate is exact as soon as the probe grid
contains the cell centres (probe resolution ~ 4x the design resolution).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist


@dataclass(frozen=True)
class DesignGeometry:
    fill_distance: float
    separation_radius: float
    mesh_ratio: float


def tensor_grid(K: int, n_per_dim: int) -> np.ndarray:
    """Uniform tensor grid of n_per_dim**K points in [-1, 1]^K.

    Points are returned in lexicographic order (first coordinate slowest).
    """
    if K < 1:
        raise ValueError(f"dimension must be >= 1, got {K}")
    if n_per_dim < 2:
        raise ValueError(f"n_per_dim must be >= 2, got {n_per_dim}")
    axes = [np.linspace(-1.0, 1.0, n_per_dim)] * K
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _as_points(U) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    return U


def fill_distance(U, probe_resolution: int = 33) -> float:
    """Estimated fill distance of U in [-1, 1]^K via a tensor probe grid."""
    U = _as_points(U)
    if U.shape[0] == 0:
        raise ValueError("design is empty")
    if probe_resolution < 2:
        raise ValueError(f"probe_resolution must be >= 2, got {probe_resolution}")
    probe = tensor_grid(U.shape[1], probe_resolution)
    dist, _ = cKDTree(U).query(probe)
    return float(dist.max())


def separation_radius(U) -> float:
    """Half the smallest pairwise distance in U (|U| >= 2)."""
    U = _as_points(U)
    if U.shape[0] < 2:
        raise ValueError("separation radius needs at least two points")
    q = 0.5 * float(pdist(U).min())
    if q == 0.0:
        raise ValueError("design contains duplicate points")
    return q


def mesh_ratio(U, probe_resolution: int = 33) -> float:
    return fill_distance(U, probe_resolution) / separation_radius(U)


def design_geometry(U, probe_resolution: int = 33) -> DesignGeometry:
    h = fill_distance(U, probe_resolution)
    q = separation_radius(U)
    return DesignGeometry(fill_distance=h, separation_radius=q, mesh_ratio=h / q)
