"""Stationary covariance kernels (Matern family and Gaussian) and Gram matrices.

The Matern kernel with smoothness ``nu``, correlation length ``length_scale``
and variance ``sigma2`` is

    k(u, u') = sigma2 * 2**(1-nu)/Gamma(nu) * w**nu * B_nu(w),
    w = sqrt(2*nu) * ||u - u'|| / length_scale,

where ``B_nu`` is the modified Bessel function of the second kind.  The
``nu -> inf`` limit gives the Gaussian kernel

    k(u, u') = sigma2 * exp(-||u - u'||**2 / (2 * length_scale**2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.special import kv

# Below this radius the analytic r -> 0 limit (k = sigma2) is returned, which
# avoids the 0 * inf form of the Matern expression.
_R_TINY = 1e-14

FAMILIES = ("matern", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    """Covariance family and hyper-parameters of the prior GP.

    Parameters
    ----------
    family : str
        Either ``"matern"`` or ``"gaussian"``.
    nu : float
        Matern smoothness parameter; ignored for the Gaussian family.
    length_scale : float
        Correlation length.
    sigma2 : float
        Kernel variance, i.e. ``k(u, u) = sigma2``.
    """

    family: str = "matern"
    nu: float = 1.0
    length_scale: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}, expected one of {FAMILIES}")
        if not (self.nu > 0):
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not (self.length_scale > 0):
            raise ValueError(f"length_scale must be positive, got {self.length_scale}")
        if not (self.sigma2 > 0):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")


def bessel_k(nu: float, z: float) -> float:
    """Modified Bessel function of the second kind, B_nu(z), for z > 0.

    Raises a ``ValueError`` for z <= 0; the r = 0 kernel limit is handled by
    the caller before this function is reached.
    """
    if nu < 0:
        raise ValueError(f"order must be nonnegative, got {nu}")
    if not (z > 0):
        raise ValueError(f"argument must be positive, got {z}")
    return float(kv(nu, z))


def _matern_of_radius(r: np.ndarray, nu: float, length_scale: float, sigma2: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    w = math.sqrt(2.0 * nu) / length_scale * r
    w_safe = np.where(w > _R_TINY, w, 1.0)
    scale = sigma2 * 2.0 ** (1.0 - nu) / math.gamma(nu)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = scale * w_safe**nu * kv(nu, w_safe)
    return np.where(w > _R_TINY, vals, sigma2)


def _gaussian_of_radius(r: np.ndarray, length_scale: float, sigma2: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return sigma2 * np.exp(-0.5 * (r / length_scale) ** 2)


def kernel_of_radius(spec: KernelSpec, r) -> np.ndarray:
    """Evaluate the stationary kernel as a function of distance (vectorised)."""
    if spec.family == "gaussian":
        return _gaussian_of_radius(r, spec.length_scale, spec.sigma2)
    return _matern_of_radius(r, spec.nu, spec.length_scale, spec.sigma2)


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Covariance k(u, v) between two points of equal dimension."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    r = float(np.linalg.norm(u - v))
    return float(kernel_of_radius(spec, r))


def kernel_cross(spec: KernelSpec, A, B) -> np.ndarray:
    """Cross-covariance matrix k(A, B) with entry ij = k(a_i, b_j)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    return kernel_of_radius(spec, cdist(A, B))


def kernel_matrix(spec: KernelSpec, U) -> np.ndarray:
    """Gram matrix K(U, U) of a set of pairwise-distinct points.

    Duplicate points make the Gram matrix singular and raise a ``ValueError``.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[0] > 1 and pdist(U).min() == 0.0:
        raise ValueError("design points must be pairwise distinct")
    return kernel_of_radius(spec, cdist(U, U))
