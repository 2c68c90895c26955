"""Gaussian-process conditioning: predictive mean/covariance and joint sampling.

Conditioning a zero-mean prior GP with kernel ``k`` on design data (U, f(U))
gives the predictive process with

    m_N(u)     = k(u, U)^T K(U, U)^{-1} f(U),
    k_N(u, u') = k(u, u') - k(u, U)^T K(U, U)^{-1} k(u', U).

With a non-zero prior mean m the predictive mean becomes
``m(u) + k(u, U)^T K(U, U)^{-1} (f(U) - m(U))``; the covariance is unchanged.
Vector-valued targets are emulated one output at a time with a shared design,
kernel and Cholesky factor: ``values`` may be (N,) or (N, J).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.spatial.distance import pdist

from .kernels import KernelSpec, kernel_cross, kernel_matrix

# Escalating diagonal jitter, in units of sigma2, tried when a Cholesky
# factorisation fails.  Beyond the last rung we give up.
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)

# Computed predictive variances in [-VAR_CLAMP * sigma2, 0) are round-off and
# clamp to zero; anything more negative indicates a bug and raises.
VAR_CLAMP = 1e-9


class ConditioningError(RuntimeError):
    """Raised when the kernel Gram matrix cannot be factorised."""


def _cholesky_with_jitter(mat: np.ndarray, sigma2: float, ladder=JITTER_LADDER):
    """Lower Cholesky factor of ``mat`` plus the smallest workable jitter."""
    n = mat.shape[0]
    for eps in ladder:
        try:
            L = np.linalg.cholesky(mat + eps * sigma2 * np.eye(n) if eps else mat)
            return L, eps
        except np.linalg.LinAlgError:
            continue
    smallest = float(np.linalg.eigvalsh(mat).min())
    raise ConditioningError(
        f"Cholesky failed for {n}x{n} matrix even with jitter "
        f"{ladder[-1]:.0e}*sigma2 (smallest eigenvalue ~ {smallest:.3e})"
    )


@dataclass
class DesignSet:
    """Design points U (N, K) together with observed values f(U)."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.values = np.asarray(self.values, dtype=float)
        n = self.points.shape[0]
        if n < 1:
            raise ValueError("design needs at least one point")
        if self.values.shape[0] != n:
            raise ValueError(
                f"got {n} points but {self.values.shape[0]} values"
            )
        if n > 1 and pdist(self.points).min() == 0.0:
            raise ValueError("design points must be pairwise distinct")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass
class PredictiveProcess:
    """GP conditioned on a design set; evaluates m_N and k_N.

    Immutable after construction; evaluation and (seeded) sampling are safe to
    call concurrently.
    """

    spec: KernelSpec
    design: DesignSet
    alpha: np.ndarray
    chol: np.ndarray
    jitter: float
    prior_mean: Optional[Callable[[np.ndarray], np.ndarray]] = None
    _mean_residual: np.ndarray = field(default=None, repr=False)

    def _cross(self, points: np.ndarray) -> np.ndarray:
        return kernel_cross(self.spec, points, self.design.points)

    def mean(self, points) -> np.ndarray:
        """Predictive mean at one point (K,) or at rows of an (M, K) array.

        Returns shape (), (M,), (J,) or (M, J) matching the inputs.
        """
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = self._cross(pts) @ self.alpha
        if self.prior_mean is not None:
            m = np.asarray(self.prior_mean(pts), dtype=float)
            out = out + (m[:, None] if out.ndim == 2 else m)
        return out[0] if single else out

    def variance(self, points) -> np.ndarray:
        """Predictive variance k_N(u, u), clamped to zero within round-off."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        V = solve_triangular(self.chol, self._cross(pts).T, lower=True)
        var = self.spec.sigma2 - np.einsum("ij,ij->j", V, V)
        floor = -VAR_CLAMP * self.spec.sigma2
        if var.min() < floor:
            raise RuntimeError(
                f"predictive variance {var.min():.3e} below round-off floor {floor:.3e}"
            )
        var = np.maximum(var, 0.0)
        return float(var[0]) if single else var

    def cov(self, u, v) -> float:
        """Predictive covariance k_N(u, v) between two points."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        v = np.atleast_2d(np.asarray(v, dtype=float))
        ku = solve_triangular(self.chol, self._cross(u).T, lower=True)
        kv_ = solve_triangular(self.chol, self._cross(v).T, lower=True)
        prior = kernel_cross(self.spec, u, v)[0, 0]
        return float(prior - ku[:, 0] @ kv_[:, 0])

    def cov_matrix(self, points) -> np.ndarray:
        """Full predictive covariance matrix over an (M, K) point set."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        V = solve_triangular(self.chol, self._cross(pts).T, lower=True)
        C = kernel_cross(self.spec, pts, pts) - V.T @ V
        return 0.5 * (C + C.T)

    def sample_joint(self, points, n_draws: int, seed: int) -> np.ndarray:
        """Joint draws of the predictive process at the given points.

        Returns (n_draws, M) for scalar-valued data, (n_draws, M, J) for
        vector-valued data.  Draw r depends only on (seed, r), not on
        n_draws, so shorter and longer runs share their leading draws.
        Points whose predictive variance is zero up to round-off get the
        predictive mean exactly (degenerate Gaussian components).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        C = self.cov_matrix(pts)
        Lc, _ = _cholesky_with_jitter(C, self.spec.sigma2)
        Lc = Lc.copy()
        Lc[np.diag(C) <= VAR_CLAMP * self.spec.sigma2, :] = 0.0
        mean = self.mean(pts)
        n_out = 1 if self.alpha.ndim == 1 else self.alpha.shape[1]
        draws = np.empty((n_draws, pts.shape[0], n_out))
        for r, child in enumerate(np.random.SeedSequence(seed).spawn(n_draws)):
            rng = np.random.default_rng(child)
            z = rng.standard_normal((pts.shape[0], n_out))
            draws[r] = (mean if mean.ndim == 2 else mean[:, None]) + Lc @ z
        return draws[:, :, 0] if self.alpha.ndim == 1 else draws


def condition(spec: KernelSpec, design: DesignSet, prior_mean=None) -> PredictiveProcess:
    """Condition the prior GP on a design set.

    ``prior_mean``, if given, is a callable mapping an (M, K) array to (M,)
    mean values (e.g. a polynomial trend).
    """
    K = kernel_matrix(spec, design.points)
    L, eps = _cholesky_with_jitter(K, spec.sigma2)
    resid = design.values
    if prior_mean is not None:
        m = np.asarray(prior_mean(design.points), dtype=float)
        resid = resid - (m[:, None] if resid.ndim == 2 else m)
    alpha = cho_solve((L, True), resid)
    return PredictiveProcess(
        spec=spec, design=design, alpha=alpha, chol=L, jitter=eps, prior_mean=prior_mean
    )


@dataclass
class NativeSpaceElement:
    """Finite kernel expansion g(.) = sum_i c_i k(., z_i)."""

    centers: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.centers.shape[0] != self.coeffs.shape[0]:
            raise ValueError("one coefficient per center required")

    def __call__(self, points, spec: KernelSpec) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return kernel_cross(spec, pts, self.centers) @ self.coeffs


def native_norm(g: NativeSpaceElement, spec: KernelSpec) -> float:
    """RKHS norm sqrt(c^T K(Z, Z) c) of a finite kernel expansion."""
    K = kernel_matrix(spec, g.centers)
    sq = float(g.coeffs @ K @ g.coeffs)
    return float(np.sqrt(max(sq, 0.0)))
