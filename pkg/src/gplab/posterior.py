"""Unnormalised posterior densities w.r.t. the uniform prior on [-1, 1]^K.

Seven density kinds are supported.  With y the data, sigma_eta2 the noise
variance, (m_G, m_Phi) predictive means, and v(u) = k_N(u, u) the shared
predictive variance:

    exact        exp(-Phi(u)),  Phi the true potential
    mean_G       exp(-||y - m_G(u)||^2 / (2 sigma_eta2))
    mean_Phi     exp(-m_Phi(u))
    marginal_G   prod_j  sigma_eta / sqrt(sigma_eta2 + v(u))
                   * exp(-(y_j - m_Gj(u))^2 / (2 (sigma_eta2 + v(u))))
    marginal_Phi exp(-m_Phi(u) + v(u) / 2)
    sample_G     exp(-||y - G_N(u)||^2 / (2 sigma_eta2)),  G_N one GP draw
    sample_Phi   exp(-Phi_N(u)),                           Phi_N one GP draw

The marginal kinds are the closed-form expectations of the sample kinds over
the predictive process (Gaussian convolution, respectively lognormal mean).
The sample kinds evaluate a realization drawn jointly over a fixed node set,
so each realization defines one random measure rather than node-wise noise.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .forward_model import InverseProblem, observation_map, potential_batch
from .gp import PredictiveProcess

EXACT = "exact"
MEAN_G = "mean_G"
MEAN_PHI = "mean_Phi"
MARGINAL_G = "marginal_G"
MARGINAL_PHI = "marginal_Phi"
SAMPLE_G = "sample_G"
SAMPLE_PHI = "sample_Phi"

APPROXIMATE_KINDS = (MEAN_G, MEAN_PHI, MARGINAL_G, MARGINAL_PHI, SAMPLE_G, SAMPLE_PHI)
ALL_KINDS = (EXACT,) + APPROXIMATE_KINDS
_G_KINDS = (MEAN_G, MARGINAL_G, SAMPLE_G)
_PHI_KINDS = (MEAN_PHI, MARGINAL_PHI, SAMPLE_PHI)
SAMPLE_KINDS = (SAMPLE_G, SAMPLE_PHI)


class PosteriorConfigError(ValueError):
    """A density kind is missing the emulator or realization it requires."""


@dataclass
class PosteriorSpec:
    """Which density to evaluate, plus the emulators it needs.

    ``emulator_G`` carries the J observation components as columns of a single
    predictive process (shared design, kernel and Cholesky factor).  For the
    sample kinds, ``realization_nodes``/``realization_values`` hold one joint
    GP draw attached by :func:`draw_sample_posterior`.
    """

    kind: str
    emulator_G: Optional[PredictiveProcess] = None
    emulator_Phi: Optional[PredictiveProcess] = None
    realization_nodes: Optional[np.ndarray] = None
    realization_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise PosteriorConfigError(f"unknown posterior kind {self.kind!r}")
        if self.kind in _G_KINDS and self.emulator_G is None:
            raise PosteriorConfigError(f"kind {self.kind!r} requires emulator_G")
        if self.kind in _PHI_KINDS and self.emulator_Phi is None:
            raise PosteriorConfigError(f"kind {self.kind!r} requires emulator_Phi")

    @property
    def emulator(self) -> Optional[PredictiveProcess]:
        return self.emulator_G if self.kind in _G_KINDS else self.emulator_Phi


def _check_positive_finite(rho: np.ndarray, nodes: np.ndarray, kind: str) -> np.ndarray:
    bad = ~np.isfinite(rho) | (rho <= 0.0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise FloatingPointError(
            f"{kind} density is {rho[i]!r} at node {i}, u = {nodes[i]}"
        )
    return rho


def _as_columns(a: np.ndarray) -> np.ndarray:
    return a[:, None] if a.ndim == 1 else a


def gaussian_likelihood(y: np.ndarray, means: np.ndarray, noise_var) -> np.ndarray:
    """exp(-||y - m||^2 / (2 noise_var)) row-wise for means of shape (..., J).

    ``noise_var`` may be scalar or broadcastable against the leading shape.
    """
    resid = np.asarray(y, dtype=float) - means
    sq = np.einsum("...j,...j->...", resid, resid)
    return np.exp(-0.5 * sq / noise_var)


def density_at_nodes(
    spec: PosteriorSpec,
    ip: InverseProblem,
    nodes: np.ndarray,
    G_values: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Unnormalised density at each row of an (M, K) node array.

    For the exact kind, ``G_values`` may carry precomputed forward-map values
    to avoid re-solving the PDE at every node.
    """
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    kind = spec.kind
    if kind == EXACT:
        rho = np.exp(-potential_batch(ip, nodes, G_values=G_values))
    elif kind == MEAN_G:
        means = _as_columns(spec.emulator_G.mean(nodes))
        rho = gaussian_likelihood(ip.data, means, ip.sigma_eta2)
    elif kind == MEAN_PHI:
        rho = np.exp(-spec.emulator_Phi.mean(nodes))
    elif kind == MARGINAL_PHI:
        m = spec.emulator_Phi.mean(nodes)
        v = spec.emulator_Phi.variance(nodes)
        rho = np.exp(-m + 0.5 * v)
    elif kind == MARGINAL_G:
        means = _as_columns(spec.emulator_G.mean(nodes))
        v = spec.emulator_G.variance(nodes)
        inflated = ip.sigma_eta2 + v
        rho = (ip.sigma_eta2 / inflated) ** (ip.J / 2.0) * gaussian_likelihood(
            ip.data, means, inflated
        )
    elif kind in SAMPLE_KINDS:
        rho = _sample_density(spec, ip, nodes)
    else:  # pragma: no cover
        raise PosteriorConfigError(f"unknown posterior kind {kind!r}")
    return _check_positive_finite(np.asarray(rho, dtype=float), nodes, kind)


def _sample_density(spec: PosteriorSpec, ip: InverseProblem, nodes: np.ndarray) -> np.ndarray:
    if spec.realization_values is None:
        raise PosteriorConfigError(
            f"kind {spec.kind!r} has no attached realization; call draw_sample_posterior first"
        )
    stored = spec.realization_nodes
    if nodes.shape == stored.shape and np.array_equal(nodes, stored):
        values = spec.realization_values
    else:
        idx = _locate_nodes(nodes, stored)
        values = spec.realization_values[idx]
    if spec.kind == SAMPLE_PHI:
        return np.exp(-values)
    return gaussian_likelihood(ip.data, _as_columns(values), ip.sigma_eta2)


def _locate_nodes(nodes: np.ndarray, stored: np.ndarray) -> np.ndarray:
    idx = np.empty(nodes.shape[0], dtype=int)
    for i, u in enumerate(nodes):
        hits = np.nonzero((stored == u).all(axis=1))[0]
        if hits.size == 0:
            raise ValueError(
                f"sample density only defined on its realization nodes; u = {u} not among them"
            )
        idx[i] = hits[0]
    return idx


def realization_density(kind: str, ip: InverseProblem, draws: np.ndarray) -> np.ndarray:
    """Vectorised sample-kind density for a stack of realizations.

    ``draws`` has shape (R, M) for sample_Phi or (R, M) / (R, M, J) for
    sample_G; the result is (R, M).
    """
    if kind == SAMPLE_PHI:
        return np.exp(-draws)
    if kind == SAMPLE_G:
        if draws.ndim == 2:
            draws = draws[:, :, None]
        return gaussian_likelihood(ip.data, draws, ip.sigma_eta2)
    raise PosteriorConfigError(f"{kind!r} is not a sample kind")


def unnorm_density(spec: PosteriorSpec, ip: InverseProblem, u) -> float:
    """Unnormalised density at a single point."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return float(density_at_nodes(spec, ip, u[None, :])[0])


def normalizing_constant(spec: PosteriorSpec, ip: InverseProblem, rule) -> float:
    """Quadrature average of the unnormalised density over the rule's nodes."""
    rho = density_at_nodes(spec, ip, rule.all_nodes)
    return float(np.mean(rho.reshape(rule.n_shifts, rule.n_points).mean(axis=1)))


def draw_sample_posterior(spec: PosteriorSpec, nodes: np.ndarray, seed: int) -> PosteriorSpec:
    """Attach one joint GP realization over ``nodes`` to a sample-kind spec."""
    if spec.kind not in SAMPLE_KINDS:
        raise PosteriorConfigError(f"kind {spec.kind!r} does not use realizations")
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    values = spec.emulator.sample_joint(nodes, 1, seed)[0]
    return dataclasses.replace(spec, realization_nodes=nodes, realization_values=values)
