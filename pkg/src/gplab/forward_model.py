"""1D elliptic model problem: FEM forward solve, observations and potential.

The forward model solves

    -(kappa(x; u) p'(x))' = 1  on (0, 1),    p(0) = p(1) = 0,

with the parametrised diffusion coefficient

    kappa(x; u) = 1/100 + sum_{j=1}^K u_j / (200 (K+1)) * sin(2 pi j x),

which is uniformly elliptic for u in [-1, 1]^K.  Discretisation is by
piecewise-linear continuous finite elements on a uniform grid; the
coefficient enters the stiffness matrix through its element-midpoint values
(one-point Gauss), which preserves second-order accuracy.  The
parameter-to-observation map collects point values of the solution at the
observation locations (piecewise-linear interpolation for non-nodal points),
and the potential is the negative log-likelihood
``0.5 * ||y - G(u)||^2 / sigma_eta2`` of Gaussian observational noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded


def diffusion_field(x, u) -> np.ndarray:
    """Diffusion coefficient kappa(x; u) for x in [0, 1], u in [-1, 1]^K."""
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    K = u.shape[0]
    j = np.arange(1, K + 1)
    modes = np.sin(2.0 * np.pi * np.outer(x.ravel(), j))
    kappa = 0.01 + modes @ (u / (200.0 * (K + 1)))
    return kappa.reshape(x.shape)


@dataclass
class FEMSolution:
    """Nodal FEM solution with piecewise-linear evaluation."""

    nodes: np.ndarray
    values: np.ndarray
    mesh_h: float

    def __call__(self, x) -> np.ndarray:
        return np.interp(x, self.nodes, self.values)


def _n_cells(mesh_h: float) -> int:
    m = round(1.0 / mesh_h)
    if m < 2 or abs(m * mesh_h - 1.0) > 1e-12:
        raise ValueError(f"mesh_h must be 1/m for an integer m >= 2, got {mesh_h}")
    return m


def fem_solve(u, mesh_h: float) -> FEMSolution:
    """Solve the model PDE for parameters u on a uniform mesh of size mesh_h."""
    m = _n_cells(mesh_h)
    h = 1.0 / m
    nodes = np.linspace(0.0, 1.0, m + 1)
    kappa = diffusion_field((nodes[:-1] + nodes[1:]) / 2.0, u)
    if kappa.min() <= 0.0:
        raise ValueError("diffusion coefficient lost ellipticity; parameters outside [-1,1]^K?")
    # Tridiagonal system for the m-1 interior nodes, assembled in banded form.
    ab = np.zeros((3, m - 1))
    ab[0, 1:] = -kappa[1:-1] / h
    ab[1, :] = (kappa[:-1] + kappa[1:]) / h
    ab[2, :-1] = -kappa[1:-1] / h
    rhs = np.full(m - 1, h)
    interior = solve_banded((1, 1), ab, rhs)
    values = np.zeros(m + 1)
    values[1:-1] = interior
    return FEMSolution(nodes=nodes, values=values, mesh_h=h)


def default_observation_points(J: int) -> np.ndarray:
    """J evenly spaced interior points x_j = j / (J + 1)."""
    if J < 1:
        raise ValueError(f"need at least one observation, got J={J}")
    return np.arange(1, J + 1) / (J + 1.0)


@dataclass
class InverseProblem:
    """A fully specified instance of the model inverse problem."""

    K: int
    J: int
    sigma_eta2: float
    obs_points: np.ndarray
    data: np.ndarray
    mesh_h: float
    truth_mesh_h: float
    seed: int
    u_star: Optional[np.ndarray] = None

    def __post_init__(self):
        self.obs_points = np.asarray(self.obs_points, dtype=float)
        self.data = np.asarray(self.data, dtype=float)
        if self.obs_points.shape != (self.J,) or self.data.shape != (self.J,):
            raise ValueError("obs_points and data must both have length J")
        if not (np.all(self.obs_points > 0.0) and np.all(self.obs_points < 1.0)):
            raise ValueError("observation points must lie strictly inside (0, 1)")
        if np.any(np.diff(self.obs_points) <= 0.0):
            raise ValueError("observation points must be strictly increasing")
        if self.sigma_eta2 < 0.0:
            raise ValueError("noise variance must be nonnegative")
        _n_cells(self.mesh_h)
        _n_cells(self.truth_mesh_h)


def parameter_to_observation(ip: InverseProblem, u) -> np.ndarray:
    """G(u): solve at the reference mesh and observe at the x_j."""
    return fem_solve(u, ip.mesh_h)(ip.obs_points)


def observation_map(ip: InverseProblem, U) -> np.ndarray:
    """G applied to each row of an (M, K) parameter array; returns (M, J)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    out = np.empty((U.shape[0], ip.J))
    for i, u in enumerate(U):
        out[i] = parameter_to_observation(ip, u)
    return out


def potential(ip: InverseProblem, u) -> float:
    """Negative log-likelihood Phi(u) = ||y - G(u)||^2 / (2 sigma_eta2)."""
    resid = ip.data - parameter_to_observation(ip, u)
    return float(resid @ resid / (2.0 * ip.sigma_eta2))


def potential_batch(ip: InverseProblem, U, G_values: Optional[np.ndarray] = None) -> np.ndarray:
    """Phi at each row of U; pass precomputed ``G_values`` to skip the solves."""
    if G_values is None:
        G_values = observation_map(ip, U)
    resid = ip.data[None, :] - G_values
    return np.einsum("ij,ij->i", resid, resid) / (2.0 * ip.sigma_eta2)


def generate_data(
    K: int,
    J: int,
    sigma_eta2: float = 1.0,
    mesh_h: float = 1.0 / 32,
    truth_mesh_h: float = 1.0 / 1024,
    seed: int = 0,
    u_star=None,
    obs_points=None,
) -> InverseProblem:
    """Draw a truth from the prior, solve on the fine mesh and add noise.

    The truth (if not supplied) is uniform on [-1, 1]^K; data are
    ``y_j = p(x_j; u*) + eta_j`` with ``eta ~ N(0, sigma_eta2 I)``, the
    solution being computed on the fine ``truth_mesh_h`` grid.  Everything is
    deterministic given the seed.
    """
    rng = np.random.default_rng(seed)
    if u_star is None:
        u_star = rng.uniform(-1.0, 1.0, size=K)
    u_star = np.asarray(u_star, dtype=float)
    if u_star.shape != (K,):
        raise ValueError(f"u_star must have shape ({K},)")
    if obs_points is None:
        obs_points = default_observation_points(J)
    truth = fem_solve(u_star, truth_mesh_h)
    y = truth(obs_points) + np.sqrt(sigma_eta2) * rng.standard_normal(J)
    return InverseProblem(
        K=K,
        J=J,
        sigma_eta2=sigma_eta2,
        obs_points=obs_points,
        data=y,
        mesh_h=mesh_h,
        truth_mesh_h=truth_mesh_h,
        seed=seed,
        u_star=u_star,
    )


def _fmt_floats(arr) -> str:
    return ",".join(repr(float(v)) for v in np.atleast_1d(arr))


def save_problem(ip: InverseProblem, path) -> None:
    """Serialise the problem to a key-value file that round-trips bit-exactly."""
    lines = [
        f"K = {ip.K}",
        f"J = {ip.J}",
        f"sigma_eta2 = {ip.sigma_eta2!r}",
        f"mesh_h = {ip.mesh_h!r}",
        f"truth_mesh_h = {ip.truth_mesh_h!r}",
        f"seed = {ip.seed}",
        f"obs_points = {_fmt_floats(ip.obs_points)}",
        f"data = {_fmt_floats(ip.data)}",
    ]
    if ip.u_star is not None:
        lines.append(f"u_star = {_fmt_floats(ip.u_star)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_problem(path) -> InverseProblem:
    raw = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip()
    parse_list = lambda s: np.array([float(v) for v in s.split(",")])
    return InverseProblem(
        K=int(raw["K"]),
        J=int(raw["J"]),
        sigma_eta2=float(raw["sigma_eta2"]),
        obs_points=parse_list(raw["obs_points"]),
        data=parse_list(raw["data"]),
        mesh_h=float(raw["mesh_h"]),
        truth_mesh_h=float(raw["truth_mesh_h"]),
        seed=int(raw["seed"]),
        u_star=parse_list(raw["u_star"]) if "u_star" in raw else None,
    )
