"""Randomly shifted rank-1 lattice quadrature, Hellinger/TV metrics, rate fits.

A rank-1 lattice rule with M points, generating vector z and random shift
Delta has nodes ``frac(i * z / M + Delta)`` in [0, 1)^K, mapped to the prior
domain by ``u = 2 t - 1`` (the uniform prior absorbs the constant Jacobian
into plain averaging).  Averaging S independently shifted copies gives both
the integral estimate and a standard error from the shift spread.

The default generating vectors below were produced by a component-by-component
search over the weighted Korobov space with product weights 1/j^2 (the
conventional weights for this rule family); an external vector file (ASCII,
one integer per line, optionally preceded by a dimension index) can be
supplied instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .forward_model import InverseProblem
from .posterior import (
    PosteriorSpec,
    SAMPLE_KINDS,
    density_at_nodes,
    realization_density,
)

# CBC-constructed vectors (alpha = 2, product weights 1/j^2), one per
# power-of-two point count, valid for up to 8 dimensions.
EMBEDDED_VECTORS = {
    256: (1, 75, 97, 209, 41, 55, 239, 65),
    512: (1, 149, 113, 193, 31, 243, 163, 203),
    1024: (1, 275, 167, 621, 707, 843, 921, 297),
    2048: (1, 1257, 591, 957, 1941, 177, 1295, 1701),
    4096: (1, 1557, 3009, 701, 2933, 321, 1649, 3889),
}


@dataclass
class QuadratureRule:
    """Shifted lattice nodes over [-1, 1]^dim.

    ``nodes`` has shape (n_shifts, n_points, dim); ``all_nodes`` flattens the
    shift axis.  Each shift is an independent estimate of any integral.
    """

    dim: int
    n_points: int
    n_shifts: int
    generating_vector: tuple
    shifts: np.ndarray
    nodes: np.ndarray
    seed: int

    @property
    def all_nodes(self) -> np.ndarray:
        return self.nodes.reshape(self.n_shifts * self.n_points, self.dim)

    def per_shift(self, values: np.ndarray) -> np.ndarray:
        """Reshape values sampled at ``all_nodes`` to (n_shifts, n_points)."""
        values = np.asarray(values)
        return values.reshape(self.n_shifts, self.n_points, *values.shape[1:])

    def integrate(self, values: np.ndarray):
        """Mean and shift standard error of a prior-measure integral.

        ``values`` are integrand values at ``all_nodes`` (or already shaped
        (n_shifts, n_points)).
        """
        v = values if np.asarray(values).ndim == 2 else self.per_shift(values)
        per_shift = v.mean(axis=1)
        mean = float(per_shift.mean())
        stderr = _shift_stderr(per_shift)
        return mean, stderr


def _shift_stderr(per_shift: np.ndarray) -> float:
    s = per_shift.shape[0]
    if s < 2:
        return 0.0
    return float(per_shift.std(ddof=1) / np.sqrt(s))


def load_generating_vector(path) -> tuple:
    """Read a generating vector from an ASCII file, one component per line.

    Lines may carry a single integer or a ``dim value`` pair; blank lines and
    ``#`` comments are skipped.
    """
    comps = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        comps.append(int(line.split()[-1]))
    if not comps:
        raise ValueError(f"no vector components found in {path}")
    return tuple(comps)


def lattice_rule(
    K: int,
    n_points: int,
    n_shifts: int = 8,
    seed: int = 0,
    generating_vector: Optional[Sequence[int]] = None,
    vector_path=None,
) -> QuadratureRule:
    """Build a randomly shifted rank-1 lattice rule over [-1, 1]^K."""
    if K < 1:
        raise ValueError(f"dimension must be >= 1, got {K}")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    if n_shifts < 1:
        raise ValueError(f"n_shifts must be >= 1, got {n_shifts}")
    if generating_vector is not None:
        z = tuple(int(c) for c in generating_vector)
    elif vector_path is not None:
        z = load_generating_vector(vector_path)
    else:
        if n_points not in EMBEDDED_VECTORS:
            raise ValueError(
                f"no embedded generating vector for n_points={n_points}; "
                f"available: {sorted(EMBEDDED_VECTORS)} (or supply a vector file)"
            )
        z = EMBEDDED_VECTORS[n_points]
    if len(z) < K:
        raise ValueError(f"generating vector has {len(z)} components, need {K}")
    z = np.array(z[:K], dtype=np.int64)
    rng = np.random.default_rng(seed)
    shifts = rng.random((n_shifts, K))
    i = np.arange(n_points, dtype=np.int64)
    base = (i[:, None] * z[None, :] % n_points) / float(n_points)
    t = (base[None, :, :] + shifts[:, None, :]) % 1.0
    return QuadratureRule(
        dim=K,
        n_points=n_points,
        n_shifts=n_shifts,
        generating_vector=tuple(int(c) for c in z),
        shifts=shifts,
        nodes=2.0 * t - 1.0,
        seed=seed,
    )


def hellinger_sq_shifts(rho_a: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    """Per-shift squared Hellinger distance from density values.

    Inputs are unnormalised density values shaped (n_shifts, n_points); each
    shift is normalised by its own quadrature mass, making every shift an
    independent estimate of d_Hell^2.
    """
    za = rho_a.mean(axis=1, keepdims=True)
    zb = rho_b.mean(axis=1, keepdims=True)
    diff = np.sqrt(rho_a / za) - np.sqrt(rho_b / zb)
    return 0.5 * np.mean(diff**2, axis=1)


def _densities(spec: PosteriorSpec, ip: InverseProblem, rule: QuadratureRule,
               cache: Optional[dict] = None) -> np.ndarray:
    if cache is not None and spec.kind in cache:
        return cache[spec.kind]
    rho = rule.per_shift(density_at_nodes(spec, ip, rule.all_nodes))
    if cache is not None:
        cache[spec.kind] = rho
    return rho


def hellinger(
    ip: InverseProblem,
    spec_a: PosteriorSpec,
    spec_b: PosteriorSpec,
    rule: QuadratureRule,
) -> float:
    """Hellinger distance between two posterior specs on a shared rule."""
    d2 = hellinger_sq_shifts(
        _densities(spec_a, ip, rule), _densities(spec_b, ip, rule)
    )
    return float(np.sqrt(d2.mean()))


def hellinger_sq_with_error(ip, spec_a, spec_b, rule):
    """(mean, shift standard error) of the squared Hellinger distance."""
    d2 = hellinger_sq_shifts(
        _densities(spec_a, ip, rule), _densities(spec_b, ip, rule)
    )
    return float(d2.mean()), _shift_stderr(d2)


def tv_bound_check(d_hell: float) -> float:
    """Total-variation bound sqrt(2) * d_Hell implied by a Hellinger distance."""
    if d_hell < 0:
        raise ValueError(f"Hellinger distance must be nonnegative, got {d_hell}")
    return float(np.sqrt(2.0) * d_hell)


def tv_direct(ip, spec_a, spec_b, rule):
    """Direct quadrature estimate of the total-variation distance.

    Returns (mean, shift standard error) of
    ``0.5 * E_mu0 |rho_a / Z_a - rho_b / Z_b|``.
    """
    rho_a = _densities(spec_a, ip, rule)
    rho_b = _densities(spec_b, ip, rule)
    za = rho_a.mean(axis=1, keepdims=True)
    zb = rho_b.mean(axis=1, keepdims=True)
    per_shift = 0.5 * np.mean(np.abs(rho_a / za - rho_b / zb), axis=1)
    return float(per_shift.mean()), _shift_stderr(per_shift)


def expected_hellinger_sq(
    ip: InverseProblem,
    sample_spec: PosteriorSpec,
    rule: QuadratureRule,
    n_realizations: int,
    seed: int,
    exact_density: Optional[np.ndarray] = None,
):
    """Monte Carlo mean of d_Hell^2(exact, sample realization).

    Each realization is one joint GP draw over all quadrature nodes
    (realization r depends only on (seed, r)); the result is the average over
    realizations of the shift-averaged squared distance, together with its
    realization standard error.
    """
    if sample_spec.kind not in SAMPLE_KINDS:
        raise ValueError(f"kind {sample_spec.kind!r} is not a sample kind")
    if exact_density is None:
        exact_density = density_at_nodes(
            PosteriorSpec(kind="exact"), ip, rule.all_nodes
        )
    rho_exact = rule.per_shift(exact_density)
    draws = sample_spec.emulator.sample_joint(rule.all_nodes, n_realizations, seed)
    rho_all = realization_density(sample_spec.kind, ip, draws)
    d2 = np.empty(n_realizations)
    for r in range(n_realizations):
        d2[r] = hellinger_sq_shifts(rho_exact, rule.per_shift(rho_all[r])).mean()
    stderr = float(d2.std(ddof=1) / np.sqrt(n_realizations)) if n_realizations > 1 else 0.0
    return float(d2.mean()), stderr


@dataclass(frozen=True)
class RateModel:
    """Power-law fit error ~ C1 * N**(-C2), with RMS log-residual."""

    C1: float
    C2: float
    residual: float

    def predict(self, N) -> np.ndarray:
        return self.C1 * np.asarray(N, dtype=float) ** (-self.C2)


def fit_rate(Ns, errors) -> RateModel:
    """Least-squares fit of log(error) = log(C1) - C2 * log(N)."""
    Ns = np.asarray(Ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if Ns.shape != errors.shape or Ns.ndim != 1:
        raise ValueError("Ns and errors must be 1-D arrays of equal length")
    if Ns.size < 3:
        raise ValueError(f"rate fit needs at least 3 points, got {Ns.size}")
    if np.any(errors <= 0.0) or np.any(Ns <= 0.0):
        raise ValueError("rate fit requires positive N and error values")
    logn, loge = np.log(Ns), np.log(errors)
    slope, intercept = np.polyfit(logn, loge, 1)
    resid = loge - (slope * logn + intercept)
    return RateModel(
        C1=float(np.exp(intercept)),
        C2=float(-slope),
        residual=float(np.sqrt(np.mean(resid**2))),
    )


def predicted_l2_sq_rate(nu: float, K: int) -> float:
    """Theoretical decay rate in N of the squared L2 emulator error on tensor grids."""
    return (2.0 * nu + K) / K


def predicted_sup_sq_rate(nu: float, K: int) -> float:
    """Theoretical decay rate in N of the squared sup emulator error on tensor grids."""
    return 2.0 * nu / K
