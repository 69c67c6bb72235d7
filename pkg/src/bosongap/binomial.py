"""Achievability bounds for gapped binomial codes under Gaussian dephasing."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import erfc, gammaln, logsumexp

from ._parallel import ordered_map
from .nogo import epsilon_g_sigma

__all__ = [
    "AchievabilityParams",
    "BinomialOptimum",
    "QuadratureError",
    "log_epsilon_bin_theta",
    "epsilon_bin_theta",
    "gaussian_tail",
    "epsilon_bin",
    "default_phi_grid",
    "optimize_epsilon_bin",
    "region_sweep",
    "REGION_COLUMNS",
]

REGION_COLUMNS = ("sigma", "eps_bin_raw", "eps_bin_clipped", "D_opt", "phi_opt", "eps_nogo")


class QuadratureError(ArithmeticError):
    """Gauss-Legendre estimate changed too much when the node count doubled."""


def default_phi_grid(sigma: float, points: int = 60, refine: int = 1) -> np.ndarray:
    """``points`` log-spaced cutoffs strictly inside (sigma/2, 15 sigma).

    ``refine`` must be a power of two; the refined grid contains the
    coarser one.
    """
    n = (points + 1) * refine + 1
    return np.geomspace(0.5 * sigma, 15.0 * sigma, n)[1:-1]


@dataclass(frozen=True)
class AchievabilityParams:
    D_min: int = 2
    D_max: int = 50
    phi_points: int = 60
    quad_nodes: int = 64
    stirling: bool = False

    def __post_init__(self):
        if self.D_min < 2:
            raise ValueError(f"D_min must be >= 2 to correct gain and loss, got {self.D_min}")
        if self.D_max < self.D_min:
            raise ValueError(f"D_max={self.D_max} < D_min={self.D_min}")
        if self.phi_points < 1:
            raise ValueError(f"phi_points must be >= 1, got {self.phi_points}")
        if self.quad_nodes < 8:
            raise ValueError(f"quad_nodes must be >= 8, got {self.quad_nodes}")

    @property
    def D_range(self) -> range:
        return range(self.D_min, self.D_max + 1)


def _log_prefactor(D: int, g: int, stirling: bool) -> float:
    """log K, where e_theta = K |theta|^{D+1}."""
    if D < 0 or g < 1:
        raise ValueError(f"need D >= 0 and g >= 1, got D={D}, g={g}")
    n = D + 1
    j = np.arange(1, 2 * D + 2, dtype=float)
    log_w = 0.5 * (gammaln(2 * D + 2) - gammaln(j + 1) - gammaln(2 * D + 2 - j))
    log_x = math.log(g) + np.log(j)
    if stirling:
        log_terms = n * (1.0 + log_x - math.log(n)) - 0.5 * math.log(2 * math.pi * n)
    else:
        log_terms = n * log_x - gammaln(n + 1)
    return float(logsumexp(log_w + log_terms)) - D * math.log(2.0)


def log_epsilon_bin_theta(theta, D: int, g: int, stirling: bool = False):
    """log of the binomial-code truncation error bound at rotation angle theta.

    Default: 2^{-D} sum_j sqrt(C(2D+1, j)) (|theta| g j)^{D+1} / (D+1)!.
    ``stirling`` replaces x^n/n! by (e x / n)^n / sqrt(2 pi n) with n = D+1.
    """
    theta = np.abs(np.asarray(theta, dtype=float))
    with np.errstate(divide="ignore"):
        return (D + 1) * np.log(theta) + _log_prefactor(D, g, stirling)


def epsilon_bin_theta(theta, D: int, g: int, stirling: bool = False):
    out = np.exp(log_epsilon_bin_theta(theta, D, g, stirling))
    return float(out) if np.ndim(out) == 0 else out


def gaussian_tail(phi, sigma: float):
    """2 P(theta > phi) for theta ~ N(0, sigma^2), i.e. erfc(phi / (sigma sqrt 2))."""
    phi = np.asarray(phi, dtype=float)
    if not np.all(phi > 0):
        raise ValueError(f"phi must be > 0, got {phi}")
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    out = erfc(phi / (sigma * math.sqrt(2.0)))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=16)
def _legendre01(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), w


def _central_integrals(sigma, D, g, phis, nodes, stirling):
    """int_{-phi}^{phi} p(theta) (e_theta + 2 e_theta^2) dtheta for each phi.

    The integrand is even, so Gauss-Legendre runs on [0, phi] and is
    doubled; the |theta|^{D+1} kink at 0 then sits on the boundary.
    """
    u, w = _legendre01(nodes)
    phis = np.asarray(phis, dtype=float)
    theta = phis[:, None] * u[None, :]
    log_k = _log_prefactor(D, g, stirling)
    with np.errstate(divide="ignore"):
        le = (D + 1) * np.log(theta) + log_k
    log_p = -0.5 * (theta / sigma) ** 2 - math.log(sigma * math.sqrt(2 * math.pi))
    # e + 2 e^2 = e (1 + 2 e), kept in log space so large D cannot overflow
    with np.errstate(over="ignore"):
        vals = np.exp(log_p + le + np.logaddexp(0.0, math.log(2.0) + le))
        return phis * (vals @ w)


def _epsilon_bin_many(sigma, g, D, phis, quad_nodes, stirling, rtol):
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    tail = gaussian_tail(phis, sigma)
    coarse = _central_integrals(sigma, D, g, phis, quad_nodes, stirling)
    fine = _central_integrals(sigma, D, g, phis, 2 * quad_nodes, stirling)
    value = 0.5 * fine + tail
    with np.errstate(invalid="ignore"):
        bad = np.isfinite(value) & (0.5 * np.abs(fine - coarse) > rtol * value)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise QuadratureError(
            f"epsilon_bin not converged for sigma={sigma}, g={g}, D={D}, phi={phis[i]}: "
            f"{quad_nodes} nodes -> {0.5 * coarse[i] + tail[i]:.12g}, "
            f"{2 * quad_nodes} nodes -> {value[i]:.12g}"
        )
    return np.where(np.isfinite(value), value, np.inf)


def epsilon_bin(sigma: float, g: int, D: int, phi: float, quad_nodes: int = 64,
                stirling: bool = False, rtol: float = 1e-8) -> float:
    """Raw (unclipped) recovery-error bound for the binomial code.

    (1/2) int_{-phi}^{phi} p(theta) (e_theta + 2 e_theta^2) dtheta + 2 int_phi^inf p.
    The quadrature is repeated with twice the nodes; a relative change
    above ``rtol`` raises QuadratureError.
    """
    return float(_epsilon_bin_many(sigma, g, D, phi, quad_nodes, stirling, rtol)[0])


@dataclass(frozen=True)
class BinomialOptimum:
    eps: float
    D_opt: int
    phi_opt: float
    grid: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def eps_clipped(self) -> float:
        return min(self.eps, 1.0)


def optimize_epsilon_bin(sigma: float, g: int, params: AchievabilityParams | None = None,
                         phi_grid=None) -> BinomialOptimum:
    """Exhaustive scan over D and the cutoff phi; ties go to smaller D, then smaller phi."""
    params = params or AchievabilityParams()
    if phi_grid is None:
        phis = default_phi_grid(sigma, params.phi_points)
    else:
        phis = np.sort(np.asarray(phi_grid, dtype=float))
    Ds = list(params.D_range)
    grid = np.empty((len(Ds), len(phis)))
    best = (math.inf, Ds[0], float(phis[0]))
    for a, D in enumerate(Ds):
        grid[a] = _epsilon_bin_many(sigma, g, D, phis, params.quad_nodes, params.stirling, 1e-8)
        b = int(np.argmin(grid[a]))  # first occurrence: smallest phi among ties
        if grid[a, b] < best[0]:
            best = (float(grid[a, b]), D, float(phis[b]))
    return BinomialOptimum(best[0], best[1], best[2], grid)


def _region_row(args):
    sigma, g, params = args
    opt = optimize_epsilon_bin(sigma, g, params)
    return {
        "sigma": float(sigma),
        "eps_bin_raw": opt.eps,
        "eps_bin_clipped": opt.eps_clipped,
        "D_opt": opt.D_opt,
        "phi_opt": opt.phi_opt,
        "eps_nogo": epsilon_g_sigma(g, float(sigma), 1).value,
    }


def region_sweep(g: int, sigma_grid, params: AchievabilityParams | None = None, jobs: int = 1) -> list[dict]:
    """Optimized binomial-code bound next to the single-mode no-go bound, one row per sigma."""
    params = params or AchievabilityParams()
    return ordered_map(_region_row, [(float(s), g, params) for s in sigma_grid], jobs)
