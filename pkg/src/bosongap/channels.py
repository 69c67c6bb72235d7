"""Noise channels on truncated Fock space.

Gaussian dephasing is applied as an entrywise mask (exact) or by
quadrature over the rotation angle (the integral form); the two are kept
separate so each can check the other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy

from .fock import HermitianOperator, TruncationConfig, number_grid

__all__ = [
    "KrausChannel",
    "DephasingParams",
    "dephasing_mask",
    "dephase_apply",
    "dephase_by_quadrature",
    "amp_damp_kraus",
    "apply_kraus",
    "mix_apply",
    "recovery_kraus",
    "qubit_dephasing_apply",
    "DEFAULT_QUAD_NODES",
]

DEFAULT_QUAD_NODES = 96


@dataclass(frozen=True)
class KrausChannel:
    kraus: tuple
    label: str
    trunc: TruncationConfig
    # flat indices on which sum K^dagger K is the identity; None means everywhere
    valid_span: tuple | None = field(default=None)

    def __post_init__(self):
        ops = tuple(np.array(K, dtype=np.complex128) for K in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = self.trunc.dim
        for i, K in enumerate(ops):
            if K.shape != (d, d):
                raise ValueError(f"Kraus operator {i} has shape {K.shape}, expected ({d}, {d})")
            K.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    def __len__(self):
        return len(self.kraus)

    def gram(self) -> np.ndarray:
        return sum(K.conj().T @ K for K in self.kraus)

    def completeness_defect(self, span=None) -> float:
        """max |sum K^dagger K - 1| restricted to ``span`` (default: the valid span)."""
        span = self.valid_span if span is None else span
        G = self.gram()
        eye = np.eye(G.shape[0])
        if span is not None:
            idx = np.asarray(span, dtype=int)
            G, eye = G[np.ix_(idx, idx)], eye[np.ix_(idx, idx)]
        return float(np.abs(G - eye).max())


@dataclass(frozen=True)
class DephasingParams:
    sigma: float
    g: int = 1
    modes: int = 1

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.g < 1:
            raise ValueError(f"g must be >= 1, got {self.g}")
        if self.modes < 1:
            raise ValueError(f"modes must be >= 1, got {self.modes}")


def _check_sigma(sigma):
    if not (np.isfinite(sigma) and sigma >= 0):
        raise ValueError(f"sigma must be a finite real >= 0, got {sigma}")


def _as_op(rho) -> HermitianOperator:
    if not isinstance(rho, HermitianOperator):
        raise TypeError(f"expected HermitianOperator, got {type(rho).__name__}")
    return rho


def _hermitian(m: np.ndarray, trunc: TruncationConfig) -> HermitianOperator:
    return HermitianOperator(0.5 * (m + m.conj().T), trunc)


def dephasing_mask(trunc: TruncationConfig, sigma: float) -> np.ndarray:
    """exp(-||j - k||^2 sigma^2 / 2) over all pairs of multi-indices."""
    _check_sigma(sigma)
    n = number_grid(trunc)
    dist2 = ((n[:, None, :] - n[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-0.5 * sigma**2 * dist2)


def dephase_apply(rho: HermitianOperator, sigma: float) -> HermitianOperator:
    """Gaussian dephasing on every mode, E_sigma^{(x)N}(rho)."""
    rho = _as_op(rho)
    return HermitianOperator(rho.entries * dephasing_mask(rho.trunc, sigma), rho.trunc)


def _angle_rule(sigma: float, nodes: int, max_shift: int):
    """Nodes and weights for integrating f(theta) against the N(0, sigma^2) density.

    Integer photon numbers make the integrand 2pi-periodic, so the
    trapezoid rule on the wrapped density is spectrally exact up to
    aliasing of order exp(-((nodes - max_shift) sigma)^2 / 2). When that
    estimate is not negligible (narrow Gaussians) Gauss-Hermite with
    theta = sigma sqrt(2) x is used instead; it resolves the low
    frequencies present at small sigma.
    """
    alias = (nodes - max_shift) * sigma
    if alias > 0 and 0.5 * alias**2 > 36.0:
        theta = -np.pi + 2 * np.pi * np.arange(nodes) / nodes
        L = int(math.ceil(9 * sigma / (2 * np.pi))) + 1
        wraps = theta[:, None] + 2 * np.pi * np.arange(-L, L + 1)[None, :]
        dens = np.exp(-0.5 * (wraps / sigma) ** 2).sum(axis=1) / (sigma * math.sqrt(2 * math.pi))
        return theta, dens * (2 * np.pi / nodes)
    x, w = np.polynomial.hermite.hermgauss(nodes)
    return sigma * math.sqrt(2.0) * x, w / math.sqrt(math.pi)


def dephase_by_quadrature(rho: HermitianOperator, sigma: float,
                          quad_nodes: int = DEFAULT_QUAD_NODES) -> HermitianOperator:
    """Integral form: sum_i w_i e^{-i theta_i n} rho e^{i theta_i n}, mode by mode."""
    rho = _as_op(rho)
    _check_sigma(sigma)
    if quad_nodes < 16:
        raise ValueError(f"quad_nodes must be >= 16, got {quad_nodes}")
    if sigma == 0:
        return rho
    trunc = rho.trunc
    n = number_grid(trunc)
    theta, weights = _angle_rule(sigma, quad_nodes, trunc.n_max)
    out = np.array(rho.entries)
    for m in range(trunc.modes):
        acc = np.zeros_like(out)
        for th, w in zip(theta, weights):
            u = np.exp(-1j * th * n[:, m])
            acc += w * (u[:, None] * out * u.conj()[None, :])
        out = acc
    return _hermitian(out, trunc)


def _single_mode(trunc: TruncationConfig, what: str):
    if trunc.modes != 1:
        raise ValueError(f"{what} is defined per mode; got a {trunc.modes}-mode truncation")


def amp_damp_kraus(gamma: float, trunc: TruncationConfig) -> KrausChannel:
    """Bosonic loss: A_k = sum_m sqrt(C(m,k) (1-gamma)^(m-k) gamma^k) |m-k><m|."""
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    _single_mode(trunc, "amplitude damping")
    d = trunc.levels
    if gamma == 0:
        return KrausChannel((np.eye(d),), "amp_damp(0)", trunc)
    ops = []
    for k in range(d):
        m = np.arange(k, d)
        logc = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
        logw = logc + xlogy(m - k, 1 - gamma) + xlogy(k, gamma)
        A = np.zeros((d, d))
        A[m - k, m] = np.exp(0.5 * logw)
        ops.append(A)
    return KrausChannel(tuple(ops), f"amp_damp({gamma:g})", trunc)


def apply_kraus(ch: KrausChannel, rho: HermitianOperator) -> HermitianOperator:
    rho = _as_op(rho)
    if ch.trunc.dim != rho.trunc.dim:
        raise ValueError(f"dimension mismatch: channel acts on {ch.trunc.dim}, state has {rho.trunc.dim}")
    out = sum(K @ rho.entries @ K.conj().T for K in ch.kraus)
    return _hermitian(out, rho.trunc)


def mix_apply(rho: HermitianOperator, lam: float, sigma: float, gamma: float) -> HermitianOperator:
    """lam * E_sigma(rho) + (1 - lam) * A_gamma(rho)."""
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    rho = _as_op(rho)
    deph = dephase_apply(rho, sigma).entries
    damp = apply_kraus(amp_damp_kraus(gamma, rho.trunc), rho).entries
    return _hermitian(lam * deph + (1 - lam) * damp, rho.trunc)


def recovery_kraus(g: int, trunc: TruncationConfig) -> KrausChannel:
    """R_j = sum_{k>=1} |kg><kg-j| for j = 0..g-1.

    Completeness only holds on photon numbers 1..floor(n_max/g)*g; that
    range is recorded as ``valid_span``.
    """
    if g < 1:
        raise ValueError(f"g must be >= 1, got {g}")
    _single_mode(trunc, "the recovery map")
    if trunc.n_max < 2 * g:
        raise ValueError(f"n_max={trunc.n_max} is too small for the {{|g>, |2g>}} qubit; need n_max >= {2 * g}")
    d = trunc.levels
    top = trunc.n_max // g
    ops = []
    for j in range(g):
        R = np.zeros((d, d))
        for k in range(1, top + 1):
            R[k * g, k * g - j] = 1.0
        ops.append(R)
    return KrausChannel(tuple(ops), f"recovery(g={g})", trunc, valid_span=tuple(range(1, top * g + 1)))


def qubit_dephasing_apply(rho2, p: float) -> np.ndarray:
    """(1-p) rho + p Z rho Z on a 2x2 matrix."""
    if not 0 <= p <= 0.5:
        raise ValueError(f"p must lie in [0, 1/2], got {p}")
    rho2 = np.asarray(rho2, dtype=np.complex128)
    if rho2.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho2.shape}")
    Z = np.diag([1.0, -1.0])
    return (1 - p) * rho2 + p * (Z @ rho2 @ Z)
