"""Capacity lower bounds for gapped codes under mixed dephasing and loss.

Entropies are in nats internally; rates are reported in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from ._parallel import ordered_map
from .channels import amp_damp_kraus, recovery_kraus
from .fock import TruncationConfig

__all__ = [
    "LN2",
    "EffectiveDephasing",
    "ArgmaxCheck",
    "ReductionReport",
    "p_from_sigma",
    "q_from_gamma",
    "xi_closed_form",
    "effective_dephasing",
    "binary_entropy",
    "hashing_rate",
    "hashing_rate_bias",
    "coherent_info_diag",
    "coherent_info_closed_form",
    "verify_argmax_half",
    "verify_reduction",
    "capacity_sweep",
    "CAPACITY_COLUMNS",
]

LN2 = math.log(2.0)
CAPACITY_COLUMNS = ("g", "lambda", "sigma", "gamma", "p", "q", "r", "Q_lower")


def p_from_sigma(g: int, sigma: float) -> float:
    """Qubit dephasing probability of E_sigma on span{|0>, |g>}: 1 - 2p = exp(-g^2 sigma^2 / 2)."""
    if not sigma >= 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return -0.5 * math.expm1(-0.5 * (g * sigma) ** 2)


def _xi_terms(g: int, gamma: float) -> np.ndarray:
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if g < 1:
        raise ValueError(f"g must be >= 1, got {g}")
    k = np.arange(g, dtype=float)
    log_c = 0.5 * (gammaln(g + 1) - gammaln(k + 1) - gammaln(g - k + 1)
                   + gammaln(2 * g + 1) - gammaln(k + 1) - gammaln(2 * g - k + 1))
    if gamma == 1:
        # exponent 3g/2 - k is positive for every k < g
        return np.zeros(g)
    return np.exp(log_c + (1.5 * g - k) * math.log1p(-gamma) + xlogy(k, gamma))


def xi_closed_form(g: int, gamma: float) -> float:
    """Off-diagonal survival factor of recovery-after-loss on span{|g>, |2g>}."""
    return float(_xi_terms(g, gamma).sum())


def q_from_gamma(g: int, gamma: float) -> float:
    return 0.5 * (1.0 - float(_xi_terms(g, gamma).sum()))


@dataclass(frozen=True)
class EffectiveDephasing:
    p: float
    q: float
    r: float
    xi: float
    lam: float


def effective_dephasing(g: int, lam: float, sigma: float, gamma: float) -> EffectiveDephasing:
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    p = p_from_sigma(g, sigma)
    xi = xi_closed_form(g, gamma)
    q = 0.5 * (1.0 - xi)
    return EffectiveDephasing(p, q, lam * p + (1 - lam) * q, xi, lam)


def binary_entropy(x, base: float = 2.0):
    x = np.asarray(x, dtype=float)
    h = -(xlogy(x, x) + xlogy(1 - x, 1 - x)) / math.log(base)
    return float(h) if h.ndim == 0 else h


def hashing_rate(r: float) -> float:
    """1 + r log2 r + (1-r) log2 (1-r), qubits per channel use."""
    if not 0 <= r <= 0.5:
        raise ValueError(f"r must lie in [0, 1/2], got {r}")
    if r >= 0.25:
        # 0.5 - r is exact here, and the bias form avoids cancellation near r = 1/2
        return hashing_rate_bias(0.5 - r)
    return 1.0 - binary_entropy(r)


def hashing_rate_bias(x: float) -> float:
    """Hashing rate at r = 1/2 - x, accurate for small x."""
    if not 0 <= x <= 0.5:
        raise ValueError(f"x must lie in [0, 1/2], got {x}")
    if x == 0.5:
        return 1.0
    y = 2.0 * x
    if y < 0.25:
        # (1+y) ln(1+y) + (1-y) ln(1-y) = sum_k y^{2k} / (k (2k-1)); 28 terms reach 1e-34
        k = np.arange(1, 29, dtype=float)
        return float(np.sum(y ** (2 * k) / (k * (2 * k - 1)))) / (2 * LN2)
    return ((1 + y) * math.log1p(y) + (1 - y) * math.log1p(-y)) / (2 * LN2)


def _entropy_nats(rho: np.ndarray) -> np.ndarray:
    lam = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    return -xlogy(lam, lam).sum(axis=-1)


def coherent_info_diag(p: float, r):
    """S(D(tau_r)) - S(D^c(tau_r)) in nats, tau_r = (1-r)|0><0| + r|g><g|.

    D has Kraus operators sqrt(1-p) 1 and sqrt(p) Z; the environment state
    has entries tr(D_i tau D_j^dagger). ``r`` may be an array.
    """
    if not 0 <= p <= 0.5:
        raise ValueError(f"p must lie in [0, 1/2], got {p}")
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r > 1)):
        raise ValueError("r must lie in [0, 1]")
    kraus = np.array([math.sqrt(1 - p) * np.eye(2), math.sqrt(p) * np.diag([1.0, -1.0])])
    tau = np.zeros(r.shape + (2, 2))
    tau[..., 0, 0], tau[..., 1, 1] = 1 - r, r
    out = np.einsum("kab,...bc,kdc->...ad", kraus, tau, kraus)
    env = np.einsum("iab,...bc,jac->...ij", kraus, tau, kraus)
    val = _entropy_nats(out) - _entropy_nats(env)
    return float(val) if val.ndim == 0 else val


def coherent_info_closed_form(p: float) -> float:
    """log(2 - 2p) - 2p artanh(1 - 2p), nats; the value at the maximally mixed input."""
    if p == 0:
        return LN2
    return math.log(2 - 2 * p) - 2 * p * math.atanh(1 - 2 * p)


@dataclass(frozen=True)
class ArgmaxCheck:
    argmax_r: float
    max_I: float
    gradient_at_half: float
    grid_step: float
    symmetric_defect: float
    ok: bool


def verify_argmax_half(p: float, grid_size: int = 10_000, h: float = 1e-5,
                       grad_tol: float = 1e-8) -> ArgmaxCheck:
    """Scan I_coh(p, r) over r and check the maximizer is r = 1/2 with zero slope there."""
    if not 0 < p < 0.5:
        raise ValueError(f"p must lie in (0, 1/2), got {p}")
    r = np.linspace(0.0, 1.0, grid_size + 1)
    vals = coherent_info_diag(p, r)
    i = int(np.argmax(vals))
    step = 1.0 / grid_size
    grad = (coherent_info_diag(p, 0.5 + h) - coherent_info_diag(p, 0.5 - h)) / (2 * h)
    sym = float(np.abs(vals - vals[::-1]).max())
    ok = abs(r[i] - 0.5) <= step and abs(grad) < grad_tol
    return ArgmaxCheck(float(r[i]), float(vals[i]), float(grad), step, sym, bool(ok))


@dataclass(frozen=True)
class ReductionReport:
    g: int
    gamma: float
    xi_matrix: float
    xi_closed: float
    xi_error: float
    recovery_defect: float
    # populations after recovery-after-loss, by input basis state
    g_to_g: float
    g_lost: float
    twog_to_twog: float
    twog_to_g: float
    twog_lost: float
    ok: bool


def verify_reduction(g: int, gamma: float, trunc: TruncationConfig | None = None,
                     tol: float = 1e-12) -> ReductionReport:
    """Compose recovery with amplitude damping and read off its action on {|g>, |2g>}.

    Checks the off-diagonal factor against ``xi_closed_form``. Diagonal
    populations are measured and reported, not asserted.
    """
    trunc = trunc or TruncationConfig(2 * g, 1)
    if trunc.n_max < 2 * g:
        raise ValueError(f"n_max={trunc.n_max} too small; need n_max >= {2 * g}")
    rec = recovery_kraus(g, trunc)
    defect = rec.completeness_defect()
    if defect > tol:
        raise ArithmeticError(f"recovery map is not complete on its valid span (defect {defect:.3e})")
    damp = amp_damp_kraus(gamma, trunc)
    ops = [R @ A for R in rec.kraus for A in damp.kraus]
    d = trunc.levels

    def channel(i, j):
        E = np.zeros((d, d))
        E[i, j] = 1.0
        return sum(K @ E @ K.conj().T for K in ops)

    a, b = g, 2 * g
    off = channel(a, b)
    xi_m = float(off[a, b].real)
    xi_c = xi_closed_form(g, gamma)
    out_g, out_2g = channel(a, a).real, channel(b, b).real
    err = abs(xi_m - xi_c)
    return ReductionReport(
        g, gamma, xi_m, xi_c, err, defect,
        float(out_g[a, a]), float(1 - np.trace(out_g)),
        float(out_2g[b, b]), float(out_2g[a, a]), float(1 - np.trace(out_2g)),
        bool(err <= tol),
    )


def _capacity_row(args):
    g, lam, sigma, gamma = args
    eff = effective_dephasing(g, lam, sigma, gamma)
    # 1 - 2r = lam (1 - 2p) + (1 - lam) xi, formed without subtracting from 1/2
    bias = 0.5 * (lam * math.exp(-0.5 * (g * sigma) ** 2) + (1 - lam) * eff.xi)
    return {
        "g": g,
        "lambda": lam,
        "sigma": sigma,
        "gamma": gamma,
        "p": eff.p,
        "q": eff.q,
        "r": eff.r,
        "Q_lower": max(0.0, hashing_rate_bias(min(bias, 0.5))),
    }


def capacity_sweep(g: int, lam: float, sigma_grid, gamma_grid, jobs: int = 1) -> list[dict]:
    """Hashing-rate lower bound over a (sigma, gamma) grid, rows ordered sigma-major."""
    cells = [(int(g), float(lam), float(s), float(c)) for s in sigma_grid for c in gamma_grid]
    return ordered_map(_capacity_row, cells, jobs)
