"""No-go bounds for gapped codes under Gaussian dephasing."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import dephase_apply
from .codes import GappedCode
from .fock import FockVector, HermitianOperator, outer_difference, trace_norm

__all__ = [
    "BoundResult",
    "Lemma4Check",
    "Lemma2Check",
    "ASYMPTOTE",
    "lattice_sum",
    "epsilon_g_sigma",
    "epsilon_geometric",
    "g_sigma_thres",
    "sigma_thres",
    "lemma4_bound",
    "epsilon_from_delta",
    "verify_lemma4",
    "verify_lemma2",
]

SQRT2 = math.sqrt(2.0)
ASYMPTOTE = 1.0 - 1.0 / SQRT2


@dataclass(frozen=True)
class BoundResult:
    value: float
    truncation_error: float
    params: tuple
    method: str

    def __post_init__(self):
        if not self.truncation_error >= 0:
            raise ValueError(f"truncation_error must be >= 0, got {self.truncation_error}")
        if self.value > 1:
            raise ValueError(f"bound value {self.value} exceeds 1")


def _validate(g, sigma, N):
    if g < 1:
        raise ValueError(f"g must be >= 1, got {g}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be finite and > 0 (the lattice sum diverges at 0), got {sigma}")


def _row_sum(c: float, tail_tol: float) -> tuple[float, float]:
    """s = sum_{k>=1} exp(-c k^2) and a rigorous bound on what was dropped."""
    if c >= 0.05:
        # k^2 >= (K+1)^2 + 2(K+1)(k-K-1) for k > K bounds the tail by a geometric series
        K = 1
        while True:
            t = math.exp(-c * (K + 1) ** 2) / -math.expm1(-2 * c * (K + 1))
            if t < tail_tol or t == 0.0:
                break
            K += 1
        k = np.arange(1, K + 1, dtype=float)
        return float(np.exp(-c * k * k).sum()), t
    # Poisson summation: sum_{k in Z} e^{-c k^2} = sqrt(pi/c) sum_{m in Z} e^{-pi^2 m^2 / c}
    q = math.pi**2 / c
    M = 1
    while True:
        t = math.sqrt(math.pi / c) * math.exp(-q * (M + 1) ** 2) / -math.expm1(-2 * q * (M + 1))
        if t < tail_tol:
            break
        M += 1
    m = np.arange(1, M + 1, dtype=float)
    dual = 1.0 + 2.0 * np.exp(-q * m * m).sum()
    return 0.5 * (math.sqrt(math.pi / c) * dual - 1.0), t


def lattice_sum(g: int, sigma: float, N: int = 1, tail_tol: float = 1e-12) -> tuple[float, float]:
    """sum over nonzero k in N^N of exp(-g^2 ||k||^2 sigma^2 / 2), with a tail bound.

    The summand factorizes over modes, so the sum is (1 + s)^N - 1 with s
    the single-mode row sum.
    """
    _validate(g, sigma, N)
    c = 0.5 * (g * sigma) ** 2
    s, t = _row_sum(c, tail_tol)
    total = math.expm1(N * math.log1p(s))
    tail = (1 + s + t) ** N - (1 + s) ** N
    return total, max(tail, 0.0)


def epsilon_from_delta(delta: float) -> float:
    return 1.0 - delta / 2.0


def lemma4_bound(g: int, sigma: float, N: int = 1) -> float:
    """sqrt(2) + 2 sqrt(2) * lattice_sum."""
    s, _ = lattice_sum(g, sigma, N)
    return SQRT2 + 2 * SQRT2 * s


def epsilon_g_sigma(g: int, sigma: float, N: int = 1) -> BoundResult:
    s, tail = lattice_sum(g, sigma, N)
    value = 1.0 - (1.0 + 2.0 * s) / SQRT2
    return BoundResult(value, SQRT2 * tail, (g, sigma, N), "lattice_sum")


def epsilon_geometric(g: int, sigma: float, N: int = 1, paper_literal: bool = False) -> BoundResult:
    """Closed-form relaxation of epsilon_g_sigma via a geometric series per mode.

    With ``paper_literal`` the typeset variant with 1 - N e^{-g^2 sigma^2/2}
    in the denominator is evaluated instead; it is -inf where that
    denominator is not positive.
    """
    _validate(g, sigma, N)
    x = 0.5 * (g * sigma) ** 2
    if paper_literal:
        den = 1.0 - N * math.exp(-x)
        value = -math.inf if den <= 0 else 1.0 - (1.0 + 2.0 * (1.0 / den - 1.0)) / SQRT2
        return BoundResult(value, 0.0, (g, sigma, N), "geometric_literal")
    # (1 - e^{-x})^{-N} = exp(-N log(1 - e^{-x}))
    inv = math.exp(-N * math.log(-math.expm1(-x)))
    return BoundResult(1.0 - (2.0 * inv - 1.0) / SQRT2, 0.0, (g, sigma, N), "geometric")


def g_sigma_thres(N: int = 1, paper_literal: bool = False) -> float:
    """Value of g*sigma where the geometric bound crosses zero.

    Solves (1 - e^{-x^2/2})^N = 2 sqrt(2) - 2. The ``paper_literal`` form
    1 - 2^{3N/2} (2 + sqrt 2)^{-1/N} agrees only at N = 1 and is nan where
    its log argument is not positive.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if paper_literal:
        arg = 1.0 - 2.0 ** (1.5 * N) * (2.0 + SQRT2) ** (-1.0 / N)
        return math.sqrt(-2.0 * math.log(arg)) if 0 < arg < 1 else math.nan
    root = (2 * SQRT2 - 2) ** (1.0 / N)
    return math.sqrt(-2.0 * math.log1p(-root))


def sigma_thres(g: int, N: int = 1, paper_literal: bool = False) -> float:
    if g < 1:
        raise ValueError(f"g must be >= 1, got {g}")
    return g_sigma_thres(N, paper_literal) / g


@dataclass(frozen=True)
class Lemma4Check:
    norm_pm: float
    norm_pmi: float
    bound: float
    holds: bool

    @property
    def min_norm(self) -> float:
        return min(self.norm_pm, self.norm_pmi)


def verify_lemma4(code: GappedCode, sigma: float, atol: float = 1e-9) -> Lemma4Check:
    """Trace norms of dephased |+><+| - |-><-| and |+i><+i| - |-i><-i| against the bound."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    a, b = code.zero_L.amplitudes, code.one_L.amplitudes
    trunc = code.trunc
    r2 = SQRT2
    plus, minus = FockVector((a + b) / r2, trunc), FockVector((a - b) / r2, trunc)
    plus_i, minus_i = FockVector((a + 1j * b) / r2, trunc), FockVector((a - 1j * b) / r2, trunc)
    n_pm = trace_norm(dephase_apply(outer_difference(plus, minus), sigma))
    n_pmi = trace_norm(dephase_apply(outer_difference(plus_i, minus_i), sigma))
    s, tail = lattice_sum(code.g, sigma, code.modes)
    bound = r2 + 2 * r2 * s
    holds = min(n_pm, n_pmi) <= bound + atol + 2 * r2 * tail
    return Lemma4Check(n_pm, n_pmi, bound, bool(holds))


@dataclass(frozen=True)
class Lemma2Check:
    delta: float
    errors: tuple
    holds: bool


def verify_lemma2(rho1: HermitianOperator, rho2: HermitianOperator, noise, recovery,
                  atol: float = 1e-9) -> Lemma2Check:
    """For orthogonal states rho1, rho2 and any recovery, some ||rho_i - R(N(rho_i))||_1 >= 1 - delta/2.

    ``noise`` and ``recovery`` are callables HermitianOperator -> HermitianOperator;
    delta is ||N(rho1 - rho2)||_1.
    """
    diff = HermitianOperator(rho1.entries - rho2.entries, rho1.trunc)
    delta = trace_norm(noise(diff))
    errs = []
    for rho in (rho1, rho2):
        out = recovery(noise(rho))
        errs.append(trace_norm(HermitianOperator(rho.entries - out.entries, rho.trunc)))
    return Lemma2Check(delta, tuple(errs), max(errs) >= epsilon_from_delta(delta) - atol)
