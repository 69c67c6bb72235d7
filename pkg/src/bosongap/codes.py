"""Gapped bosonic codes: construction, kernel design and Knill-Laflamme checks."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .fock import FockVector, TruncationConfig, flat_index, inner_product

__all__ = [
    "GappedCode",
    "NumberShift",
    "ErrorSet",
    "KLReport",
    "ConstraintMatrix",
    "GapAssumptionError",
    "lowering",
    "raising",
    "ladder_error_set",
    "make_gapped_code",
    "binomial_codewords",
    "kl_check",
    "build_A_matrix",
    "kernel_vector",
    "code_from_kernel",
    "kernel_code",
    "code_to_dict",
    "code_from_dict",
    "dump_code",
    "load_code",
    "random_gapped_code",
]


class GapAssumptionError(ValueError):
    """An error shift is too large for the gap of the code."""


@dataclass(frozen=True)
class GappedCode:
    zero_L: FockVector
    one_L: FockVector
    g: int
    base_shift: tuple = None
    tol: float = field(default=1e-10, compare=False, repr=False)

    def __post_init__(self):
        trunc = self.zero_L.trunc
        if not trunc.compatible(self.one_L.trunc):
            raise ValueError("codewords live on different truncations")
        if self.g < 1:
            raise ValueError(f"g must be >= 1, got {self.g}")
        n = (0,) * trunc.modes if self.base_shift is None else tuple(int(v) for v in np.atleast_1d(self.base_shift))
        if len(n) != trunc.modes:
            raise ValueError(f"base shift {n} does not match {trunc.modes} modes")
        object.__setattr__(self, "base_shift", n)
        for name, v in (("zero_L", self.zero_L), ("one_L", self.one_L)):
            if abs(v.norm - 1) > self.tol:
                raise ValueError(f"{name} is not normalized (norm {v.norm:.12g})")
        bad = sorted(set(_off_lattice(self.zero_L, self.g, n) + _off_lattice(self.one_L, self.g, n)))
        if bad:
            raise ValueError(f"support off the lattice n + g*k (g={self.g}, n={n}) at indices {bad}")
        ov = inner_product(self.zero_L, self.one_L)
        if abs(ov) > self.tol:
            raise ValueError(f"codewords are not orthogonal: |<0_L|1_L>| = {abs(ov):.3e}")

    @property
    def trunc(self) -> TruncationConfig:
        return self.zero_L.trunc

    @property
    def modes(self) -> int:
        return self.trunc.modes

    @property
    def codewords(self) -> tuple[FockVector, FockVector]:
        return self.zero_L, self.one_L


def _off_lattice(v: FockVector, g: int, n: tuple) -> list:
    bad = []
    for k in v.support():
        if any(ki < ni or (ki - ni) % g for ki, ni in zip(k, n)):
            bad.append(k if len(k) > 1 else k[0])
    return bad


def _ladder_coeff(u: int) -> Callable[[np.ndarray], np.ndarray]:
    # sqrt((j+u)!/j!), the matrix elements of a^u and (a^dagger)^u
    return lambda j: np.exp(0.5 * (gammaln(j + u + 1) - gammaln(j + 1)))


@dataclass(frozen=True)
class NumberShift:
    """sum_j c_j |j+u><j| (gain) or sum_j c_j |j><j+u| (loss).

    ``coefficients`` is either a callable mapping an array of Fock levels
    ``j`` to coefficients or an explicit sequence (missing levels are 0).
    """

    direction: str
    u: int
    coefficients: Callable | Sequence | None = None
    label: str = ""

    def __post_init__(self):
        if self.direction not in ("gain", "loss"):
            raise ValueError(f"direction must be 'gain' or 'loss', got {self.direction!r}")
        if int(self.u) != self.u or self.u < 0:
            raise ValueError(f"shift u must be a non-negative integer, got {self.u}")
        if not self.label:
            sym = "a" if self.direction == "loss" else "a+"
            object.__setattr__(self, "label", f"{sym}^{self.u}")

    @property
    def shift(self) -> int:
        return self.u if self.direction == "gain" else -self.u

    def coeffs(self, levels: int) -> np.ndarray:
        j = np.arange(levels)
        c = self.coefficients
        if c is None:
            return _ladder_coeff(self.u)(j).astype(np.complex128)
        if callable(c):
            return np.asarray(c(j), dtype=np.complex128)
        out = np.zeros(levels, dtype=np.complex128)
        c = np.asarray(c, dtype=np.complex128)[:levels]
        out[: len(c)] = c
        return out

    def matrix(self, levels: int) -> np.ndarray:
        K = np.zeros((levels, levels), dtype=np.complex128)
        j = np.arange(levels - self.u)
        c = self.coeffs(levels)[: levels - self.u]
        if self.direction == "gain":
            K[j + self.u, j] = c
        else:
            K[j, j + self.u] = c
        return K


def lowering(u: int = 1) -> NumberShift:
    return NumberShift("loss", u)


def raising(u: int = 1) -> NumberShift:
    return NumberShift("gain", u)


@dataclass(frozen=True)
class ErrorSet:
    ops: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    def with_identity(self) -> list[tuple[str, int, Callable[[int], np.ndarray]]]:
        """(label, shift, matrix builder) over the identity followed by ``ops``."""
        out = [("I", 0, lambda d: np.eye(d, dtype=np.complex128))]
        out += [(op.label, op.shift, op.matrix) for op in self.ops]
        return out

    @property
    def max_gain(self) -> int:
        return max([op.u for op in self.ops if op.direction == "gain"], default=0)

    @property
    def labels(self) -> list[str]:
        return [op.label for op in self.ops]


def ladder_error_set(L: int, G: int) -> ErrorSet:
    """{a^l : 1 <= l <= L} and {(a^dagger)^m : 1 <= m <= G}."""
    return ErrorSet(tuple(lowering(l) for l in range(1, L + 1)) + tuple(raising(m) for m in range(1, G + 1)))


@dataclass(frozen=True)
class KLReport:
    max_offdiagonal_violation: float
    max_deformation_violation: float
    tol: float
    passed: bool
    labels: tuple = ()
    # overlaps[j, j', a, b] = <j_L| K_a^dagger K_b |j'_L>
    overlaps: np.ndarray = field(default=None, repr=False, compare=False)


def _parse_sparse(amps) -> list[tuple[tuple[int, ...], complex]]:
    items = amps.items() if isinstance(amps, dict) else amps
    out = []
    for idx, a in items:
        out.append((tuple(int(v) for v in np.atleast_1d(idx)), complex(a)))
    return out


def make_gapped_code(amplitudes0, amplitudes1, g: int, n=None, n_max: int | None = None,
                     tol: float = 1e-10) -> GappedCode:
    """Validated code from sparse ``{index: amplitude}`` maps or ``(index, amplitude)`` lists.

    Indices are integers (single mode) or tuples (one entry per mode).
    Each codeword is normalized; supports must lie on ``n + g*k``.
    """
    a0, a1 = _parse_sparse(amplitudes0), _parse_sparse(amplitudes1)
    if not a0 or not a1:
        raise ValueError("both codewords need at least one amplitude")
    modes = len(a0[0][0])
    if any(len(k) != modes for k, _ in a0 + a1):
        raise ValueError("all indices must have the same number of modes")
    top = max(max(k) for k, _ in a0 + a1)
    trunc = TruncationConfig(n_max if n_max is not None else max(top, 1), modes)
    nvec = (0,) * modes if n is None else tuple(int(v) for v in np.atleast_1d(n))
    bad = sorted({k if modes > 1 else k[0] for k, a in a0 + a1
                  if a != 0 and any(ki < ni or (ki - ni) % g for ki, ni in zip(k, nvec))})
    if bad:
        raise ValueError(f"support off the lattice n + g*k (g={g}, n={nvec}) at indices {bad}")
    vecs = []
    for amps in (a0, a1):
        v = np.zeros(trunc.dim, dtype=np.complex128)
        for k, a in amps:
            v[flat_index(k, trunc)] += a
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValueError("codeword amplitudes sum to the zero vector")
        vecs.append(FockVector(v / nrm, trunc))
    ov = inner_product(*vecs)
    if abs(ov) > tol:
        raise ValueError(f"codewords are not orthogonal: <0_L|1_L> = {ov:.6g}")
    return GappedCode(vecs[0], vecs[1], g, nvec, tol=tol)


def random_gapped_code(rng: np.random.Generator, g: int, modes: int, n_max: int) -> GappedCode:
    """Orthonormal pair with random complex amplitudes on a random shifted lattice."""
    trunc = TruncationConfig(n_max, modes)
    shift = tuple(int(rng.integers(0, g)) for _ in range(modes))
    per_mode = [np.arange(s, n_max + 1, g) for s in shift]
    lattice = np.array(np.meshgrid(*per_mode, indexing="ij")).reshape(modes, -1).T
    flat = np.ravel_multi_index(tuple(lattice.T), trunc.shape)
    m = len(flat)
    if m < 2:
        raise ValueError(f"cutoff n_max={n_max} leaves {m} lattice point(s) for g={g}; need at least 2")
    size = int(rng.integers(2, m + 1))
    pick = np.sort(rng.choice(m, size=size, replace=False))
    z = rng.normal(size=(2, size)) + 1j * rng.normal(size=(2, size))
    q, _ = np.linalg.qr(z.T)
    vecs = []
    for col in q.T:
        v = np.zeros(trunc.dim, dtype=np.complex128)
        v[flat[pick]] = col
        vecs.append(FockVector(v, trunc))
    return GappedCode(vecs[0], vecs[1], g, shift)


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def binomial_codewords(D: int, g: int, n_max: int | None = None) -> GappedCode:
    """Binomial code on |g j>, j = 0..2D+1, even j for |0_L> and odd j for |1_L>."""
    if D < 0 or g < 1:
        raise ValueError(f"need D >= 0 and g >= 1, got D={D}, g={g}")
    need = (2 * D + 1) * g
    n_max = need if n_max is None else n_max
    if n_max < need:
        raise ValueError(f"cutoff n_max={n_max} too small for the binomial code; need n_max >= {need}")
    trunc = TruncationConfig(n_max, 1)
    j = np.arange(2 * D + 2)
    amp = np.exp(0.5 * (_log_binom(2 * D + 1, j) - 2 * D * math.log(2)))
    vecs = []
    for parity in (0, 1):
        v = np.zeros(trunc.dim, dtype=np.complex128)
        sel = j[j % 2 == parity]
        v[g * sel] = amp[sel]
        vecs.append(FockVector(v, trunc))
    return GappedCode(vecs[0], vecs[1], g)


def _check_gap(entries, g: int):
    shifts = [s for _, s, _ in entries]
    worst = max(shifts) - min(shifts)
    if worst >= g:
        raise GapAssumptionError(
            f"error shifts {sorted(set(shifts))} give a net shift of {worst} in K^dagger K', "
            f"which is not below the gap g={g}"
        )


def kl_check(code: GappedCode, errs: ErrorSet, tol: float = 1e-10) -> KLReport:
    """Knill-Laflamme overlaps <j_L|K^dagger K'|j'_L> over ``errs`` plus the identity.

    Raises GapAssumptionError when some pair K, K' shifts photon number
    by g or more, since then the gap no longer separates codewords.
    """
    if code.modes != 1:
        raise ValueError("kl_check handles single-mode codes only")
    entries = errs.with_identity()
    _check_gap(entries, code.g)
    levels = code.trunc.levels + errs.max_gain
    pad = levels - code.trunc.levels
    cw = [np.concatenate([v.amplitudes, np.zeros(pad)]) for v in code.codewords]
    images = np.array([[build(levels) @ c for _, _, build in entries] for c in cw])  # (2, n_ops, levels)
    overlaps = np.einsum("iax,jbx->ijab", images.conj(), images)
    off = float(np.abs(overlaps[0, 1]).max())
    deform = float(np.abs(overlaps[0, 0] - overlaps[1, 1]).max())
    return KLReport(off, deform, tol, off <= tol and deform <= tol,
                    tuple(lbl for lbl, _, _ in entries), overlaps)


@dataclass(frozen=True)
class ConstraintMatrix:
    """Real matrix of Re/Im <gk|K^dagger K'|gk>, one column per k."""

    matrix: np.ndarray
    labels: tuple
    zero_rows: tuple

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def shape(self):
        return self.matrix.shape

    def nonzero(self) -> np.ndarray:
        keep = [i for i in range(self.matrix.shape[0]) if i not in set(self.zero_rows)]
        return self.matrix[keep]


def build_A_matrix(errs: ErrorSet, g: int, k_max: int | None = None) -> ConstraintMatrix:
    entries = errs.with_identity()
    n_rows = 2 * len(entries) ** 2
    if k_max is None:
        k_max = 2 * n_rows
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    levels = g * k_max + 1 + errs.max_gain
    mats = [build(levels) for _, _, build in entries]
    cols = g * np.arange(k_max + 1)
    rows, labels = [], []
    for (la, _, _), Ka in zip(entries, mats):
        for (lb, _, _), Kb in zip(entries, mats):
            diag = np.einsum("xk,xk->k", Ka[:, cols].conj(), Kb[:, cols])
            rows += [diag.real, diag.imag]
            labels += [(la, lb, "Re"), (la, lb, "Im")]
    A = np.array(rows)
    zero = tuple(i for i, r in enumerate(A) if not np.any(r))
    return ConstraintMatrix(A, tuple(labels), zero)


def kernel_vector(A) -> np.ndarray:
    """Unit null vector of ``A``: the right singular vector of the smallest singular value.

    The sign is fixed so the first nonzero entry is positive.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n_cols = A.shape[1]
    if not np.any(A):
        x = np.zeros(n_cols)
        x[0] = 1.0
        return x
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    cutoff = max(A.shape) * np.finfo(float).eps * s[0]
    rank = int(np.sum(s > cutoff))
    if rank >= n_cols:
        raise ValueError(
            f"A ({A.shape[0]}x{n_cols}) has numerically full column rank; increase k_max"
        )
    x = vh[-1]
    x = np.where(np.abs(x) > 1e-14, x, 0.0)
    lead = x[np.flatnonzero(x)[0]]
    x = x * np.sign(lead)
    resid = np.abs(A @ x).max()
    scale = max(1.0, np.abs(A).max())
    if resid > 1e-10 * np.abs(x).max() * scale:
        raise ValueError(f"kernel vector residual {resid:.3e} too large; A is ill-conditioned")
    return x


def code_from_kernel(x, g: int, convention: str = "sqrt", n_max: int | None = None,
                     zero_tol: float = 1e-12) -> GappedCode:
    """Split a kernel vector into |0_L> (positive part) and |1_L> (negative part).

    ``sqrt``: amplitudes sqrt(x+_k / ||x+||_1); ``literal``: amplitudes x+_k
    renormalized to unit norm.
    """
    x = np.asarray(x, dtype=float)
    if convention not in ("sqrt", "literal"):
        raise ValueError(f"convention must be 'sqrt' or 'literal', got {convention!r}")
    x = np.where(np.abs(x) > zero_tol * np.abs(x).max(initial=0.0), x, 0.0)
    xp, xm = np.maximum(x, 0.0), np.maximum(-x, 0.0)
    if not xp.any() or not xm.any():
        raise ValueError("kernel vector must have both positive and negative entries")
    top = g * (len(x) - 1)
    trunc = TruncationConfig(n_max if n_max is not None else max(top, 1), 1)
    if trunc.n_max < top:
        raise ValueError(f"n_max={trunc.n_max} too small for support up to {top}")
    vecs = []
    for part in (xp, xm):
        amp = np.sqrt(part / part.sum()) if convention == "sqrt" else part / np.linalg.norm(part)
        v = np.zeros(trunc.dim, dtype=np.complex128)
        v[g * np.arange(len(x))] = amp
        vecs.append(FockVector(v, trunc))
    return GappedCode(vecs[0], vecs[1], g)


def kernel_code(errs: ErrorSet, g: int, k_max: int | None = None, convention: str = "sqrt") -> GappedCode:
    A = build_A_matrix(errs, g, k_max)
    return code_from_kernel(kernel_vector(A), g, convention)


def code_to_dict(code: GappedCode) -> dict:
    def entries(v):
        out = []
        for k in v.support():
            a = v.amplitudes[flat_index(k, v.trunc)]
            idx = k[0] if len(k) == 1 else list(k)
            out.append([idx, float(a.real), float(a.imag)])
        return out

    n = code.base_shift
    return {
        "g": code.g,
        "n": n[0] if len(n) == 1 else list(n),
        "modes": code.modes,
        "n_max": code.trunc.n_max,
        "codewords": [entries(code.zero_L), entries(code.one_L)],
    }


def code_from_dict(d: dict) -> GappedCode:
    for key in ("g", "codewords"):
        if key not in d:
            raise ValueError(f"code JSON is missing {key!r}")
    cws = d["codewords"]
    if len(cws) != 2:
        raise ValueError(f"expected two codewords, got {len(cws)}")
    sparse = [[(idx, complex(re, im)) for idx, re, im in cw] for cw in cws]
    code = make_gapped_code(sparse[0], sparse[1], int(d["g"]), d.get("n"), d.get("n_max"))
    if "modes" in d and int(d["modes"]) != code.modes:
        raise ValueError(f"declared modes={d['modes']} but indices have {code.modes} components")
    return code


def dump_code(code: GappedCode, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(code_to_dict(code), fh, indent=2)
        fh.write("\n")


def load_code(path) -> GappedCode:
    with open(path, encoding="utf-8") as fh:
        return code_from_dict(json.load(fh))
