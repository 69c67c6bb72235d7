"""Truncated Fock-space states and operators.

Multi-mode indices are flattened row-major (last mode fastest), so the
flat index of ``(k_1, ..., k_N)`` is ``sum_m k_m (n_max+1)^(N-m)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_MAX_DIM",
    "TruncationConfig",
    "FockVector",
    "HermitianOperator",
    "basis_state",
    "flat_index",
    "number_grid",
    "inner_product",
    "outer_difference",
    "hermitian_eigenvalues",
    "trace_norm",
    "tensor",
    "tensor_op",
]

DEFAULT_MAX_DIM = 4096


@dataclass(frozen=True)
class TruncationConfig:
    """Per-mode photon cutoff ``n_max`` for ``modes`` bosonic modes."""

    n_max: int
    modes: int = 1
    tol: float = 1e-10
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")
        if int(self.modes) != self.modes or self.modes < 1:
            raise ValueError(f"modes must be an integer >= 1, got {self.modes}")
        if not (0 < self.tol <= 1e-3):
            raise ValueError(f"tol must lie in (0, 1e-3], got {self.tol}")
        if self.dim > self.max_dim:
            raise ValueError(
                f"dimension (n_max+1)^modes = {self.dim} exceeds max_dim={self.max_dim}; "
                "raise max_dim explicitly to allow it"
            )

    @property
    def levels(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.levels ** self.modes

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.levels,) * self.modes

    def compatible(self, other: "TruncationConfig") -> bool:
        return self.n_max == other.n_max and self.modes == other.modes


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockVector:
    amplitudes: np.ndarray
    trunc: TruncationConfig

    def __post_init__(self):
        amps = _readonly(np.ravel(self.amplitudes))
        if amps.shape != (self.trunc.dim,):
            raise ValueError(f"expected {self.trunc.dim} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockVector":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.amplitudes / nrm, self.trunc)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def support(self, atol: float = 0.0) -> list[tuple[int, ...]]:
        idx = np.flatnonzero(np.abs(self.amplitudes) > atol)
        return [tuple(int(i) for i in np.unravel_index(k, self.trunc.shape)) for k in idx]


@dataclass(frozen=True)
class HermitianOperator:
    entries: np.ndarray
    trunc: TruncationConfig
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        m = _readonly(self.entries)
        d = self.trunc.dim
        if m.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {m.shape}")
        if self.check:
            asym = float(np.abs(m - m.conj().T).max()) if d else 0.0
            if asym > self.trunc.tol:
                raise ValueError(f"operator is not Hermitian: max |H - H^dagger| = {asym:.3e}")
        object.__setattr__(self, "entries", m)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    @classmethod
    def zeros(cls, trunc: TruncationConfig) -> "HermitianOperator":
        return cls(np.zeros((trunc.dim, trunc.dim)), trunc)


def flat_index(k, trunc: TruncationConfig) -> int:
    k = tuple(int(v) for v in np.atleast_1d(k))
    if len(k) != trunc.modes:
        raise ValueError(f"multi-index {k} has {len(k)} components, expected {trunc.modes}")
    for m, v in enumerate(k):
        if not 0 <= v <= trunc.n_max:
            raise ValueError(f"component {m} of multi-index {k} is {v}, outside [0, {trunc.n_max}]")
    return int(np.ravel_multi_index(k, trunc.shape))


def number_grid(trunc: TruncationConfig) -> np.ndarray:
    """Photon numbers per mode for every flat index, shape ``(dim, modes)``."""
    return np.array(list(itertools.product(range(trunc.levels), repeat=trunc.modes)), dtype=np.int64)


def basis_state(k, trunc: TruncationConfig) -> FockVector:
    amps = np.zeros(trunc.dim, dtype=np.complex128)
    amps[flat_index(k, trunc)] = 1.0
    return FockVector(amps, trunc)


def _same_trunc(a, b):
    if not a.trunc.compatible(b.trunc):
        raise ValueError(
            f"truncation mismatch: (n_max={a.trunc.n_max}, modes={a.trunc.modes}) vs "
            f"(n_max={b.trunc.n_max}, modes={b.trunc.modes})"
        )


def inner_product(a: FockVector, b: FockVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _same_trunc(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def outer_difference(a: FockVector, b: FockVector) -> HermitianOperator:
    """|a><a| - |b><b| for unit vectors ``a`` and ``b``."""
    _same_trunc(a, b)
    na, nb = a.norm, b.norm
    tol = max(a.trunc.tol, 1e-12)
    if abs(na - 1) > tol or abs(nb - 1) > tol:
        raise ValueError(f"inputs must be unit vectors, got norms {na:.12g} and {nb:.12g}")
    return HermitianOperator(a.projector() - b.projector(), a.trunc)


def hermitian_eigenvalues(H: HermitianOperator) -> np.ndarray:
    """Real spectrum of ``H`` in descending order."""
    m = np.asarray(H.entries)
    asym = float(np.abs(m - m.conj().T).max()) if m.size else 0.0
    if asym > H.trunc.tol:
        raise ValueError(f"operator is not Hermitian: max |H - H^dagger| = {asym:.3e}")
    # symmetrize so round-off asymmetry does not leak into the solver
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))[::-1]


def trace_norm(H: HermitianOperator) -> float:
    return float(np.abs(hermitian_eigenvalues(H)).sum())


def _tensor_trunc(ta: TruncationConfig, tb: TruncationConfig, max_dim: int | None) -> TruncationConfig:
    if ta.n_max != tb.n_max:
        raise ValueError(f"cutoff mismatch: n_max={ta.n_max} vs n_max={tb.n_max}")
    limit = max(ta.max_dim, tb.max_dim) if max_dim is None else max_dim
    dim = ta.dim * tb.dim
    if dim > limit:
        raise ValueError(f"tensor product dimension {dim} exceeds limit {limit}")
    return TruncationConfig(ta.n_max, ta.modes + tb.modes, max(ta.tol, tb.tol), limit)


def tensor(a: FockVector, b: FockVector, max_dim: int | None = None) -> FockVector:
    trunc = _tensor_trunc(a.trunc, b.trunc, max_dim)
    return FockVector(np.kron(a.amplitudes, b.amplitudes), trunc)


def tensor_op(A: HermitianOperator, B: HermitianOperator, max_dim: int | None = None) -> HermitianOperator:
    trunc = _tensor_trunc(A.trunc, B.trunc, max_dim)
    return HermitianOperator(np.kron(A.entries, B.entries), trunc)
