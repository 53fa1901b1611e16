"""Diagonal base operator, perturbation pair and their dense realization.

Everything is expressed in the eigenbasis ``v_n`` of the self-adjoint operator
``A``.  Infinite index sets are represented by a finite window of consecutive
indices ``index_offset, index_offset + 1, ...``; the truncation is exact only
when the perturbation coefficients vanish outside the window.

Conventions fixed here and used by every other module:

* inner product ``<x, y> = sum_k x_k * conj(y_k)`` (linear in the first slot);
* ``B = A + <., phi> psi`` is realized as ``B[i, k] = lam_i * delta_ik + b_i * conj(a_k)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

__all__ = [
    "BaseOperator",
    "PerturbationPair",
    "IndexSplit",
    "assemble_dense",
    "split_indices",
    "reduce_h0",
    "example_periodic_derivative",
    "example_decay_profile",
    "solve_periodic_system",
]


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BaseOperator:
    """Unperturbed operator ``A``: strictly increasing real eigenvalues on an index window."""

    eigenvalues: np.ndarray
    index_offset: int = 0
    gap_d: float | None = None

    def __post_init__(self):
        lam = _frozen(self.eigenvalues, float)
        if lam.size == 0:
            raise ContractError("BaseOperator needs at least one eigenvalue")
        if not np.all(np.isfinite(lam)):
            raise ContractError("eigenvalues must be finite")
        gaps = np.diff(lam)
        if np.any(gaps <= 0):
            raise ContractError("eigenvalues must be strictly increasing (simple spectrum)")
        if self.gap_d is not None:
            if not self.gap_d > 0:
                raise ContractError("gap_d must be positive")
            if gaps.size and gaps.min() < self.gap_d:
                raise ContractError(
                    f"declared gap_d={self.gap_d} exceeds the smallest gap {gaps.min()}"
                )
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "index_offset", int(self.index_offset))

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def indices(self) -> np.ndarray:
        """Operator indices ``n`` of the window positions."""
        return np.arange(self.dim) + self.index_offset

    def position(self, n: int) -> int:
        """Window position of operator index ``n``."""
        pos = n - self.index_offset
        if not 0 <= pos < self.dim:
            raise ContractError(f"index {n} outside window [{self.index_offset}, {self.index_offset + self.dim - 1}]")
        return pos

    def min_gap(self) -> float:
        """``gap_d`` if declared, else the smallest consecutive difference (inf for dim 1)."""
        if self.gap_d is not None:
            return float(self.gap_d)
        if self.dim == 1:
            return float("inf")
        return float(np.diff(self.eigenvalues).min())

    def span(self) -> float:
        """Spread of the spectrum used to scale coincidence tolerances (at least 1)."""
        return max(1.0, float(self.eigenvalues[-1] - self.eigenvalues[0]))


@dataclass(frozen=True)
class PerturbationPair:
    """Coefficients ``a_n`` of ``phi`` and ``b_n`` of ``psi`` in the eigenbasis of ``A``."""

    a_coeffs: np.ndarray
    b_coeffs: np.ndarray

    def __post_init__(self):
        a = _frozen(self.a_coeffs, complex)
        b = _frozen(self.b_coeffs, complex)
        if a.shape != b.shape:
            raise ContractError(f"a has length {a.size} but b has length {b.size}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ContractError("coefficients must be finite")
        if not np.any(a):
            raise ContractError("phi must be nonzero")
        if not np.any(b):
            raise ContractError("psi must be nonzero")
        object.__setattr__(self, "a_coeffs", a)
        object.__setattr__(self, "b_coeffs", b)

    @property
    def dim(self) -> int:
        return self.a_coeffs.size

    @property
    def residues(self) -> np.ndarray:
        """``c_n = conj(a_n) * b_n`` for every window position."""
        return np.conj(self.a_coeffs) * self.b_coeffs

    def check_against(self, base: BaseOperator) -> None:
        if self.dim != base.dim:
            raise ContractError(f"pair has dimension {self.dim}, base operator has {base.dim}")


@dataclass(frozen=True)
class IndexSplit:
    """Window positions with ``a_n b_n = 0`` (``I0``) and the rest (``I1``), both sorted."""

    I0: np.ndarray
    I1: np.ndarray
    dim: int = field(default=0)

    def __post_init__(self):
        i0 = _frozen(self.I0, int)
        i1 = _frozen(self.I1, int)
        if np.intersect1d(i0, i1).size:
            raise ContractError("I0 and I1 must be disjoint")
        if self.dim and i0.size + i1.size != self.dim:
            raise ContractError("I0 and I1 must cover the window")
        object.__setattr__(self, "I0", i0)
        object.__setattr__(self, "I1", i1)


def assemble_dense(base: BaseOperator, pair: PerturbationPair) -> np.ndarray:
    """Dense matrix of ``B = A + <., phi> psi`` in the eigenbasis of ``A``."""
    pair.check_against(base)
    mat = np.outer(pair.b_coeffs, np.conj(pair.a_coeffs))
    mat[np.diag_indices(base.dim)] += base.eigenvalues
    return mat


def split_indices(pair: PerturbationPair, tol: float = 0.0) -> IndexSplit:
    """Split positions by whether ``|a_n b_n| <= tol * |a| |b| / dim``.

    ``tol = 0`` reproduces the exact-zero definition.
    """
    if tol < 0:
        raise ContractError("tol must be nonnegative")
    prod = np.abs(pair.a_coeffs * pair.b_coeffs)
    scale = np.linalg.norm(pair.a_coeffs) * np.linalg.norm(pair.b_coeffs) / pair.dim
    zero = prod <= tol * scale
    return IndexSplit(np.flatnonzero(zero), np.flatnonzero(~zero), pair.dim)


def _is_zero(v: np.ndarray, tol: float) -> np.ndarray:
    return np.abs(v) <= tol * np.linalg.norm(v)


def reduce_h0(base: BaseOperator, pair: PerturbationPair, tol: float = 0.0):
    """Drop every position where ``a_k = b_k = 0``.

    On those coordinates ``A`` and ``B`` coincide, so the dropped eigenvalues are
    eigenvalues of ``B`` as they stand.  Returns ``(reduced_base, reduced_pair,
    removed_positions)``; the reduced window is renumbered from 0 and keeps the
    declared ``gap_d`` (removing points cannot shrink the gap).
    """
    pair.check_against(base)
    removed = np.flatnonzero(_is_zero(pair.a_coeffs, tol) & _is_zero(pair.b_coeffs, tol))
    if removed.size == 0:
        return base, pair, removed
    keep = np.setdiff1d(np.arange(base.dim), removed)
    reduced_base = BaseOperator(base.eigenvalues[keep], 0, base.gap_d)
    reduced_pair = PerturbationPair(pair.a_coeffs[keep], pair.b_coeffs[keep])
    return reduced_base, reduced_pair, removed


def solve_periodic_system(m: int) -> np.ndarray:
    """Solve for ``(d_0, ..., d_m)`` in the periodic-derivative example.

    Unknowns enter as ``sum_{k=1}^m d_k / k^(2l+1) = f_l`` for ``l = 0..m`` with
    ``f_0 = -i/(2 pi)``, ``f_l = 0`` for ``0 < l < m`` and ``f_m = -i d_0 / sqrt(2 pi)``;
    the last equation is moved to the left so the system is square in all m+1 unknowns.
    """
    if m < 1:
        raise ContractError("m must be at least 1")
    k = np.arange(1, m + 1, dtype=float)
    mat = np.zeros((m + 1, m + 1), dtype=complex)
    rhs = np.zeros(m + 1, dtype=complex)
    for row in range(m + 1):
        mat[row, 1:] = 1.0 / k ** (2 * row + 1)
    rhs[0] = -1j / (2 * np.pi)
    mat[m, 0] = 1j / np.sqrt(2 * np.pi)
    if np.linalg.cond(mat) > 1e14:
        raise ContractError(f"periodic-derivative system is numerically singular for m={m}")
    return np.linalg.solve(mat, rhs)


def example_periodic_derivative(m: int, window: int) -> tuple[BaseOperator, PerturbationPair]:
    """Truncation of ``(1/i) d/dx`` with periodic conditions and the rank-one
    perturbation that merges ``lam_{-m}..lam_m`` into a single eigenvalue 0 of
    algebraic multiplicity ``2m + 1``.

    Indices run over ``-window..window``.  Coefficients vanish for ``|n| > m`` so
    the truncation is exact.
    """
    if m < 1:
        raise ContractError("m must be at least 1")
    if window < m:
        raise ContractError("window must be at least m")
    d = solve_periodic_system(m)
    n = np.arange(-window, window + 1)
    root = np.sqrt(2 * np.pi)
    a = np.where(np.abs(n) <= m, root, 0.0).astype(complex)
    b = np.zeros(n.size, dtype=complex)
    for k in range(1, m + 1):
        bk = root * d[k] / 2j
        b[window + k] = bk
        b[window - k] = -bk
    return BaseOperator(n.astype(float), -window, 1.0), PerturbationPair(a, b)


def example_decay_profile(window: int, power: float = 1.0) -> tuple[BaseOperator, PerturbationPair]:
    """``lam_n = n`` on ``-window..window`` with ``a_n = b_n = 1/|n|^power`` (and 1 at n = 0)."""
    if window < 1:
        raise ContractError("window must be positive")
    n = np.arange(-window, window + 1)
    coeff = np.ones(n.size)
    nz = n != 0
    coeff[nz] = 1.0 / np.abs(n[nz]) ** power
    return BaseOperator(n.astype(float), -window, 1.0), PerturbationPair(coeff, coeff)
