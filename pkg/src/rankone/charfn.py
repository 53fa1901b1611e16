"""Characteristic function ``F(z) = 1 + sum_j c_j / (lam_j - z)`` of a rank-one perturbation.

Zeros of ``F`` off the spectrum of ``A`` are the new eigenvalues of ``B``; the
order of a zero is the algebraic multiplicity (one more than that at a surviving
eigenvalue of ``A``).  Orders are certified by a derivative test because
clustering of polynomial roots alone is unreliable: a root of multiplicity m
moves by ``O(eps^(1/m))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    ContractError,
    NearEigenvalueError,
    OrderUndeterminedError,
    PoleCollisionError,
    RankOneError,
)
from .operator_model import BaseOperator, IndexSplit, PerturbationPair, split_indices
from .oracle import cluster_labels

__all__ = [
    "CharFn",
    "RationalForm",
    "Zero",
    "from_pair",
    "eval_derivative",
    "to_rational",
    "zeros",
    "zero_order",
    "refine_zero",
    "krein_apply",
    "POLE_GUARD",
    "KREIN_GUARD",
]

POLE_GUARD = 1e-13
KREIN_GUARD = 1e-12


@dataclass(frozen=True)
class CharFn:
    """Pole/residue form: poles ``lam_j`` (from I1) and terms ``c_j = conj(a_j) b_j``."""

    poles: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        poles = np.array(self.poles, dtype=float).reshape(-1)
        c = np.array(self.c, dtype=complex).reshape(-1)
        if poles.shape != c.shape:
            raise ContractError("poles and terms must have the same length")
        if np.unique(poles).size != poles.size:
            raise ContractError("poles must be pairwise distinct")
        if np.any(c == 0):
            raise ContractError("zero terms must not be stored")
        poles.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "c", c)

    @property
    def n_terms(self) -> int:
        return self.poles.size

    def __call__(self, z) -> complex:
        return eval_derivative(self, z, 0)

    def pole_guard(self) -> float:
        if self.n_terms == 0:
            return 0.0
        return POLE_GUARD * max(1.0, float(np.ptp(self.poles)))


@dataclass(frozen=True)
class RationalForm:
    """``F = P/Q`` with ascending coefficient arrays; ``P`` monic, ``scale`` its original leading coefficient."""

    numerator: np.ndarray
    denominator: np.ndarray
    scale: complex = 1.0

    def __call__(self, z) -> complex:
        return self.scale * npoly.polyval(z, self.numerator) / npoly.polyval(z, self.denominator)


@dataclass(frozen=True)
class Zero:
    """A zero of ``F`` with its multiplicity and the order confirmed by the derivative test."""

    point: complex
    multiplicity: int
    certified_order: int


def from_pair(base: BaseOperator, pair: PerturbationPair, split: IndexSplit | None = None) -> CharFn:
    """Characteristic function restricted to the I1 terms."""
    pair.check_against(base)
    if split is None:
        split = split_indices(pair)
    idx = split.I1
    return CharFn(base.eigenvalues[idx], pair.residues[idx])


def _check_off_poles(f: CharFn, z: complex) -> np.ndarray:
    diff = f.poles - z
    if f.n_terms and np.min(np.abs(diff)) <= f.pole_guard():
        raise PoleCollisionError(f"z={z} coincides with a pole of F")
    return diff


def eval_derivative(f: CharFn, z, order: int = 0) -> complex:
    """Taylor coefficient ``F^(k)(z) / k!`` (``F(z)`` itself for ``k = 0``)."""
    if order < 0:
        raise ContractError("order must be nonnegative")
    z = complex(z)
    diff = _check_off_poles(f, z)
    val = complex(np.sum(f.c / diff ** (order + 1))) if f.n_terms else 0j
    return val + 1.0 if order == 0 else val


def to_rational(f: CharFn) -> RationalForm:
    """Recombine the partial fractions: ``Q = prod (z - lam_j)``, ``P = Q - sum_j c_j prod_{i != j} (z - lam_i)``.

    ``P`` is monic of the same degree as ``Q`` because ``F -> 1`` at infinity.
    """
    if f.n_terms == 0:
        one = np.array([1.0 + 0j])
        return RationalForm(one, one.copy(), 1.0)
    q = npoly.polyfromroots(f.poles).astype(complex)
    p = q.copy()
    for j in range(f.n_terms):
        others = np.delete(f.poles, j)
        p[: others.size + 1] -= f.c[j] * npoly.polyfromroots(others)
    lead = p[-1]
    return RationalForm(p / lead, q, lead)


def _companion_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of a monic polynomial (ascending coefficients) from its companion matrix."""
    deg = coeffs.size - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((deg, deg), dtype=complex)
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -coeffs[:-1]
    try:
        return np.linalg.eigvals(comp)
    except np.linalg.LinAlgError as exc:
        raise RankOneError(f"root finder did not converge: {exc}") from exc


def zero_order(f: CharFn, z, tol: float = 1e-8, cap: int | None = None) -> int:
    """Smallest ``k`` with ``|F^(k)(z)/k!| > tol * local_scale``.

    ``local_scale = sum |c_j| / dist(z, poles)^(k+1) + 1``.  The order can never
    exceed the number of terms, which is the default cap; reaching the cap raises
    :class:`OrderUndeterminedError`.
    """
    z = complex(z)
    diff = np.abs(_check_off_poles(f, z))
    cap = f.n_terms if cap is None else cap
    abs_c = np.abs(f.c)
    for k in range(cap + 1):
        coef = eval_derivative(f, z, k)
        scale = (float(np.sum(abs_c / diff ** (k + 1))) if f.n_terms else 0.0) + 1.0
        if abs(coef) > tol * scale:
            return k
    raise OrderUndeterminedError(f"no nonvanishing derivative up to order {cap} at z={z}")


def refine_zero(f: CharFn, z, multiplicity: int, steps: int = 8) -> complex:
    """Polish a zero of known multiplicity m by Newton's method on ``F^(m-1)``, whose zero there is simple."""
    z = complex(z)
    k = multiplicity - 1
    for _ in range(steps):
        try:
            g = eval_derivative(f, z, k)
            dg = (k + 1) * eval_derivative(f, z, k + 1)
        except PoleCollisionError:
            break
        if dg == 0:
            break
        step = g / dg
        z_new = z - step
        if not np.isfinite(z_new) or abs(step) > 1e-2 * (1 + abs(z)):
            break
        z = z_new
        if abs(step) <= 4 * np.finfo(float).eps * (1 + abs(z)):
            break
    return z


def _merge_clusters(f: CharFn, groups: list, radius: float, order_tol: float) -> list:
    """Join nearby root groups while the derivative test confirms the joint order.

    Roots of a zero of order m scatter by ``O(eps^(1/m))``, which can exceed the
    clustering radius; the mean of the scattered roots is still accurate.
    """
    while len(groups) > 1:
        centers = np.array([np.mean(g) for g in groups])
        dist = np.abs(centers[:, None] - centers[None, :])
        np.fill_diagonal(dist, np.inf)
        merged = False
        for flat in np.argsort(dist, axis=None):
            i, j = divmod(int(flat), len(groups))
            if i > j:
                continue
            if dist[i, j] > radius:
                break
            union = groups[i] + groups[j]
            try:
                order = zero_order(f, np.mean(union), order_tol)
            except OrderUndeterminedError:
                order = len(union)
            except PoleCollisionError:
                continue
            if order >= len(union):
                groups = [g for k, g in enumerate(groups) if k not in (i, j)] + [union]
                merged = True
                break
        if not merged:
            break
    return groups


def zeros(f: CharFn, cluster_tol: float = 1e-4, order_tol: float = 1e-8,
          merge_radius: float = 1e-2) -> list[Zero]:
    """Zeros of ``F`` in the complement of its poles, with multiplicities.

    Companion-matrix roots of the numerator are clustered single-linkage at
    ``cluster_tol``; clusters closer than ``merge_radius`` (relative to the pole
    spread) are joined when the derivative test supports the joint order.  Each
    center is Newton-polished and its order re-certified with :func:`zero_order`.
    """
    if cluster_tol <= 0:
        raise ContractError("cluster_tol must be positive")
    if f.n_terms == 0:
        return []
    roots = _companion_roots(to_rational(f).numerator)
    labels = cluster_labels(roots, cluster_tol)
    groups = [roots[labels == lab].tolist() for lab in range(labels.max() + 1)]
    groups = _merge_clusters(f, groups, merge_radius * max(1.0, float(np.ptp(f.poles))), order_tol)
    out = []
    for group in groups:
        size = len(group)
        point = refine_zero(f, np.mean(group), size)
        try:
            order = zero_order(f, point, order_tol)
        except (OrderUndeterminedError, PoleCollisionError):
            order = -1
        out.append(Zero(point, size, order))
    out.sort(key=lambda zr: (zr.point.real, zr.point.imag))
    return out


def krein_apply(base: BaseOperator, pair: PerturbationPair, z, g, tol: float = KREIN_GUARD) -> np.ndarray:
    """Solve ``(B - z) f = g`` through the resolvent of the diagonal ``A``.

    ``f = R g - <R g, phi> / F(z) * R psi`` with ``R = (A - z)^{-1}``.
    """
    pair.check_against(base)
    z = complex(z)
    g = np.asarray(g, dtype=complex).reshape(-1)
    if g.size != base.dim:
        raise ContractError("g has the wrong dimension")
    diff = base.eigenvalues - z
    if np.min(np.abs(diff)) <= POLE_GUARD * base.span():
        raise PoleCollisionError(f"z={z} lies on the spectrum of A")
    r_g = g / diff
    r_psi = pair.b_coeffs / diff
    f_val = 1.0 + np.sum(np.conj(pair.a_coeffs) * r_psi)
    if abs(f_val) <= tol:
        raise NearEigenvalueError(f"|F(z)| = {abs(f_val):.3e}: z is (near) an eigenvalue of B")
    coupling = np.sum(r_g * np.conj(pair.a_coeffs))
    return r_g - (coupling / f_val) * r_psi
