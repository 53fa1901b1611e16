"""Jordan chains and multiplicity certificates for eigenvalues of ``B``.

Three cases are covered:

* ``resolvent_point``: ``z`` off the spectrum of ``A``; ``y_k = (A - z)^{-(k+1)} psi``.
* ``sigma0_case_a``: ``z = lam_n`` with ``a_n = 0 != b_n``; the chain starts at ``v_n``.
* ``sigma0_case_b``: ``z = lam_n`` with ``b_n = 0 != a_n``; ``v_n`` enters only the top vector.

``A_n`` and ``P_n`` (restriction to / projection onto the complement of ``v_n``)
are realized by zeroing coordinate ``n``, which is exact because ``A`` is diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import COINCIDENCE_TOL
from .charfn import CharFn, eval_derivative, from_pair, zero_order
from .errors import ConsistencyError, ContractError, NotAnEigenvalueError
from .operator_model import BaseOperator, PerturbationPair, assemble_dense, split_indices
from .oracle import rank_multiplicity

__all__ = [
    "JordanChain",
    "MultiplicityCertificate",
    "chain_residuals",
    "geometric_multiplicity",
    "chain_resolvent_case",
    "chain_sigma0",
    "chain_dense",
    "shift_chain",
    "recover_shift",
    "certify_multiplicity",
]

CASE_TAGS = ("resolvent_point", "sigma0_case_a", "sigma0_case_b", "dense")


@dataclass(frozen=True)
class JordanChain:
    eigenvalue: complex
    vectors: np.ndarray  # row k holds y_k
    case_tag: str
    residuals: np.ndarray
    matrix: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def length(self) -> int:
        return self.vectors.shape[0]

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    def normalized(self) -> "JordanChain":
        """Same chain scaled so that ``|y_0| = 1``; relative residuals are unchanged."""
        scale = np.linalg.norm(self.vectors[0])
        return _make_chain(self.matrix, self.eigenvalue, self.vectors / scale, self.case_tag)


@dataclass(frozen=True)
class MultiplicityCertificate:
    eigenvalue: complex
    geometric: int
    algebraic: int
    f_zero_order: int
    sigma0_member: bool
    oracle_algebraic: int | None = None


def chain_residuals(mat: np.ndarray, z: complex, vectors: np.ndarray) -> np.ndarray:
    """Relative link residuals ``|(B - z) y_k - y_{k-1}| / max(|y_k|, |y_{k-1}|)`` (``y_{-1} = 0``)."""
    shifted = mat - z * np.eye(mat.shape[0])
    out = np.empty(vectors.shape[0])
    prev = np.zeros(mat.shape[0], dtype=complex)
    for k, y in enumerate(vectors):
        denom = max(np.linalg.norm(y), np.linalg.norm(prev))
        out[k] = np.linalg.norm(shifted @ y - prev) / denom if denom else np.inf
        prev = y
    return out


def _make_chain(mat, z, vectors, tag) -> JordanChain:
    vectors = np.array(vectors, dtype=complex)
    return JordanChain(complex(z), vectors, tag, chain_residuals(mat, complex(z), vectors), mat)


def _sigma0_position(base: BaseOperator, z: complex) -> int | None:
    dist = np.abs(base.eigenvalues - z)
    pos = int(np.argmin(dist))
    return pos if dist[pos] <= COINCIDENCE_TOL * base.span() else None


def _charfn(base, pair) -> CharFn:
    return from_pair(base, pair, split_indices(pair))


def _deleted_resolvent(base: BaseOperator, pos: int, vec: np.ndarray, power: int) -> np.ndarray:
    """``(A_n - lam_n)^{-power} P_n vec`` with ``n`` the window position ``pos``."""
    diff = base.eigenvalues - base.eigenvalues[pos]
    diff[pos] = 1.0
    out = vec / diff ** power
    out[pos] = 0.0
    return out


def geometric_multiplicity(base: BaseOperator, pair: PerturbationPair, z, tol: float = 1e-8):
    """Geometric multiplicity (1 or 2) with eigenvector certificates.

    It is 2 exactly when ``z = lam_n`` with ``a_n = b_n = 0`` and ``F(lam_n) = 0``.
    """
    pair.check_against(base)
    f = _charfn(base, pair)
    a, b = pair.a_coeffs, pair.b_coeffs
    pos = _sigma0_position(base, complex(z))
    if pos is None:
        z = complex(z)
        if zero_order(f, z, tol) == 0:
            raise NotAnEigenvalueError(f"F({z}) != 0, so z is not an eigenvalue of B")
        return 1, [b / (base.eigenvalues - z)]
    lam = base.eigenvalues[pos]
    unit = np.zeros(base.dim, dtype=complex)
    unit[pos] = 1.0
    if a[pos] != 0 and b[pos] != 0:
        raise NotAnEigenvalueError(f"lam={lam} has a_n b_n != 0, so it left the spectrum")
    w = _deleted_resolvent(base, pos, b, 1)
    if a[pos] == 0 and b[pos] == 0:
        if zero_order(f, lam, tol) > 0:
            return 2, [unit, w]
        return 1, [unit]
    if a[pos] == 0:
        return 1, [unit]
    alpha0 = -eval_derivative(f, lam, 0) / np.conj(a[pos])
    return 1, [alpha0 * unit + w]


def chain_resolvent_case(base: BaseOperator, pair: PerturbationPair, z, length: int | None = None,
                         tol: float = 1e-8) -> JordanChain:
    """Chain ``y_k = (A - z)^{-(k+1)} psi`` at a zero of ``F`` off the spectrum of ``A``."""
    pair.check_against(base)
    z = complex(z)
    if _sigma0_position(base, z) is not None:
        raise ContractError(f"z={z} lies on the spectrum of A; use chain_sigma0")
    order = zero_order(_charfn(base, pair), z, tol)
    if order == 0:
        raise NotAnEigenvalueError(f"F({z}) != 0")
    length = order if length is None else length
    if length > order:
        raise ContractError(f"requested length {length} exceeds certified zero order {order}")
    diff = base.eigenvalues - z
    vectors = [pair.b_coeffs / diff ** (k + 1) for k in range(length)]
    return _make_chain(assemble_dense(base, pair), z, vectors, "resolvent_point")


def chain_sigma0(base: BaseOperator, pair: PerturbationPair, n: int, max_len: int | None = None,
                 tol: float = 1e-8) -> JordanChain:
    """Chain at a surviving eigenvalue ``lam_n`` (``n`` is the operator index, not the window position).

    Its full length is ``l + 1`` with ``l`` the zero order of ``F`` at ``lam_n``.
    """
    pair.check_against(base)
    pos = base.position(n)
    a, b = pair.a_coeffs, pair.b_coeffs
    lam = float(base.eigenvalues[pos])
    if a[pos] == 0 and b[pos] == 0:
        raise ContractError("a_n = b_n = 0: this eigenvalue splits off, apply reduce_h0 first")
    if a[pos] != 0 and b[pos] != 0:
        raise NotAnEigenvalueError(f"index {n} is in I1, lam_n is not an eigenvalue of B")
    f = _charfn(base, pair)
    order = zero_order(f, lam, tol)
    length = order + 1 if max_len is None else min(order + 1, max_len)
    unit = np.zeros(base.dim, dtype=complex)
    unit[pos] = 1.0
    vectors = []
    if a[pos] == 0:
        vectors.append(unit)
        for k in range(1, length):
            vectors.append(-_deleted_resolvent(base, pos, b, k) / b[pos])
        tag = "sigma0_case_a"
    else:
        for k in range(length):
            y = _deleted_resolvent(base, pos, b, k + 1)
            if k == order:
                alpha = -eval_derivative(f, lam, order) / np.conj(a[pos])
                y = y + alpha * unit
            vectors.append(y)
        tag = "sigma0_case_b"
    return _make_chain(assemble_dense(base, pair), lam, vectors, tag)


def chain_dense(mat, z, y0, length: int, rcond: float = 1e-10) -> JordanChain:
    """Chain grown by minimum-norm least-squares solves of ``(B - z) y_k = y_{k-1}``.

    Independent of the closed-form constructions; used to cross-check them.
    """
    mat = np.asarray(mat, dtype=complex)
    z = complex(z)
    shifted = mat - z * np.eye(mat.shape[0])
    vectors = [np.asarray(y0, dtype=complex)]
    for _ in range(1, length):
        y, *_ = np.linalg.lstsq(shifted, vectors[-1], rcond=rcond)
        vectors.append(y)
    return _make_chain(mat, z, vectors, "dense")


def shift_chain(chain: JordanChain, constants) -> JordanChain:
    """``y~_k = y_k + c_1 y_{k-1} + ... + c_k y_0``; constants beyond the chain length are ignored."""
    consts = np.zeros(chain.length, dtype=complex)
    given = np.asarray(constants, dtype=complex).reshape(-1)[: chain.length - 1]
    consts[1 : 1 + given.size] = given
    ys = chain.vectors
    new = [ys[0]]
    for k in range(1, chain.length):
        new.append(ys[k] + sum(consts[i] * ys[k - i] for i in range(1, k + 1)))
    return _make_chain(chain.matrix, chain.eigenvalue, new, chain.case_tag)


def recover_shift(chain: JordanChain, other: JordanChain):
    """Constants ``c_1..c_m`` turning ``chain`` into ``other`` (same ``y_0``), and the worst relative miss."""
    if chain.length != other.length:
        raise ContractError("chains must have equal length")
    ys, ts = chain.vectors, other.vectors
    y0 = ys[0]
    if np.linalg.norm(ts[0] - y0) > 1e-12 * np.linalg.norm(y0):
        raise ContractError("chains must share y_0")
    consts = []
    worst = 0.0
    for k in range(1, chain.length):
        rem = ts[k] - ys[k] - sum(consts[i - 1] * ys[k - i] for i in range(1, k))
        ck = np.vdot(y0, rem) / np.vdot(y0, y0)
        consts.append(ck)
        scale = max(np.linalg.norm(ts[k]), np.linalg.norm(ys[k]))
        worst = max(worst, float(np.linalg.norm(rem - ck * y0) / scale))
    return np.array(consts, dtype=complex), worst


def certify_multiplicity(base: BaseOperator, pair: PerturbationPair, z, tol: float = 1e-8,
                         check_oracle: bool = True, oracle_tol: float = 1e-8) -> MultiplicityCertificate:
    """Geometric and algebraic multiplicity at ``z`` from the theory, optionally cross-checked
    against the rank of powers of the dense ``B - z``.
    """
    geometric, _ = geometric_multiplicity(base, pair, z, tol)
    pos = _sigma0_position(base, complex(z))
    sigma0 = pos is not None
    point = complex(base.eigenvalues[pos]) if sigma0 else complex(z)
    order = zero_order(_charfn(base, pair), point, tol)
    algebraic = order + 1 if sigma0 else order
    oracle = None
    if check_oracle:
        oracle = rank_multiplicity(assemble_dense(base, pair), point, tol=oracle_tol)
        if oracle != algebraic:
            raise ConsistencyError(
                f"at z={point}: theory gives algebraic multiplicity {algebraic}, "
                f"oracle rank test gives {oracle} (ill-conditioned instance?)"
            )
    return MultiplicityCertificate(point, geometric, algebraic, order, sigma0, oracle)
