"""Eigenvalue assignment: build ``phi`` / ``psi`` so that ``B`` has a prescribed spectrum.

Two routes produce the same residues ``c_j = conj(a_j) b_j``:

* residue route: ``F`` is written down as ``prod (z - z_k)^{m'_k} / prod (z - lam_j)``
  and ``c_j`` is minus its residue at ``lam_j``;
* confluent route: the conditions ``F(z_k) = F'(z_k) = ... = 0`` are solved as a
  linear system whose matrix is a confluent Cauchy matrix.

Targets that coincide with an eigenvalue of ``A`` need one order less from ``F``
because that eigenvalue survives into ``B`` with the extra multiplicity.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, ContractError, GenericityError
from .operator_model import BaseOperator, PerturbationPair

__all__ = [
    "TargetSpectrum",
    "AssignmentResult",
    "parse_complex",
    "parse_targets",
    "format_complex",
    "reduce_multiplicities",
    "prescribed_residues",
    "confluent_matrix",
    "confluent_residues",
    "design_psi_given_phi",
    "design_phi_given_psi",
    "design_confluent",
    "confluent_cauchy_determinant",
    "condition_estimate",
    "COINCIDENCE_TOL",
]

COINCIDENCE_TOL = 1e-12
_SINGULAR_COND = 1e15


@dataclass(frozen=True)
class TargetSpectrum:
    points: np.ndarray
    multiplicities: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=complex).reshape(-1)
        mult = np.array(self.multiplicities, dtype=int).reshape(-1)
        if pts.shape != mult.shape:
            raise ContractError("points and multiplicities must have equal length")
        if pts.size == 0:
            raise ContractError("target spectrum is empty")
        if np.any(mult < 1):
            raise ContractError("multiplicities must be positive")
        if not np.all(np.isfinite(pts)):
            raise ContractError("target points must be finite")
        if pts.size > 1:
            sep = np.abs(pts[:, None] - pts[None, :])[np.triu_indices(pts.size, 1)]
            if sep.min() == 0:
                raise ContractError("target points must be pairwise distinct")
        pts.setflags(write=False)
        mult.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "multiplicities", mult)

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    def items(self):
        return zip(self.points.tolist(), self.multiplicities.tolist())

    def conj(self) -> "TargetSpectrum":
        return TargetSpectrum(np.conj(self.points), self.multiplicities)

    def __str__(self) -> str:
        return ",".join(f"{format_complex(z)}:{m}" for z, m in self.items())


@dataclass(frozen=True)
class AssignmentResult:
    pair: PerturbationPair
    residues_c: np.ndarray
    condition_estimate: float
    free_indices: tuple = ()
    active: tuple = ()  # window positions carrying the residues (I1)
    mode: str = "residue"
    targets: TargetSpectrum | None = field(default=None, compare=False)


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?P<re>[+-]?{_NUM})?(?:(?P<isign>[+-]?)(?P<im>{_NUM})?(?P<unit>[ij]))?$"
)


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` literals: ``1``, ``-2.5e-3``, ``i``, ``-i``, ``3i``, ``1+2i``, ``1-i``, ``1e2-3.5e-1i``."""
    s = re.sub(r"\s*([+-])\s*", r"\1", text.strip())  # spaces only around signs
    m = _COMPLEX_RE.match(s)
    if not s or m is None or (m["re"] is None and m["unit"] is None):
        raise ContractError(f"cannot parse complex number {text!r}")
    if m["unit"] and m["re"] is not None and not m["isign"]:
        # "2i" is matched as re="2" + unit
        return complex(0.0, float(m["re"]))
    real = float(m["re"]) if m["re"] is not None else 0.0
    imag = 0.0
    if m["unit"]:
        imag = float(m["im"]) if m["im"] is not None else 1.0
        if m["isign"] == "-":
            imag = -imag
    return complex(real, imag)


def _short(x: float) -> str:
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def format_complex(z: complex) -> str:
    """Shortest text that parses back to exactly ``z`` (``"1"``, ``"-0.5+2i"``)."""
    z = complex(z)
    if z.imag == 0:
        return _short(z.real)
    im = _short(z.imag)
    return f"{_short(z.real)}{'' if im.startswith('-') else '+'}{im}i"


def parse_targets(text: str) -> TargetSpectrum:
    """``"0:2,1+2i:1"`` -> points (0, 1+2i) with multiplicities (2, 1)."""
    points, mults = [], []
    for chunk in text.split(","):
        if not chunk.strip():
            continue
        if chunk.count(":") != 1:
            raise ContractError(f"target entry {chunk!r} must look like point:multiplicity")
        pt, mult = chunk.split(":")
        points.append(parse_complex(pt))
        try:
            mults.append(int(mult))
        except ValueError as exc:
            raise ContractError(f"bad multiplicity in {chunk!r}") from exc
    return TargetSpectrum(points, mults)


def _matches(base: BaseOperator, z: complex) -> int | None:
    dist = np.abs(base.eigenvalues - z)
    pos = int(np.argmin(dist))
    return pos if dist[pos] <= COINCIDENCE_TOL * base.span() else None


def reduce_multiplicities(base: BaseOperator, target: TargetSpectrum):
    """Multiplicities ``F`` must supply and the map target index -> matched window position.

    A target sitting on an eigenvalue of ``A`` loses one order.
    """
    reduced = []
    sigma0 = {}
    for j, (z, m) in enumerate(target.items()):
        pos = _matches(base, z)
        if pos is None:
            reduced.append(m)
        else:
            sigma0[j] = pos
            reduced.append(m - 1)
    return np.array(reduced, dtype=int), sigma0


def _default_active(base: BaseOperator, excluded, count: int, allowed=None) -> np.ndarray:
    free = [p for p in range(base.dim) if p not in excluded and (allowed is None or allowed[p])]
    if len(free) < count:
        raise GenericityError(
            f"need {count} usable positions for the residues, only {len(free)} available"
        )
    return np.array(free[:count], dtype=int)


def _residues_on(lams: np.ndarray, points: np.ndarray, reduced: np.ndarray) -> np.ndarray:
    c = np.empty(lams.size, dtype=complex)
    for j, lam in enumerate(lams):
        num = np.prod((lam - points) ** reduced)
        den = np.prod(lam - np.delete(lams, j))
        c[j] = -num / den
    return c


def prescribed_residues(base: BaseOperator, target: TargetSpectrum, relaxed: bool = False, active=None):
    """Residues ``c_j`` for ``F = prod (z - z_k)^{m'_k} / prod_{I1} (z - lam_j)``.

    Returns ``(c, active_positions)``.  With ``sum m_k = n`` the active positions
    are exactly the unmatched ones.  In relaxed mode (``sum m_k < n``) only the
    first ``sum m'_k`` unmatched positions are active; the caller must zero ``b``
    (or ``a``) on the rest so those eigenvalues of ``A`` stay in the spectrum.
    """
    reduced, sigma0 = reduce_multiplicities(base, target)
    total = target.total
    if total > base.dim or (total != base.dim and not relaxed):
        raise ContractError(f"multiplicities sum to {total}, window has dimension {base.dim}")
    need = int(reduced.sum())
    matched = set(sigma0.values())
    if active is None:
        active = _default_active(base, matched, need)
    active = np.asarray(active, dtype=int)
    if active.size != need or matched.intersection(active.tolist()):
        raise ContractError("active positions inconsistent with the target multiplicities")
    c = _residues_on(base.eigenvalues[active], target.points, reduced)
    return c, active


def confluent_matrix(lams, target: TargetSpectrum) -> np.ndarray:
    """Rows ``1/(lam_k - z_j)^r``, grouped by target point, ``r = 1..m_j`` ascending."""
    lams = np.asarray(lams, dtype=float)
    rows = []
    for z, m in target.items():
        for r in range(1, m + 1):
            rows.append(1.0 / (lams - z) ** r)
    return np.array(rows, dtype=complex).reshape(len(rows), lams.size)


def confluent_residues(lams, target: TargetSpectrum):
    """Solve ``sum_k c_k/(lam_k - z_j)^r + delta_{r1} = 0``; returns ``(c, cond(matrix))``."""
    lams = np.asarray(lams, dtype=float)
    if target.total != lams.size:
        raise ContractError("confluent system needs as many poles as the total multiplicity")
    dist = np.abs(lams[:, None] - target.points[None, :])
    if dist.size and dist.min() <= COINCIDENCE_TOL * max(1.0, float(np.ptp(lams))):
        raise ContractError("confluent design requires every target off the spectrum of A")
    mat = confluent_matrix(lams, target)
    rhs = np.zeros(mat.shape[0], dtype=complex)
    row = 0
    for _z, m in target.items():
        rhs[row] = -1.0
        row += m
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond) or cond > _SINGULAR_COND:
        raise ConditioningError(f"confluent system is numerically singular (cond {cond:.2e})")
    return np.linalg.solve(mat, rhs), cond


def condition_estimate(lams, reduced_points, reduced_mults, c) -> float:
    """Conditioning of a design: ``cond(row-equilibrated confluent matrix) * max(1, |c|_inf)``.

    The first factor measures how residues respond to perturbed data, the second
    how large the perturbation is next to ``A``; both blow up for clustered poles.
    """
    keep = np.asarray(reduced_mults) > 0
    if not np.any(keep) or np.size(c) == 0:
        return 1.0
    tgt = TargetSpectrum(np.asarray(reduced_points)[keep], np.asarray(reduced_mults)[keep])
    mat = confluent_matrix(lams, tgt)
    mat = mat / np.linalg.norm(mat, axis=1, keepdims=True)
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond):
        return float("inf")
    return cond * max(1.0, float(np.max(np.abs(c))))


def _zero_mask(v: np.ndarray, tol: float) -> np.ndarray:
    return np.abs(v) <= tol * np.linalg.norm(v)


def _design_other(base, given, target, *, given_is_phi, relaxed, free_values, tol):
    given = np.asarray(given, dtype=complex).reshape(-1)
    if given.size != base.dim:
        raise ContractError(f"given vector has length {given.size}, window has {base.dim}")
    if not np.any(given):
        raise ContractError("given vector must be nonzero")
    if target.total > base.dim or (target.total != base.dim and not relaxed):
        raise ContractError(f"multiplicities sum to {target.total}, window has dimension {base.dim}")
    reduced, sigma0 = reduce_multiplicities(base, target)
    matched = set(sigma0.values())
    zero = _zero_mask(given, tol)
    stray = [int(p) for p in np.flatnonzero(zero) if p not in matched]
    if stray and not relaxed:
        raise GenericityError(
            "coefficients vanish at positions "
            f"{stray} whose eigenvalues {base.eigenvalues[stray].tolist()} are not targets"
        )
    need = int(reduced.sum())
    active = _default_active(base, matched, need, allowed=~zero)
    c = _residues_on(base.eigenvalues[active], target.points, reduced)

    other = np.zeros(base.dim, dtype=complex)
    if given_is_phi:
        other[active] = c / np.conj(given[active])
    else:
        other[active] = np.conj(c / given[active])
    free = tuple(int(p) for p in np.flatnonzero(zero))
    if free_values is not None:
        free_values = np.asarray(free_values, dtype=complex).reshape(-1)
        if free_values.size != len(free):
            raise ContractError(f"expected {len(free)} free values, got {free_values.size}")
        other[list(free)] = free_values
    if not np.any(other):
        raise GenericityError("designed vector vanishes identically")
    pair = PerturbationPair(given, other) if given_is_phi else PerturbationPair(other, given)
    cond = condition_estimate(base.eigenvalues[active], target.points, reduced, c)
    return AssignmentResult(pair, c, cond, free, tuple(active.tolist()), "residue", target)


def design_psi_given_phi(base: BaseOperator, phi_coeffs, target: TargetSpectrum, *,
                         relaxed: bool = False, free_values=None, tol: float = 0.0) -> AssignmentResult:
    """Fix ``phi``, solve for the unique ``psi`` placing the target spectrum.

    ``b_j = c_j / conj(a_j)`` on I1; positions where ``a_j = 0`` are free (default 0)
    and must sit under a target; other non-active positions get ``b_j = 0``.
    """
    return _design_other(base, phi_coeffs, target, given_is_phi=True, relaxed=relaxed,
                         free_values=free_values, tol=tol)


def design_phi_given_psi(base: BaseOperator, psi_coeffs, target: TargetSpectrum, *,
                         relaxed: bool = False, free_values=None, tol: float = 0.0) -> AssignmentResult:
    """Mirror image of :func:`design_psi_given_phi`: ``a_j = conj(c_j / b_j)``."""
    return _design_other(base, psi_coeffs, target, given_is_phi=False, relaxed=relaxed,
                         free_values=free_values, tol=tol)


def design_confluent(base: BaseOperator, target: TargetSpectrum, *, phi_coeffs=None,
                     psi_coeffs=None) -> AssignmentResult:
    """Solve the confluent Cauchy system on the first ``N = sum m_j`` positions.

    Without a given vector ``a_k = 1`` and ``b_k = c_k`` there.  With ``phi``
    (or ``psi``) given, the other vector is solved for on those positions and
    set to zero beyond them.  Positions beyond ``N`` keep their eigenvalues.
    """
    if phi_coeffs is not None and psi_coeffs is not None:
        raise ContractError("give phi or psi, not both")
    n_used = target.total
    if n_used > base.dim:
        raise ContractError(f"multiplicities sum to {n_used}, window has dimension {base.dim}")
    lams = base.eigenvalues[:n_used]
    c, _cond = confluent_residues(lams, target)
    given = phi_coeffs if phi_coeffs is not None else psi_coeffs
    if given is None:
        a = np.zeros(base.dim, dtype=complex)
        b = np.zeros(base.dim, dtype=complex)
        a[:n_used] = 1.0
        b[:n_used] = c
    else:
        given = np.asarray(given, dtype=complex).reshape(-1)
        if given.size != base.dim:
            raise ContractError(f"given vector has length {given.size}, window has {base.dim}")
        if np.any(given[:n_used] == 0):
            raise GenericityError("given vector vanishes on a position used by the confluent system")
        other = np.zeros(base.dim, dtype=complex)
        if phi_coeffs is not None:
            other[:n_used] = c / np.conj(given[:n_used])
            a, b = given, other
        else:
            other[:n_used] = np.conj(c / given[:n_used])
            a, b = other, given
    est = condition_estimate(lams, target.points, target.multiplicities, c)
    return AssignmentResult(PerturbationPair(a, b), c, est, (), tuple(range(n_used)), "confluent", target)


def confluent_cauchy_determinant(lambdas, target: TargetSpectrum) -> complex:
    """Closed form of ``det(confluent_matrix(lambdas, target))``.

    ``(-1)^N prod_{k<l} (lam_k - lam_l) prod_{p<q} (z_q - z_p)^{m_p m_q} / prod_{q,k} (z_q - lam_k)^{m_q}``.
    Rows carry no factorials (they are Taylor coefficients), so no factorial factor appears.
    """
    lams = np.asarray(lambdas, dtype=float)
    n = lams.size
    if target.total != n:
        raise ContractError("total multiplicity must equal the number of poles")
    pts, mult = target.points, target.multiplicities
    val = complex((-1) ** n)
    for k in range(n):
        for l in range(k + 1, n):
            val *= lams[k] - lams[l]
    for p in range(pts.size):
        for q in range(p + 1, pts.size):
            val *= (pts[q] - pts[p]) ** (int(mult[p]) * int(mult[q]))
    for q in range(pts.size):
        val /= np.prod(pts[q] - lams) ** int(mult[q])
    return val
