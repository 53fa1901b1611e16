"""Where the spectrum of ``B`` can sit: the horizontal strip, the disks around
``lam_n``, the eigenvalue-free region far out, and how fast ``mu_n - lam_n`` decays.

The far-region bound is checked by sampling, not proved; treat it as a smoke test
of the analytic estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InsufficientTruncationError, NearEigenvalueError
from .operator_model import BaseOperator, PerturbationPair, assemble_dense
from .oracle import dense_eigenvalues

__all__ = [
    "LocalizationReport",
    "RegionThreshold",
    "strip_halfwidth",
    "resolvent_region_threshold",
    "region_parts",
    "sample_region_min_abs_f",
    "circle_counts",
    "riesz_projector_gap",
    "asymptotics_scan",
    "ScanResult",
    "trend_blocks",
    "empirical_k",
    "localization_report",
]


@dataclass(frozen=True)
class RegionThreshold:
    n_prime: int
    n_double_prime: int
    N: float


@dataclass(frozen=True)
class ScanResult:
    """Deviation rows ``(n, lam_n, mu_n or None, |mu_n - lam_n| or nan)`` plus unmatched eigenvalues."""

    rows: list
    relocated: np.ndarray
    radius: float

    def deviations(self) -> list[tuple[int, float]]:
        return [(n, dev) for n, _lam, _mu, dev in self.rows]


@dataclass(frozen=True)
class LocalizationReport:
    strip_halfwidth: float
    epsilon: float
    N_threshold: float
    circle_counts: dict = field(default_factory=dict)
    deviations: list = field(default_factory=list)
    relocated: int = 0


def strip_halfwidth(pair: PerturbationPair) -> float:
    """``|phi| |psi|``: every eigenvalue of ``B`` has ``|Im mu|`` at most this."""
    return float(np.linalg.norm(pair.a_coeffs) * np.linalg.norm(pair.b_coeffs))


def _require_gap(base: BaseOperator) -> float:
    if base.gap_d is None:
        raise ContractError("base operator has no declared gap_d")
    return float(base.gap_d)


def region_parts(base: BaseOperator, pair: PerturbationPair, eps: float) -> RegionThreshold:
    """Constructive threshold ``N`` beyond which ``|Re z| >= N`` (outside the eps-disks) is eigenvalue free.

    ``N'`` is the smallest index radius whose coefficient tail is at most ``eps/4``;
    ``N'' = ceil(N' + 4 |phi||psi| / d)``; ``N = max(|lam_{N''}|, |lam_{-N''}|)``.
    A window with no negative indices is treated as one-sided.
    """
    pair.check_against(base)
    d = _require_gap(base)
    if eps <= 0:
        raise ContractError("eps must be positive")
    idx = np.abs(base.indices)
    weights = np.abs(pair.a_coeffs * pair.b_coeffs)
    n_prime = 0
    for cand in range(int(idx.max()) + 2):
        if weights[idx >= cand].sum() <= eps / 4:
            n_prime = cand
            break
    n_dd = int(np.ceil(n_prime + 4 * strip_halfwidth(pair) / d))
    lo, hi = base.index_offset, base.index_offset + base.dim - 1
    if n_dd > hi:
        raise InsufficientTruncationError(f"need lam_{n_dd} but the window ends at index {hi}")
    big = abs(base.eigenvalues[base.position(n_dd)])
    if lo < 0:
        if -n_dd < lo:
            raise InsufficientTruncationError(f"need lam_{-n_dd} but the window starts at index {lo}")
        big = max(big, abs(base.eigenvalues[base.position(-n_dd)]))
    return RegionThreshold(n_prime, n_dd, float(big))


def resolvent_region_threshold(base: BaseOperator, pair: PerturbationPair, eps: float) -> float:
    return region_parts(base, pair, eps).N


def _f_values(base, pair, zs) -> np.ndarray:
    c = pair.residues
    return 1.0 + np.sum(c[None, :] / (base.eigenvalues[None, :] - zs[:, None]), axis=1)


def sample_region_min_abs_f(base: BaseOperator, pair: PerturbationPair, eps: float, N: float,
                            n_points: int = 1000, rng=None) -> float:
    """Smallest ``|F|`` over random points of the far region inside the window.

    Samples have ``N <= |Re z| <= max |lam|``, ``|Im z| <= |phi||psi| + 1`` and
    stay outside every disk ``|z - lam_n| < eps``.
    """
    rng = np.random.default_rng(rng)
    top = float(np.max(np.abs(base.eigenvalues)))
    if top <= N:
        raise InsufficientTruncationError("the far region does not meet the window")
    height = strip_halfwidth(pair) + 1.0
    sides = [s for s in (1, -1) if np.any(s * base.eigenvalues >= N)]
    pts = []
    while len(pts) < n_points:
        batch = 2 * n_points
        re = rng.uniform(N, top, batch) * rng.choice(sides, batch)
        im = rng.uniform(-height, height, batch)
        z = re + 1j * im
        keep = np.min(np.abs(z[:, None] - base.eigenvalues[None, :]), axis=1) >= eps
        pts.extend(z[keep].tolist())
    zs = np.array(pts[:n_points])
    return float(np.min(np.abs(_f_values(base, pair, zs))))


def circle_counts(base: BaseOperator, pair: PerturbationPair, eps: float, index_range=None,
                  eigenvalues=None) -> dict[int, int]:
    """Number of eigenvalues of ``B`` in each open disk ``|z - lam_n| < eps``."""
    gap = base.min_gap()
    if not 0 < eps < gap / 2:
        raise ContractError(f"eps={eps} must lie in (0, gap/2) with gap={gap}")
    if eigenvalues is None:
        eigenvalues = dense_eigenvalues(assemble_dense(base, pair)).values
    indices = base.indices if index_range is None else np.asarray(list(index_range))
    out = {}
    for n in indices:
        lam = base.eigenvalues[base.position(int(n))]
        out[int(n)] = int(np.sum(np.abs(eigenvalues - lam) < eps))
    return out


def riesz_projector_gap(base: BaseOperator, pair: PerturbationPair, n: int, eps: float,
                        quad_points: int = 128, eigenvalues=None) -> float:
    """Spectral norm of ``P_n - P'_n`` (Riesz projectors of ``A`` and ``B`` for the disk around ``lam_n``).

    By the Krein formula the difference is the contour integral of the rank-one
    term ``(A - z)^{-1} psi <., (A - conj z)^{-1} phi> / F(z)``, integrated with the
    trapezoidal rule on ``quad_points`` nodes.  A value below 1 means both
    projectors have the same rank.
    """
    pair.check_against(base)
    if quad_points < 64:
        raise ContractError("use at least 64 quadrature nodes")
    center = base.eigenvalues[base.position(n)]
    margin = eps / 100
    if np.any(np.abs(np.abs(base.eigenvalues - center) - eps) <= margin):
        raise NearEigenvalueError("an eigenvalue of A lies on the contour")
    if eigenvalues is None:
        eigenvalues = dense_eigenvalues(assemble_dense(base, pair)).values
    if np.any(np.abs(np.abs(eigenvalues - center) - eps) <= margin):
        raise NearEigenvalueError("an eigenvalue of B lies on the contour")
    theta = 2 * np.pi * np.arange(quad_points) / quad_points
    nodes = center + eps * np.exp(1j * theta)
    weights = 1j * eps * np.exp(1j * theta) * (2 * np.pi / quad_points) / (2j * np.pi)
    f_vals = _f_values(base, pair, nodes)
    if np.min(np.abs(f_vals)) < 1e-10:
        raise NearEigenvalueError("F nearly vanishes on the contour")
    diff = base.eigenvalues[None, :] - nodes[:, None]
    left = pair.b_coeffs[None, :] / diff  # (A - z)^{-1} psi
    right = np.conj(pair.a_coeffs)[None, :] / diff  # row form of <., (A - conj z)^{-1} phi>
    scaled = left * (weights / f_vals)[:, None]
    gap = scaled.T @ right
    return float(np.linalg.norm(gap, 2))


def asymptotics_scan(base: BaseOperator, pair: PerturbationPair, eps: float | None = None,
                     eigenvalues=None) -> ScanResult:
    """Greedy one-to-one matching of eigenvalues ``mu`` of ``B`` to the nearest ``lam_n`` within ``eps``.

    Pairs are taken in order of increasing distance; eigenvalues left over are
    reported as relocated, indices left over get ``mu = None`` and deviation ``nan``.
    ``eps`` defaults to just under half the gap so the disks are disjoint.
    """
    pair.check_against(base)
    if eps is None:
        eps = 0.45 * base.min_gap() if np.isfinite(base.min_gap()) else 1.0
    if eigenvalues is None:
        eigenvalues = dense_eigenvalues(assemble_dense(base, pair)).values
    mus = np.asarray(eigenvalues, dtype=complex)
    dist = np.abs(mus[:, None] - base.eigenvalues[None, :])
    cand = np.argwhere(dist < eps)
    order = np.argsort(dist[cand[:, 0], cand[:, 1]], kind="stable")
    used_mu, match = set(), {}
    for i, k in cand[order]:
        if i in used_mu or k in match:
            continue
        used_mu.add(int(i))
        match[int(k)] = int(i)
    rows = []
    for k, n in enumerate(base.indices):
        lam = float(base.eigenvalues[k])
        if k in match:
            mu = complex(mus[match[k]])
            rows.append((int(n), lam, mu, float(abs(mu - lam))))
        else:
            rows.append((int(n), lam, None, float("nan")))
    relocated = np.array([mus[i] for i in range(mus.size) if i not in used_mu], dtype=complex)
    return ScanResult(rows, relocated, float(eps))


def trend_blocks(deviations, start: int = 50, stop: int | None = None) -> list[tuple[int, int, float]]:
    """Medians of ``|mu_n - lam_n|`` over dyadic blocks ``start <= |n| < 2 start``, ``2 start <= |n| < 4 start``, ...

    The last block is cut at ``stop`` (default: largest ``|n|``) inclusive.
    """
    data = [(abs(n), dev) for n, dev in deviations if np.isfinite(dev)]
    if not data:
        return []
    top = max(n for n, _ in data) if stop is None else stop
    out = []
    lo = start
    while lo <= top:
        hi = min(2 * lo, top + 1)
        vals = [dev for n, dev in data if lo <= n < hi]
        if vals:
            out.append((lo, hi, float(np.median(vals))))
        lo = hi
    return out


def empirical_k(counts: dict[int, int]) -> int | None:
    """Smallest ``K`` such that every disk with ``|n| > K`` holds exactly one eigenvalue (None if none do)."""
    bad = [abs(n) for n, c in counts.items() if c != 1]
    if not bad:
        return 0
    k = max(bad)
    return k if any(abs(n) > k for n in counts) else None


def localization_report(base: BaseOperator, pair: PerturbationPair, eps: float) -> LocalizationReport:
    """Strip width, far-region threshold (nan if the window is too short), disk counts and deviations."""
    values = dense_eigenvalues(assemble_dense(base, pair)).values
    try:
        threshold = resolvent_region_threshold(base, pair, eps)
    except (InsufficientTruncationError, ContractError):
        threshold = float("nan")
    counts = circle_counts(base, pair, eps, eigenvalues=values)
    scan = asymptotics_scan(base, pair, eps, eigenvalues=values)
    relocated = base.dim - sum(counts.values())
    return LocalizationReport(strip_halfwidth(pair), float(eps), threshold, counts,
                              scan.deviations(), relocated)
