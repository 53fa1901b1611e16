"""Brute-force verification backend: dense eigenvalues, clustering, rank-based multiplicity.

Nothing here knows about characteristic functions; the oracle only sees matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse.csgraph import connected_components

from .errors import ContractError, OracleError

__all__ = ["EigenReport", "dense_eigenvalues", "cluster", "cluster_labels", "rank_multiplicity", "MAX_DIM"]

MAX_DIM = 512


@dataclass(frozen=True)
class EigenReport:
    values: np.ndarray
    clusters: list  # (center, size, radius) triples
    backward_error: float

    def count_near(self, z, radius: float) -> int:
        return int(np.sum(np.abs(self.values - z) <= radius))


def cluster_labels(values, tol: float) -> np.ndarray:
    """Component label of each value under single linkage at radius ``tol``."""
    if tol <= 0:
        raise ContractError("tol must be positive")
    vals = np.asarray(values, dtype=complex).reshape(-1)
    if vals.size == 0:
        return np.zeros(0, dtype=int)
    adjacency = np.abs(vals[:, None] - vals[None, :]) <= tol
    return connected_components(adjacency, directed=False)[1]


def cluster(values, tol: float) -> list[tuple[complex, int, float]]:
    """Single-linkage clusters at radius ``tol``; returns ``(mean, size, max distance to mean)``.

    A large ``tol`` chains everything into one cluster; that is intended.
    """
    vals = np.asarray(values, dtype=complex).reshape(-1)
    labels = cluster_labels(vals, tol)
    out = []
    for lab in range(labels.max() + 1 if labels.size else 0):
        members = vals[labels == lab]
        center = complex(members.mean())
        out.append((center, int(members.size), float(np.max(np.abs(members - center)))))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def dense_eigenvalues(mat, cluster_tol: float = 1e-8, max_backward_error: float = 1e-10) -> EigenReport:
    """All eigenvalues of a dense matrix from a balanced complex Schur form.

    The backward error is ``|Z T Z^H - M'|_F / |M'|_F`` for the balanced matrix ``M'``.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ContractError("matrix must be square")
    if mat.shape[0] > MAX_DIM:
        raise ContractError(f"oracle is capped at dimension {MAX_DIM}")
    if not np.all(np.isfinite(mat)):
        raise ContractError("matrix entries must be finite")
    balanced, _ = sla.matrix_balance(mat, permute=False)
    try:
        tri, basis = sla.schur(balanced, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise OracleError(f"QR iteration failed: {exc}") from exc
    norm = np.linalg.norm(balanced)
    berr = float(np.linalg.norm(basis @ tri @ basis.conj().T - balanced) / norm) if norm else 0.0
    if berr > max_backward_error:
        raise OracleError(f"backward error {berr:.2e} exceeds {max_backward_error:.0e}")
    values = np.diag(tri).copy()
    return EigenReport(values, cluster(values, cluster_tol), berr)


def rank_multiplicity(mat, z, max_power: int | None = None, tol: float = 1e-8) -> int:
    """Dimension of the root subspace at ``z``, i.e. ``n - rank((M - z)^p)`` once it stops growing.

    ``ker (M - z)^p`` is grown recursively as ``null((I - K K^H)(M - z))`` with
    ``K`` an orthonormal basis of the previous kernel, so powers are never formed
    (they bury nearby eigenvalues under ``ratio^p``).  Singular values count as
    zero below ``tol * max(|M - z|_2, |M|_2)``, after diagonal balancing.
    """
    mat = np.asarray(mat, dtype=complex)
    n = mat.shape[0]
    max_power = n if max_power is None else max_power
    balanced, _ = sla.matrix_balance(mat, permute=False)
    shifted = balanced - complex(z) * np.eye(n)
    scale = max(np.linalg.norm(shifted, 2), np.linalg.norm(balanced, 2))
    if scale == 0:
        return n
    kernel = np.zeros((n, 0), dtype=complex)
    for _ in range(max_power + 1):
        residual = shifted - kernel @ (kernel.conj().T @ shifted)
        _, sv, vh = np.linalg.svd(residual)
        rank = int(np.sum(sv > tol * scale))
        if n - rank == kernel.shape[1]:
            return kernel.shape[1]
        kernel = vh[rank:].conj().T
    raise OracleError(f"root subspace at z={z} did not stabilize by power {max_power}")
