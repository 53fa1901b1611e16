"""Consistency suite: the spectrum predicted from ``F`` against the dense oracle.

Predicted eigenvalues of ``B`` are the zeros of ``F`` off the spectrum of ``A``
(multiplicity = zero order) together with every ``lam_n`` where ``a_n b_n = 0``
(multiplicity = zero order of ``F`` there + 1).  Each check records its name, a
pass flag and a short detail string so a failing run says what failed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import TargetSpectrum, format_complex
from .charfn import from_pair, zero_order, zeros
from .errors import RankOneError
from .jordan import chain_dense, chain_resolvent_case, chain_sigma0
from .localization import strip_halfwidth
from .operator_model import BaseOperator, PerturbationPair, assemble_dense, split_indices
from .oracle import dense_eigenvalues, rank_multiplicity

__all__ = ["PredictedEigenvalue", "Check", "VerificationReport", "predicted_spectrum",
           "match_radius", "verify_instance"]


@dataclass(frozen=True)
class PredictedEigenvalue:
    point: complex
    multiplicity: int
    kind: str  # "zero" (new eigenvalue), "surviving" (a_n b_n = 0, not both), "inherited" (a_n = b_n = 0)
    index: int | None = None  # operator index for surviving / inherited points


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    predicted: list
    oracle_values: np.ndarray
    oracle_multiplicities: list
    chain_residuals: list
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def predicted_spectrum(base: BaseOperator, pair: PerturbationPair, tol: float = 1e-8,
                       cluster_tol: float = 1e-4) -> list[PredictedEigenvalue]:
    """Theory multiset of eigenvalues of ``B`` with multiplicities summing to the dimension."""
    pair.check_against(base)
    split = split_indices(pair)
    f = from_pair(base, pair, split)
    a, b = pair.a_coeffs, pair.b_coeffs
    out = []
    survivors = base.eigenvalues[split.I0]
    for pos in split.I0:
        lam = float(base.eigenvalues[pos])
        order = zero_order(f, lam, tol)
        kind = "inherited" if a[pos] == 0 and b[pos] == 0 else "surviving"
        out.append(PredictedEigenvalue(complex(lam), order + 1, kind, int(base.indices[pos])))
    guard = cluster_tol * base.span()
    for zr in zeros(f, cluster_tol, tol):
        # zeros sitting on a surviving lam_n are already counted through its order
        if survivors.size and np.min(np.abs(survivors - zr.point)) <= guard:
            continue
        out.append(PredictedEigenvalue(zr.point, zr.multiplicity, "zero"))
    out.sort(key=lambda p: (p.point.real, p.point.imag))
    return out


def match_radius(multiplicity: int, scale: float, tol: float) -> float:
    """Distance within which ``multiplicity`` oracle eigenvalues are expected to sit.

    A cluster of ``m`` eigenvalues scatters like ``(tol * scale)^(1/m)`` under
    perturbations of relative size ``tol``.
    """
    return float((tol * max(scale, 1.0)) ** (1.0 / multiplicity))


def _take_nearest(values: np.ndarray, used: np.ndarray, z: complex, count: int) -> np.ndarray:
    dist = np.where(used, np.inf, np.abs(values - z))
    picks = np.argsort(dist, kind="stable")[:count]
    used[picks] = True
    return dist[picks]


def _chain_for(base, pair, mat, pred: PredictedEigenvalue, tol: float):
    if pred.kind == "zero":
        return chain_resolvent_case(base, pair, pred.point, tol=tol)
    if pred.kind == "surviving":
        return chain_sigma0(base, pair, pred.index, tol=tol)
    unit = np.zeros(base.dim, dtype=complex)
    unit[base.position(pred.index)] = 1.0
    return chain_dense(mat, pred.point, unit, 1)


def verify_instance(base: BaseOperator, pair: PerturbationPair, *, targets: TargetSpectrum | None = None,
                    tol: float = 1e-8, chain_tol: float = 1e-8, spectrum_tol: float = 1e-8,
                    strip_slack: float = 1e-8) -> VerificationReport:
    """Run every consistency check on one instance.

    Checks: ``spectrum`` (oracle eigenvalues sit at the predicted points, radius
    from :func:`match_radius`), ``multiplicity`` (rank stabilization agrees with the
    predicted multiplicity), ``chains`` (relative link residuals at most
    ``chain_tol``), ``strip`` and, when ``targets`` is given, ``targets``.
    """
    mat = assemble_dense(base, pair)
    report = dense_eigenvalues(mat)
    values = report.values
    scale = float(np.linalg.norm(mat, 2))
    checks = []

    try:
        predicted = predicted_spectrum(base, pair, tol)
    except RankOneError as exc:
        checks.append(Check("prediction", False, str(exc)))
        return VerificationReport([], values, [], [], checks)

    total = sum(p.multiplicity for p in predicted)
    checks.append(Check("count", total == base.dim,
                        f"predicted multiplicities sum to {total}, dimension {base.dim}"))

    used = np.zeros(values.size, dtype=bool)
    worst = []
    for p in predicted:
        dist = _take_nearest(values, used, p.point, p.multiplicity)
        worst.append(float(dist.max()) / match_radius(p.multiplicity, scale, spectrum_tol))
    ok = bool(worst) and max(worst) <= 1.0
    checks.append(Check("spectrum", ok, f"worst distance / allowed radius = {max(worst, default=0):.3g}"))

    oracle_mult = []
    bad = []
    for p in predicted:
        try:
            got = rank_multiplicity(mat, p.point, tol=tol)
        except RankOneError:
            got = -1
        oracle_mult.append(got)
        if got != p.multiplicity:
            bad.append(f"{format_complex(p.point)}: theory {p.multiplicity}, oracle {got}")
    checks.append(Check("multiplicity", not bad, "; ".join(bad) or "all agree"))

    residuals = []
    worst_chain = 0.0
    chain_err = []
    for p in predicted:
        try:
            chain = _chain_for(base, pair, mat, p, tol)
            residuals.append(chain.residuals.tolist())
            worst_chain = max(worst_chain, chain.max_residual)
        except RankOneError as exc:
            residuals.append([])
            chain_err.append(f"{format_complex(p.point)}: {exc}")
    ok = not chain_err and worst_chain <= chain_tol
    checks.append(Check("chains", ok, "; ".join(chain_err) or f"max residual {worst_chain:.3g}"))

    width = strip_halfwidth(pair)
    excess = float(np.max(np.abs(values.imag))) - width
    checks.append(Check("strip", excess <= strip_slack * max(scale, 1.0),
                        f"max |Im mu| - |phi||psi| = {excess:.3g}"))

    if targets is not None:
        checks.append(_target_check(targets, predicted, values, scale, spectrum_tol))
    return VerificationReport(predicted, values, oracle_mult, residuals, checks)


def _target_check(targets, predicted, values, scale, spectrum_tol) -> Check:
    problems = []
    for z, m in targets.items():
        radius = match_radius(m, scale, spectrum_tol)
        near = [p for p in predicted if abs(p.point - z) <= radius]
        got = sum(p.multiplicity for p in near)
        count = int(np.sum(np.abs(values - z) <= radius))
        if got != m or count != m:
            problems.append(f"{format_complex(z)}: wanted {m}, theory {got}, oracle {count}")
    return Check("targets", not problems, "; ".join(problems) or "all targets placed")
