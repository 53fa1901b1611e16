"""Random problem generators shared by the sweeps, the tests and ``--seed`` on the command line."""
from __future__ import annotations

import numpy as np

from .assignment import TargetSpectrum
from .operator_model import BaseOperator, PerturbationPair


def random_base(rng, n: int, gap_range=(0.5, 2.0)) -> BaseOperator:
    """Centered increasing eigenvalues with consecutive gaps drawn from ``gap_range``."""
    lam = np.cumsum(rng.uniform(*gap_range, n))
    lam -= lam.mean()
    return BaseOperator(lam, 0, gap_range[0])


def random_pair(rng, n: int, scale: float = 1.0) -> PerturbationPair:
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    return PerturbationPair(scale * a, scale * b)


def random_target(rng, base: BaseOperator, max_mult: int = 3, on_spectrum: float = 0.2,
                  separation: float = 0.5) -> TargetSpectrum:
    """Multiplicities up to ``max_mult`` summing to ``base.dim``.

    A point lands on an eigenvalue of ``A`` with probability ``on_spectrum``;
    all other points keep ``separation`` from each other and from the spectrum.
    """
    lam = base.eigenvalues
    n = base.dim
    mults, left = [], n
    while left:
        m = int(rng.integers(1, min(max_mult, left) + 1))
        mults.append(m)
        left -= m
    pts: list[complex] = []
    while len(pts) < len(mults):
        if rng.random() < on_spectrum:
            z = complex(lam[rng.integers(n)])
        else:
            im = rng.uniform(-2, 2) if rng.random() < 0.7 else 0.0
            z = complex(rng.uniform(lam[0] - 1, lam[-1] + 1), im)
        far = all(abs(z - q) >= separation for q in pts)
        gap = float(np.min(np.abs(lam - z)))
        if far and (gap >= separation or gap == 0):
            pts.append(z)
    return TargetSpectrum(pts, mults)


def random_design_problem(rng, max_dim: int = 10, max_mult: int = 3):
    """``(base, target, phi)`` with ``phi`` generic (complex Gaussian)."""
    n = int(rng.integers(1, max_dim + 1))
    base = random_base(rng, n)
    target = random_target(rng, base, max_mult)
    phi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return base, target, phi
