"""Invariants checked on generated instances."""
import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rankone.assignment import (
    TargetSpectrum,
    design_psi_given_phi,
    format_complex,
    parse_complex,
    parse_targets,
)
from rankone.charfn import eval_derivative, from_pair, krein_apply, to_rational, zero_order, zeros
from rankone.localization import strip_halfwidth
from rankone.operator_model import BaseOperator, PerturbationPair, assemble_dense
from rankone.oracle import dense_eigenvalues
from rankone.verify import predicted_spectrum

SETTINGS = settings(max_examples=60, deadline=None)

finite = st.floats(-4, 4, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)
# coefficients are exactly zero or not vanishingly small: a residue of 1e-137 puts a zero on its pole
coefficient = st.one_of(st.just(0.0), st.floats(1e-3, 4), st.floats(-4, -1e-3))
coefficients = st.builds(complex, coefficient, coefficient)


@st.composite
def bases(draw, max_dim=8):
    n = draw(st.integers(1, max_dim))
    gaps = draw(st.lists(st.floats(0.5, 2.0), min_size=n, max_size=n))
    lams = np.cumsum(gaps) - np.sum(gaps) / 2
    return BaseOperator(lams, 0, 0.49)  # cumsum rounding can shave a gap below 0.5


@st.composite
def instances(draw, max_dim=8):
    base = draw(bases(max_dim))
    n = base.dim
    a = np.array(draw(st.lists(coefficients, min_size=n, max_size=n)))
    b = np.array(draw(st.lists(coefficients, min_size=n, max_size=n)))
    assume(np.any(a != 0) and np.any(b != 0))
    return base, PerturbationPair(a, b)


@SETTINGS
@given(instances())
def test_spectrum_in_strip(inst):
    base, pair = inst
    mat = assemble_dense(base, pair)
    values = dense_eigenvalues(mat).values
    slack = 1e-9 * max(1.0, np.linalg.norm(mat, 2))
    assert np.abs(values.imag).max() <= strip_halfwidth(pair) + slack


@SETTINGS
@given(instances(), complexes)
def test_rank_one_difference(inst, _z):
    base, pair = inst
    diff = assemble_dense(base, pair) - np.diag(base.eigenvalues.astype(complex))
    np.testing.assert_allclose(diff, np.outer(pair.b_coeffs, np.conj(pair.a_coeffs)), atol=1e-14)
    # subtracting the diagonal leaves rounding of size eps * |lam| on it
    assert np.linalg.matrix_rank(diff, tol=1e-12 * max(1.0, np.abs(base.eigenvalues).max())) <= 1


@SETTINGS
@given(instances(max_dim=6), complexes)
def test_rational_form_matches_pole_form(inst, z):
    base, pair = inst
    f = from_pair(base, pair)
    assume(f.n_terms > 0)
    z = z + 0.5j  # keep away from the real poles
    assume(np.min(np.abs(f.poles - z)) > 0.1)
    direct = eval_derivative(f, z)
    assert abs(to_rational(f)(z) - direct) <= 1e-8 * max(1.0, abs(direct), np.abs(f.c).sum() / 0.1)


@SETTINGS
@given(instances(), complexes)
def test_krein_resolvent_residual(inst, z):
    base, pair = inst
    z = z + 0.7j
    f = from_pair(base, pair)
    assume(abs(eval_derivative(f, z)) > 1e-3)
    g = np.linspace(1, 2, base.dim) + 1j * np.linspace(-1, 0, base.dim)
    sol = krein_apply(base, pair, z, g)
    mat = assemble_dense(base, pair)
    res = np.linalg.norm((mat - z * np.eye(base.dim)) @ sol - g) / np.linalg.norm(g)
    assert res <= 1e-9 * max(1.0, np.linalg.norm(mat, 2) * np.linalg.norm(sol) / np.linalg.norm(g))


@SETTINGS
@given(instances())
def test_predicted_multiplicities_sum_to_dimension(inst):
    base, pair = inst
    assert sum(p.multiplicity for p in predicted_spectrum(base, pair)) == base.dim


@SETTINGS
@given(instances())
def test_zero_count_matches_active_terms(inst):
    base, pair = inst
    f = from_pair(base, pair)
    found = zeros(f)
    assert sum(zr.multiplicity for zr in found) == f.n_terms
    for zr in found:
        assert abs(eval_derivative(f, zr.point)) <= 1e-6 * max(1.0, np.abs(f.c).sum())


@st.composite
def design_problems(draw):
    base = draw(bases(6))
    total = base.dim
    mults = []
    while total:
        mults.append(draw(st.integers(1, min(3, total))))
        total -= mults[-1]
    pts = [complex(draw(st.floats(-3, 3)), draw(st.floats(0.3, 2)) * draw(st.sampled_from([-1, 1])))
           for _ in mults]
    assume(len(pts) == 1 or min(abs(p - q) for i, p in enumerate(pts) for q in pts[i + 1:]) > 0.3)
    return base, TargetSpectrum(pts, mults)


@SETTINGS
@given(design_problems())
def test_design_places_target_orders(problem):
    base, target = problem
    result = design_psi_given_phi(base, np.ones(base.dim), target)
    assume(result.condition_estimate < 1e6)
    f = from_pair(base, result.pair)
    for z, m in target.items():
        assert zero_order(f, z, tol=1e-6) >= m


@SETTINGS
@given(design_problems())
def test_conjugate_targets_give_conjugate_residues(problem):
    base, target = problem
    mirrored = TargetSpectrum(np.conj(target.points), target.multiplicities)
    c = design_psi_given_phi(base, np.ones(base.dim), target).residues_c
    c_bar = design_psi_given_phi(base, np.ones(base.dim), mirrored).residues_c
    np.testing.assert_allclose(c_bar, np.conj(c), rtol=1e-8, atol=1e-10 * np.abs(c).max())


@SETTINGS
@given(design_problems())
def test_conjugation_closed_targets_give_real_residues(problem):
    base, target = problem
    assume(np.min(np.abs(target.points[:, None] - np.conj(target.points)[None, :])) > 0.1)
    pts = np.concatenate([target.points, np.conj(target.points)])
    mults = np.concatenate([target.multiplicities, target.multiplicities])
    assume(mults.sum() <= 6)
    both = TargetSpectrum(pts, mults)
    lams = np.concatenate([base.eigenvalues, base.eigenvalues[-1] + 0.7 * np.arange(1, base.dim + 1)])
    c = design_psi_given_phi(BaseOperator(lams), np.ones(lams.size), both).residues_c
    assert np.abs(c.imag).max() <= 1e-8 * np.abs(c).max()


@SETTINGS
@given(complexes)
def test_complex_text_round_trip(z):
    assert parse_complex(format_complex(z)) == z


@SETTINGS
@given(design_problems())
def test_target_text_round_trip(problem):
    _base, target = problem
    again = parse_targets(str(target))
    np.testing.assert_array_equal(again.points, target.points)
    np.testing.assert_array_equal(again.multiplicities, target.multiplicities)
