import numpy as np
import pytest

from rankone.assignment import (
    TargetSpectrum,
    confluent_cauchy_determinant,
    confluent_matrix,
    confluent_residues,
    design_confluent,
    design_phi_given_psi,
    design_psi_given_phi,
    format_complex,
    parse_complex,
    parse_targets,
    prescribed_residues,
    reduce_multiplicities,
)
from rankone.charfn import from_pair, zero_order
from rankone.corpus import random_base, random_design_problem
from rankone.errors import ConditioningError, ContractError, GenericityError
from rankone.operator_model import BaseOperator, assemble_dense
from rankone.oracle import dense_eigenvalues, rank_multiplicity

B12 = BaseOperator([1.0, 2.0])
B01 = BaseOperator([0.0, 1.0])


@pytest.mark.parametrize(
    "text, value",
    [
        ("0", 0), ("-2.5e-3", -2.5e-3), ("i", 1j), ("-i", -1j), ("+i", 1j), ("3i", 3j),
        ("-2j", -2j), ("1+2i", 1 + 2j), ("1-i", 1 - 1j), ("1e2-3.5e-1i", 100 - 0.35j),
        (".5+.5i", 0.5 + 0.5j), (" 2 - 3i ", 2 - 3j), ("0+0i", 0),
    ],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+", "i2", "1++2i", "1 2", "2ii"])
def test_parse_complex_rejects(text):
    with pytest.raises(ContractError):
        parse_complex(text)


def test_format_round_trip():
    for z in (0, 1.5, -1j, 2 - 3.25j, 1e-7 + 1e7j):
        assert parse_complex(format_complex(z)) == z


def test_parse_targets():
    t = parse_targets("0:2,1+2i:1")
    assert t.points.tolist() == [0, 1 + 2j] and t.multiplicities.tolist() == [2, 1]
    assert parse_targets(str(t)).points.tolist() == t.points.tolist()
    for bad in ("0", "0:x", "0:0", "0:1,0:1", ""):
        with pytest.raises(ContractError):
            parse_targets(bad)


def test_reduce_multiplicities_examples():
    red, s0 = reduce_multiplicities(B12, parse_targets("0:2"))
    assert red.tolist() == [2] and s0 == {}
    red, s0 = reduce_multiplicities(B12, parse_targets("1:3"))
    assert red.tolist() == [2] and s0 == {0: 0}
    red, _ = reduce_multiplicities(B12, parse_targets("1:1"))
    assert red.tolist() == [0]


def test_prescribed_residues_examples():
    c, active = prescribed_residues(B12, parse_targets("0:2"))
    np.testing.assert_allclose(c, [1, -4])
    assert active.tolist() == [0, 1]
    c, _ = prescribed_residues(B01, parse_targets("i:2"))
    np.testing.assert_allclose(c, [-1, 2j], atol=1e-15)
    c, active = prescribed_residues(BaseOperator([5.0]), parse_targets("5:1"))
    assert c.size == 0 and active.size == 0


def test_prescribed_residues_budget():
    with pytest.raises(ContractError):
        prescribed_residues(B12, parse_targets("0:1"))
    c, active = prescribed_residues(B12, parse_targets("0:1"), relaxed=True)
    assert active.tolist() == [0] and c.tolist() == [-1]


def test_design_psi_examples():
    r = design_psi_given_phi(B12, [1, 1], parse_targets("0:2"))
    np.testing.assert_allclose(r.pair.b_coeffs, [1, -4])
    mat = assemble_dense(B12, r.pair)
    np.testing.assert_allclose(mat @ mat, 0, atol=1e-14)
    r = design_psi_given_phi(B01, [1, 1], parse_targets("i:2"))
    np.testing.assert_allclose(r.pair.b_coeffs, [-1, 2j], atol=1e-15)
    mat = assemble_dense(B01, r.pair)
    assert abs(np.trace(mat) - 2j) < 1e-14 and abs(np.linalg.det(mat) + 1) < 1e-14
    with pytest.raises(GenericityError):
        design_psi_given_phi(B12, [0, 1], parse_targets("0:2"))


def test_design_phi_examples():
    r = design_phi_given_psi(B12, [1, 1], parse_targets("0:2"))
    np.testing.assert_allclose(r.pair.a_coeffs, [1, -4])
    r = design_phi_given_psi(B01, [1, 1], parse_targets("i:2"))
    np.testing.assert_allclose(r.pair.a_coeffs, [-1, -2j], atol=1e-15)
    with pytest.raises(GenericityError):
        design_phi_given_psi(B12, [1, 0], parse_targets("0:2"))


def test_residues_are_exact_by_construction(rng):
    base, target, phi = random_design_problem(rng)
    r = design_psi_given_phi(base, phi, target)
    act = list(r.active)
    np.testing.assert_allclose(np.conj(r.pair.a_coeffs[act]) * r.pair.b_coeffs[act], r.residues_c, rtol=1e-14)


def test_zero_coefficient_under_target_is_free():
    base = BaseOperator([0.0, 1.0, 2.0])
    target = parse_targets("1:2,5i:1")
    r = design_psi_given_phi(base, [1, 0, 1], target)
    assert r.free_indices == (1,)
    assert r.pair.b_coeffs[1] == 0
    mat = assemble_dense(base, r.pair)
    assert rank_multiplicity(mat, 1.0) == 2 and rank_multiplicity(mat, 5j) == 1
    r2 = design_psi_given_phi(base, [1, 0, 1], target, free_values=[7.0])
    assert r2.pair.b_coeffs[1] == 7.0
    assert rank_multiplicity(assemble_dense(base, r2.pair), 1.0) == 2
    with pytest.raises(ContractError):
        design_psi_given_phi(base, [1, 0, 1], target, free_values=[1.0, 2.0])


def test_target_on_spectrum_with_generic_phi():
    base = BaseOperator([0.0, 1.0, 2.0])
    r = design_psi_given_phi(base, [1, 1, 1], parse_targets("1:2,3:1"))
    mat = assemble_dense(base, r.pair)
    assert rank_multiplicity(mat, 1.0) == 2 and rank_multiplicity(mat, 3.0) == 1


def test_relaxed_mode_keeps_surplus_eigenvalues():
    base = BaseOperator([0.0, 1.0, 2.0, 3.0])
    with pytest.raises(ContractError):
        design_psi_given_phi(base, np.ones(4), parse_targets("i:2"))
    r = design_psi_given_phi(base, np.ones(4), parse_targets("i:2"), relaxed=True)
    values = dense_eigenvalues(assemble_dense(base, r.pair), cluster_tol=1e-6)
    sizes = sorted((round(c.real, 6), round(c.imag, 6), s) for c, s, _ in values.clusters)
    assert sizes == [(0.0, 1.0, 2), (2.0, 0.0, 1), (3.0, 0.0, 1)]


def test_confluent_examples():
    r = design_confluent(B12, parse_targets("0:2"))
    np.testing.assert_allclose(r.residues_c, [1, -4], atol=1e-13)
    np.testing.assert_array_equal(r.pair.a_coeffs, [1, 1])
    base = BaseOperator([1.0, 2.0, 3.0, 4.0])
    r = design_confluent(base, parse_targets("i:2,-i:2"))
    mat = assemble_dense(base, r.pair)
    poly = np.poly(mat)
    np.testing.assert_allclose(poly, [1, 0, 2, 0, 1], atol=1e-9)
    np.testing.assert_allclose(r.residues_c.imag, 0, atol=1e-12)
    with pytest.raises(ContractError):
        design_confluent(B12, parse_targets("1:2"))


def test_confluent_with_given_phi():
    r = design_confluent(B12, parse_targets("0:2"), phi_coeffs=[2, 1j])
    np.testing.assert_allclose(r.pair.residues, [1, -4], atol=1e-13)
    with pytest.raises(GenericityError):
        design_confluent(B12, parse_targets("0:2"), phi_coeffs=[0, 1])


def test_confluent_singular_system():
    with pytest.raises(ConditioningError):
        confluent_residues([1.0, 1.0 + 1e-15], parse_targets("0:2"))


def test_residue_and_confluent_routes_agree(rng):
    agreed = 0
    for _ in range(40):
        n = int(rng.integers(1, 8))
        base = random_base(rng, n)
        pts = base.eigenvalues[: max(1, n // 2)] + 1.5j
        mults = np.ones(pts.size, dtype=int)
        mults[0] += n - mults.sum()
        target = TargetSpectrum(pts, mults)
        c_res, _ = prescribed_residues(base, target)
        c_conf, cond = confluent_residues(base.eigenvalues, target)
        if cond < 1e6:
            np.testing.assert_allclose(c_conf, c_res, rtol=1e-8)
            agreed += 1
    assert agreed > 20


def test_conjugate_targets_conjugate_residues(rng):
    base = random_base(rng, 5)
    target = TargetSpectrum([0.3 + 1j, -1 - 0.5j], [3, 2])
    c1, _ = prescribed_residues(base, target)
    c2, _ = prescribed_residues(base, target.conj())
    np.testing.assert_allclose(c2, np.conj(c1), rtol=1e-14)


def test_designed_zero_orders_match_reduced_multiplicities(rng):
    for _ in range(20):
        base, target, phi = random_design_problem(rng, max_dim=6)
        try:
            r = design_psi_given_phi(base, phi, target)
        except GenericityError:
            continue
        f = from_pair(base, r.pair)
        reduced, sigma0 = reduce_multiplicities(base, target)
        for j, (z, _m) in enumerate(target.items()):
            assert zero_order(f, z, 1e-7) == reduced[j]


def test_cauchy_determinant_examples():
    target = TargetSpectrum([3, 4], [1, 1])
    closed = confluent_cauchy_determinant([1, 2], target)
    assert abs(closed + 1 / 12) < 1e-15
    assert abs(np.linalg.det(confluent_matrix([1, 2], target)) + 1 / 12) < 1e-15
    target = parse_targets("0:2")
    direct = np.linalg.det(confluent_matrix([1, 2], target))
    assert abs(confluent_cauchy_determinant([1, 2], target) - direct) <= 1e-12 * abs(direct)
    assert confluent_cauchy_determinant([1], parse_targets("0:1")) == 1


def test_condition_estimate_flags_clustered_poles():
    well = design_psi_given_phi(B12, [1, 1], parse_targets("0:2")).condition_estimate
    bad = design_psi_given_phi(BaseOperator([1.0, 1.0 + 1e-9]), [1, 1], parse_targets("0:2")).condition_estimate
    assert well < 1e3 and bad > 1e12
