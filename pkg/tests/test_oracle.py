import numpy as np
import pytest

from rankone.errors import ContractError, OracleError
from rankone.operator_model import assemble_dense, example_periodic_derivative
from rankone.oracle import cluster, dense_eigenvalues, rank_multiplicity


def test_nilpotent():
    report = dense_eigenvalues([[2, 1], [-4, -2]])
    assert np.all(np.abs(report.values) < 1e-8)
    assert report.backward_error <= 1e-12


def test_diagonal():
    report = dense_eigenvalues(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(np.sort(report.values.real), [1, 2, 3])
    assert sum(size for _c, size, _r in report.clusters) == 3


def test_double_eigenvalue_at_i():
    report = dense_eigenvalues([[-1, -1], [2j, 1 + 2j]], cluster_tol=1e-6)
    assert len(report.clusters) == 1
    center, size, _ = report.clusters[0]
    assert size == 2 and abs(center - 1j) < 1e-12


def test_oracle_rejects_bad_input():
    with pytest.raises(ContractError):
        dense_eigenvalues(np.ones((2, 3)))
    with pytest.raises(ContractError):
        dense_eigenvalues(np.eye(513))


def test_cluster_examples():
    out = cluster([0, 1e-9, 5], 1e-6)
    assert [s for _c, s, _r in out] == [2, 1]
    assert abs(out[0][0]) < 1e-9
    assert cluster([1j, 1j], 1e-8) == [(1j, 2, 0.0)]
    ((center, size, _),) = cluster([1, 2], 10)
    assert center == 1.5 and size == 2
    with pytest.raises(ContractError):
        cluster([1], 0)


def test_rank_multiplicity_examples():
    assert rank_multiplicity(np.array([[2, 1], [-4, -2]]), 0) == 2
    assert rank_multiplicity(np.diag([1.0, 2.0, 3.0]), 2) == 1
    assert rank_multiplicity(np.diag([1.0, 2.0, 3.0]), 2.5) == 0
    base, pair = example_periodic_derivative(1, 2)
    assert rank_multiplicity(assemble_dense(base, pair), 0) == 3


def test_rank_multiplicity_jordan_block_plus_eigenvalue():
    mat = np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float)
    assert rank_multiplicity(mat, 1) == 4  # blocks of size 3 and 1
    assert rank_multiplicity(mat, 1, max_power=10) == 4


def test_rank_multiplicity_needs_enough_powers():
    mat = np.eye(4) + np.diag(np.ones(3), 1)  # one Jordan block of size 4
    with pytest.raises(OracleError):
        rank_multiplicity(mat, 1, max_power=2)
