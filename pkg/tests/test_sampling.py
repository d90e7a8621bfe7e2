import numpy as np
import pytest

from cwsense.sampling import (
    MeasurementOperator,
    estimate_operator_norm,
    estimate_rip_constant,
    make_operator,
    measure,
    sensing_map,
)


def test_full_selection_is_permutation():
    op = make_operator("selection", 16, 16, 3)
    x = np.arange(16.0)
    np.testing.assert_array_equal(np.sort(measure(op, x)), x)


def test_selection_rows_distinct_sorted():
    op = make_operator("selection", 250, 500, 0)
    assert len(np.unique(op.rows)) == 250
    assert np.all(np.diff(op.rows) > 0)


def test_bernoulli_entries():
    op = make_operator("bernoulli", 4, 16, 1)
    np.testing.assert_array_equal(np.abs(op.matrix), 0.25)


def test_gaussian_column_norms():
    op = make_operator("gaussian", 128, 256, 2)
    assert abs(np.mean(np.sum(op.matrix**2, axis=0)) - 1.0) < 0.05


def test_measure_selection_definition():
    op = MeasurementOperator("selection", 2, 3, rows=np.array([2, 0]))
    np.testing.assert_array_equal(measure(op, np.array([5, 6, 7])), [7, 5])


@pytest.mark.parametrize("kind", ["selection", "gaussian", "bernoulli"])
def test_measure_zero(kind):
    op = make_operator(kind, 5, 9, 0)
    assert not np.any(measure(op, np.zeros(9)))


def test_gaussian_against_naive_matmul():
    op = make_operator("gaussian", 6, 10, 4)
    x = np.random.default_rng(0).standard_normal(10)
    naive = [sum(op.matrix[i, j] * x[j] for j in range(10)) for i in range(6)]
    np.testing.assert_allclose(measure(op, x), naive, rtol=0, atol=1e-12)


def test_full_sampling_map_is_unitary():
    A = sensing_map(make_operator("selection", 32, 32, 0), 32)
    D = A.dense()
    np.testing.assert_allclose(D.conj().T @ D, np.eye(32), atol=1e-10)


@pytest.mark.parametrize("kind", ["selection", "gaussian", "bernoulli"])
def test_adjoint(kind):
    rng = np.random.default_rng(7)
    A = sensing_map(make_operator(kind, 20, 48, rng), 48)
    r = rng.standard_normal(48) + 1j * rng.standard_normal(48)
    y = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    lhs = np.vdot(y, A.forward(r))
    rhs = np.vdot(A.adjoint(y), r)
    assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(r) * np.linalg.norm(y)


def test_selection_norm_at_most_one():
    A = sensing_map(make_operator("selection", 100, 256, 5), 256)
    assert estimate_operator_norm(A) <= 1 + 1e-9


@pytest.mark.parametrize("kind", ["selection", "gaussian", "bernoulli"])
def test_solve_shifted_matches_dense(kind):
    rng = np.random.default_rng(8)
    A = sensing_map(make_operator(kind, 12, 24, rng), 24)
    D = A.dense()
    b = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    x, ax = A.solve_shifted(b)
    np.testing.assert_allclose(x, np.linalg.solve(np.eye(24) + D.conj().T @ D, b), atol=1e-10)
    np.testing.assert_allclose(ax, D @ x, atol=1e-10)
    delta = rng.standard_normal(12) + 0j
    d = A.least_norm_correction(delta)
    np.testing.assert_allclose(d, np.linalg.pinv(D) @ delta, atol=1e-10)


def test_rip_full_sampling():
    op = make_operator("selection", 64, 64, 0)
    for s in (1, 4, 16):
        assert estimate_rip_constant(op, s, 200, seed=1) <= 1e-12


def test_rip_bernoulli_singletons():
    op = make_operator("bernoulli", 8, 32, 0)
    assert estimate_rip_constant(op, 1, 500, seed=2) == pytest.approx(abs(8 / 32 - 1), abs=1e-12)


def test_rip_gaussian_below_one():
    op = make_operator("gaussian", 128, 256, 0)
    assert estimate_rip_constant(op, 5, 10_000, seed=0) < 1


def test_determinism_per_seed():
    for kind in ("selection", "gaussian", "bernoulli"):
        a, b = make_operator(kind, 10, 20, 42), make_operator(kind, 10, 20, 42)
        assert (a.dense() == b.dense()).all()


def test_validation():
    with pytest.raises(ValueError):
        make_operator("selection", 30, 20, 0)
    with pytest.raises(ValueError):
        make_operator("fourier", 3, 20, 0)
    with pytest.raises(ValueError):
        MeasurementOperator("selection", 2, 4, rows=np.array([1, 1]))
    with pytest.raises(ValueError):
        sensing_map(make_operator("selection", 2, 4, 0), 5)
