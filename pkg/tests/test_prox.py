import numpy as np

from cwsense.solvers import prox_group_l2, prox_groups, project_l2_ball, soft_threshold


def test_prox_zero_vector():
    np.testing.assert_array_equal(prox_group_l2(np.zeros(3), 1.0), 0)


def test_prox_inside_threshold():
    np.testing.assert_array_equal(prox_group_l2(np.array([3.0, 0.0]), 5.0), 0)


def test_prox_shrinkage():
    np.testing.assert_allclose(prox_group_l2(np.array([3.0, 4.0]), 2.5), [1.5, 2.0])


def test_prox_groups_matches_single_group():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    gid = np.array([0] * 3 + [1] * 7)
    out = prox_groups(v, gid, 2, 0.8)
    np.testing.assert_allclose(out[:3], prox_group_l2(v[:3], 0.8))
    np.testing.assert_allclose(out[3:], prox_group_l2(v[3:], 0.8))


def test_soft_threshold_is_singleton_group_prox():
    v = np.array([3 + 4j, 0.1, -2.0])
    np.testing.assert_allclose(soft_threshold(v, 1.0), [(3 + 4j) * 0.8, 0, -1.0])


def test_ball_cases():
    v = np.array([1.0, 1.0])
    np.testing.assert_array_equal(project_l2_ball(v, np.zeros(2), 5.0), v)
    np.testing.assert_array_equal(project_l2_ball(v, np.array([2.0, 3.0]), 0.0), [2.0, 3.0])
    np.testing.assert_allclose(project_l2_ball(np.array([6.0, 8.0]), np.zeros(2), 5.0), [3, 4])
