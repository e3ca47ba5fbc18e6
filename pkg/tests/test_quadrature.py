import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehvi_quad.errors import EmptyGrid, NodeBudgetExceeded, NotPositiveDefinite, OrderOutOfRange
from ehvi_quad.gaussians import GaussianDensity
from ehvi_quad.quadrature import gh_grid, hermite_rule, node_count, prune, tensor_grid, transform

from conftest import random_spd


def normal_moment(k: int) -> float:
    return 0.0 if k % 2 else float(math.prod(range(k - 1, 0, -2)))


def test_rule_n1():
    rule = hermite_rule(1)
    np.testing.assert_array_equal(rule.nodes, [0.0])
    np.testing.assert_array_equal(rule.weights, [1.0])


def test_rule_n2():
    rule = hermite_rule(2)
    np.testing.assert_allclose(rule.nodes, [-1, 1], atol=1e-14)
    np.testing.assert_allclose(rule.weights, [0.5, 0.5], atol=1e-14)


def test_rule_n3_analytic():
    # roots of x^3 - 3x; weights from sum w = 1 and sum w x^2 = 1
    rule = hermite_rule(3)
    np.testing.assert_allclose(rule.nodes, [-math.sqrt(3), 0, math.sqrt(3)], atol=1e-14)
    np.testing.assert_allclose(rule.weights, [1 / 6, 2 / 3, 1 / 6], atol=1e-14)


def test_rule_matches_numpy_hermite_e():
    for n in (5, 20, 60, 100):
        x, w = np.polynomial.hermite_e.hermegauss(n)
        rule = hermite_rule(n)
        np.testing.assert_allclose(rule.nodes, x, atol=1e-10 * max(1, abs(x).max()))
        np.testing.assert_allclose(rule.weights, w / w.sum(), rtol=1e-8, atol=1e-300)


@pytest.mark.parametrize("n", [0, 101, -3])
def test_rule_order_out_of_range(n):
    with pytest.raises(OrderOutOfRange):
        hermite_rule(n)


@pytest.mark.parametrize("n", [1, 2, 7, 8, 31, 50, 100])
def test_rule_invariants(n):
    rule = hermite_rule(n)
    assert abs(rule.weights.sum() - 1) <= 1e-12
    assert np.all(rule.weights > 0)
    assert np.all(np.diff(rule.nodes) > 0)
    np.testing.assert_allclose(rule.nodes, -rule.nodes[::-1], atol=1e-12)
    np.testing.assert_allclose(rule.weights, rule.weights[::-1], atol=1e-12)
    if n % 2:
        assert abs(rule.nodes[n // 2]) <= 1e-12
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


@pytest.mark.parametrize("n", [1, 2, 3, 10, 25, 50])
def test_rule_moment_exactness(n):
    rule = hermite_rule(n)
    for k in range(2 * n):
        scale = max(1.0, float(np.sum(rule.weights * np.abs(rule.nodes) ** k)))
        assert abs(np.sum(rule.weights * rule.nodes**k) - normal_moment(k)) <= 1e-9 * scale


def test_rule_first_moments_absolute():
    # the low moments are checked to the absolute tolerance for every n up to 50
    for n in range(1, 51):
        rule = hermite_rule(n)
        for k in range(min(2 * n, 8)):
            assert abs(np.sum(rule.weights * rule.nodes**k) - normal_moment(k)) <= 1e-9


def test_tensor_grid_n2_m2():
    grid = tensor_grid(hermite_rule(2), 2)
    assert len(grid) == 4
    assert {tuple(np.round(p, 12)) for p in grid.nodes} == {(-1, -1), (-1, 1), (1, -1), (1, 1)}
    np.testing.assert_allclose(grid.weights, 0.25)


def test_tensor_grid_n3_m2_centre_weight():
    grid = tensor_grid(hermite_rule(3), 2)
    assert len(grid) == 9
    centre = np.flatnonzero(np.all(grid.index == 1, axis=1))[0]
    assert abs(grid.weights[centre] - 4 / 9) < 1e-14
    assert abs(grid.weights.sum() - 1) < 1e-10


def test_tensor_grid_weights_are_products():
    rule = hermite_rule(4)
    grid = tensor_grid(rule, 3)
    expected = np.prod(rule.weights[grid.index], axis=1)
    np.testing.assert_allclose(grid.weights, expected, rtol=1e-14)
    np.testing.assert_array_equal(grid.nodes, rule.nodes[grid.index])


def test_tensor_grid_budget():
    # 5**10 fits under the default 10**7, so the guard is shown with a tighter budget
    with pytest.raises(NodeBudgetExceeded):
        tensor_grid(hermite_rule(5), 10, budget=5**10 - 1)
    with pytest.raises(NodeBudgetExceeded):
        tensor_grid(hermite_rule(4), 12)
    with pytest.raises(NodeBudgetExceeded):
        tensor_grid(hermite_rule(3), 3, budget=26)
    assert len(tensor_grid(hermite_rule(3), 3, budget=27)) == 27


def test_budget_example_arithmetic():
    # 5^10 = 9,765,625 full nodes; 80% of them is 7,812,500
    assert node_count(5, 10, 0.2) == 7_812_500
    assert 5**10 == 9_765_625


@pytest.mark.parametrize("n,m,r,k", [(8, 2, 0.2, 51), (15, 2, 0.2, 180), (3, 2, 0.2, 7), (10, 3, 0.1, 900)])
def test_prune_counts(n, m, r, k):
    grid = prune(tensor_grid(hermite_rule(n), m), r)
    assert len(grid) == k == node_count(n, m, r)


def test_prune_zero_is_noop():
    full = tensor_grid(hermite_rule(6), 2)
    same = prune(full, 0.0)
    np.testing.assert_array_equal(same.nodes, full.nodes)
    np.testing.assert_array_equal(same.weights, full.weights)


def test_prune_tie_break_lexicographic():
    # n=3, m=2 keeps 7 of 9: centre and the four edges, then two of the four
    # tied corners, which must be (0,0) and (0,2)
    grid = prune(tensor_grid(hermite_rule(3), 2), 0.2)
    assert grid.index.tolist() == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2], [2, 1]]


def test_prune_order_property_and_no_renormalize():
    full = tensor_grid(hermite_rule(7), 3)
    kept = prune(full, 0.5)
    dropped_mask = np.ones(len(full), bool)
    flat = np.ravel_multi_index(kept.index.T.astype(int), (7, 7, 7))
    dropped_mask[flat] = False
    assert kept.weights.min() >= full.weights[dropped_mask].max()
    assert kept.weights.sum() < 1
    renorm = prune(full, 0.5, renormalize=True)
    assert abs(renorm.weights.sum() - 1) < 1e-12


def test_prune_empty_and_transformed():
    with pytest.raises(EmptyGrid):
        prune(tensor_grid(hermite_rule(3), 2), 1.0)
    g = GaussianDensity([0, 0], np.eye(2))
    with pytest.raises(ValueError):
        prune(transform(tensor_grid(hermite_rule(3), 2), g), 0.2)


def test_k_formula_small_grid():
    for n in range(1, 16):
        for m in range(1, 6):
            if n**m > 10**6:
                continue
            for r in (0.0, 0.1, 0.2, 0.5):
                expected = math.floor(n**m * (1 - r) + 1e-9)
                if expected == 0:
                    continue
                assert len(prune(tensor_grid(hermite_rule(n), m), r)) == expected


def test_transform_identity():
    grid = tensor_grid(hermite_rule(5), 2)
    out = transform(grid, GaussianDensity([0, 0], np.eye(2)))
    np.testing.assert_allclose(out.nodes, grid.nodes, atol=1e-15)
    assert out.transformed


def test_transform_scalar():
    grid = tensor_grid(hermite_rule(5), 1)
    out = transform(grid, GaussianDensity([2.0], [[4.0]]))
    np.testing.assert_allclose(out.nodes[:, 0], 2 + 2 * grid.nodes[:, 0], atol=1e-14)
    np.testing.assert_array_equal(out.weights, grid.weights)


def test_transform_fig1_cloud_axes():
    g = GaussianDensity([0, 0], [[1, 0.5], [0.5, 1]])
    grid = gh_grid(g, 8, 0.2)
    assert len(grid) == 51
    major = np.array([1, 1]) / math.sqrt(2)
    minor = np.array([1, -1]) / math.sqrt(2)
    base = prune(tensor_grid(hermite_rule(8), 2), 0.2)
    np.testing.assert_allclose(grid.nodes @ major, math.sqrt(1.5) * base.nodes[:, 0], atol=1e-12)
    np.testing.assert_allclose(grid.nodes @ minor, math.sqrt(0.5) * base.nodes[:, 1], atol=1e-12)


def test_transform_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        transform(tensor_grid(hermite_rule(3), 2), GaussianDensity([0, 0, 0], np.eye(3)))


def test_transform_rejects_non_pd():
    class Fake:
        mean = np.zeros(2)
        cov = np.array([[1.0, 2.0], [2.0, 1.0]])
        dim = 2

    with pytest.raises(NotPositiveDefinite):
        transform(tensor_grid(hermite_rule(3), 2), Fake())


def test_gh_grid_n1_at_mean():
    g = GaussianDensity([1.5, -2.0], [[0.3, 0.1], [0.1, 0.4]])
    grid = gh_grid(g, 1, 0.0)
    assert len(grid) == 1
    np.testing.assert_allclose(grid.nodes[0], g.mean, atol=1e-15)
    assert grid.weights[0] == 1.0


def test_gh_grid_n1_any_positive_prune_is_empty():
    # floor(1 * (1 - r)) = 0 for every r > 0
    with pytest.raises(EmptyGrid):
        gh_grid(GaussianDensity([0.0], [[1.0]]), 1, 0.2)


def test_gh15_has_180_nodes():
    g = GaussianDensity([0, 0], [[2, 0.3], [0.3, 1]])
    assert len(gh_grid(g, 15, 0.2)) == 180


def test_mean_node_only_for_odd_n():
    g = GaussianDensity([1.0, 2.0], [[1, 0.5], [0.5, 1]])
    for n, has in ((4, False), (5, True), (14, False), (15, True)):
        d = np.min(np.linalg.norm(gh_grid(g, n, 0.2).nodes - g.mean, axis=1))
        assert bool(d < 1e-12) == has


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_linear_expectation_recovered(seed, n):
    rs = np.random.default_rng(seed)
    g = GaussianDensity(rs.normal(size=2), random_spd(rs, 2))
    grid = gh_grid(g, n, 0.0)
    a = rs.normal(size=2)
    assert abs(grid.integrate(grid.nodes @ a) - a @ g.mean) <= 1e-9 * max(1, np.abs(g.mean).max())
    np.testing.assert_allclose(grid.weights @ grid.nodes, g.mean, atol=1e-9)


def test_second_moment_recovered():
    g = GaussianDensity([0.5, -1.0], [[2.0, 0.7], [0.7, 1.0]])
    grid = gh_grid(g, 4, 0.0)
    d = grid.nodes - g.mean
    np.testing.assert_allclose((grid.weights[:, None] * d).T @ d, g.cov, atol=1e-12)


def test_gh_grid_deterministic():
    g = GaussianDensity([0.1, 0.2, 0.3], np.diag([1.0, 2.0, 3.0]) + 0.1)
    a, b = gh_grid(g, 9, 0.2), gh_grid(g, 9, 0.2)
    assert a.nodes.tobytes() == b.nodes.tobytes()
    assert a.weights.tobytes() == b.weights.tobytes()
