import numpy as np
import pytest
from scipy.spatial.distance import cdist

from fastkcde.dataset import RawDataset, standardize
from fastkcde.spatial import build, node_dist_x, node_dist_y


def _walk(tree):
    stack = [tree.root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(node.children)


@pytest.mark.parametrize("leaf_size", [1, 4, 16])
def test_leaves_partition_points(small_data, leaf_size):
    tree = build(small_data, leaf_size=leaf_size)
    leaves = tree.leaves()
    covered = np.concatenate([leaf.indices for leaf in leaves])
    assert sorted(covered.tolist()) == list(range(small_data.n))
    assert all(1 <= leaf.count <= leaf_size for leaf in leaves)


def test_structure_and_boxes(small_data, small_tree):
    joint = small_data.joint
    for node in _walk(small_tree):
        block = joint[node.indices]
        assert np.all(block >= node.box_lo) and np.all(block <= node.box_hi)
        assert np.allclose(block.min(axis=0), node.box_lo)
        if not node.is_leaf:
            left, right = node.children
            assert left.index > node.index and right.index > node.index
            assert left.point_range[0] == node.point_range[0]
            assert left.point_range[1] == right.point_range[0]
            assert right.point_range[1] == node.point_range[1]
            assert abs(left.count - right.count) <= 1


def test_points_follow_slot_order(small_data, small_tree):
    assert np.array_equal(small_tree.points, small_data.joint[small_tree.point_index])


def test_duplicates_respect_leaf_size():
    joint = np.ones((40, 3))
    tree = build(joint, leaf_size=5)
    assert all(leaf.count <= 5 for leaf in tree.leaves())


def test_build_validation(small_data):
    with pytest.raises(ValueError):
        build(small_data, leaf_size=0)
    with pytest.raises(TypeError):
        build(small_data, leaf_size=2.5)
    with pytest.raises(ValueError):
        build(np.empty((0, 2)))


def _check_brackets(data, tree):
    d = data.d
    nodes = list(_walk(tree))
    violations = 0
    for a in nodes:
        for b in nodes:
            xa, xb = tree.points[a.point_range[0]:a.point_range[1]], tree.points[b.point_range[0]:b.point_range[1]]
            dx = cdist(xa[:, :d], xb[:, :d])
            dy = np.abs(xa[:, d][:, None] - xb[:, d][None, :])
            x_lo, x_hi = node_dist_x(a, b)
            y_lo, y_hi = node_dist_y(a, b)
            violations += np.sum(dx < x_lo - 1e-12) + np.sum(dx > x_hi + 1e-12)
            violations += np.sum(dy < y_lo - 1e-12) + np.sum(dy > y_hi + 1e-12)
    return violations


def test_bracket_soundness_exhaustive():
    rng = np.random.default_rng(5)
    data = standardize(RawDataset(rng.normal(size=(64, 2)), rng.normal(size=64)))
    tree = build(data, leaf_size=4)
    assert _check_brackets(data, tree) == 0


def test_bracket_soundness_random_pairs():
    rng = np.random.default_rng(6)
    data = standardize(RawDataset(rng.normal(size=(5000, 3)), rng.normal(size=5000)))
    tree = build(data, leaf_size=16)
    d = data.d
    for _ in range(200):
        a = tree.node(rng.integers(tree.n_nodes))
        b = tree.node(rng.integers(tree.n_nodes))
        i = rng.integers(*a.point_range)
        j = rng.integers(*b.point_range)
        dx = np.linalg.norm(tree.points[i, :d] - tree.points[j, :d])
        dy = abs(tree.points[i, d] - tree.points[j, d])
        x_lo, x_hi = node_dist_x(a, b)
        y_lo, y_hi = node_dist_y(a, b)
        assert x_lo - 1e-12 <= dx <= x_hi + 1e-12
        assert y_lo - 1e-12 <= dy <= y_hi + 1e-12


def test_nn_radii_match_brute_force(small_data, small_tree):
    d = small_data.d
    dx = cdist(small_data.x_s, small_data.x_s)
    dy = np.abs(small_data.y_s[:, None] - small_data.y_s[None, :])
    np.fill_diagonal(dx, np.inf)
    np.fill_diagonal(dy, np.inf)
    radius_x, radius_y = small_tree.nn_radii()
    assert radius_x == pytest.approx(dx.min(axis=1).max())
    assert radius_y == pytest.approx(dy.min(axis=1).max())
    assert small_tree.d == d
