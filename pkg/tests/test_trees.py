import numpy as np
import pytest

from stagesurv.trees import (
    LEAF,
    FeatureBins,
    TreeParams,
    grow_oblivious_tree,
    grow_tree,
    newton_leaf_values,
)


def _step_data() -> tuple[np.ndarray, np.ndarray]:
    x = np.arange(10, dtype=np.float64).reshape(-1, 1)
    return x, (x[:, 0] >= 5).astype(np.int64)


def test_stump_recovers_midpoint_split():
    rows, labels = _step_data()
    tree = grow_tree(rows, labels, np.ones(10), TreeParams(max_depth=1))

    assert tree.feature[0] == 0
    assert tree.threshold[0] == 4.5
    assert tree.depth == 1
    assert tree.predict_value(rows)[:, 1].tolist() == labels.astype(float).tolist()


def test_pure_node_is_a_leaf():
    rows = np.arange(6, dtype=np.float64).reshape(-1, 1)
    tree = grow_tree(rows, np.ones(6, dtype=np.int64), np.ones(6), TreeParams())
    assert tree.n_nodes == 1
    assert tree.is_leaf(0)
    assert tree.predict_value(rows)[:, 1].tolist() == [1.0] * 6


def test_min_samples_leaf_and_depth_are_respected():
    rng = np.random.default_rng(4)
    rows = rng.normal(size=(200, 3))
    labels = (rows[:, 0] + 0.5 * rng.normal(size=200) > 0).astype(np.int64)
    tree = grow_tree(rows, labels, np.ones(200), TreeParams(max_depth=4, min_samples_leaf=7))

    assert tree.depth <= 4
    leaves = tree.leaf_sizes(rows)
    assert all(tree.feature[leaf] == LEAF for leaf in leaves)
    assert min(leaves.values()) >= 7


def test_weights_shift_leaf_frequencies():
    rows = np.zeros((4, 1))
    labels = np.array([0, 0, 0, 1])
    tree = grow_tree(rows, labels, np.array([1.0, 1.0, 1.0, 3.0]), TreeParams())
    assert tree.value[0].tolist() == [0.5, 0.5]


@pytest.mark.parametrize("scale", [0.25, 3.0, 1000.0])
def test_splits_ignore_the_scale_of_the_weights(scale):
    rng = np.random.default_rng(5)
    rows = rng.normal(size=(150, 3))
    labels = (rows[:, 0] - rows[:, 2] + 0.5 * rng.normal(size=150) > 0).astype(np.int64)
    weights = rng.uniform(0.2, 3.0, size=150)
    params = TreeParams(max_depth=3, min_samples_leaf=3)

    plain = grow_tree(rows, labels, weights, params)
    scaled = grow_tree(rows, labels, scale * weights, params)

    assert scaled.feature.tolist() == plain.feature.tolist()
    assert scaled.threshold.tolist() == plain.threshold.tolist()
    assert scaled.value == pytest.approx(plain.value, rel=1e-12)


def test_feature_subsampling_needs_a_stream():
    rows, labels = _step_data()
    rows = np.hstack([rows, rows])
    with pytest.raises(AssertionError):
        grow_tree(rows, labels, np.ones(10), TreeParams(max_features=1))
    tree = grow_tree(rows, labels, np.ones(10), TreeParams(max_features=1), np.random.default_rng(0))
    assert tree.threshold[0] == 4.5


def test_newton_leaf_values():
    values = newton_leaf_values(np.array([-2.0, 3.0, 0.0]), np.array([1.0, 2.0, 0.0]), l2=1.0)
    assert values.tolist() == [1.0, -1.0, 0.0]
    assert newton_leaf_values(np.array([1.0]), np.array([0.0]), l2=0.0).tolist() == [0.0]


def test_oblivious_tree_splits_on_the_informative_feature():
    rng = np.random.default_rng(1)
    rows = rng.normal(size=(300, 3))
    target = np.where(rows[:, 2] > 0.3, 1.0, -1.0)
    grad = -target
    hess = np.ones(300)

    tree = grow_oblivious_tree(rows, FeatureBins.of(rows), grad, hess, depth=2, l2=1.0)

    assert tree.features[0] == 2
    assert tree.thresholds[0] == pytest.approx(0.3, abs=0.05)
    assert len(tree.leaf_values) == 4
    predictions = tree.predict(rows)
    assert np.all(np.sign(predictions) == target)


def test_oblivious_leaf_index_bits():
    rows = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    tree = grow_oblivious_tree(rows, FeatureBins.of(rows), np.array([1.0, -1.0, 2.0, -2.0]), np.ones(4), 2, 0.0)
    assert sorted(tree.leaf_index(rows).tolist()) == [0, 1, 2, 3]


def test_oblivious_tree_stops_without_splits():
    rows = np.ones((5, 2))
    tree = grow_oblivious_tree(rows, FeatureBins.of(rows), np.full(5, 0.5), np.full(5, 0.25), depth=3, l2=1.0)
    assert tree.depth == 0
    assert tree.leaf_values.tolist() == pytest.approx([-2.5 / 2.25])
