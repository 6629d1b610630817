import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdoxai.errors import EmptySample, MissingCover, SchemaMismatch, SingleClassData
from cdoxai.forest import (
    BoostParams,
    ForestParams,
    SCENARIOS,
    Tree,
    decision_scores,
    train_gradient_boosting,
    train_random_forest,
)
from cdoxai.shapley import (
    ShapMatrix,
    class_specific_shap,
    ensemble_shap,
    global_importance,
    tree_shap,
    tree_shap_batch,
    wasserstein_1d,
    wd_report,
)

from oracles import brute_force_shap, random_tree, wasserstein_cdf_oracle


def _leaf(value):
    return Tree(
        feature=np.array([-1]),
        threshold=np.array([0.0]),
        left=np.array([-1]),
        right=np.array([-1]),
        cover=np.array([10.0]),
        value=np.array([value]),
    )


def _stump(feat=0, thr=0.5, cov=(6.0, 4.0), values=((1.0,), (3.0,))):
    return Tree(
        feature=np.array([feat, -1, -1]),
        threshold=np.array([thr, 0.0, 0.0]),
        left=np.array([1, -1, -1]),
        right=np.array([2, -1, -1]),
        cover=np.array([cov[0] + cov[1], cov[0], cov[1]]),
        value=np.array([[0.0] * len(values[0]), list(values[0]), list(values[1])]),
    )


class TestTreeShap:
    def test_single_leaf_gives_zero(self):
        phi = tree_shap(_leaf([2.5]), np.array([0.3, 0.7]))
        assert np.all(phi == 0.0)

    def test_stump_dummy_and_local_accuracy(self):
        tree = _stump()
        x = np.array([0.2, 9.9])
        phi = tree_shap(tree, x)
        expected_value = (6 * 1.0 + 4 * 3.0) / 10
        assert phi[0, 0] == pytest.approx(1.0 - expected_value)
        assert phi[1, 0] == 0.0  # dummy feature untouched

    def test_depth2_tree_matches_subset_enumeration(self):
        tree = Tree(
            feature=np.array([0, 1, 2, -1, -1, -1, -1]),
            threshold=np.array([0.0, -0.5, 0.5, 0, 0, 0, 0]),
            left=np.array([1, 3, 5, -1, -1, -1, -1]),
            right=np.array([2, 4, 6, -1, -1, -1, -1]),
            cover=np.array([100.0, 60.0, 40.0, 20.0, 40.0, 30.0, 10.0]),
            value=np.array([[0.0], [0.0], [0.0], [1.0], [4.0], [-2.0], [3.0]]),
        )
        for x in ([0.1, 0.2, 0.3], [-1.0, -1.0, 1.0], [0.0, -0.5, 0.5]):
            x = np.array(x)
            assert np.abs(tree_shap(tree, x) - brute_force_shap(tree, x)).max() < 1e-9

    def test_random_trees_match_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            tree = random_tree(rng, n_features=4, max_depth=3)
            X = rng.uniform(-1.2, 1.2, size=(6, 4))
            for x in X:
                assert np.abs(tree_shap(tree, x) - brute_force_shap(tree, x)).max() < 1e-9

    def test_repeated_feature_on_path(self):
        # feature 0 splits twice along the left spine
        tree = Tree(
            feature=np.array([0, 0, -1, -1, -1]),
            threshold=np.array([0.5, -0.5, 0, 0, 0]),
            left=np.array([1, 3, -1, -1, -1]),
            right=np.array([2, 4, -1, -1, -1]),
            cover=np.array([50.0, 30.0, 20.0, 10.0, 20.0]),
            value=np.array([[0.0], [0.0], [5.0], [1.0], [2.0]]),
        )
        for v in (-1.0, 0.0, 0.4, 0.6):
            x = np.array([v, 0.0])
            assert np.abs(tree_shap(tree, x) - brute_force_shap(tree, x)).max() < 1e-9

    def test_symmetric_features_get_equal_attribution(self):
        # features 0 and 1 are used interchangeably by construction
        tree = Tree(
            feature=np.array([0, 1, 1, -1, -1, -1, -1]),
            threshold=np.array([0.0, 0.0, 0.0, 0, 0, 0, 0]),
            left=np.array([1, 3, 5, -1, -1, -1, -1]),
            right=np.array([2, 4, 6, -1, -1, -1, -1]),
            cover=np.array([80.0, 40.0, 40.0, 20.0, 20.0, 20.0, 20.0]),
            value=np.array([[0.0], [0.0], [0.0], [0.0], [1.0], [1.0], [2.0]]),
        )
        phi = tree_shap(tree, np.array([1.0, 1.0]))
        assert phi[0, 0] == pytest.approx(phi[1, 0], abs=1e-12)

    def test_batch_equals_scalar(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            tree = random_tree(rng, n_features=5, max_depth=4)
            X = rng.uniform(-1.2, 1.2, size=(17, 5))
            batch = tree_shap_batch(tree, X)
            for i, x in enumerate(X):
                assert np.abs(batch[i] - tree_shap(tree, x)).max() < 1e-12

    def test_missing_cover_rejected(self):
        tree = _stump()
        tree.cover[1] = 0.0
        with pytest.raises(MissingCover):
            tree_shap(tree, np.array([0.1, 0.2]))


def _blob_data(seed=0, n=80):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 5))
    labels = np.where(X[:, 0] + X[:, 3] > 0, "NotLow", "Low").tolist()
    return X, labels


class TestEnsembleShap:
    def test_one_tree_forest_reduces_to_tree_shap(self):
        X, labels = _blob_data()
        model = train_random_forest(
            X, labels, ["Low", "NotLow"],
            ForestParams(n_trees=1, bootstrap=False, feature_subsample="all", max_depth=4),
        )
        sm = ensemble_shap(model, X[:5])
        for i in range(5):
            assert np.allclose(sm.values[i], tree_shap(model.trees[0], X[i]))

    def test_duplicated_boosting_trees_double_attributions(self):
        X, labels = _blob_data()
        model = train_gradient_boosting(
            X, labels, ["Low", "NotLow"], BoostParams(n_rounds=1, learning_rate=0.5, max_depth=3)
        )
        doubled = train_gradient_boosting(
            X, labels, ["Low", "NotLow"], BoostParams(n_rounds=1, learning_rate=0.5, max_depth=3)
        )
        doubled.trees = model.trees + model.trees
        doubled.tree_class = model.tree_class + model.tree_class
        a = ensemble_shap(model, X[:4])
        b = ensemble_shap(doubled, X[:4])
        base_shift = model.base_value
        assert np.allclose(b.values, 2 * a.values)
        assert np.allclose(b.base_values - base_shift, 2 * (a.base_values - base_shift))

    @pytest.mark.parametrize("kind", ["random_forest", "gradient_boosting"])
    def test_local_accuracy(self, kind):
        X, labels = _blob_data(seed=5, n=100)
        if kind == "random_forest":
            model = train_random_forest(
                X, labels, ["Low", "NotLow"], ForestParams(n_trees=12, max_depth=6, seed=1)
            )
        else:
            model = train_gradient_boosting(
                X, labels, ["Low", "NotLow"], BoostParams(n_rounds=10, learning_rate=0.2)
            )
        sm = ensemble_shap(model, X)
        reconstructed = sm.values.sum(axis=1) + sm.base_values
        assert np.abs(reconstructed - decision_scores(model, X)).max() < 1e-6

    def test_dummy_feature_zero_across_ensemble(self):
        X, labels = _blob_data(seed=2)
        X = np.column_stack([X, np.zeros(len(X))])  # constant, never split on
        model = train_random_forest(
            X, labels, ["Low", "NotLow"], ForestParams(n_trees=10, max_depth=5, seed=4)
        )
        sm = ensemble_shap(model, X[:10])
        assert np.all(sm.values[:, 5, :] == 0.0)

    def test_schema_mismatch(self):
        X, labels = _blob_data()
        model = train_random_forest(X, labels, ["Low", "NotLow"], ForestParams(n_trees=2))
        with pytest.raises(SchemaMismatch):
            ensemble_shap(model, X[:, :3])


def _matrix(values, names=None, space="log_odds", base=None):
    values = np.asarray(values, dtype=np.float64)
    n_classes = values.shape[2]
    return ShapMatrix(
        values=values,
        base_values=np.zeros(n_classes) if base is None else np.asarray(base),
        feature_names=names or [f"f{i}" for i in range(values.shape[1])],
        output_space=space,
    )


class TestGlobalImportance:
    def test_zero_feature_scores_zero(self):
        values = np.zeros((4, 2, 3))
        values[:, 1, :] = 1.0
        gi = global_importance([_matrix(values)], SCENARIOS["three_class"])
        assert gi.scores[0] == 0.0
        assert gi.scores[1] == 1.0

    def test_one_three_aggregation(self):
        # |1| everywhere vs |3| everywhere -> normalized 0.25 / 0.75
        values = np.zeros((6, 2, 2))
        values[:, 0, :] = np.where(np.arange(6)[:, None] % 2 == 0, 1.0, -1.0)
        values[:, 1, :] = np.where(np.arange(6)[:, None] % 2 == 0, -3.0, 3.0)
        gi = global_importance([_matrix(values)], SCENARIOS["low_vs_notlow"])
        assert gi.scores == pytest.approx([0.25, 0.75])
        assert gi.ranking.tolist() == [1, 0]

    def test_scores_sum_to_one(self):
        rng = np.random.default_rng(0)
        mats = [_matrix(rng.normal(size=(7, 4, 2))) for _ in range(3)]
        gi = global_importance(mats, SCENARIOS["low_vs_notlow"])
        assert gi.scores.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(gi.scores >= 0)


class TestClassSpecific:
    def test_constant_model_gives_zero_pairs(self):
        values = np.zeros((5, 2, 2))
        X = np.arange(10.0).reshape(5, 2)
        pairs = class_specific_shap([_matrix(values)], [X], "f0", SCENARIOS["low_vs_notlow"])
        assert np.all(pairs[:, 1] == 0.0)
        assert np.array_equal(pairs[:, 0], X[:, 0])

    def test_sign_flips_at_generating_threshold(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(0, 1, size=(200, 3))
        labels = np.where(X[:, 0] > 0.5, "NotLow", "Low").tolist()
        model = train_gradient_boosting(
            X, labels, ["Low", "NotLow"], BoostParams(n_rounds=15, learning_rate=0.3, max_depth=2)
        )
        sm = ensemble_shap(model, X)
        pairs = class_specific_shap([sm], [X], "f0", SCENARIOS["low_vs_notlow"])
        below = pairs[pairs[:, 0] < 0.45][:, 1]
        above = pairs[pairs[:, 0] > 0.55][:, 1]
        assert below.max() < 0 < above.min()


class TestWasserstein:
    def test_identical_samples(self):
        assert wasserstein_1d([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_singleton_translation(self):
        assert wasserstein_1d([0.0], [2.5]) == pytest.approx(2.5)
        assert wasserstein_1d([0.0], [-2.5]) == pytest.approx(2.5)

    def test_two_point_shift(self):
        assert wasserstein_1d([0.0, 1.0], [1.0, 2.0]) == pytest.approx(1.0)

    def test_empty_sample(self):
        with pytest.raises(EmptySample):
            wasserstein_1d([], [1.0])

    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=40),
        st.lists(st.floats(-50, 50), min_size=1, max_size=40),
    )
    @settings(max_examples=120, deadline=None)
    def test_matches_cdf_oracle(self, a, b):
        assert wasserstein_1d(a, b) == pytest.approx(wasserstein_cdf_oracle(a, b), abs=1e-9)

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=30), st.data())
    @settings(max_examples=60, deadline=None)
    def test_equal_size_reduces_to_sorted_mean_difference(self, a, data):
        b = data.draw(st.lists(st.floats(-50, 50), min_size=len(a), max_size=len(a)))
        expected = float(np.mean(np.abs(np.sort(a) - np.sort(b))))
        assert wasserstein_1d(a, b) == pytest.approx(expected, abs=1e-9)

    def test_metric_axioms_on_random_triples(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            a = rng.normal(size=rng.integers(1, 30))
            b = rng.normal(size=rng.integers(1, 30))
            c = rng.normal(size=rng.integers(1, 30))
            dab = wasserstein_1d(a, b)
            dba = wasserstein_1d(b, a)
            assert dab >= 0
            assert dab == pytest.approx(dba, abs=1e-12)
            assert dab <= wasserstein_1d(a, c) + wasserstein_1d(c, b) + 1e-9


class TestWdReport:
    def test_class_independent_values_give_zero(self):
        values = np.zeros((8, 3, 2))
        values[:, 0, 1] = 0.7  # same for every sample regardless of class
        labels = [["Low", "NotLow"] * 2, ["NotLow", "Low"] * 2]
        mats = [_matrix(values[:4]), _matrix(values[4:])]
        report = wd_report(mats, labels, SCENARIOS["low_vs_notlow"])
        assert np.all(report.per_feature == 0.0)
        assert report.count_above_half == 0

    def test_two_point_separation(self):
        # +1 attribution for one class, -1 for the other: distance 2
        values = np.zeros((4, 2, 2))
        labels = ["NotLow", "NotLow", "Low", "Low"]
        values[:2, 0, 1] = 1.0
        values[2:, 0, 1] = -1.0
        report = wd_report([_matrix(values)], [labels], SCENARIOS["low_vs_notlow"])
        assert report.per_feature[0] == pytest.approx(2.0)
        assert report.per_feature[1] == 0.0
        assert report.count_above_half == 1
        assert report.mean_wd == pytest.approx(1.0)
        assert report.top5_mean_wd == pytest.approx(1.0)

    def test_single_class_rejected(self):
        values = np.zeros((3, 2, 2))
        with pytest.raises(SingleClassData):
            wd_report([_matrix(values)], [["Low", "Low", "Low"]], SCENARIOS["low_vs_notlow"])
