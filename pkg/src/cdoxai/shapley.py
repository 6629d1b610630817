"""Exact tree-ensemble attributions and class-separability analysis.

tree_shap computes exact Shapley values for a single tree under the
path-dependent convention: when a feature is absent from a coalition the
tree is evaluated by descending both children weighted by their training
cover. The polynomial algorithm keeps, for every path from the root, the
subset-size-indexed weights of all feature coalitions along it, extending
the bookkeeping at each split and unwinding it when a feature repeats or
when attributions are collected at a leaf.

Attributions are additive across an ensemble: probability space for random
forests (their prediction is a plain mean), log-odds space for boosting
(additive by construction). ShapMatrix records which space applies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyFolds,
    EmptySample,
    MissingCover,
    SchemaMismatch,
    SingleClassData,
    UnknownFeature,
)
from .forest import ScenarioSpec, Tree, TreeEnsemble

# Table-style separability reports count features whose distance exceeds this.
WD_COUNT_THRESHOLD = 0.5


@dataclass
class ShapMatrix:
    """Per-sample, per-feature, per-class attributions with base values.

    values has shape (n_samples, n_features, n_classes); base_values is the
    expected model output per class, so for every sample and class
    values.sum(feature axis) + base_value equals the model output in
    output_space.
    """

    values: np.ndarray
    base_values: np.ndarray
    feature_names: list[str]
    output_space: str  # "probability" | "log_odds"


@dataclass
class GlobalImportance:
    """Normalized mean-absolute attribution per feature, summing to 1."""

    scores: np.ndarray
    ranking: np.ndarray  # feature indices, descending score, index tie-break
    feature_names: list[str]

    def top(self, k: int) -> list[str]:
        return [self.feature_names[i] for i in self.ranking[:k]]


@dataclass
class WdReport:
    """Separation between class-conditional attribution distributions."""

    per_feature: np.ndarray
    feature_names: list[str]
    mean_wd: float
    top5_mean_wd: float
    count_above_half: int


def _check_tree(tree: Tree) -> None:
    if tree.cover is None or len(tree.cover) != len(tree.feature):
        raise MissingCover("tree has no per-node cover counts")
    if not (tree.cover > 0).all():
        raise MissingCover("tree cover counts must be positive everywhere")


# ---------------------------------------------------------------------------
# Single-row recursion (reference implementation)
# ---------------------------------------------------------------------------


def _extend(d, z, o, w, pz, po, pi):
    length = len(d)
    d = d + [pi]
    z = z + [pz]
    o = o + [po]
    w = w + [1.0 if length == 0 else 0.0]
    for i in range(length - 1, -1, -1):
        w[i + 1] += po * w[i] * (i + 1) / (length + 1)
        w[i] = pz * w[i] * (length - i) / (length + 1)
    return d, z, o, w


def _unwound_sum(z, o, w, i):
    """Total weight of the path after removing entry i."""
    length = len(w)
    acc = w[-1]
    total = 0.0
    if o[i] != 0.0:
        for j in range(length - 2, -1, -1):
            t = acc * length / ((j + 1) * o[i])
            total += t
            acc = w[j] - t * z[i] * (length - 1 - j) / length
    else:
        for j in range(length - 2, -1, -1):
            total += w[j] * length / (z[i] * (length - 1 - j))
    return total


def _unwind(d, z, o, w, i):
    """Remove entry i from the path, restoring pre-extension weights."""
    length = len(w)
    acc = w[-1]
    new_w = [0.0] * (length - 1)
    if o[i] != 0.0:
        for j in range(length - 2, -1, -1):
            t = acc * length / ((j + 1) * o[i])
            new_w[j] = t
            acc = w[j] - t * z[i] * (length - 1 - j) / length
    else:
        for j in range(length - 2, -1, -1):
            new_w[j] = w[j] * length / (z[i] * (length - 1 - j))
    return d[:i] + d[i + 1 :], z[:i] + z[i + 1 :], o[:i] + o[i + 1 :], new_w


def _recurse(tree, x, phi, node, d, z, o, w, pz, po, pi):
    d, z, o, w = _extend(d, z, o, w, pz, po, pi)
    feat = tree.feature[node]
    if feat < 0:
        value = tree.value[node]
        for i in range(1, len(w)):
            total = _unwound_sum(z, o, w, i)
            phi[d[i]] += total * (o[i] - z[i]) * value
        return
    if x[feat] <= tree.threshold[node]:
        hot, cold = tree.left[node], tree.right[node]
    else:
        hot, cold = tree.right[node], tree.left[node]
    iz, io = 1.0, 1.0
    for j in range(1, len(d)):
        if d[j] == feat:
            iz, io = z[j], o[j]
            d, z, o, w = _unwind(d, z, o, w, j)
            break
    cover = tree.cover
    _recurse(tree, x, phi, hot, d, z, o, w, iz * cover[hot] / cover[node], io, feat)
    _recurse(tree, x, phi, cold, d, z, o, w, iz * cover[cold] / cover[node], 0.0, feat)


def tree_shap(tree: Tree, x: np.ndarray) -> np.ndarray:
    """Exact attributions of one tree for one row, shape (n_features, n_outputs).

    Satisfies local accuracy (attributions sum to the reached leaf value
    minus the tree's expected value) and the dummy property (features unused
    by the tree get exactly zero).
    """
    _check_tree(tree)
    x = np.asarray(x, dtype=np.float64)
    phi = np.zeros((len(x), tree.n_outputs), dtype=np.float64)
    _recurse(tree, x, phi, 0, [], [], [], [], 1.0, 1.0, -1)
    return phi


# ---------------------------------------------------------------------------
# Batch recursion, vectorized over samples
# ---------------------------------------------------------------------------
#
# The recursion's control flow (which nodes are visited, where duplicate
# features sit on the path) is identical for every sample; only the numeric
# one-fractions differ, because each sample routes hot/cold differently.
# Path entries therefore hold per-sample arrays and the arithmetic above
# carries over elementwise, with the hot/cold branch of the unwind handled
# by masking.


def _batch_extend(d, z, o, w, pz, po, pi):
    length = len(d)
    d = d + [pi]
    z = z + [pz]
    o = o + [po]
    w = [wi.copy() for wi in w] + [np.ones_like(pz) if length == 0 else np.zeros_like(pz)]
    for i in range(length - 1, -1, -1):
        w[i + 1] += po * w[i] * ((i + 1) / (length + 1))
        w[i] = pz * w[i] * ((length - i) / (length + 1))
    return d, z, o, w


def _batch_unwound_sum(z, o, w, i):
    length = len(w)
    zi, oi = z[i], o[i]
    hot = oi != 0.0
    safe_o = np.where(hot, oi, 1.0)
    acc = w[-1].copy()
    total = np.zeros_like(acc)
    for j in range(length - 2, -1, -1):
        t_hot = acc * (length / (j + 1)) / safe_o
        t_cold = w[j] * (length / (length - 1 - j)) / zi
        total += np.where(hot, t_hot, t_cold)
        acc = np.where(hot, w[j] - t_hot * zi * ((length - 1 - j) / length), acc)
    return total


def _batch_unwind(d, z, o, w, i):
    length = len(w)
    zi, oi = z[i], o[i]
    hot = oi != 0.0
    safe_o = np.where(hot, oi, 1.0)
    acc = w[-1].copy()
    new_w = [None] * (length - 1)
    for j in range(length - 2, -1, -1):
        t_hot = acc * (length / (j + 1)) / safe_o
        t_cold = w[j] * (length / (length - 1 - j)) / zi
        new_w[j] = np.where(hot, t_hot, t_cold)
        acc = np.where(hot, w[j] - t_hot * zi * ((length - 1 - j) / length), acc)
    return d[:i] + d[i + 1 :], z[:i] + z[i + 1 :], o[:i] + o[i + 1 :], new_w


def _batch_recurse(tree, X, phi, node, d, z, o, w, pz, po, pi):
    d, z, o, w = _batch_extend(d, z, o, w, pz, po, pi)
    feat = tree.feature[node]
    if feat < 0:
        value = tree.value[node]
        for i in range(1, len(w)):
            total = _batch_unwound_sum(z, o, w, i)
            phi[:, d[i], :] += (total * (o[i] - z[i]))[:, None] * value[None, :]
        return
    go_left = X[:, feat] <= tree.threshold[node]
    iz = np.ones(len(X))
    io = np.ones(len(X))
    for j in range(1, len(d)):
        if d[j] == feat:
            iz, io = z[j], o[j]
            d, z, o, w = _batch_unwind(d, z, o, w, j)
            break
    cover = tree.cover
    left, right = tree.left[node], tree.right[node]
    _batch_recurse(
        tree, X, phi, left, d, z, o, w,
        iz * (cover[left] / cover[node]), np.where(go_left, io, 0.0), feat,
    )
    _batch_recurse(
        tree, X, phi, right, d, z, o, w,
        iz * (cover[right] / cover[node]), np.where(go_left, 0.0, io), feat,
    )


def tree_shap_batch(tree: Tree, X: np.ndarray) -> np.ndarray:
    """tree_shap for many rows at once, shape (n, n_features, n_outputs)."""
    _check_tree(tree)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = len(X)
    phi = np.zeros((n, X.shape[1], tree.n_outputs), dtype=np.float64)
    ones = np.ones(n, dtype=np.float64)
    _batch_recurse(tree, X, phi, 0, [], [], [], [], ones, ones, -1)
    return phi


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


def ensemble_shap(model: TreeEnsemble, X: np.ndarray) -> ShapMatrix:
    """Attributions for a whole ensemble.

    Forest attributions are the plain mean of per-tree attributions, which
    matches the mean-of-trees probability prediction. Boosting attributions
    accumulate learning-rate-scaled per-tree values into each tree's class
    column, exact in score space; base values are the expected scores (log
    priors plus each tree's expected contribution).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != len(model.feature_names):
        raise SchemaMismatch(
            f"model expects {len(model.feature_names)} features, got {X.shape[1]}"
        )
    n, n_features = X.shape
    values = np.zeros((n, n_features, model.n_classes), dtype=np.float64)
    if model.kind == "random_forest":
        for tree in model.trees:
            values += tree_shap_batch(tree, X)
        values /= len(model.trees)
        base = model.base_value.copy()
        space = "probability"
    else:
        base = model.base_value.copy()
        for tree, k in zip(model.trees, model.tree_class):
            values[:, :, k] += model.learning_rate * tree_shap_batch(tree, X)[:, :, 0]
            base[k] += model.learning_rate * float(tree.expected_value()[0])
        space = "log_odds"
    return ShapMatrix(values, base, list(model.feature_names), space)


def global_importance(
    fold_shaps: list[ShapMatrix], scenario: ScenarioSpec
) -> GlobalImportance:
    """Cross-validated importance scores, normalized to sum to 1.

    Three-class runs average absolute attributions over classes then samples
    within each fold; binary runs average the positive-class column over
    samples. Fold means are then averaged with equal weight.
    """
    if not fold_shaps:
        raise EmptyFolds("no per-fold attribution matrices")
    per_fold = []
    for sm in fold_shaps:
        if len(scenario.classes) == 2:
            pos = scenario.classes.index(scenario.positive_class)
            per_fold.append(np.abs(sm.values[:, :, pos]).mean(axis=0))
        else:
            per_fold.append(np.abs(sm.values).mean(axis=2).mean(axis=0))
    scores = np.mean(per_fold, axis=0)
    total = scores.sum()
    if total > 0:
        scores = scores / total
    ranking = np.argsort(-scores, kind="stable")
    return GlobalImportance(scores, ranking, list(fold_shaps[0].feature_names))


def class_specific_shap(
    fold_shaps: list[ShapMatrix],
    fold_matrices: list[np.ndarray],
    feature: str,
    scenario: ScenarioSpec,
) -> np.ndarray:
    """Dependence pairs (feature value, positive-class attribution).

    Pools every fold's test samples in fold order; positive attribution
    pushes the prediction toward the scenario's positive class.
    """
    names = fold_shaps[0].feature_names
    if feature not in names:
        raise UnknownFeature(f"{feature!r} not in {names}")
    f = names.index(feature)
    pos = scenario.classes.index(scenario.positive_class)
    pairs = []
    for sm, X in zip(fold_shaps, fold_matrices):
        pairs.append(np.column_stack([np.asarray(X)[:, f], sm.values[:, f, pos]]))
    return np.vstack(pairs) if pairs else np.zeros((0, 2))


# ---------------------------------------------------------------------------
# Wasserstein separability
# ---------------------------------------------------------------------------


def wasserstein_1d(sample_a, sample_b) -> float:
    """Exact first Wasserstein distance between two empirical samples.

    Integrates |Qa - Qb| over (0, 1), where Q are the empirical quantile
    functions: piecewise constant with jumps at i/n. For equal-sized samples
    this reduces to the mean absolute difference of the sorted values.
    """
    a = np.sort(np.asarray(sample_a, dtype=np.float64))
    b = np.sort(np.asarray(sample_b, dtype=np.float64))
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise EmptySample("both samples must be non-empty")
    cuts = np.union1d(np.arange(1, n) / n, np.arange(1, m) / m)
    edges = np.concatenate([[0.0], cuts, [1.0]])
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    ia = np.minimum((mids * n).astype(np.int64), n - 1)
    ib = np.minimum((mids * m).astype(np.int64), m - 1)
    return float(np.sum(np.abs(a[ia] - b[ib]) * widths))


def wd_report(
    fold_shaps: list[ShapMatrix], fold_labels: list[list[str]], scenario: ScenarioSpec
) -> WdReport:
    """Per-feature distance between the two classes' attribution samples.

    Attribution values (positive-class column) are pooled over folds and
    split by true class; the report carries the per-feature distances, their
    mean, the mean of the five largest, and how many exceed 0.5.
    """
    if len(scenario.classes) != 2:
        raise SingleClassData("separability reports need a binary scenario")
    pos = scenario.classes.index(scenario.positive_class)
    values = np.vstack([sm.values[:, :, pos] for sm in fold_shaps])
    labels = np.asarray([lab for fold in fold_labels for lab in fold])
    mask_pos = labels == scenario.positive_class
    if mask_pos.all() or not mask_pos.any():
        raise SingleClassData("both classes must be present")
    n_features = values.shape[1]
    per_feature = np.array(
        [wasserstein_1d(values[mask_pos, f], values[~mask_pos, f]) for f in range(n_features)]
    )
    top = np.sort(per_feature)[::-1][: min(5, n_features)]
    return WdReport(
        per_feature=per_feature,
        feature_names=list(fold_shaps[0].feature_names),
        mean_wd=float(per_feature.mean()),
        top5_mean_wd=float(top.mean()),
        count_above_half=int((per_feature > WD_COUNT_THRESHOLD).sum()),
    )
