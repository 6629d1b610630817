"""Decision-tree ensembles, classification scenarios, and cross-validation.

Trees are grown CART-style with greedy binary splits. Classification trees
minimize Gini impurity, which is implemented as sum-of-squares reduction on
one-hot targets (the two criteria pick identical splits), so a single grower
serves both the forest's classifiers and the boosting round's regressors.
Everything is deterministic for a fixed seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ClassTooSmall,
    EmptyInput,
    FeatureCountMismatch,
    LengthMismatch,
    NonFiniteGradient,
    UnknownLabel,
)
from .features import HIGH, LOW, MEDIUM

NOT_LOW = "NotLow"
NOT_HIGH = "NotHigh"

FORMAT_VERSION = "1"

# Scores are clamped here before softmax so boosting never overflows.
SCORE_CLAMP = 30.0

_GAIN_EPS = 1e-12


@dataclass
class Tree:
    """A binary tree in parallel-array form; node 0 is the root.

    feature[i] is -1 at leaves, otherwise the split feature; samples with
    value <= threshold go left. cover[i] counts the training samples that
    reached node i. value[i] is the node's per-output mean target (class
    frequencies for classifiers, mean residual for boosting regressors).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    cover: np.ndarray
    value: np.ndarray  # (n_nodes, n_outputs)

    @property
    def n_outputs(self) -> int:
        return self.value.shape[1]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf value for each row of X, shape (n, n_outputs)."""
        X = np.atleast_2d(X)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.value[node]

    def expected_value(self) -> np.ndarray:
        """Cover-weighted mean leaf value, the tree's output under no evidence."""
        leaves = self.feature < 0
        w = self.cover[leaves] / self.cover[0]
        return w @ self.value[leaves]


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 12
    min_leaf: int = 1
    feature_subsample: str | int = "all"  # "all", "sqrt", or a count
    seed: int = 0


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 200
    max_depth: int = 12
    min_leaf: int = 1
    feature_subsample: str | int = "sqrt"
    bootstrap: bool = True
    seed: int = 0


@dataclass(frozen=True)
class BoostParams:
    n_rounds: int = 200
    learning_rate: float = 0.1
    max_depth: int = 4
    min_leaf: int = 1
    seed: int = 0


@dataclass
class TreeEnsemble:
    """A trained ensemble plus everything needed to reproduce it."""

    kind: str  # "random_forest" | "gradient_boosting"
    trees: list[Tree]
    base_value: np.ndarray  # (n_classes,)
    n_classes: int
    feature_names: list[str]
    seed: int
    learning_rate: float = 1.0
    tree_class: list[int] | None = None  # boosting: output class per tree


class _TreeBuilder:
    def __init__(self, X, T, max_depth, min_leaf, n_subsample, rng):
        self.X = X
        self.T = T
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.n_subsample = n_subsample
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.cover: list[float] = []
        self.value: list[np.ndarray] = []

    def _new_node(self, idx) -> int:
        node = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.cover.append(float(len(idx)))
        self.value.append(self.T[idx].mean(axis=0))
        return node

    def grow(self, idx: np.ndarray, depth: int) -> int:
        node = self._new_node(idx)
        n = len(idx)
        if depth >= self.max_depth or n < max(2, 2 * self.min_leaf):
            return node
        split = self._best_split(idx)
        if split is None:
            return node
        feat, thr = split
        go_left = self.X[idx, feat] <= thr
        self.feature[node] = feat
        self.threshold[node] = thr
        left_child = self.grow(idx[go_left], depth + 1)
        right_child = self.grow(idx[~go_left], depth + 1)
        self.left[node] = left_child
        self.right[node] = right_child
        return node

    def _candidate_features(self) -> np.ndarray:
        n_features = self.X.shape[1]
        if self.n_subsample >= n_features:
            return np.arange(n_features)
        return np.sort(self.rng.choice(n_features, self.n_subsample, replace=False))

    def _best_split(self, idx: np.ndarray):
        """Highest sum-of-squares reduction over candidate features.

        Ties keep the first candidate encountered, so results are stable in
        (feature index, threshold) order.
        """
        n = len(idx)
        T = self.T[idx]
        total = T.sum(axis=0)
        sq_total = float((T * T).sum())
        parent_sse = sq_total - float(total @ total) / n
        best_gain = _GAIN_EPS
        best = None
        for feat in self._candidate_features():
            v = self.X[idx, feat]
            order = np.argsort(v, kind="stable")
            vs = v[order]
            ts = T[order]
            s1 = np.cumsum(ts, axis=0)  # (n, K)
            s2 = np.cumsum((ts * ts).sum(axis=1))
            # split after position i: left size i+1
            nl = np.arange(1, n)
            valid = (vs[:-1] < vs[1:]) & (nl >= self.min_leaf) & (n - nl >= self.min_leaf)
            if not valid.any():
                continue
            pos = np.flatnonzero(valid)
            left_s1 = s1[pos]
            left_s2 = s2[pos]
            nl_v = (pos + 1).astype(np.float64)
            nr_v = n - nl_v
            right_s1 = total - left_s1
            right_s2 = sq_total - left_s2
            sse = (
                left_s2
                - (left_s1 * left_s1).sum(axis=1) / nl_v
                + right_s2
                - (right_s1 * right_s1).sum(axis=1) / nr_v
            )
            gains = parent_sse - sse
            j = int(np.argmax(gains))
            if gains[j] > best_gain:
                best_gain = float(gains[j])
                thr = 0.5 * (vs[pos[j]] + vs[pos[j] + 1])
                best = (int(feat), float(thr))
        return best

    def build(self) -> Tree:
        self.grow(np.arange(len(self.X)), 0)
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            cover=np.asarray(self.cover, dtype=np.float64),
            value=np.asarray(self.value, dtype=np.float64),
        )


def _subsample_count(spec: str | int, n_features: int) -> int:
    if spec == "all":
        return n_features
    if spec == "sqrt":
        return max(1, int(round(np.sqrt(n_features))))
    count = int(spec)
    if count < 1:
        raise ValueError(f"feature_subsample must be at least 1, got {spec}")
    return min(count, n_features)


def _encode_labels(labels, class_names: list[str]) -> np.ndarray:
    index = {c: i for i, c in enumerate(class_names)}
    try:
        return np.asarray([index[c] for c in labels], dtype=np.int64)
    except KeyError as exc:
        raise UnknownLabel(f"label {exc.args[0]!r} not in classes {class_names}") from exc


def train_tree(
    X: np.ndarray, y: np.ndarray, params: TreeParams = TreeParams(), n_classes: int | None = None
) -> Tree:
    """Grow one classification tree on integer labels.

    Degenerate inputs (a single label value, or all-constant features) yield
    a single-leaf tree carrying the class priors.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1 if len(y) else 0
    T = np.zeros((len(y), n_classes), dtype=np.float64)
    T[np.arange(len(y)), y] = 1.0
    rng = np.random.default_rng(params.seed)
    builder = _TreeBuilder(
        X,
        T,
        params.max_depth,
        params.min_leaf,
        _subsample_count(params.feature_subsample, X.shape[1]),
        rng,
    )
    return builder.build()


def _train_regression_tree(X, targets, max_depth, min_leaf) -> Tree:
    builder = _TreeBuilder(
        X,
        np.asarray(targets, dtype=np.float64).reshape(-1, 1),
        max_depth,
        min_leaf,
        X.shape[1],
        np.random.default_rng(0),
    )
    return builder.build()


def train_random_forest(
    X: np.ndarray,
    labels,
    class_names: list[str],
    params: ForestParams = ForestParams(),
    feature_names: list[str] | None = None,
) -> TreeEnsemble:
    """Bootstrap-aggregated classification trees with per-node feature draws.

    Per-tree seeds are derived from the master seed up front, so training is
    reproducible regardless of how callers schedule the per-tree work.
    """
    X = np.asarray(X, dtype=np.float64)
    y = _encode_labels(labels, class_names)
    rng = np.random.default_rng(params.seed)
    tree_seeds = rng.integers(0, 2**31 - 1, size=params.n_trees)
    bootstrap_seeds = rng.integers(0, 2**31 - 1, size=params.n_trees)
    trees = []
    for t in range(params.n_trees):
        if params.bootstrap:
            boot_rng = np.random.default_rng(bootstrap_seeds[t])
            idx = boot_rng.integers(0, len(X), size=len(X))
        else:
            idx = np.arange(len(X))
        tree = train_tree(
            X[idx],
            y[idx],
            TreeParams(
                max_depth=params.max_depth,
                min_leaf=params.min_leaf,
                feature_subsample=params.feature_subsample,
                seed=int(tree_seeds[t]),
            ),
            n_classes=len(class_names),
        )
        trees.append(tree)
    base = np.mean([tree.expected_value() for tree in trees], axis=0)
    return TreeEnsemble(
        kind="random_forest",
        trees=trees,
        base_value=base,
        n_classes=len(class_names),
        feature_names=list(feature_names) if feature_names else _default_names(X.shape[1]),
        seed=params.seed,
    )


def train_gradient_boosting(
    X: np.ndarray,
    labels,
    class_names: list[str],
    params: BoostParams = BoostParams(),
    feature_names: list[str] | None = None,
) -> TreeEnsemble:
    """One-vs-rest additive logistic boosting.

    Each round fits one regression tree per class to the negative gradient of
    the multiclass cross-entropy (the residual between the one-hot target and
    the current softmax probability). Class scores start at the log priors
    and probabilities come from a softmax over clamped scores.
    """
    X = np.asarray(X, dtype=np.float64)
    y = _encode_labels(labels, class_names)
    n, n_classes = len(y), len(class_names)
    Y = np.zeros((n, n_classes), dtype=np.float64)
    Y[np.arange(n), y] = 1.0
    priors = Y.mean(axis=0)
    base = np.log(np.clip(priors, 1e-12, None))
    scores = np.tile(base, (n, 1))
    trees: list[Tree] = []
    tree_class: list[int] = []
    for _ in range(params.n_rounds):
        probs = _softmax(np.clip(scores, -SCORE_CLAMP, SCORE_CLAMP))
        residual = Y - probs
        if not np.isfinite(residual).all():
            raise NonFiniteGradient("boosting gradient is not finite")
        for k in range(n_classes):
            tree = _train_regression_tree(X, residual[:, k], params.max_depth, params.min_leaf)
            trees.append(tree)
            tree_class.append(k)
            scores[:, k] += params.learning_rate * tree.predict(X)[:, 0]
        if not np.isfinite(scores).all():
            raise NonFiniteGradient("boosting scores overflowed")
    return TreeEnsemble(
        kind="gradient_boosting",
        trees=trees,
        base_value=base,
        n_classes=n_classes,
        feature_names=list(feature_names) if feature_names else _default_names(X.shape[1]),
        seed=params.seed,
        learning_rate=params.learning_rate,
        tree_class=tree_class,
    )


def _default_names(n_features: int) -> list[str]:
    return [f"f{i}" for i in range(n_features)]


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def decision_scores(model: TreeEnsemble, X: np.ndarray) -> np.ndarray:
    """Model output in the ensemble's additive space.

    Random forests are additive in probability space (mean of leaf class
    frequencies); boosting is additive in log-odds, so raw unclamped scores
    are returned.
    """
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != len(model.feature_names):
        raise FeatureCountMismatch(
            f"model expects {len(model.feature_names)} features, got {X.shape[1]}"
        )
    if model.kind == "random_forest":
        out = np.mean([tree.predict(X) for tree in model.trees], axis=0)
    else:
        out = np.tile(model.base_value, (len(X), 1))
        for tree, k in zip(model.trees, model.tree_class):
            out[:, k] += model.learning_rate * tree.predict(X)[:, 0]
    return out[0] if single else out


def predict_proba(model: TreeEnsemble, X: np.ndarray) -> np.ndarray:
    """Per-class probability vector(s); rows sum to 1."""
    scores = decision_scores(model, X)
    if model.kind == "random_forest":
        return scores
    clamped = np.clip(np.atleast_2d(scores), -SCORE_CLAMP, SCORE_CLAMP)
    probs = _softmax(clamped)
    return probs[0] if scores.ndim == 1 else probs


def predict_class_index(model: TreeEnsemble, X: np.ndarray) -> np.ndarray:
    """Argmax class index per row; ties resolve to the lowest index."""
    probs = np.atleast_2d(predict_proba(model, X))
    return probs.argmax(axis=1)


# ---------------------------------------------------------------------------
# Scenarios, folds, metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioSpec:
    """One of the three classification framings of the adherence label."""

    id: str
    classes: tuple[str, ...]  # index order fixes encoding and argmax ties
    relabel_map: tuple[tuple[str, str], ...]  # base label -> scenario label
    positive_class: str | None = None  # binary scenarios only

    def mapping(self) -> dict[str, str]:
        return dict(self.relabel_map)

    def with_positive(self, positive: str) -> "ScenarioSpec":
        if positive not in self.classes:
            raise UnknownLabel(f"{positive!r} is not one of {self.classes}")
        return replace(self, positive_class=positive)


SCENARIOS: dict[str, ScenarioSpec] = {
    "three_class": ScenarioSpec(
        id="three_class",
        classes=(LOW, MEDIUM, HIGH),
        relabel_map=((LOW, LOW), (MEDIUM, MEDIUM), (HIGH, HIGH)),
    ),
    "low_vs_notlow": ScenarioSpec(
        id="low_vs_notlow",
        classes=(LOW, NOT_LOW),
        relabel_map=((LOW, LOW), (MEDIUM, NOT_LOW), (HIGH, NOT_LOW)),
        positive_class=NOT_LOW,
    ),
    "high_vs_nothigh": ScenarioSpec(
        id="high_vs_nothigh",
        classes=(NOT_HIGH, HIGH),
        relabel_map=((LOW, NOT_HIGH), (MEDIUM, NOT_HIGH), (HIGH, HIGH)),
        positive_class=HIGH,
    ),
}


def relabel(labels, spec: ScenarioSpec) -> list[str]:
    """Map base Low/Medium/High labels into the scenario's classes."""
    mapping = spec.mapping()
    out = []
    for lab in labels:
        if lab not in mapping:
            raise UnknownLabel(f"label {lab!r} not in {sorted(mapping)}")
        out.append(mapping[lab])
    return out


def stratified_kfold(labels, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Deterministic stratified partition into k disjoint test-index sets.

    Every class is shuffled and dealt into folds whose per-class counts
    differ by at most one; leftover samples rotate across folds so overall
    fold sizes stay as even as possible.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            raise ClassTooSmall(f"class {cls!r} has {len(idx)} samples, needs at least {k}")
        rng.shuffle(idx)
        base, extras = divmod(len(idx), k)
        start = 0
        for i in range(k):
            size = base + (1 if (i - offset) % k < extras else 0)
            folds[i].extend(idx[start : start + size].tolist())
            start += size
        offset = (offset + extras) % k
    return [np.asarray(sorted(f), dtype=np.int64) for f in folds]


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> dict[str, float]:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass
class CvReport:
    folds: list[Metrics]
    mean: Metrics

    @classmethod
    def from_folds(cls, folds: list[Metrics]) -> "CvReport":
        mean = Metrics(
            accuracy=float(np.mean([m.accuracy for m in folds])),
            precision=float(np.mean([m.precision for m in folds])),
            recall=float(np.mean([m.recall for m in folds])),
            f1=float(np.mean([m.f1 for m in folds])),
        )
        return cls(folds=folds, mean=mean)

    def as_dict(self) -> dict:
        return {"folds": [m.as_dict() for m in self.folds], "mean": self.mean.as_dict()}


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def evaluate(predictions, truth, spec: ScenarioSpec) -> Metrics:
    """Accuracy plus precision/recall/F1 under the scenario's convention.

    Binary scenarios score the positive class; the three-class scenario
    macro-averages precision and recall. F1 is the harmonic mean of the
    reported precision and recall.
    """
    predictions = list(predictions)
    truth = list(truth)
    if len(predictions) != len(truth):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(truth)} truths")
    if not predictions:
        raise EmptyInput("no predictions to evaluate")
    for lab in predictions + truth:
        if lab not in spec.classes:
            raise UnknownLabel(f"label {lab!r} not in scenario classes {spec.classes}")
    pred = np.asarray(predictions)
    true = np.asarray(truth)
    accuracy = float(np.mean(pred == true))
    if len(spec.classes) == 2:
        pos = spec.positive_class
        tp = float(np.sum((pred == pos) & (true == pos)))
        fp = float(np.sum((pred == pos) & (true != pos)))
        fn = float(np.sum((pred != pos) & (true == pos)))
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
    else:
        per_p = []
        per_r = []
        for cls in spec.classes:
            tp = float(np.sum((pred == cls) & (true == cls)))
            fp = float(np.sum((pred == cls) & (true != cls)))
            fn = float(np.sum((pred != cls) & (true == cls)))
            per_p.append(_safe_div(tp, tp + fp))
            per_r.append(_safe_div(tp, tp + fn))
        precision = float(np.mean(per_p))
        recall = float(np.mean(per_r))
    f1 = _safe_div(2.0 * precision * recall, precision + recall)
    return Metrics(accuracy, precision, recall, f1)


@dataclass
class CvResult:
    """Everything produced by one cross-validated scenario run."""

    scenario: ScenarioSpec
    report: CvReport
    fold_models: list[TreeEnsemble]
    fold_test_indices: list[np.ndarray]
    fold_predictions: list[list[str]]
    scenario_labels: list[str]


def cross_validate(
    X: np.ndarray,
    base_labels,
    scenario: ScenarioSpec,
    kind: str,
    forest_params: ForestParams | None = None,
    boost_params: BoostParams | None = None,
    k: int = 5,
    seed: int = 0,
    feature_names: list[str] | None = None,
) -> CvResult:
    """Stratified k-fold training and evaluation of one model kind."""
    X = np.asarray(X, dtype=np.float64)
    labels = relabel(base_labels, scenario)
    folds = stratified_kfold(labels, k=k, seed=seed)
    rng = np.random.default_rng(seed)
    fold_seeds = rng.integers(0, 2**31 - 1, size=k)
    labels_arr = np.asarray(labels)
    models = []
    fold_metrics = []
    fold_preds = []
    for i, test_idx in enumerate(folds):
        train_mask = np.ones(len(X), dtype=bool)
        train_mask[test_idx] = False
        train_idx = np.flatnonzero(train_mask)
        if kind == "random_forest":
            params = replace(forest_params or ForestParams(), seed=int(fold_seeds[i]))
            model = train_random_forest(
                X[train_idx], labels_arr[train_idx], list(scenario.classes), params, feature_names
            )
        elif kind == "gradient_boosting":
            params = replace(boost_params or BoostParams(), seed=int(fold_seeds[i]))
            model = train_gradient_boosting(
                X[train_idx], labels_arr[train_idx], list(scenario.classes), params, feature_names
            )
        else:
            raise ValueError(f"unknown model kind {kind!r}")
        pred_idx = predict_class_index(model, X[test_idx])
        preds = [scenario.classes[j] for j in pred_idx]
        fold_metrics.append(evaluate(preds, labels_arr[test_idx].tolist(), scenario))
        models.append(model)
        fold_preds.append(preds)
    return CvResult(
        scenario=scenario,
        report=CvReport.from_folds(fold_metrics),
        fold_models=models,
        fold_test_indices=folds,
        fold_predictions=fold_preds,
        scenario_labels=labels,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _tree_to_dict(tree: Tree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "cover": tree.cover.tolist(),
        "value": tree.value.tolist(),
    }


def _tree_from_dict(d: dict) -> Tree:
    return Tree(
        feature=np.asarray(d["feature"], dtype=np.int64),
        threshold=np.asarray(d["threshold"], dtype=np.float64),
        left=np.asarray(d["left"], dtype=np.int64),
        right=np.asarray(d["right"], dtype=np.int64),
        cover=np.asarray(d["cover"], dtype=np.float64),
        value=np.asarray(d["value"], dtype=np.float64),
    )


def ensemble_to_json(model: TreeEnsemble) -> str:
    """Self-describing JSON document; float fields round-trip bit-exactly."""
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "base_value": model.base_value.tolist(),
        "n_classes": model.n_classes,
        "feature_names": model.feature_names,
        "seed": model.seed,
        "learning_rate": model.learning_rate,
        "tree_class": model.tree_class,
        "trees": [_tree_to_dict(t) for t in model.trees],
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def ensemble_from_json(text: str) -> TreeEnsemble:
    doc = json.loads(text)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('format_version')!r}")
    return TreeEnsemble(
        kind=doc["kind"],
        trees=[_tree_from_dict(t) for t in doc["trees"]],
        base_value=np.asarray(doc["base_value"], dtype=np.float64),
        n_classes=doc["n_classes"],
        feature_names=doc["feature_names"],
        seed=doc["seed"],
        learning_rate=doc["learning_rate"],
        tree_class=doc["tree_class"],
    )


def save_ensemble(model: TreeEnsemble, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(ensemble_to_json(model))


def load_ensemble(path) -> TreeEnsemble:
    with open(path, encoding="utf-8") as fh:
        return ensemble_from_json(fh.read())
