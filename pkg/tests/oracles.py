"""Independent reference implementations used to check the fast paths.

These deliberately avoid the production algorithms: attribution values come
from explicit subset enumeration, distances from the spherical law of
cosines, and transport cost from integrating the CDF difference over the
merged sample support.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from cdoxai.forest import Tree


def eval_tree_conditional(tree: Tree, x, coalition: frozenset) -> np.ndarray:
    """Tree output when only features in the coalition are known.

    Known features route normally; unknown splits average both children
    weighted by their training cover.
    """

    def walk(node: int) -> np.ndarray:
        if tree.feature[node] < 0:
            return tree.value[node]
        f = tree.feature[node]
        left, right = tree.left[node], tree.right[node]
        if f in coalition:
            child = left if x[f] <= tree.threshold[node] else right
            return walk(child)
        wl = tree.cover[left] / tree.cover[node]
        wr = tree.cover[right] / tree.cover[node]
        return wl * walk(left) + wr * walk(right)

    return walk(0)


def brute_force_shap(tree: Tree, x) -> np.ndarray:
    """Exact Shapley values by enumerating all feature subsets.

    Uses the standard combinatorial weights over the full feature space of
    the row; only practical for a handful of features.
    """
    x = np.asarray(x, dtype=np.float64)
    n_features = len(x)
    all_features = list(range(n_features))
    cache: dict[frozenset, np.ndarray] = {}

    def value(coal: frozenset) -> np.ndarray:
        if coal not in cache:
            cache[coal] = eval_tree_conditional(tree, x, coal)
        return cache[coal]

    phi = np.zeros((n_features, tree.n_outputs), dtype=np.float64)
    for i in all_features:
        rest = [f for f in all_features if f != i]
        for size in range(len(rest) + 1):
            weight = (
                math.factorial(size)
                * math.factorial(n_features - size - 1)
                / math.factorial(n_features)
            )
            for subset in combinations(rest, size):
                s = frozenset(subset)
                phi[i] += weight * (value(s | {i}) - value(s))
    return phi


def random_tree(rng: np.random.Generator, n_features: int, max_depth: int) -> Tree:
    """A random binary tree with consistent cover counts and vector leaves.

    Split features repeat freely along paths (exercising the unwind logic)
    and covers are drawn so children always sum to their parent.
    """
    feature, threshold, left, right, cover, value = [], [], [], [], [], []

    def grow(depth: int, cov: float) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        cover.append(cov)
        value.append(rng.normal(size=2))
        if depth < max_depth and rng.random() < 0.8 and cov >= 4:
            feature[node] = int(rng.integers(0, n_features))
            threshold[node] = float(rng.uniform(-1.0, 1.0))
            frac = rng.uniform(0.2, 0.8)
            cov_l = max(1.0, round(cov * frac))
            cov_l = min(cov_l, cov - 1.0)
            l = grow(depth + 1, cov_l)
            r = grow(depth + 1, cov - cov_l)
            left[node] = l
            right[node] = r
        return node

    grow(0, float(rng.integers(64, 256)))
    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        cover=np.asarray(cover, dtype=np.float64),
        value=np.asarray(value, dtype=np.float64),
    )


def wasserstein_cdf_oracle(a, b) -> float:
    """Transport cost as the area between the two empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    support = np.union1d(a, b)
    if len(support) == 1:
        return 0.0
    total = 0.0
    for lo, hi in zip(support[:-1], support[1:]):
        fa = np.searchsorted(a, lo, side="right") / len(a)
        fb = np.searchsorted(b, lo, side="right") / len(b)
        total += abs(fa - fb) * (hi - lo)
    return total


def law_of_cosines_nm(lat1, lon1, lat2, lon2) -> float:
    """Great-circle distance via the spherical law of cosines."""
    radius_nm = 3440.065
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return radius_nm * math.acos(min(1.0, max(-1.0, c)))
