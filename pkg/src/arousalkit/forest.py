"""Decision tree, random forest and k-nearest-neighbour classifiers.

Binary classifiers over dense float feature matrices with labels in {0, 1}
(1 = high arousal).  Trees grow greedily on an impurity criterion with
per-sample class weights; the forest bags bootstrap resamples with
inverse-class-frequency weights computed per bootstrap sample and predicts
by majority vote, exposing the vote fraction as a probability.  Ties in the
vote go to the positive class.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

SELECTABLE_CRITERIA = ("gini", "entropy")


def _impurity(counts, criterion):
    """Weighted-count impurity; counts is (..., 2) of class weight sums."""
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(total > 0, counts / np.where(total > 0, total, 1.0), 0.0)
    if criterion == "gini":
        return 1.0 - (p ** 2).sum(axis=-1)
    # entropy, in bits; 0·log(0) treated as 0
    logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logp).sum(axis=-1)


def _resolve_max_features(max_features, n_features):
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, round(np.sqrt(n_features)))
    if isinstance(max_features, float):
        if not 0 < max_features <= 1:
            raise DataError(f"max_features fraction out of range: {max_features}")
        return max(1, round(max_features * n_features))
    m = int(max_features)
    if not 1 <= m <= n_features:
        raise DataError(f"max_features {m} out of [1, {n_features}]")
    return m


@dataclass
class _Node:
    feature: int = -1          # -1 marks a leaf
    threshold: float = 0.0
    left: "_Node" = None
    right: "_Node" = None
    prediction: int = 0
    weight_high: float = 0.0   # class-weight mass at this node
    weight_low: float = 0.0


@dataclass
class DecisionTree:
    """CART-style binary classification tree.

    min_samples_split may be an int (absolute) or a float in (0, 1]
    interpreted as a fraction of the training-set size.  max_features may be
    None (all), "sqrt", an int, or a fraction.
    """

    criterion: str = "entropy"
    max_features: object = None
    min_samples_split: object = 2
    seed: int = 0
    root: _Node = field(default=None, repr=False)

    def __post_init__(self):
        if self.criterion not in SELECTABLE_CRITERIA:
            raise DataError(f"unknown criterion {self.criterion!r}")

    def fit(self, X, y, sample_weight=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) != len(y):
            raise DataError("X must be 2-D with one label per row")
        if len(X) == 0:
            raise DataError("empty training set")
        if sample_weight is None:
            sample_weight = np.ones(len(y))
        w = np.asarray(sample_weight, dtype=np.float64)
        self.n_features_ = X.shape[1]
        if isinstance(self.min_samples_split, float):
            if not 0 < self.min_samples_split <= 1:
                raise DataError("min_samples_split fraction out of (0, 1]")
            self._min_split = max(2, int(np.ceil(self.min_samples_split * len(y))))
        else:
            self._min_split = max(2, int(self.min_samples_split))
        self._m_feat = _resolve_max_features(self.max_features, self.n_features_)
        rng = np.random.default_rng(self.seed)
        self.root = self._grow(X, y, w, rng)
        return self

    def _leaf(self, y, w):
        wh = float(w[y == 1].sum())
        wl = float(w[y == 0].sum())
        return _Node(prediction=int(wh >= wl), weight_high=wh, weight_low=wl)

    def _grow(self, X, y, w, rng):
        if len(y) < self._min_split or np.all(y == y[0]):
            return self._leaf(y, w)
        feat, thr = self._best_split(X, y, w, rng)
        if feat < 0:
            return self._leaf(y, w)
        mask = X[:, feat] <= thr
        node = self._leaf(y, w)
        node.feature = feat
        node.threshold = thr
        node.left = self._grow(X[mask], y[mask], w[mask], rng)
        node.right = self._grow(X[~mask], y[~mask], w[~mask], rng)
        return node

    def _best_split(self, X, y, w, rng):
        n = len(y)
        feats = rng.choice(self.n_features_, size=self._m_feat, replace=False)
        total = np.array([w[y == 0].sum(), w[y == 1].sum()])
        parent = _impurity(total, self.criterion) * total.sum()
        best = (-1, 0.0, -1e-12)
        for f in feats:
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            wy = np.zeros((n, 2))
            wy[np.arange(n), y[order]] = w[order]
            left = np.cumsum(wy, axis=0)  # inclusive prefix sums
            # candidate cuts between distinct consecutive values
            cut = np.nonzero(xs[:-1] < xs[1:])[0]
            if len(cut) == 0:
                continue
            lc = left[cut]
            rc = total - lc
            score = (_impurity(lc, self.criterion) * lc.sum(axis=1)
                     + _impurity(rc, self.criterion) * rc.sum(axis=1))
            gain = parent - score
            j = int(np.argmax(gain))
            if gain[j] > best[2]:
                best = (int(f), float((xs[cut[j]] + xs[cut[j] + 1]) / 2.0), float(gain[j]))
        return best[0], best[1]

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        for i, row in enumerate(X):
            node = self.root
            while node.feature >= 0:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.prediction
        return out


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    bootstrap: bool = True
    max_features: object = "sqrt"
    criterion: str = "gini"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise DataError("n_trees must be >= 1")


@dataclass
class Forest:
    config: ForestConfig
    trees: list = field(default_factory=list, repr=False)


def _balanced_weights(y):
    """Per-sample weights inversely proportional to class frequency."""
    n = len(y)
    w = np.empty(n)
    for cls in (0, 1):
        m = y == cls
        cnt = m.sum()
        w[m] = n / (2.0 * cnt) if cnt else 0.0
    return w


def train_random_forest(X, y, cfg: ForestConfig = None) -> Forest:
    """Bagged classification trees; each tree gets its own seeded generator
    (base seed + tree index) so fits are deterministic and order-independent."""
    cfg = cfg or ForestConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise DataError("training labels contain a single class")
    forest = Forest(config=cfg)
    n = len(y)
    for t in range(cfg.n_trees):
        tree_seed = cfg.seed + t
        rng = np.random.default_rng(tree_seed)
        idx = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        yb = y[idx]
        if np.all(yb == yb[0]):
            # degenerate bootstrap: resample once more deterministically
            idx = rng.integers(0, n, size=n)
            yb = y[idx]
        tree = DecisionTree(criterion=cfg.criterion, max_features=cfg.max_features,
                            seed=tree_seed)
        tree.fit(X[idx], yb, sample_weight=_balanced_weights(yb))
        forest.trees.append(tree)
    return forest


def predict_forest(forest: Forest, X):
    """Majority vote; returns (labels, vote-fraction probability of HIGH).

    An exact tie votes HIGH: label = 1 iff probability >= 0.5.
    """
    X = np.asarray(X, dtype=np.float64)
    votes = np.zeros(len(X))
    for tree in forest.trees:
        votes += tree.predict(X)
    prob = votes / len(forest.trees)
    return (prob >= 0.5).astype(np.int64), prob


def knn_predict(train_X, train_y, query, k: int = 7):
    """Inverse-distance-weighted k-nearest-neighbour vote (Euclidean).

    A zero-distance neighbour dominates: the query takes the majority label
    among exact matches.
    """
    train_X = np.asarray(train_X, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.int64)
    query = np.atleast_2d(np.asarray(query, dtype=np.float64))
    if k < 1 or k > len(train_X):
        raise DataError(f"k={k} out of [1, {len(train_X)}]")
    d2 = ((query[:, None, :] - train_X[None, :, :]) ** 2).sum(axis=2)
    dist = np.sqrt(d2)
    out = np.empty(len(query), dtype=np.int64)
    for i in range(len(query)):
        nn = np.argsort(dist[i], kind="stable")[:k]
        dn = dist[i][nn]
        exact = dn == 0.0
        if exact.any():
            labels = train_y[nn[exact]]
            out[i] = int(labels.sum() * 2 >= len(labels))
            continue
        wts = 1.0 / dn
        s1 = wts[train_y[nn] == 1].sum()
        s0 = wts[train_y[nn] == 0].sum()
        out[i] = int(s1 >= s0)
    return out


def _node_to_dict(node: _Node) -> dict:
    if node.feature < 0:
        return {"prediction": node.prediction,
                "weight_high": node.weight_high, "weight_low": node.weight_low}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right),
            "prediction": node.prediction,
            "weight_high": node.weight_high, "weight_low": node.weight_low}


def _node_from_dict(d: dict) -> _Node:
    node = _Node(prediction=int(d["prediction"]),
                 weight_high=float(d.get("weight_high", 0.0)),
                 weight_low=float(d.get("weight_low", 0.0)))
    if "feature" in d:
        node.feature = int(d["feature"])
        node.threshold = float(d["threshold"])
        node.left = _node_from_dict(d["left"])
        node.right = _node_from_dict(d["right"])
    return node


def forest_to_dict(forest: Forest) -> dict:
    """JSON-serializable snapshot of a trained forest."""
    cfg = forest.config
    return {
        "config": {"n_trees": cfg.n_trees, "bootstrap": cfg.bootstrap,
                   "max_features": cfg.max_features, "criterion": cfg.criterion,
                   "seed": cfg.seed},
        "trees": [
            {"criterion": t.criterion, "max_features": t.max_features,
             "min_samples_split": t.min_samples_split, "seed": t.seed,
             "root": _node_to_dict(t.root)}
            for t in forest.trees
        ],
    }


def forest_from_dict(d: dict) -> Forest:
    cfg = ForestConfig(**d["config"])
    forest = Forest(config=cfg)
    for td in d["trees"]:
        tree = DecisionTree(criterion=td["criterion"],
                            max_features=td["max_features"],
                            min_samples_split=td["min_samples_split"],
                            seed=td["seed"])
        tree.root = _node_from_dict(td["root"])
        forest.trees.append(tree)
    return forest
