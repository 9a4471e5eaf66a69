"""Small, deterministic learning algorithms used as error-rate generators.

Models follow the fit/predict convention and are treated as immutable once
fitted. Every tie (class votes, equal distances, equal split gains) is broken
deterministically: smallest class id, earliest training record, first feature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, ClassVar, Optional

import numpy as np

from .partition import Dataset
from .rng import SeedLike

# Feature groups of the distorted letter-data distance (1-based feature ids).
LETTER_GROUPS = ((1, 3, 9, 16), (2, 4, 6, 7, 8, 10, 12, 14, 15), (5, 11, 13))

KINDS = ("majority", "mean", "logreg", "fnn_weighted", "fnn_distorted", "knn", "tree")


def _coerce(value: str) -> Any:
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    try:
        return json.loads(value)
    except ValueError:
        return value


@dataclass(frozen=True)
class ClassifierSpec:
    """Algorithm kind plus hyperparameters, e.g. ``fnn_weighted:omega=0.29``."""

    kind: str
    params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}; choose from {', '.join(KINDS)}")
        object.__setattr__(self, "params", tuple(sorted(dict(self.params).items())))
        _MODELS[self.kind].check_params(dict(self.params))

    @classmethod
    def parse(cls, text: str) -> "ClassifierSpec":
        kind, _, rest = text.strip().partition(":")
        params = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"malformed hyperparameter {item!r} in {text!r}")
            params[key.strip()] = _coerce(value.strip())
        return cls(kind.strip(), tuple(params.items()))

    def get(self, key: str, default=None):
        return dict(self.params).get(key, default)

    def with_param(self, key: str, value) -> "ClassifierSpec":
        return ClassifierSpec(self.kind, tuple({**dict(self.params), key: value}.items()))

    def __str__(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + ":" + ",".join(f"{k}={v}" for k, v in self.params)


def _vote(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; np.argmax already prefers the smallest index on ties."""
    return np.argmax(scores, axis=1)


class Model:
    kind: ClassVar[str]
    allowed: ClassVar[tuple[str, ...]] = ()

    def __init__(self, spec: ClassifierSpec):
        self.spec = spec
        self.n_features: Optional[int] = None

    @classmethod
    def check_params(cls, params: dict) -> None:
        extra = set(params) - set(cls.allowed)
        if extra:
            raise ValueError(f"{cls.kind} does not take hyperparameter(s) {sorted(extra)}")

    def fit(self, X: np.ndarray, y: np.ndarray) -> "Model":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(y, dtype=np.int64)
        if y.size == 0:
            raise ValueError("cannot fit on an empty training set")
        if X.shape[0] != y.size:
            raise ValueError("feature rows and labels differ in length")
        self.n_features = X.shape[1]
        self._fit(X, y)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.n_features is None:
            raise RuntimeError("model is not fitted")
        X = np.asarray(X, dtype=float)
        # a 1-D input is one record, except for one-feature models where it is a column
        if X.ndim == 0 or (X.ndim == 1 and self.n_features > 1):
            return int(self.predict(X.reshape(1, -1))[0])
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return self._predict(X)

    def _fit(self, X, y):
        raise NotImplementedError

    def _predict(self, X):
        raise NotImplementedError


class Majority(Model):
    """Predicts the most frequent training label, ignoring the features."""

    kind = "majority"

    def _fit(self, X, y):
        self.label = int(np.argmax(np.bincount(y)))

    def _predict(self, X):
        return np.full(X.shape[0], self.label, dtype=np.int64)


class NearestCentroid(Model):
    """Assigns the class whose feature mean is closest in Euclidean distance."""

    kind = "mean"

    def _fit(self, X, y):
        self.classes = np.unique(y)
        self.centroids = np.stack([X[y == c].mean(axis=0) for c in self.classes])

    def _predict(self, X):
        d2 = ((X[:, None, :] - self.centroids[None, :, :]) ** 2).sum(axis=2)
        return self.classes[np.argmin(d2, axis=1)]


class LogisticRegression(Model):
    """Binary logistic regression fitted by damped Newton steps.

    The step is halved until the negative log-likelihood decreases. On
    separable data the coefficients keep growing until ``max_iter``; the
    decision boundary is still usable.
    """

    kind = "logreg"
    allowed = ("max_iter", "tol")

    def _fit(self, X, y):
        self.classes = np.unique(y)
        if self.classes.size > 2:
            raise ValueError("logreg handles binary problems only")
        self.coef = np.zeros(X.shape[1] + 1)
        self.n_iter = 0
        if self.classes.size == 1:
            return
        max_iter = int(self.spec.get("max_iter", 100))
        tol = float(self.spec.get("tol", 1e-8))
        Z = np.hstack([np.ones((X.shape[0], 1)), X])
        t = (y == self.classes[1]).astype(float)
        w = self.coef

        def nll(w):
            s = Z @ w
            return float(np.sum(np.logaddexp(0.0, s) - t * s))

        f = nll(w)
        for it in range(max_iter):
            p = 1.0 / (1.0 + np.exp(-(Z @ w)))
            g = Z.T @ (p - t)
            if np.max(np.abs(g)) / Z.shape[0] < tol:
                break
            H = (Z * (p * (1.0 - p))[:, None]).T @ Z
            step = np.linalg.lstsq(H + 1e-12 * np.eye(H.shape[0]), g, rcond=None)[0]
            lr = 1.0
            for _ in range(40):
                cand = w - lr * step
                fc = nll(cand)
                if fc <= f:
                    break
                lr *= 0.5
            else:
                break
            w, f = cand, fc
            self.n_iter = it + 1
        self.coef = w

    def decision(self, X) -> np.ndarray:
        return self.coef[0] + np.asarray(X, dtype=float).reshape(-1, self.n_features) @ self.coef[1:]

    def _predict(self, X):
        if self.classes.size == 1:
            return np.full(X.shape[0], self.classes[0], dtype=np.int64)
        return np.where(self.decision(X) > 0.0, self.classes[1], self.classes[0])


def _chunks(m: int, width: int, budget: int = 4_000_000):
    step = max(1, budget // max(width, 1))
    for start in range(0, m, step):
        yield slice(start, min(m, start + step))


class _FirstNeighbor(Model):
    """1-NN under a diagonal quadratic distance sum_l w_l (x_l - z_l)^2."""

    def _weights(self, d: int) -> np.ndarray:
        raise NotImplementedError

    def _fit(self, X, y):
        self.w = self._weights(X.shape[1])
        self.X_train, self.y_train = X, y

    def _distances(self, Q: np.ndarray, idx=None) -> np.ndarray:
        T = self.X_train if idx is None else self.X_train[idx]
        d = np.zeros((Q.shape[0], T.shape[-2]))
        for l, wl in enumerate(self.w):
            if wl:
                d += wl * (Q[:, l, None] - T[..., l]) ** 2
        return d

    def _brute(self, X) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.int64)
        for sl in _chunks(X.shape[0], self.X_train.shape[0]):
            out[sl] = np.argmin(self._distances(X[sl]), axis=1)
        return out

    def _predict(self, X):
        if X.shape[0] * self.X_train.shape[0] < 200_000:
            return self.y_train[self._brute(X)]
        return self.y_train[self._kd_nearest(X)]

    def _kd_nearest(self, X, k: int = 8) -> np.ndarray:
        """Same answer as the brute-force argmin, via a KD-tree shortlist.

        Shortlisted candidates are re-scored with the exact distance; rows whose
        shortlist may be cut inside a tie fall back to brute force.
        """
        from scipy.spatial import cKDTree

        k = min(k, self.X_train.shape[0])
        root = np.sqrt(self.w)
        tree = cKDTree(self.X_train * root)
        _, cand = tree.query(X * root, k=k)
        cand = cand.reshape(X.shape[0], k)
        exact = self._distances(X, cand)
        # among exact minima take the earliest training record
        best = exact.min(axis=1, keepdims=True)
        tied = exact <= best
        pick = np.where(tied, cand, np.iinfo(np.int64).max).min(axis=1)
        if k < self.X_train.shape[0]:
            unsure = exact.max(axis=1) <= best[:, 0] * (1 + 1e-9) + 1e-12
            if unsure.any():
                pick[unsure] = self._brute(X[unsure])
        return pick


class WeightedFNN(_FirstNeighbor):
    """First nearest neighbour with d = omega dx1^2 + dx2^2 / omega."""

    kind = "fnn_weighted"
    allowed = ("omega",)

    @classmethod
    def check_params(cls, params):
        super().check_params(params)
        omega = float(params.get("omega", 1.0))
        if not 0.0 < omega <= 1.0:
            raise ValueError(f"omega must lie in (0, 1], got {omega}")

    def _weights(self, d):
        if d != 2:
            raise ValueError("fnn_weighted is defined for two features")
        omega = float(self.spec.get("omega", 1.0))
        return np.array([omega, 1.0 / omega])


class DistortedFNN(_FirstNeighbor):
    """First nearest neighbour with feature groups scaled by upsilon, 1, 1/upsilon."""

    kind = "fnn_distorted"
    allowed = ("upsilon", "groups")

    @classmethod
    def check_params(cls, params):
        super().check_params(params)
        upsilon = float(params.get("upsilon", 1.0))
        if not 1.0 <= upsilon <= 50.0:
            raise ValueError(f"upsilon must lie in [1, 50], got {upsilon}")

    def _weights(self, d):
        upsilon = float(self.spec.get("upsilon", 1.0))
        groups = self.spec.get("groups", LETTER_GROUPS)
        w = np.zeros(d)
        for k, group in enumerate(groups, start=1):
            for feature in group:
                if not 1 <= feature <= d:
                    raise ValueError(f"feature group refers to feature {feature}, data has {d}")
                w[feature - 1] = upsilon ** (2 - k)
        return w


class KNN(Model):
    """Weighted k-nearest-neighbour vote on standardized features.

    Distances are scaled by the (k+1)-th neighbour's distance and passed
    through the kernel; the triangular kernel gives weight 1 - d/d_(k+1).
    """

    kind = "knn"
    allowed = ("k", "kernel", "scale")

    @classmethod
    def check_params(cls, params):
        super().check_params(params)
        if int(params.get("k", 5)) < 1:
            raise ValueError("k must be at least 1")
        if params.get("kernel", "triangular") not in ("triangular", "rectangular"):
            raise ValueError("kernel must be 'triangular' or 'rectangular'")

    def _fit(self, X, y):
        self.k = int(self.spec.get("k", 5))
        self.kernel = self.spec.get("kernel", "triangular")
        if self.spec.get("scale", True):
            sd = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.ones(X.shape[1])
            self.scale = np.where(sd > 0, sd, 1.0)
        else:
            self.scale = np.ones(X.shape[1])
        self.X_train = X / self.scale
        self.y_train = y
        self.n_classes = int(y.max()) + 1

    def _predict(self, X):
        Xs = X / self.scale
        n_train = self.X_train.shape[0]
        k = min(self.k, n_train)
        out = np.empty(X.shape[0], dtype=np.int64)
        for sl in _chunks(X.shape[0], n_train):
            d = np.sqrt(((Xs[sl, None, :] - self.X_train[None, :, :]) ** 2).sum(axis=2))
            order = np.argsort(d, axis=1, kind="stable")
            near = order[:, :k]
            dk = np.take_along_axis(d, near, axis=1)
            if self.kernel == "rectangular":
                w = np.ones_like(dk)
            else:
                ref = d[np.arange(d.shape[0]), order[:, k]] if k < n_train else dk[:, -1]
                u = dk / np.maximum(ref, 1e-6)[:, None]
                w = 1.0 - np.clip(u, 1e-6, 1.0 - 1e-6)
            scores = np.zeros((d.shape[0], self.n_classes))
            np.add.at(scores, (np.arange(d.shape[0])[:, None], self.y_train[near]), w)
            out[sl] = _vote(scores)
        return out


class GiniTree(Model):
    """Greedy binary classification tree on Gini impurity, unpruned.

    Splits are axis-aligned at midpoints between consecutive distinct values;
    a split is admissible only if both children keep ``min_leaf`` records.
    An impure node takes its best admissible split even at zero gain (Gini is
    concave, so no split increases impurity), which lets XOR-like
    interactions resolve below the root.
    """

    kind = "tree"
    allowed = ("max_depth", "min_leaf")

    def _fit(self, X, y):
        max_depth = int(self.spec.get("max_depth", 25))
        min_leaf = int(self.spec.get("min_leaf", 2))
        n_classes = int(y.max()) + 1
        onehot = np.eye(n_classes)[y]
        feature, threshold, left, right, label = [], [], [], [], []

        def new_node(idx):
            counts = onehot[idx].sum(axis=0)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            label.append(int(np.argmax(counts)))
            return len(label) - 1, counts

        root, root_counts = new_node(np.arange(y.size))
        stack = [(root, np.arange(y.size), root_counts, 0)]
        while stack:
            node, idx, counts, depth = stack.pop()
            m = idx.size
            if depth >= max_depth or m < 2 * min_leaf or np.count_nonzero(counts) <= 1:
                continue
            best = self._best_split(X[idx], onehot[idx], counts, min_leaf)
            if best is None:
                continue
            f, thr = best
            mask = X[idx, f] <= thr
            li, ri = idx[mask], idx[~mask]
            feature[node], threshold[node] = f, thr
            lnode, lcounts = new_node(li)
            rnode, rcounts = new_node(ri)
            left[node], right[node] = lnode, rnode
            stack.append((rnode, ri, rcounts, depth + 1))
            stack.append((lnode, li, lcounts, depth + 1))
        self.feature = np.array(feature)
        self.threshold = np.array(threshold)
        self.left = np.array(left)
        self.right = np.array(right)
        self.label = np.array(label, dtype=np.int64)

    @staticmethod
    def _best_split(X, onehot, counts, min_leaf):
        m = X.shape[0]
        best_score, best = np.inf, None
        n_left = np.arange(1, m)
        n_right = m - n_left
        for f in range(X.shape[1]):
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            cl = np.cumsum(onehot[order], axis=0)[:-1]
            cr = counts - cl
            # sum of child impurities weighted by size: n - sum(c^2)/n per side
            score = (n_left - (cl**2).sum(axis=1) / n_left) + (n_right - (cr**2).sum(axis=1) / n_right)
            ok = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
            if not ok.any():
                continue
            score = np.where(ok, score, np.inf)
            i = int(np.argmin(score))
            if score[i] < best_score:
                best_score = score[i]
                best = (f, 0.5 * (xs[i] + xs[i + 1]))
        return best

    @property
    def n_nodes(self) -> int:
        return int(self.label.size)

    def _predict(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.nonzero(active)[0]
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active[rows] = self.feature[node[rows]] >= 0
        return self.label[node]


_MODELS: dict[str, type[Model]] = {
    cls.kind: cls for cls in (Majority, NearestCentroid, LogisticRegression, WeightedFNN, DistortedFNN, KNN, GiniTree)
}


def fit(spec, train: Dataset, seed: SeedLike = None) -> Model:
    """Fit ``spec`` (a ClassifierSpec or its string form) on ``train``.

    All algorithms here are deterministic; ``seed`` is accepted for interface
    uniformity and ignored.
    """
    if isinstance(spec, str):
        spec = ClassifierSpec.parse(spec)
    if train.n == 0:
        raise ValueError("cannot fit on an empty training set")
    return _MODELS[spec.kind](spec).fit(train.X, train.y)


def predict(model: Model, X) -> np.ndarray:
    return model.predict(X)


def error_rate(model: Model, valid: Dataset) -> float:
    if valid.n == 0:
        raise ValueError("validation set is empty")
    return float(np.mean(model.predict(valid.X) != valid.y))
