"""Gradient-boosted regression trees with logistic loss.

Second-order boosting with exact greedy split search over sorted feature
values.  The objective is the summed logistic loss plus a regularizer with
an L0 part (gamma per leaf) and an L2 part (0.5 * lam * sum of squared leaf
values).  Leaf values are the closed-form second-order optimum -G/(H+lam),
shrunk by the learning rate before being stored, so prediction is exactly
the sum of stored leaf values across trees.

Every boosting round is guaranteed not to increase the objective: a tree
that would (which can only happen through the regularizer at extreme
settings) is replaced by its best single leaf, or dropped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, TrainingError

MODEL_FORMAT_VERSION = 1


def logistic_loss(y: float, yhat: float) -> float:
    """y * ln(1 + e^-yhat) + (1 - y) * ln(1 + e^yhat), numerically stable."""
    # log1p(exp(x)) = max(x, 0) + log1p(exp(-|x|))
    def softplus(x):
        return max(x, 0.0) + math.log1p(math.exp(-abs(x)))
    return y * softplus(-yhat) + (1.0 - y) * softplus(yhat)


def _softplus_vec(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def logistic_loss_total(y: np.ndarray, yhat: np.ndarray) -> float:
    return float(np.sum(y * _softplus_vec(-yhat) + (1.0 - y) * _softplus_vec(yhat)))


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0  # leaf value (already shrunk)

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    def leaf_count(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.leaf_count() + self.right.leaf_count()

    def leaf_values(self) -> list:
        if self.is_leaf:
            return [self.value]
        return self.left.leaf_values() + self.right.leaf_values()

    def predict_row(self, x) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if x[node.feature] < node.threshold else node.right
        return node.value

    def split_counts(self, counts) -> None:
        if not self.is_leaf:
            counts[self.feature] += 1
            self.left.split_counts(counts)
            self.right.split_counts(counts)

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.value}
        return {"feature": self.feature, "threshold": self.threshold,
                "left": self.left.to_dict(), "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "leaf" in d:
            return cls(value=float(d["leaf"]))
        return cls(feature=int(d["feature"]), threshold=float(d["threshold"]),
                   left=cls.from_dict(d["left"]), right=cls.from_dict(d["right"]))


@dataclass
class TreeEnsemble:
    trees: list = field(default_factory=list)
    n_features: int = 0
    max_depth: int = 6
    learning_rate: float = 0.1
    lam: float = 1.0
    gamma: float = 0.0
    feature_names: tuple = ()
    objective_history: list = field(default_factory=list)

    def predict_margin(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.n_features and X.shape[1] != self.n_features:
            raise ParameterError(
                f"feature dimension {X.shape[1]} != trained {self.n_features}")
        out = np.zeros(len(X))
        for tree in self.trees:
            for i in range(len(X)):
                out[i] += tree.predict_row(X[i])
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.predict_margin(X))

    def regularization(self) -> float:
        leaves = sum(t.leaf_count() for t in self.trees)
        sq = sum(v * v for t in self.trees for v in t.leaf_values())
        return self.gamma * leaves + 0.5 * self.lam * sq

    # -- persistence ----------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "format_version": MODEL_FORMAT_VERSION,
            "n_features": self.n_features,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "lam": self.lam,
            "gamma": self.gamma,
            "feature_names": list(self.feature_names),
            "trees": [t.to_dict() for t in self.trees],
        }
        return json.dumps(doc, indent=1)

    def save(self, path, manifest_name: str | None = None) -> None:
        doc = json.loads(self.to_json())
        if manifest_name:
            doc["manifest"] = manifest_name
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "TreeEnsemble":
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise ParameterError("unsupported model format version")
        return cls(
            trees=[TreeNode.from_dict(t) for t in doc["trees"]],
            n_features=int(doc["n_features"]),
            max_depth=int(doc["max_depth"]),
            learning_rate=float(doc["learning_rate"]),
            lam=float(doc["lam"]),
            gamma=float(doc["gamma"]),
            feature_names=tuple(doc["feature_names"]),
        )


def _best_split(X, grad, hess, idx, lam, gamma):
    """Exact greedy search over all features and boundaries between distinct
    values.  Returns (gain, feature, threshold) or None."""
    G = grad[idx].sum()
    H = hess[idx].sum()
    parent = G * G / (H + lam)
    best = None
    for f in range(X.shape[1]):
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sg = grad[idx][order]
        sh = hess[idx][order]
        cg = np.cumsum(sg)
        ch = np.cumsum(sh)
        # candidate boundaries: positions where the value changes
        change = np.nonzero(sv[1:] != sv[:-1])[0]
        if len(change) == 0:
            continue
        GL = cg[change]
        HL = ch[change]
        GR = G - GL
        HR = H - HL
        gains = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent) - gamma
        k = int(np.argmax(gains))
        if best is None or gains[k] > best[0] + 1e-15:
            thr = 0.5 * (sv[change[k]] + sv[change[k] + 1])
            best = (float(gains[k]), f, float(thr))
    if best is None or best[0] <= 0.0:
        return None
    return best


def _build_tree(X, grad, hess, idx, depth_left, lam, gamma, lr):
    G = grad[idx].sum()
    H = hess[idx].sum()
    if depth_left == 0 or len(idx) < 2:
        return TreeNode(value=-G / (H + lam) * lr)
    split = _best_split(X, grad, hess, idx, lam, gamma)
    if split is None:
        return TreeNode(value=-G / (H + lam) * lr)
    _, f, thr = split
    mask = X[idx, f] < thr
    left = _build_tree(X, grad, hess, idx[mask], depth_left - 1, lam, gamma, lr)
    right = _build_tree(X, grad, hess, idx[~mask], depth_left - 1, lam, gamma, lr)
    return TreeNode(feature=f, threshold=thr, left=left, right=right)


def train(X, y, n_rounds: int = 100, max_depth: int = 6, learning_rate: float = 0.1,
          lam: float = 1.0, gamma: float = 0.0, seed: int = 0,
          feature_names=()) -> TreeEnsemble:
    """Boosted ensemble minimizing logistic loss + L0/L2 regularization.

    Deterministic for fixed data and parameters (no subsampling; `seed` is
    accepted for interface symmetry with the rest of the pipeline).
    The recorded objective_history is non-increasing by construction.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise TrainingError("feature matrix must be 2-dimensional")
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise TrainingError("non-finite feature value")
    if set(np.unique(y)) - {0.0, 1.0}:
        raise TrainingError("labels must be binary 0/1")
    if n_rounds > 0:
        if len(y) < 2 or len(np.unique(y)) < 2:
            raise TrainingError("training data must contain both classes")
    if max_depth < 0:
        raise ParameterError("max_depth must be >= 0")

    model = TreeEnsemble(n_features=X.shape[1], max_depth=max_depth,
                         learning_rate=learning_rate, lam=lam, gamma=gamma,
                         feature_names=tuple(feature_names))
    margin = np.zeros(len(y))
    objective = logistic_loss_total(y, margin)
    model.objective_history.append(objective)
    all_idx = np.arange(len(y))
    for _ in range(n_rounds):
        p = sigmoid(margin)
        grad = p - y
        hess = p * (1.0 - p)
        tree = _build_tree(X, grad, hess, all_idx, max_depth, lam, gamma,
                           learning_rate)
        delta = np.array([tree.predict_row(row) for row in X])
        new_obj = (logistic_loss_total(y, margin + delta)
                   + model.regularization() + _tree_penalty(tree, lam, gamma))
        if new_obj > objective:
            # fall back to the root leaf; a zero leaf leaves the objective as-is
            G, H = grad.sum(), hess.sum()
            tree = TreeNode(value=-G / (H + lam) * learning_rate)
            delta = np.full(len(y), tree.value)
            new_obj = (logistic_loss_total(y, margin + delta)
                       + model.regularization() + _tree_penalty(tree, lam, gamma))
            if new_obj > objective:
                tree = TreeNode(value=0.0)
                delta = np.zeros(len(y))
                new_obj = objective
        model.trees.append(tree)
        margin = margin + delta
        objective = new_obj
        model.objective_history.append(objective)
    return model


def _tree_penalty(tree: TreeNode, lam: float, gamma: float) -> float:
    vals = tree.leaf_values()
    return gamma * len(vals) + 0.5 * lam * sum(v * v for v in vals)


def predict(model: TreeEnsemble, features) -> float:
    """Raw log-odds score for one feature vector."""
    return float(model.predict_margin(np.atleast_2d(features))[0])


def group_inclination(model: TreeEnsemble, member_features: np.ndarray) -> float:
    """Mean raw score over the member pairs of one candidate group."""
    member_features = np.atleast_2d(np.asarray(member_features, dtype=np.float64))
    if len(member_features) == 0:
        raise ParameterError("group inclination needs at least one member pair")
    return float(model.predict_margin(member_features).mean())


def auc_score(scores, labels) -> float:
    """Rank-statistic AUC; tied scores count half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise TrainingError("AUC undefined: test data has a single class")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    rank = 1.0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        avg = (rank + rank + (j - i)) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        rank += j - i + 1
        i = j + 1
    pos_rank_sum = ranks[pos].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class PredictionReport:
    scores: np.ndarray        # raw log-odds
    probabilities: np.ndarray
    auc: float | None
    accuracy: float
    f1: float

    @property
    def metrics(self) -> dict:
        return {"auc": self.auc, "accuracy": self.accuracy, "f1": self.f1}


def evaluate(model: TreeEnsemble, X, y) -> PredictionReport:
    """AUC, accuracy and F1 over a labeled test set.

    Probability threshold is 0.5 with ties classified positive.  A
    single-class test set yields auc=None (AUC is undefined there).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if len(y) == 0:
        raise TrainingError("empty test set")
    scores = model.predict_margin(X)
    probs = sigmoid(scores)
    pred = (probs >= 0.5).astype(np.int64)
    accuracy = float((pred == y).mean())
    tp = int(np.sum((pred == 1) & (y == 1)))
    fp = int(np.sum((pred == 1) & (y == 0)))
    fn = int(np.sum((pred == 0) & (y == 1)))
    f1 = 2.0 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0
    try:
        auc = auc_score(scores, y)
    except TrainingError:
        auc = None
    return PredictionReport(scores, probs, auc, accuracy, f1)


def feature_importance(model: TreeEnsemble) -> dict:
    """Split-frequency importance per feature, normalized to sum to 1.

    A model with no splits at all returns an all-zero map.
    """
    d = model.n_features
    counts = np.zeros(d)
    for tree in model.trees:
        tree.split_counts(counts)
    names = (model.feature_names if len(model.feature_names) == d
             else tuple(f"f{i}" for i in range(d)))
    total = counts.sum()
    if total == 0:
        return {name: 0.0 for name in names}
    return {name: float(c / total) for name, c in zip(names, counts)}
