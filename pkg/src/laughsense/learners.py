"""From-scratch linear SVM and gradient-boosted trees for the two-class task.

Both learners standardize features internally (fit on the training split
only) and map the decision to class "b" (laughed-at) on ties. Training is
fully deterministic: samples are visited in their given order, splits are
exact greedy over sorted feature values, no subsampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

SVM_C = 1.0
SVM_TOL = 1e-4
SVM_MAX_EPOCHS = 10_000

GBT_ETA = 0.3
GBT_MAX_DEPTH = 6
GBT_LAMBDA = 1.0
GBT_ROUNDS = 100
GBT_BASE_SCORE = 0.5
GBT_MIN_CHILD_SAMPLES = 1

MODEL_FORMAT_VERSION = 1


@dataclass
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.means) / self.stds


def fit_standardizer(train: np.ndarray) -> Standardizer:
    """Per-dimension mean/std from the training matrix; std floored at 1e-9."""
    train = np.asarray(train, dtype=np.float64)
    if train.ndim != 2 or train.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least 2 training rows")
    return Standardizer(train.mean(axis=0), np.maximum(train.std(axis=0), 1e-9))


def _check_two_classes(y: np.ndarray) -> None:
    if np.unique(y).size < 2:
        raise ValueError("training data contains a single class")


def _check_features(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature input")
    return x


# ---------------------------------------------------------------------------
# linear SVM (dual coordinate descent on the L1 hinge loss)
# ---------------------------------------------------------------------------


@dataclass
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    c: float
    standardizer: Standardizer

    def decision(self, x: np.ndarray) -> float:
        z = self.standardizer.transform(_check_features(x))
        return float(self.weights @ z + self.bias)

    def predict(self, x: np.ndarray) -> tuple[str, float]:
        score = self.decision(x)
        return ("b" if score >= 0.0 else "a"), score


def train_linear_svm(x: np.ndarray, y01: np.ndarray, c: float = SVM_C) -> LinearSvmModel:
    """Soft-margin linear SVM via dual coordinate descent.

    y01 holds 0 for class "a" and 1 for class "b". The bias is learned as an
    augmented constant feature. Iteration stops when the largest projected
    gradient violation in an epoch drops below SVM_TOL.
    """
    x = _check_features(x)
    y01 = np.asarray(y01)
    _check_two_classes(y01)
    scaler = fit_standardizer(x)
    z = np.column_stack([scaler.transform(x), np.ones(x.shape[0])])
    y = np.where(y01 > 0, 1.0, -1.0)

    n, d = z.shape
    q_diag = np.einsum("ij,ij->i", z, z)
    alpha = np.zeros(n)
    w = np.zeros(d)
    for _ in range(SVM_MAX_EPOCHS):
        worst = 0.0
        for i in range(n):
            g = y[i] * (w @ z[i]) - 1.0
            if alpha[i] == 0.0:
                pg = min(g, 0.0)
            elif alpha[i] == c:
                pg = max(g, 0.0)
            else:
                pg = g
            worst = max(worst, abs(pg))
            if pg != 0.0:
                new_alpha = min(max(alpha[i] - g / q_diag[i], 0.0), c)
                if new_alpha != alpha[i]:
                    w += (new_alpha - alpha[i]) * y[i] * z[i]
                    alpha[i] = new_alpha
        if worst < SVM_TOL:
            break
    return LinearSvmModel(weights=w[:-1], bias=float(w[-1]), c=c, standardizer=scaler)


# ---------------------------------------------------------------------------
# gradient-boosted trees (second-order boosting on logistic loss)
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    weight: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def evaluate(self, x: np.ndarray) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if x[node.feature] < node.threshold else node.right
        return node.weight


def _best_split(
    x: np.ndarray, g: np.ndarray, h: np.ndarray, lam: float
) -> tuple[float, int, float] | None:
    """Exact greedy split search; returns (gain, feature, threshold) or None."""
    g_total, h_total = g.sum(), h.sum()
    parent = g_total * g_total / (h_total + lam)
    best: tuple[float, int, float] | None = None
    n = x.shape[0]
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        xs = x[order, j]
        gl = np.cumsum(g[order])[:-1]
        hl = np.cumsum(h[order])[:-1]
        valid = xs[:-1] < xs[1:]  # split only between distinct values
        counts = np.arange(1, n)
        valid &= (counts >= GBT_MIN_CHILD_SAMPLES) & (n - counts >= GBT_MIN_CHILD_SAMPLES)
        if not np.any(valid):
            continue
        gr = g_total - gl
        hr = h_total - hl
        gains = 0.5 * (gl**2 / (hl + lam) + gr**2 / (hr + lam) - parent)
        gains[~valid] = -np.inf
        k = int(np.argmax(gains))
        if gains[k] > 0.0 and (best is None or gains[k] > best[0]):
            best = (float(gains[k]), j, float((xs[k] + xs[k + 1]) / 2.0))
    return best


def _grow_tree(
    x: np.ndarray, g: np.ndarray, h: np.ndarray, depth: int, max_depth: int, lam: float
) -> TreeNode:
    if depth < max_depth and x.shape[0] >= 2 * GBT_MIN_CHILD_SAMPLES:
        split = _best_split(x, g, h, lam)
        if split is not None:
            _, j, thr = split
            mask = x[:, j] < thr
            node = TreeNode(feature=j, threshold=thr)
            node.left = _grow_tree(x[mask], g[mask], h[mask], depth + 1, max_depth, lam)
            node.right = _grow_tree(x[~mask], g[~mask], h[~mask], depth + 1, max_depth, lam)
            return node
    return TreeNode(weight=float(-g.sum() / (h.sum() + lam)))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


@dataclass
class GbtModel:
    trees: list[TreeNode] = field(default_factory=list)
    eta: float = GBT_ETA
    max_depth: int = GBT_MAX_DEPTH
    lam: float = GBT_LAMBDA
    rounds: int = GBT_ROUNDS
    base_score: float = GBT_BASE_SCORE
    standardizer: Standardizer | None = None

    def margin(self, x: np.ndarray) -> float:
        z = self.standardizer.transform(_check_features(x)) if self.standardizer else _check_features(x)
        base = float(np.log(self.base_score / (1.0 - self.base_score)))
        return base + self.eta * sum(t.evaluate(z) for t in self.trees)

    def probability(self, x: np.ndarray) -> float:
        return float(_sigmoid(np.array(self.margin(x))))

    def predict(self, x: np.ndarray) -> tuple[str, float]:
        p = self.probability(x)
        return ("b" if p >= 0.5 else "a"), p


def train_gbt(x: np.ndarray, y01: np.ndarray, rounds: int = GBT_ROUNDS) -> GbtModel:
    """Second-order boosting: g = p - y, h = p(1 - p), leaf = -G/(H + lambda)."""
    x = _check_features(x)
    y = np.asarray(y01, dtype=np.float64)
    _check_two_classes(y)
    scaler = fit_standardizer(x)
    z = scaler.transform(x)

    model = GbtModel(rounds=rounds, standardizer=scaler)
    margin = np.full(x.shape[0], np.log(model.base_score / (1.0 - model.base_score)))
    for _ in range(rounds):
        p = _sigmoid(margin)
        g = p - y
        h = p * (1.0 - p)
        tree = _grow_tree(z, g, h, 0, model.max_depth, model.lam)
        model.trees.append(tree)
        margin += model.eta * np.array([tree.evaluate(row) for row in z])
    return model


def predict(model, features: np.ndarray) -> tuple[str, float]:
    """(label, score): margin for the SVM, probability for the GBT."""
    return model.predict(features)


# ---------------------------------------------------------------------------
# learner registry and text serialization
# ---------------------------------------------------------------------------

Trainer = Callable[[np.ndarray, np.ndarray], object]

LEARNERS: dict[str, Trainer] = {
    "svm": train_linear_svm,
    "gbt": train_gbt,
}


def _fmt(v: float) -> str:
    return repr(float(v))


def save_model(model, path: str | Path) -> None:
    """Plain-text model dump (decimal numbers only) for audit and reload."""
    lines = [f"laughsense-model v{MODEL_FORMAT_VERSION}"]
    if isinstance(model, LinearSvmModel):
        lines.append("kind svm")
        lines.append("means " + " ".join(_fmt(v) for v in model.standardizer.means))
        lines.append("stds " + " ".join(_fmt(v) for v in model.standardizer.stds))
        lines.append("weights " + " ".join(_fmt(v) for v in model.weights))
        lines.append(f"bias {_fmt(model.bias)}")
        lines.append(f"c {_fmt(model.c)}")
    elif isinstance(model, GbtModel):
        lines.append("kind gbt")
        lines.append("means " + " ".join(_fmt(v) for v in model.standardizer.means))
        lines.append("stds " + " ".join(_fmt(v) for v in model.standardizer.stds))
        lines.append(
            f"params eta={_fmt(model.eta)} max_depth={model.max_depth} "
            f"lambda={_fmt(model.lam)} rounds={model.rounds} base_score={_fmt(model.base_score)}"
        )
        for ti, tree in enumerate(model.trees):
            lines.append(f"tree {ti}")
            nodes: list[TreeNode] = []

            def index(node: TreeNode) -> int:
                nodes.append(node)
                i = len(nodes) - 1
                if not node.is_leaf:
                    li = index(node.left)
                    ri = index(node.right)
                    lines.append(f"node {i} split {node.feature} {_fmt(node.threshold)} {li} {ri}")
                else:
                    lines.append(f"node {i} leaf {_fmt(node.weight)}")
                return i

            index(tree)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path: str | Path):
    text = Path(path).read_text().splitlines()
    if not text or text[0] != f"laughsense-model v{MODEL_FORMAT_VERSION}":
        raise ValueError("unrecognized model file header")
    fields: dict[str, str] = {}
    tree_lines: list[list[str]] = []
    for line in text[1:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "tree":
            tree_lines.append([])
        elif parts[0] == "node":
            tree_lines[-1].append(line)
        else:
            fields[parts[0]] = line[len(parts[0]) + 1 :]
    scaler = Standardizer(
        np.array([float(v) for v in fields["means"].split()]),
        np.array([float(v) for v in fields["stds"].split()]),
    )
    if fields["kind"] == "svm":
        return LinearSvmModel(
            weights=np.array([float(v) for v in fields["weights"].split()]),
            bias=float(fields["bias"]),
            c=float(fields["c"]),
            standardizer=scaler,
        )
    if fields["kind"] == "gbt":
        params = dict(kv.split("=") for kv in fields["params"].split())
        model = GbtModel(
            eta=float(params["eta"]),
            max_depth=int(params["max_depth"]),
            lam=float(params["lambda"]),
            rounds=int(params["rounds"]),
            base_score=float(params["base_score"]),
            standardizer=scaler,
        )
        for lines in tree_lines:
            nodes = [TreeNode() for _ in lines]
            for line in lines:
                parts = line.split()
                i = int(parts[1])
                if parts[2] == "split":
                    nodes[i].feature = int(parts[3])
                    nodes[i].threshold = float(parts[4])
                    nodes[i].left = nodes[int(parts[5])]
                    nodes[i].right = nodes[int(parts[6])]
                else:
                    nodes[i].weight = float(parts[3])
            model.trees.append(nodes[0])
        return model
    raise ValueError(f"unknown model kind {fields['kind']!r}")
