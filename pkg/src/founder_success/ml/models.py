"""The three success classifiers: linear least squares, random forest, boosted trees."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import kernels as _kernels
from .tree import Tree, grow_tree

FORMAT_NAME = "founder-success-model"
FORMAT_VERSION = 1


def _check_threshold(t: float) -> None:
    if not 0.0 < t < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {t}")


class LinearModel:
    """Least squares on 0/1 labels with an unpenalized intercept.

    Solves ``(A'A + ridge * D) w = A'y`` with ``A = [1 | X]`` and ``D`` the
    identity minus its intercept entry; the small ridge keeps rank-deficient
    one-hot designs solvable. Predicts 1 when the score reaches ``threshold``.
    """

    kind = "linear"

    def __init__(self, ridge: float = 1e-6, threshold: float = 0.5):
        _check_threshold(threshold)
        self.ridge = ridge
        self.threshold = threshold
        self.intercept_: float | None = None
        self.coef_: np.ndarray | None = None

    def fit(self, X, y) -> "LinearModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on zero rows")
        A = np.hstack([np.ones((X.shape[0], 1)), X])
        gram = A.T @ A
        penalty = np.full(A.shape[1], self.ridge)
        penalty[0] = 0.0
        w = np.linalg.solve(gram + np.diag(penalty), A.T @ y)
        self.intercept_ = float(w[0])
        self.coef_ = w[1:]
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X) >= self.threshold

    def params(self) -> dict:
        return {"ridge": self.ridge, "threshold": self.threshold}

    def state(self) -> dict:
        return {"intercept": self.intercept_, "coef": [float(c) for c in self.coef_]}

    def load_state(self, state: dict) -> None:
        self.intercept_ = float(state["intercept"])
        self.coef_ = np.asarray(state["coef"], dtype=np.float64)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 8
    max_features: str | int | None = "sqrt"
    bootstrap: bool = True
    min_samples_leaf: int = 1
    seed: int = 0

    def n_features_per_split(self, d: int) -> int:
        if self.max_features is None:
            return d
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(d)))
        return max(1, min(d, int(self.max_features)))


class RandomForest:
    """Bagged Gini CART trees combined by majority vote.

    Every tree gets its own generator spawned from ``seed``, so the forest is
    identical whatever ``n_jobs`` is.
    """

    kind = "forest"

    def __init__(self, params: ForestParams = ForestParams(), threshold: float = 0.5, n_jobs: int = 1, kernels=None):
        _check_threshold(threshold)
        if params.n_trees < 1 or params.max_depth < 1:
            raise ValueError("n_trees and max_depth must be >= 1")
        self.p = params
        self.threshold = threshold
        self.n_jobs = n_jobs
        self.kernels = kernels
        self.trees: list[Tree] = []

    def fit(self, X, y) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        m = self.p.n_features_per_split(d)
        seeds = np.random.SeedSequence(self.p.seed).spawn(self.p.n_trees)

        def one(ss: np.random.SeedSequence) -> Tree:
            rng = np.random.default_rng(ss)
            idx = rng.integers(0, n, size=n) if self.p.bootstrap else np.arange(n)
            return grow_tree(
                X,
                mode="gini",
                y=y,
                sample_idx=idx,
                max_depth=self.p.max_depth,
                min_samples_leaf=self.p.min_samples_leaf,
                max_features=m,
                rng=rng,
                kernels=self.kernels,
            )

        if self.n_jobs > 1:
            with ThreadPoolExecutor(self.n_jobs) as pool:
                self.trees = list(pool.map(one, seeds))
        else:
            self.trees = [one(s) for s in seeds]
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Fraction of trees voting for success."""
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros(X.shape[0])
        for t in self.trees:
            votes += t.apply(X) >= 0.5
        return votes / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X) >= self.threshold

    def params(self) -> dict:
        return {**asdict(self.p), "threshold": self.threshold}

    def state(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees]}

    def load_state(self, state: dict) -> None:
        self.trees = [Tree.from_dict(t) for t in state["trees"]]


@dataclass(frozen=True)
class BoostParams:
    n_rounds: int = 200
    learning_rate: float = 0.1
    max_depth: int = 3
    reg_lambda: float = 1.0
    min_samples_leaf: int = 1
    seed: int = 0


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logistic_loss(y: np.ndarray, score: np.ndarray) -> float:
    """Mean log-loss of raw scores, computed without overflow."""
    per_row = np.logaddexp(0.0, score) - y * score
    return math.fsum(per_row) / len(per_row)


class GradientBoostedTrees:
    """Logistic-loss boosting with second-order (Newton) regression trees.

    Starts from the log-odds of the training base rate and adds
    ``learning_rate`` times each round's tree. ``train_loss_`` holds the mean
    training log-loss before the first round and after each round.
    """

    kind = "gbt"

    def __init__(self, params: BoostParams = BoostParams(), threshold: float = 0.5, kernels=None):
        _check_threshold(threshold)
        if params.n_rounds < 0 or params.max_depth < 1 or params.learning_rate <= 0:
            raise ValueError("invalid boosting parameters")
        self.p = params
        self.threshold = threshold
        self.kernels = kernels
        self.base_score: float = 0.0
        self.trees: list[Tree] = []
        self.train_loss_: list[float] = []

    def fit(self, X, y) -> "GradientBoostedTrees":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on zero rows")
        rate = min(max(math.fsum(y) / len(y), 1e-6), 1 - 1e-6)
        self.base_score = math.log(rate / (1 - rate))
        score = np.full(len(y), self.base_score)
        self.trees = []
        self.train_loss_ = [logistic_loss(y, score)]
        for _ in range(self.p.n_rounds):
            p = _sigmoid(score)
            tree = grow_tree(
                X,
                mode="newton",
                grad=p - y,
                hess=p * (1.0 - p),
                max_depth=self.p.max_depth,
                min_samples_leaf=self.p.min_samples_leaf,
                reg_lambda=self.p.reg_lambda,
                kernels=self.kernels,
            )
            score = score + self.p.learning_rate * tree.apply(X)
            self.trees.append(tree)
            self.train_loss_.append(logistic_loss(y, score))
        return self

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        score = np.full(X.shape[0], self.base_score)
        for t in self.trees:
            score = score + self.p.learning_rate * t.apply(X)
        return score

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X) >= self.threshold

    def params(self) -> dict:
        return {**asdict(self.p), "threshold": self.threshold}

    def state(self) -> dict:
        return {"base_score": self.base_score, "trees": [t.to_dict() for t in self.trees]}

    def load_state(self, state: dict) -> None:
        self.base_score = float(state["base_score"])
        self.trees = [Tree.from_dict(t) for t in state["trees"]]


MODEL_KINDS = {"linear": LinearModel, "forest": RandomForest, "gbt": GradientBoostedTrees}


def dumps_model(model) -> str:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": model.kind,
        "params": model.params(),
        "state": model.state(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model), encoding="utf-8")


def loads_model(text: str):
    doc = json.loads(text)
    if doc.get("format") != FORMAT_NAME:
        raise ValueError("not a founder-success model file")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')}")
    params = dict(doc["params"])
    threshold = params.pop("threshold")
    kind = doc["kind"]
    if kind == "linear":
        model = LinearModel(threshold=threshold, **params)
    elif kind == "forest":
        model = RandomForest(ForestParams(**params), threshold=threshold)
    elif kind == "gbt":
        model = GradientBoostedTrees(BoostParams(**params), threshold=threshold)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    model.load_state(doc["state"])
    return model


def load_model(path: str | Path):
    return loads_model(Path(path).read_text(encoding="utf-8"))


def kernel_backend() -> str:
    return _kernels.BACKEND
