from .metrics import ConfusionMatrix, EvalReport, confusion_matrix, evaluate, report_from_confusion
from .models import (
    BoostParams,
    ForestParams,
    GradientBoostedTrees,
    LinearModel,
    RandomForest,
    load_model,
    save_model,
)
from .split import SplitError, SplitSpec, make_split


def train_linear(train, threshold: float = 0.5, ridge: float = 1e-6) -> LinearModel:
    return LinearModel(ridge=ridge, threshold=threshold).fit(train.X, train.y)


def train_forest(train, params: ForestParams = ForestParams(), threshold: float = 0.5, **kw) -> RandomForest:
    return RandomForest(params, threshold=threshold, **kw).fit(train.X, train.y)


def train_gbt(train, params: BoostParams = BoostParams(), threshold: float = 0.5, **kw) -> GradientBoostedTrees:
    return GradientBoostedTrees(params, threshold=threshold, **kw).fit(train.X, train.y)


__all__ = [
    "BoostParams",
    "ConfusionMatrix",
    "EvalReport",
    "ForestParams",
    "GradientBoostedTrees",
    "LinearModel",
    "RandomForest",
    "SplitError",
    "SplitSpec",
    "confusion_matrix",
    "evaluate",
    "load_model",
    "make_split",
    "report_from_confusion",
    "save_model",
    "train_forest",
    "train_gbt",
    "train_linear",
]
