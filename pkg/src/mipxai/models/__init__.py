"""Trainable binary classifiers and the cross-validated tuner."""

from .api import (
    DEFAULT_GRIDS,
    FAMILIES,
    FittedModel,
    ModelSpec,
    accuracy,
    cross_validate_grid,
    stratified_folds,
    train,
    tune,
)
from ..dataset import split
from .boosting import BoostedStumps
from .linear import LinearSVC, LogisticRegression, logistic_loss_and_grad
from .tree import DecisionTree, RandomForest

__all__ = [
    "BoostedStumps",
    "DEFAULT_GRIDS",
    "DecisionTree",
    "FAMILIES",
    "FittedModel",
    "LinearSVC",
    "LogisticRegression",
    "ModelSpec",
    "RandomForest",
    "accuracy",
    "cross_validate_grid",
    "logistic_loss_and_grad",
    "split",
    "stratified_folds",
    "train",
    "tune",
]
