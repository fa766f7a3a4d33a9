"""The five classifier families, the voting ensemble, and a train() dispatcher."""

from __future__ import annotations

from ..errors import TrainingError, UnsupportedFamilyError
from .base import Model, accuracy, one_hot, softmax
from .ensemble import Ensemble
from .io import load_model, model_from_dict, model_to_dict, save_model
from .knn import KnnHyperparams, KnnModel, train_knn
from .logreg import LogregHyperparams, SoftmaxRegression, train_softmax_regression
from .net import NetHyperparams, NeuralNet, train_neural_net
from .svm import LinearSvm, SvmHyperparams, train_linear_svm
from .tree import DecisionTree, TreeHyperparams, TreeNode, train_decision_tree

FAMILIES = ("net", "logreg", "svm", "tree", "knn")

_TRAINERS = {
    "net": train_neural_net,
    "logreg": train_softmax_regression,
    "svm": train_linear_svm,
    "tree": train_decision_tree,
    "knn": train_knn,
}

_HYPERPARAMS = {
    "net": NetHyperparams,
    "logreg": LogregHyperparams,
    "svm": SvmHyperparams,
    "tree": TreeHyperparams,
    "knn": KnnHyperparams,
}


def default_hyperparams(family: str):
    if family not in _HYPERPARAMS:
        raise UnsupportedFamilyError(f"unknown family {family!r}")
    return _HYPERPARAMS[family]()


def train(family: str, dataset, hyperparams=None, seed=0) -> Model:
    """Train a model of the given family; deterministic for a fixed seed."""
    if family not in _TRAINERS:
        raise UnsupportedFamilyError(f"unknown family {family!r}")
    if len(dataset) == 0:
        raise TrainingError("cannot train on an empty dataset")
    return _TRAINERS[family](dataset, hyperparams, seed=seed)


# Functional aliases over the model methods, for callers that prefer them.
def predict(model: Model, x):
    return model.predict(x)


def class_scores(model: Model, x):
    return model.class_scores(x)


def input_gradient(model: Model, x, y):
    return model.input_gradient(x, y)


def jacobian(model: Model, x):
    return model.jacobian(x)
