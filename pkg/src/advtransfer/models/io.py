"""Self-describing model files: family tag, dims, parameters at 9 significant digits."""

from __future__ import annotations

import json

import numpy as np

from .. import textio
from ..errors import DataFormatError
from .ensemble import Ensemble
from .knn import KnnModel
from .logreg import SoftmaxRegression
from .net import NeuralNet
from .svm import LinearSvm
from .tree import DecisionTree, TreeNode

FORMAT_TAG = "advtransfer-model"
FLOAT_FMT = "%.9g"


def _arr(a: np.ndarray):
    return a.tolist()


def _tree_dict(node: TreeNode):
    if node.is_leaf:
        return {"class": int(node.klass)}
    return {
        "feature": int(node.feature),
        "threshold": float(node.threshold),
        "left": _tree_dict(node.left),
        "right": _tree_dict(node.right),
    }


def _tree_from_dict(d) -> TreeNode:
    if "class" in d:
        return TreeNode(klass=int(d["class"]))
    return TreeNode(
        feature=int(d["feature"]),
        threshold=float(d["threshold"]),
        left=_tree_from_dict(d["left"]),
        right=_tree_from_dict(d["right"]),
    )


def model_to_dict(model) -> dict:
    base = {
        "format": FORMAT_TAG,
        "version": 1,
        "family": model.family,
        "dim": model.dim,
        "num_classes": model.num_classes,
    }
    if isinstance(model, SoftmaxRegression) or isinstance(model, LinearSvm):
        base["params"] = {"weights": _arr(model.weights), "biases": _arr(model.biases)}
    elif isinstance(model, NeuralNet):
        base["params"] = {
            "weights": [_arr(W) for W in model.weights],
            "biases": [_arr(b) for b in model.biases],
        }
    elif isinstance(model, DecisionTree):
        base["params"] = {"root": _tree_dict(model.root)}
    elif isinstance(model, KnnModel):
        base["params"] = {"k": model.k, "X": _arr(model.X_train), "y": _arr(model.y_train)}
    elif isinstance(model, Ensemble):
        base["params"] = {"experts": [model_to_dict(m) for m in model.experts]}
    else:
        raise DataFormatError(f"cannot serialize model family {model.family!r}")
    return base


def model_from_dict(d):
    if d.get("format") != FORMAT_TAG:
        raise DataFormatError("not a model file (missing format tag)")
    family = d.get("family")
    params = d.get("params", {})
    if family == "logreg":
        return SoftmaxRegression(np.array(params["weights"]), np.array(params["biases"]))
    if family == "svm":
        return LinearSvm(np.array(params["weights"]), np.array(params["biases"]))
    if family == "net":
        return NeuralNet(
            [np.array(W) for W in params["weights"]],
            [np.array(b) for b in params["biases"]],
        )
    if family == "tree":
        return DecisionTree(_tree_from_dict(params["root"]), d["dim"], d["num_classes"])
    if family == "knn":
        return KnnModel(
            np.array(params["X"]), np.array(params["y"]), d["num_classes"], k=params["k"]
        )
    if family == "ensemble":
        return Ensemble([model_from_dict(sub) for sub in params["experts"]])
    raise DataFormatError(f"unknown model family {family!r}")


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        fh.write(textio.dumps(model_to_dict(model), float_fmt=FLOAT_FMT))


def load_model(path):
    with open(path) as fh:
        try:
            return model_from_dict(json.load(fh))
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataFormatError(f"{path}: {exc}") from None
