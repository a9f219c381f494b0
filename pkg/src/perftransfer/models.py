"""Uniform prediction and JSON serialization for every performance model kind."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SpaceError
from .learners import LinearTermModel, NeuralNetModel, RandomForestModel, RegressionTreeModel
from .space import ConfigurationSpace, encode_many

FORMAT_TAG = "perftransfer-model"
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class LinearShiftModel:
    """Affine map applied to a base model's prediction."""

    base: object
    intercept: float
    slope: float

    @property
    def dim(self) -> int:
        return self.base.dim

    def predict_encoded(self, X) -> np.ndarray:
        return self.intercept + self.slope * self.base.predict_encoded(X)


@dataclass(frozen=True, eq=False)
class ForestShiftModel:
    """Random forest over the single input "base model prediction"."""

    base: object
    forest: RandomForestModel

    @property
    def dim(self) -> int:
        return self.base.dim

    def predict_encoded(self, X) -> np.ndarray:
        return self.forest.predict_encoded(self.base.predict_encoded(X)[:, None])


@dataclass(frozen=True, eq=False)
class ProjectedModel:
    """Model fitted on a subset of the encoded features."""

    base: object
    features: tuple
    dim: int

    def predict_encoded(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"expected features of width {self.dim}, got shape {X.shape}")
        return self.base.predict_encoded(X[:, list(self.features)])


_KINDS = {
    LinearTermModel: "linear",
    RegressionTreeModel: "tree",
    RandomForestModel: "forest",
    NeuralNetModel: "nn",
    LinearShiftModel: "linear_shift",
    ForestShiftModel: "forest_shift",
    ProjectedModel: "projected",
}


def model_kind(model) -> str:
    try:
        return _KINDS[type(model)]
    except KeyError:
        raise TypeError(f"not a performance model: {type(model).__name__}") from None


def predict_many(model, configs, space: ConfigurationSpace) -> np.ndarray:
    configs = list(configs)
    if model.dim != space.dim:
        raise SpaceError(f"dimension mismatch: model expects {model.dim} options, space has {space.dim}")
    for c in configs:
        if len(c) != space.dim:
            raise SpaceError(f"dimension mismatch: configuration {tuple(c)} for a {space.dim}-option space")
    if not configs:
        return np.empty(0)
    out = model.predict_encoded(encode_many(configs, space))
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("model produced a non-finite prediction")
    return out


def predict(model, config, space: ConfigurationSpace) -> float:
    return float(predict_many(model, [space.validate(config)], space)[0])


def _body(model) -> dict:
    kind = model_kind(model)
    if kind == "linear_shift":
        return {"base": model_to_dict(model.base), "intercept": float(model.intercept), "slope": float(model.slope)}
    if kind == "forest_shift":
        return {"base": model_to_dict(model.base), "forest": model.forest.to_dict()}
    if kind == "projected":
        return {"base": model_to_dict(model.base), "features": list(model.features)}
    return model.to_dict()


def model_to_dict(model) -> dict:
    return {"format": FORMAT_TAG, "version": FORMAT_VERSION, "kind": model_kind(model), "dim": model.dim, **_body(model)}


def model_from_dict(d: dict):
    if d.get("format") != FORMAT_TAG:
        raise ValueError(f"not a {FORMAT_TAG} file")
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {d.get('version')!r}")
    kind, dim = d["kind"], int(d["dim"])
    if kind == "linear":
        return LinearTermModel.from_dict(d, dim)
    if kind == "tree":
        return RegressionTreeModel.from_dict(d, dim)
    if kind == "forest":
        return RandomForestModel.from_dict(d, dim)
    if kind == "nn":
        return NeuralNetModel.from_dict(d, dim)
    if kind == "linear_shift":
        return LinearShiftModel(model_from_dict(d["base"]), float(d["intercept"]), float(d["slope"]))
    if kind == "forest_shift":
        return ForestShiftModel(model_from_dict(d["base"]), RandomForestModel.from_dict(d["forest"], 1))
    if kind == "projected":
        return ProjectedModel(model_from_dict(d["base"]), tuple(int(f) for f in d["features"]), dim)
    raise ValueError(f"unknown model kind {kind!r}")


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model), separators=(",", ":")) + "\n"


def save_model(model, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
