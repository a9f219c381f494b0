import json

import numpy as np
import pytest

from perftransfer.errors import SpaceError
from perftransfer.learners import LinearTermModel, fit_forest, fit_nn, fit_tree
from perftransfer.learners.tree import RegressionTreeModel
from perftransfer.models import (
    ForestShiftModel,
    LinearShiftModel,
    ProjectedModel,
    dumps_model,
    load_model,
    model_from_dict,
    predict,
    predict_many,
    save_model,
)
from perftransfer.space import ConfigurationSpace, encode_space, enumerate_space
from perftransfer.terms import Term


@pytest.fixture
def space():
    return ConfigurationSpace.from_level_counts([3, 5])


def test_linear_prediction_at_midpoint():
    space = ConfigurationSpace.from_level_counts([3])
    model = LinearTermModel((Term.intercept(), Term.main(0)), (1.0, 2.0), 1.0, 1)
    assert predict(model, (1,), space) == 2.0


def test_single_leaf_prediction(space):
    leaf = RegressionTreeModel(
        np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([11.0]), np.array([4]), 2
    )
    assert predict(leaf, (2, 4), space) == 11.0


def test_dimension_mismatch(space):
    model = LinearTermModel((Term.intercept(),), (1.0,), 1.0, 3)
    with pytest.raises(SpaceError, match="dimension mismatch"):
        predict_many(model, [(0, 0)], space)


def test_off_domain_configuration(space):
    model = LinearTermModel((Term.intercept(),), (1.0,), 1.0, 2)
    with pytest.raises(SpaceError, match="off-domain"):
        predict(model, (3, 0), space)


def all_kinds(space):
    X = encode_space(space)
    y = 2 + X[:, 0] * 3 + X[:, 1] ** 2
    tree = fit_tree(X, y)
    forest = fit_forest(X, y, n_trees=4, seed=1)
    nn = fit_nn(X, y, epochs=5, seed=1)
    linear = LinearTermModel((Term.intercept(), Term.main(0), Term.interaction(0, 1)), (2.0, 3.0, 0.1 + 0.2), 0.9, 2)
    return {
        "linear": linear,
        "tree": tree,
        "forest": forest,
        "nn": nn,
        "linear_shift": LinearShiftModel(tree, 0.3, 1.7),
        "forest_shift": ForestShiftModel(nn, fit_forest(y[:, None], y * 1.1, n_trees=3, seed=2)),
        "projected": ProjectedModel(fit_tree(X[:, [1]], y), (1,), 2),
    }


@pytest.mark.parametrize("kind", ["linear", "tree", "forest", "nn", "linear_shift", "forest_shift", "projected"])
def test_save_load_bit_exact(space, tmp_path, kind):
    model = all_kinds(space)[kind]
    path = tmp_path / "m.json"
    save_model(model, path)
    loaded = load_model(path)
    configs = list(enumerate_space(space))
    assert predict_many(model, configs, space).tobytes() == predict_many(loaded, configs, space).tobytes()
    assert dumps_model(loaded) == path.read_text()
    assert json.loads(path.read_text())["kind"] == kind


def test_rejects_foreign_files():
    with pytest.raises(ValueError):
        model_from_dict({"kind": "tree"})
    with pytest.raises(ValueError):
        model_from_dict({"format": "perftransfer-model", "version": 99, "kind": "tree", "dim": 1})


def test_unknown_model_type():
    with pytest.raises(TypeError):
        dumps_model(object())
