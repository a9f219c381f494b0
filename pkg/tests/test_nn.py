import numpy as np
import pytest

from perftransfer.errors import DivergenceError, FitError
from perftransfer.evaluation import mape
from perftransfer.learners import fit_nn
from perftransfer.learners.nn import HIDDEN, init_params, loss_and_grad
from perftransfer.space import ConfigurationSpace, encode_space


def flat(ws, bs):
    return np.concatenate([a.ravel() for pair in zip(ws, bs) for a in pair])


def central_difference_gradient(ws, bs, X, t, h=1e-5):
    """Numerical gradient of the loss, one parameter at a time."""
    params = [a.copy() for pair in zip(ws, bs) for a in pair]
    grads = []
    for a in params:
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            orig = a[idx]
            a[idx] = orig + h
            up = loss_and_grad(params[0::2], params[1::2], X, t)[0]
            a[idx] = orig - h
            down = loss_and_grad(params[0::2], params[1::2], X, t)[0]
            a[idx] = orig
            g[idx] = (up - down) / (2 * h)
        grads.append(g.ravel())
    return np.concatenate(grads)


def max_relative_gradient_error(seed):
    rng = np.random.default_rng(seed)
    ws, bs = init_params((3, *HIDDEN, 1), rng)
    bs = [rng.normal(scale=0.1, size=b.shape) for b in bs]
    X, t = rng.uniform(size=(5, 3)), rng.normal(size=5)
    _, gw, gb = loss_and_grad(ws, bs, X, t)
    analytic = flat(gw, gb)
    numeric = central_difference_gradient(ws, bs, X, t)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def test_gradient_matches_finite_differences():
    assert max_relative_gradient_error(0) < 1e-4


def test_fits_linear_target_on_grid():
    X = encode_space(ConfigurationSpace.from_level_counts([4, 4, 4]))
    y = 5 + X @ np.array([1.0, 2.0, 3.0])
    model = fit_nn(X, y)
    assert mape(y, model.predict_encoded(X)) < 5.0


def test_same_seed_bit_identical():
    X = encode_space(ConfigurationSpace.from_level_counts([3, 3]))
    y = 1 + X[:, 0] ** 2 + X[:, 1]
    a = fit_nn(X, y, epochs=50, seed=3)
    b = fit_nn(X, y, epochs=50, seed=3)
    for wa, wb in zip(a.weights + a.biases, b.weights + b.biases):
        assert wa.tobytes() == wb.tobytes()
    c = fit_nn(X, y, epochs=50, seed=4)
    assert not np.array_equal(a.weights[0], c.weights[0])


def test_architecture_and_init_range():
    rng = np.random.default_rng(0)
    ws, _ = init_params((3, 16, 16, 1), rng)
    for w in ws:
        r = np.sqrt(6.0 / sum(w.shape))
        assert np.all(np.abs(w) <= r)
    model = fit_nn(np.random.default_rng(1).uniform(size=(10, 3)), np.arange(10.0), epochs=2)
    assert model.layer_sizes == (3, 16, 16, 1)


def test_divergence_detected():
    X = encode_space(ConfigurationSpace.from_level_counts([4, 4]))
    y = 1 + 10 * X[:, 0]
    with pytest.raises(DivergenceError, match="divergence"):
        fit_nn(X, y, step=1e3, epochs=50)


def test_needs_two_rows():
    with pytest.raises(FitError):
        fit_nn(np.zeros((1, 2)), np.ones(1))
