import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from perftransfer.dataset import EnvironmentId, MeasurementDataset, MeasurementRecord, Oracle, split
from perftransfer.errors import DataError
from perftransfer.evaluation import evaluate_model
from perftransfer.learners import LinearTermModel, fit_tree
from perftransfer.learners.tree import RegressionTreeModel
from perftransfer.models import predict_many
from perftransfer.space import ConfigurationSpace, encode_space, enumerate_space
from perftransfer.terms import Term
from perftransfer.transfer import (
    STRATEGIES,
    TransferContext,
    guided_sample,
    run_strategy,
    train_source_model,
)

SRC = EnvironmentId("h1", "m1", "w1")
TGT = EnvironmentId("h2", "m1", "w1")


def dataset(env, space, fn):
    configs = list(enumerate_space(space))
    values = fn(encode_space(space))
    return MeasurementDataset(env, space, tuple(MeasurementRecord(c, "inference_time", float(v)) for c, v in zip(configs, values)))


def surface(X):
    return 10 + 8 * X[:, 0] + 6 * X[:, 0] * X[:, 1] + 4 * X[:, 2] + 3 * X[:, 1]


@pytest.fixture(scope="module")
def space4096():
    return ConfigurationSpace.from_level_counts([4, 4, 2, 8, 8, 2])


@pytest.fixture(scope="module")
def exact_source_model():
    terms = (Term.intercept(), Term.main(0), Term.interaction(0, 1), Term.main(2), Term.main(1))
    return LinearTermModel(terms, (10.0, 8.0, 6.0, 4.0, 3.0), 1.0, 6)


def context(space, source_model, source, target, **kw):
    return TransferContext(source_model, source, Oracle(target), space, **kw)


def test_dm_is_identity_and_free(space_444):
    source = dataset(SRC, space_444, lambda X: 1 + X.sum(axis=1))
    model = fit_tree(*source.arrays("inference_time")[1:])
    ctx = context(space_444, model, source, source)
    outcome = run_strategy("dm", ctx)
    assert outcome.target_model is model
    assert outcome.cost == 0 and ctx.target_oracle.tally == 0
    configs = list(enumerate_space(space_444))
    assert predict_many(outcome.target_model, configs, space_444).tobytes() == predict_many(model, configs, space_444).tobytes()


def test_lms_recovers_exact_affine_shift(space4096, exact_source_model):
    source = dataset(SRC, space4096, surface)
    target = dataset(TGT, space4096, lambda X: 5 + 2 * surface(X))
    ctx = context(space4096, exact_source_model, source, target)
    outcome = run_strategy("lms", ctx)
    b0, b1 = outcome.shift_coefficients
    assert b0 == pytest.approx(5.0, abs=1e-6)
    assert b1 == pytest.approx(2.0, abs=1e-6)
    assert outcome.cost == ctx.budget == 100
    assert evaluate_model(outcome.target_model, target, "inference_time").err_percent < 0.1


def test_lms_identity_shift(space4096, exact_source_model):
    source = dataset(SRC, space4096, surface)
    outcome = run_strategy("lms", context(space4096, exact_source_model, source, source))
    assert outcome.shift_coefficients == pytest.approx((0.0, 1.0), abs=1e-9)


def test_nlms_beats_lms_on_power_shift(space4096, exact_source_model):
    source = dataset(SRC, space4096, surface)
    target = dataset(TGT, space4096, lambda X: surface(X) ** 1.7)
    errs = {}
    for strategy in ("lms", "nlms"):
        outcome = run_strategy(strategy, context(space4096, exact_source_model, source, target))
        errs[strategy] = evaluate_model(outcome.target_model, target, "inference_time").err_percent
    assert errs["nlms"] < errs["lms"]


def test_constant_source_falls_back(space_444):
    source = dataset(SRC, space_444, lambda X: 1 + X[:, 0])
    target = dataset(TGT, space_444, lambda X: 2 + X[:, 0])
    leaf = RegressionTreeModel(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([3.0]), np.array([64]), 3)
    for strategy in ("lms", "nlms"):
        outcome = run_strategy(strategy, context(space_444, leaf, source, target, budget_fraction=0.25))
        assert outcome.fallback and "fell back" in outcome.note
        assert outcome.cost == 16


def test_model_shift_needs_budget_of_two(space_444):
    source = dataset(SRC, space_444, lambda X: 1 + X[:, 0])
    ctx = context(space_444, fit_tree(*source.arrays("inference_time")[1:]), source, source, budget_fraction=0.01)
    with pytest.raises(DataError, match="at least 2"):
        run_strategy("lms", ctx)


def test_guided_sample_structure():
    space = ConfigurationSpace.from_level_counts([3, 4, 3])
    sample, blocks = guided_sample(space, {1}, 8, seed=0)
    assert len(sample) == len(set(sample)) == 8
    pinned0, first = blocks[0]
    assert pinned0 == (1, 1)
    assert sorted(first) == [(1, v, 1) for v in range(4)]
    for pinned, configs in blocks:
        for c in configs:
            assert (c[0], c[2]) == pinned
    assert len({p for p, _ in blocks}) == len(blocks)


def test_guided_sample_subsamples_large_cross_product():
    space = ConfigurationSpace.from_level_counts([5, 5, 3])
    sample, blocks = guided_sample(space, {0, 1}, 10, seed=3)
    assert len(blocks) == 1 and len(sample) == 10
    assert all(c[2] == 1 for c in sample)


def test_guided_sample_respects_pool():
    space = ConfigurationSpace.from_level_counts([3, 4, 3])
    pool = [c for c in enumerate_space(space) if c != (1, 2, 1)]
    sample, _ = guided_sample(space, {1}, 8, seed=0, pool=pool)
    assert (1, 2, 1) not in sample and set(sample) <= set(pool)


def test_gs_finds_influential_options(space4096):
    source = dataset(SRC, space4096, surface)
    target = dataset(TGT, space4096, lambda X: surface(X) ** 1.7)
    outcome = run_strategy("gs", context(space4096, None, source, target, learner="rt"))
    assert outcome.influence.options == {0, 1, 2}
    assert outcome.influence.pairs == {(0, 1)}
    assert not outcome.fallback
    assert evaluate_model(outcome.target_model, target, "inference_time").err_percent < 1.0


def test_gs_without_influential_options_samples_randomly(space_444):
    source = dataset(SRC, space_444, lambda X: np.full(len(X), 4.0))
    target = dataset(TGT, space_444, lambda X: 1 + X[:, 0])
    outcome = run_strategy("gs", context(space_444, None, source, target, budget_fraction=0.25))
    assert outcome.fallback and "at random" in outcome.note
    assert outcome.cost == 16


def test_unknown_strategy(space_444):
    source = dataset(SRC, space_444, lambda X: 1 + X[:, 0])
    with pytest.raises(ValueError, match="unknown strategy"):
        run_strategy("xx", context(space_444, None, source, source))


@settings(max_examples=20, deadline=None)
@given(
    st.sampled_from(STRATEGIES),
    st.integers(0, 1000),
    st.floats(0.02, 0.3),
)
def test_cost_never_exceeds_budget_or_touches_test_set(strategy, seed, fraction):
    space = ConfigurationSpace.from_level_counts([4, 3, 5])
    source = dataset(SRC, space, lambda X: 2 + 3 * X[:, 0] + X[:, 1] * X[:, 2])
    target = dataset(TGT, space, lambda X: 1 + 6 * X[:, 0] + X[:, 1] * X[:, 2])
    pool, test = split(target, 10, seed)
    model = train_source_model(source, "inference_time", "rt")
    ctx = TransferContext(model, source, Oracle(pool), space, budget_fraction=fraction, seed=seed)
    if ctx.budget < 2 and strategy in ("lms", "nlms"):
        return
    outcome = run_strategy(strategy, ctx)
    assert outcome.cost == ctx.target_oracle.tally <= ctx.budget
    assert not ctx.target_oracle.evaluated & set(test.configs())
    if strategy == "dm":
        assert outcome.cost == 0
