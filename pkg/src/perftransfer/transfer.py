"""Transfer of performance models from a source to a target environment.

Four strategies share one protocol: each may spend a budget of target
evaluations (distinct configurations queried through a metered oracle) and
returns a model that predicts the target environment.

* ``dm``   reuse the source model unchanged (cost 0);
* ``lms``  fit ``target ~ b0 + b1 * source_prediction`` on random paired samples;
* ``nlms`` fit a random forest on the same one-dimensional input;
* ``gs``   use stepwise regression on source data to find influential options,
  measure a sample that varies only those, and train a fresh model on the
  influential features of that sample.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import MeasurementDataset, Oracle
from .errors import DataError
from .learners import fit_forest, fit_learner, fit_ols, influential_terms, stepwise_fit
from .learners.linear import Influence, LinearTermModel
from .models import ForestShiftModel, LinearShiftModel, ProjectedModel, predict_many
from .space import ConfigurationSpace, budget, encode_many

logger = logging.getLogger(__name__)

DEFAULT_BUDGET_FRACTION = 0.0244
STRATEGIES = ("dm", "lms", "nlms", "gs")
_MAX_MISSES = 10_000


@dataclass
class TransferContext:
    source_model: object
    source_dataset: MeasurementDataset
    target_oracle: Oracle
    space: ConfigurationSpace
    metric: str = "inference_time"
    budget_fraction: float = DEFAULT_BUDGET_FRACTION
    learner: str = "rt"
    seed: int = 0
    learner_params: dict = field(default_factory=dict)
    fs_epsilon: float = 1e-3
    be_alpha: float = 0.05
    source_terms: LinearTermModel | None = None  # precomputed stepwise model of the source data

    def __post_init__(self):
        if not 0.0 < self.budget_fraction <= 1.0:
            raise ValueError(f"budget_fraction must be in (0, 1], got {self.budget_fraction}")
        if self.source_dataset.space != self.space or self.target_oracle.space != self.space:
            raise ValueError("source and target must share the configuration space")

    @property
    def budget(self) -> int:
        return budget(self.space, self.budget_fraction)


@dataclass(eq=False)
class TransferOutcome:
    strategy: str
    target_model: object
    cost: int
    sample: tuple = ()
    fallback: bool = False
    note: str = ""
    shift_coefficients: tuple | None = None  # (b0, b1) for lms
    influence: Influence | None = None
    blocks: tuple = ()  # gs: (pinned non-influential levels, configs) per block


def direct_model_transfer(ctx: TransferContext) -> TransferOutcome:
    return TransferOutcome("dm", ctx.source_model, 0)


def _paired_sample(ctx: TransferContext):
    n = ctx.budget
    if n < 2:
        raise DataError(f"model shift needs a budget of at least 2 evaluations, got {n}")
    pool = ctx.target_oracle.available(ctx.metric)
    n = min(n, len(pool))
    rng = np.random.default_rng(ctx.seed)
    picked = rng.choice(len(pool), size=n, replace=False)
    sample = [pool[int(i)] for i in picked]
    y = ctx.target_oracle.query_many(sample, ctx.metric)
    x = predict_many(ctx.source_model, sample, ctx.space)
    return sample, x, y


def linear_model_shift(ctx: TransferContext) -> TransferOutcome:
    sample, x, y = _paired_sample(ctx)
    if np.ptp(x) == 0.0:
        b0, b1 = float(np.mean(y)), 0.0
        note = "constant source predictions; fell back to the target sample mean"
        fallback = True
    else:
        fit = fit_ols(np.column_stack([np.ones_like(x), x]), y)
        b0, b1 = (float(c) for c in fit.coefficients)
        note, fallback = "", False
    model = LinearShiftModel(ctx.source_model, b0, b1)
    return TransferOutcome("lms", model, len(set(sample)), tuple(sample), fallback, note, (b0, b1))


def nonlinear_model_shift(ctx: TransferContext, **forest_params) -> TransferOutcome:
    sample, x, y = _paired_sample(ctx)
    if np.ptp(x) == 0.0:
        model = LinearShiftModel(ctx.source_model, float(np.mean(y)), 0.0)
        return TransferOutcome(
            "nlms", model, len(set(sample)), tuple(sample), True,
            "constant source predictions; fell back to the target sample mean",
        )
    forest = fit_forest(x[:, None], y, seed=ctx.seed, **forest_params)
    return TransferOutcome("nlms", ForestShiftModel(ctx.source_model, forest), len(set(sample)), tuple(sample))


def guided_sample(space: ConfigurationSpace, influential, n: int, seed: int, pool=None):
    """Configurations that vary only the influential options.

    The first block pins every other option at its median level and covers the
    cross-product of influential levels (uniformly subsampled if it exceeds
    ``n``). Remaining budget is spent on further blocks, each pinning the
    non-influential options at another seeded random setting and drawing
    influential combinations at random. ``pool``, if given, restricts the
    sample to configurations that can actually be evaluated.

    Returns ``(sample, blocks)``; ``blocks`` lists ``(pinned, configs)``.
    """
    infl = sorted(influential)
    if not infl:
        raise ValueError("guided sampling needs at least one influential option")
    other = [o for o in range(space.dim) if o not in infl]
    counts = space.level_counts
    rng = np.random.default_rng(seed)
    allowed = (lambda c: True) if pool is None else set(pool).__contains__
    combos = list(itertools.product(*(range(counts[o]) for o in infl)))

    def block_configs(pinned):
        out = []
        for combo in combos:
            c = [0] * space.dim
            for o, v in zip(infl, combo):
                c[o] = v
            for o, v in zip(other, pinned):
                c[o] = v
            c = tuple(c)
            if allowed(c):
                out.append(c)
        return out

    median = space.median_config()
    pinned = tuple(median[o] for o in other)
    first = block_configs(pinned)
    if len(first) >= n:
        picked = np.sort(rng.choice(len(first), size=n, replace=False))
        chosen = [first[int(i)] for i in picked]
        return chosen, ((pinned, tuple(chosen)),)

    sample, blocks = list(first), [(pinned, tuple(first))]
    seen = {pinned}
    n_settings = int(np.prod([counts[o] for o in other])) if other else 1
    misses = 0  # bounds the search on sparse pools
    while len(sample) < n and len(seen) < n_settings and misses < _MAX_MISSES:
        pinned = tuple(int(rng.integers(counts[o])) for o in other)
        if pinned in seen:
            misses += 1
            continue
        seen.add(pinned)
        block = block_configs(pinned)
        if not block:
            misses += 1
            continue
        take = min(n - len(sample), len(block))
        picked = np.sort(rng.choice(len(block), size=take, replace=False))
        chosen = [block[int(i)] for i in picked]
        sample.extend(chosen)
        blocks.append((pinned, tuple(chosen)))
    return sample, tuple(blocks)


def guided_sampling_transfer(ctx: TransferContext, fs_epsilon=None, be_alpha=None) -> TransferOutcome:
    fs_epsilon = ctx.fs_epsilon if fs_epsilon is None else fs_epsilon
    be_alpha = ctx.be_alpha if be_alpha is None else be_alpha
    terms = ctx.source_terms
    if terms is None:
        terms = stepwise_fit(ctx.source_dataset, ctx.metric, fs_epsilon=fs_epsilon, be_alpha=be_alpha)
    influence = influential_terms(terms)
    pool = ctx.target_oracle.available(ctx.metric)
    n = min(ctx.budget, len(pool))
    if influence:
        sample, blocks = guided_sample(ctx.space, influence.options, n, ctx.seed, pool)
        fallback, note = False, ""
    else:
        rng = np.random.default_rng(ctx.seed)
        sample = [pool[int(i)] for i in rng.choice(len(pool), size=n, replace=False)]
        blocks = ()
        fallback, note = True, "no influential options survived stepwise selection; sampled at random"
    logger.debug("gs: influential options %s, %d samples", sorted(influence.options), len(sample))
    y = ctx.target_oracle.query_many(sample, ctx.metric)
    X = encode_many(sample, ctx.space)
    if influence:
        # non-influential options carry no signal in the guided sample
        features = tuple(sorted(influence.options))
        base = fit_learner(ctx.learner, X[:, list(features)], y, seed=ctx.seed, **ctx.learner_params)
        model = ProjectedModel(base, features, ctx.space.dim)
    else:
        model = fit_learner(ctx.learner, X, y, seed=ctx.seed, **ctx.learner_params)
    return TransferOutcome("gs", model, len(set(sample)), tuple(sample), fallback, note, None, influence, blocks)


_RUNNERS = {
    "dm": direct_model_transfer,
    "lms": linear_model_shift,
    "nlms": nonlinear_model_shift,
    "gs": guided_sampling_transfer,
}


def run_strategy(name: str, ctx: TransferContext) -> TransferOutcome:
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGIES}") from None
    return runner(ctx)


def train_source_model(dataset: MeasurementDataset, metric: str, learner: str, seed: int = 0, **params):
    """Fit a performance model on the replicate-averaged source measurements."""
    _, X, y = dataset.arrays(metric)
    return fit_learner(learner, X, y, seed=seed, **params)
