"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line that is printed in the pytest
terminal summary (section "acceptance criteria").
"""
import contextlib
import csv
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS, SCENARIOS, write_bench
from perftransfer.cli import main
from perftransfer.dataset import EnvironmentId, MeasurementDataset, MeasurementRecord, Oracle
from perftransfer.evaluation import ExperimentSpec, evaluate_model, mape, run_matrix
from perftransfer.learners import (
    LinearTermModel,
    fit_forest,
    fit_tree,
    prune_small_coefficients,
    stepwise_fit,
)
from perftransfer.models import predict_many
from perftransfer.space import ConfigurationSpace, budget, encode_space, enumerate_space, load_space
from perftransfer.synthetic import GroundTruthSurface, Scenario, ShiftSpec, generate_pair, load_scenario
from perftransfer.terms import Term, candidate_terms
from perftransfer.transfer import TransferContext, run_strategy, train_source_model

from test_nn import max_relative_gradient_error


@contextlib.contextmanager
def criterion(number, title):
    details = []
    start = time.perf_counter()
    try:
        yield details
    except BaseException as exc:
        ACCEPTANCE_RESULTS[number] = f"FAIL  {number:>2}. {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        raise
    note = "; ".join(details)
    ACCEPTANCE_RESULTS[number] = f"PASS  {number:>2}. {title} ({note}{'; ' if note else ''}{time.perf_counter() - start:.1f}s)"


def full_factorial(space, fn, env=EnvironmentId("src", "synthetic", "w0"), metric="inference_time"):
    configs = list(enumerate_space(space))
    values = fn(encode_space(space))
    return MeasurementDataset(env, space, tuple(MeasurementRecord(c, metric, float(v)) for c, v in zip(configs, values)))


def test_01_stepwise_recovery():
    with criterion(1, "stepwise recovers 3-term sparse surfaces on 4x4x4 exactly") as info:
        start = time.perf_counter()
        space = ConfigurationSpace.from_level_counts([4, 4, 4])
        pool = candidate_terms(3)[1:]
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(10):
            chosen = [pool[i] for i in rng.choice(len(pool), 3, replace=False)]
            truth = {Term.intercept(): 10.0, **{t: float(c) for t, c in zip(chosen, rng.uniform(1, 5, 3))}}
            surface = GroundTruthSurface(tuple(truth.items()))
            data = full_factorial(space, surface.response)
            model = prune_small_coefficients(stepwise_fit(data, "inference_time"))
            got = dict(zip(model.terms, model.coefficients))
            assert set(got) == set(truth), (sorted(truth), sorted(got))
            worst = max(worst, max(abs(got[t] - c) for t, c in truth.items()))
        elapsed = time.perf_counter() - start
        assert worst < 1e-6, worst
        assert elapsed < 10.0, elapsed
        info.append(f"10/10 draws, max coefficient error {worst:.1e}")


def test_02_prune_boundary():
    with criterion(2, "prune removes |c| = 1e-13 and keeps |c| = 1e-12"):
        model = LinearTermModel((Term.main(0), Term.main(1)), (1e-13, 1e-12), 1.0, 2)
        assert prune_small_coefficients(model).terms == (Term.main(1),)


def test_03_mape_oracle():
    with criterion(3, "MAPE matches hand values to 1e-12; scale invariance over 1000 vectors") as info:
        assert abs(mape([5.0, 6.0], [5.0, 6.0]) - 0.0) <= 1e-12
        assert abs(mape([100.0, 200.0], [110.0, 180.0]) - 10.0) <= 1e-12
        assert abs(mape([50.0], [75.0]) - 50.0) <= 1e-12
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 50))
            t = rng.uniform(1e-3, 1e4, n)
            p = t * rng.uniform(-1, 3, n)
            c = float(np.exp(rng.uniform(-7, 7)))
            base = mape(t, p)
            worst = max(worst, abs(mape(c * t, c * p) - base) / max(base, 1.0))
        assert worst < 1e-12, worst
        info.append(f"max relative deviation {worst:.1e}")


def test_04_budget_accounting(tmp_path):
    with criterion(4, "budget 1125 on 46,080 configs; tallies within budget, DM free") as info:
        big = load_space(SCENARIOS / "tx1_like.json")
        assert big.cardinality == 46_080
        assert budget(big, 0.0244) == 1125

        base = load_scenario(SCENARIOS / "power_shift.json")
        scenario = Scenario(big, base.surface, base.shift, base.seed, base.metric, base.source_env, base.target_env)
        source, target, _ = scenario.generate()
        runs = run_matrix(ExperimentSpec(source, [target], learners=("rt",)))
        tallies = {r.strategy: r.tally for r in runs}
        assert tallies["dm"] == 0
        assert all(0 < tallies[s] <= 1125 for s in ("lms", "nlms", "gs")), tallies
        info.append("46,080-space tallies " + ", ".join(f"{s}={n}" for s, n in tallies.items()))

        small_start = time.perf_counter()
        spec = write_bench(tmp_path / "small", SCENARIOS / "power_shift.json")
        assert main(["bench", str(spec), "--out", str(tmp_path / "report")]) == 0
        with open(tmp_path / "report" / "report.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        for row in rows:
            cost = int(row["cost"])
            assert cost == 0 if row["strategy"] == "dm" else 0 < cost <= 100
        small_elapsed = time.perf_counter() - small_start
        assert small_elapsed < 300
        info.append(f"4,096-space bench {small_elapsed:.1f}s, costs <= 100")


def test_05_dm_identity(space_444):
    with criterion(5, "DM predictions equal source predictions on all 64 configs of 4x4x4"):
        source = full_factorial(space_444, lambda X: 1 + X[:, 0] + 2 * X[:, 1] * X[:, 2])
        target = full_factorial(space_444, lambda X: 3 + X[:, 0], EnvironmentId("tgt", "synthetic", "w0"))
        configs = list(enumerate_space(space_444))
        for learner in ("rt", "nn"):
            params = {"epochs": 20} if learner == "nn" else {}
            model = train_source_model(source, "inference_time", learner, **params)
            ctx = TransferContext(model, source, Oracle(target), space_444, learner=learner)
            outcome = run_strategy("dm", ctx)
            assert outcome.cost == 0 and ctx.target_oracle.tally == 0
            a = predict_many(outcome.target_model, configs, space_444)
            b = predict_many(model, configs, space_444)
            assert a.tobytes() == b.tobytes()


def test_06_lms_exactness():
    with criterion(6, "LMS recovers (5, 2) to 1e-6 with exhaustive Err < 0.1%") as info:
        space = load_space(SCENARIOS / "space_4096.json")
        terms = (Term.intercept(), Term.main(0), Term.interaction(0, 1), Term.main(2))
        coefs = (10.0, 8.0, 6.0, 4.0)
        exact = LinearTermModel(terms, coefs, 1.0, space.dim)
        surface = GroundTruthSurface(tuple(zip(terms, coefs)))
        source, target, _ = generate_pair(space, surface, ShiftSpec.linear(2.0, 5.0))
        outcome = run_strategy("lms", TransferContext(exact, source, Oracle(target), space))
        b0, b1 = outcome.shift_coefficients
        assert abs(b0 - 5.0) < 1e-6 and abs(b1 - 2.0) < 1e-6, (b0, b1)
        err = evaluate_model(outcome.target_model, target, "inference_time").err_percent
        assert err < 0.1
        info.append(f"b0={b0:.9f}, b1={b1:.9f}, Err={err:.1e}%")


@pytest.mark.slow
def test_07_strategy_direction():
    with criterion(7, "median Err GS < NLMS < LMS and GS < DM for RT and NN, 10 seeds") as info:
        start = time.perf_counter()
        source, target, _ = load_scenario(SCENARIOS / "power_shift.json").generate()
        assert source.space.cardinality == 4096
        spec = ExperimentSpec(source, [target], seeds=tuple(range(10)))
        errs = {}
        for r in run_matrix(spec):
            errs.setdefault((r.learner, r.strategy), []).append(r.evaluation.err_percent)
        medians = {k: float(np.median(v)) for k, v in errs.items()}
        for learner in ("rt", "nn"):
            m = {s: medians[learner, s] for s in ("gs", "nlms", "lms", "dm")}
            info.append(learner + " " + " ".join(f"{s}={v:.3g}" for s, v in m.items()))
            assert m["gs"] < m["nlms"] < m["lms"], m
            assert m["gs"] < m["dm"], m
        elapsed = time.perf_counter() - start
        assert elapsed < 900, elapsed


def test_08_learner_sanity():
    with criterion(8, "RT exact on piecewise-constant truth; forest-of-one = CART; NN gradient check") as info:
        X = encode_space(ConfigurationSpace.from_level_counts([4, 4, 3]))
        y = np.where(X[:, 0] < 0.5, 2.0, 7.0) + np.where(X[:, 2] > 0.75, 3.0, 0.0)
        assert mape(y, fit_tree(X, y).predict_encoded(X)) == 0.0
        rng = np.random.default_rng(8)
        for _ in range(100):
            d = int(rng.integers(1, 6))
            Xr = rng.integers(0, 5, size=(int(rng.integers(5, 80)), d)) / 4.0
            yr = rng.uniform(1, 100, len(Xr))
            forest = fit_forest(Xr, yr, n_trees=1, features_per_split=d, bootstrap=False, seed=int(rng.integers(1 << 30)))
            grid = rng.uniform(size=(50, d))
            assert forest.predict_encoded(grid).tobytes() == fit_tree(Xr, yr).predict_encoded(grid).tobytes()
        grad_err = max(max_relative_gradient_error(s) for s in range(3))
        assert grad_err < 1e-4
        info.append(f"100/100 forest-of-one matches, gradient rel. error {grad_err:.1e}")


def test_09_determinism(tmp_path):
    with criterion(9, "repeated bench runs give byte-identical report files") as info:
        spec = write_bench(
            tmp_path, SCENARIOS / "power_shift.json", seeds=[0, 1], learner_params={"nn": {"epochs": 40}}
        )
        outputs = []
        for run, workers in enumerate(("1", "4")):
            out = tmp_path / f"run{run}"
            assert main(["bench", str(spec), "--out", str(out), "--workers", workers]) == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert outputs[0] == outputs[1]
        info.append(f"{len(outputs[0])} files compared")


def test_10_dynamic_range():
    with criterion(10, "factor-20 energy scenario spans max/min >= 20 over the full factorial") as info:
        source, target, _ = load_scenario(SCENARIOS / "factor20_energy.json").generate()
        for data in (source, target):
            values = np.array([r.value for r in data.records])
            assert len(data.configs("energy")) == data.space.cardinality
            assert values.max() / values.min() >= 20.0
        ratio = max(r.value for r in source.records) / min(r.value for r in source.records)
        info.append(f"source ratio {ratio:.1f}")
