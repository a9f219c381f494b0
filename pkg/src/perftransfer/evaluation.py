"""Prediction error, the strategy x learner x target experiment matrix, and reports."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import MeasurementDataset, Oracle, split
from .errors import DataError
from .learners import stepwise_fit
from .models import predict_many
from .space import budget
from .transfer import DEFAULT_BUDGET_FRACTION, STRATEGIES, TransferContext, run_strategy, train_source_model

logger = logging.getLogger(__name__)

TRUTH_FLOOR = 1e-9
REPORT_COLUMNS = (
    "source_env", "target_env", "strategy", "learner", "metric",
    "err_percent", "err_dispersion", "cost", "seeds",
)


def percentage_errors(truth, pred) -> np.ndarray:
    truth = np.asarray(truth, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise ValueError(f"length mismatch: {truth.shape} truth values vs {pred.shape} predictions")
    if truth.size == 0:
        raise ValueError("need at least one value")
    if np.any(np.abs(truth) < TRUTH_FLOOR):
        raise ValueError(f"truth value below {TRUTH_FLOOR} in absolute value; percentage error undefined")
    return 100.0 * np.abs(truth - pred) / np.abs(truth)


def mape(truth, pred) -> float:
    """Mean absolute percentage error, in percent."""
    return float(np.mean(percentage_errors(truth, pred)))


@dataclass(frozen=True)
class Evaluation:
    err_percent: float
    err_dispersion: float
    per_point: tuple


def evaluate_model(model, test: MeasurementDataset, metric: str) -> Evaluation:
    """MAPE over the test configurations; dispersion is the sample sd of per-point errors."""
    means = test.mean_values(metric)
    if not means:
        raise DataError("empty test set")
    configs = list(means)
    per_point = percentage_errors([means[c] for c in configs], predict_many(model, configs, test.space))
    disp = float(np.std(per_point, ddof=1)) if len(per_point) > 1 else 0.0
    return Evaluation(float(np.mean(per_point)), disp, tuple(float(e) for e in per_point))


@dataclass(frozen=True)
class ErrReport:
    source_env: str
    target_env: str
    strategy: str
    learner: str
    metric: str
    err_percent: float
    err_dispersion: float
    cost: int
    seeds: tuple


@dataclass(frozen=True)
class RunResult:
    """One (target, strategy, learner, seed) cell before aggregation over seeds."""

    target_index: int
    strategy: str
    learner: str
    seed: int
    evaluation: Evaluation
    cost: int
    tally: int
    fallback: bool = False


@dataclass
class ExperimentSpec:
    source: MeasurementDataset
    targets: list
    strategies: tuple = STRATEGIES
    learners: tuple = ("rt", "nn")
    metric: str = "inference_time"
    budget_fraction: float = DEFAULT_BUDGET_FRACTION
    fs_epsilon: float = 1e-3
    be_alpha: float = 0.05
    seeds: tuple = (0,)
    test_count: int = 10
    learner_params: dict = field(default_factory=dict)
    workers: int = 1

    def validate(self) -> None:
        if not self.targets:
            raise DataError("experiment needs at least one target dataset")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown:
            raise ValueError(f"unknown strategies {sorted(unknown)}")
        unknown = set(self.learners) - {"rt", "nn"}
        if unknown:
            raise ValueError(f"unknown learners {sorted(unknown)}")
        if not self.seeds:
            raise ValueError("experiment needs at least one seed")
        for t in self.targets:
            if t.space != self.source.space:
                raise DataError(f"target {t.env} is defined over a different configuration space")
            n = len(t.configs(self.metric))
            if self.test_count >= n:
                raise DataError(
                    f"target {t.env}: test_count {self.test_count} >= {n} measured configurations"
                )
            need = min(budget(t.space, self.budget_fraction), 2)
            if n - self.test_count < need:
                raise DataError(f"target {t.env}: not enough configurations left for the budget")


def run_matrix(spec: ExperimentSpec) -> list:
    """Run every (target, seed, strategy, learner) cell; ordered by target, strategy, learner, seed."""
    spec.validate()
    metric = spec.metric
    params = spec.learner_params
    needs_source = any(s != "gs" for s in spec.strategies)
    source_models = {}
    if needs_source:
        for learner in spec.learners:
            for seed in spec.seeds:
                if learner == "rt" and seed != spec.seeds[0]:
                    source_models[learner, seed] = source_models[learner, spec.seeds[0]]
                    continue
                source_models[learner, seed] = train_source_model(
                    spec.source, metric, learner, seed, **params.get(learner, {})
                )
    source_terms = None
    if "gs" in spec.strategies:
        source_terms = stepwise_fit(spec.source, metric, fs_epsilon=spec.fs_epsilon, be_alpha=spec.be_alpha)

    splits = {
        (ti, seed): split(target, spec.test_count, seed)
        for ti, target in enumerate(spec.targets)
        for seed in spec.seeds
    }

    def run_cell(cell):
        ti, strategy, learner, seed = cell
        pool, test = splits[ti, seed]
        oracle = Oracle(pool)
        ctx = TransferContext(
            source_model=source_models.get((learner, seed)),
            source_dataset=spec.source,
            target_oracle=oracle,
            space=spec.source.space,
            metric=metric,
            budget_fraction=spec.budget_fraction,
            learner=learner,
            seed=seed,
            learner_params=params.get(learner, {}),
            fs_epsilon=spec.fs_epsilon,
            be_alpha=spec.be_alpha,
            source_terms=source_terms,
        )
        outcome = run_strategy(strategy, ctx)
        leaked = oracle.evaluated & set(test.configs())
        assert not leaked, f"held-out configurations were queried: {sorted(leaked)}"
        assert outcome.cost == oracle.tally, "strategy cost disagrees with the oracle tally"
        return RunResult(
            ti, strategy, learner, seed,
            evaluate_model(outcome.target_model, test, metric),
            outcome.cost, oracle.tally, outcome.fallback,
        )

    cells = [
        (ti, strategy, learner, seed)
        for ti in range(len(spec.targets))
        for strategy in spec.strategies
        for learner in spec.learners
        for seed in spec.seeds
    ]
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(run_cell, cells))
    return [run_cell(c) for c in cells]


def aggregate(spec: ExperimentSpec, runs) -> list:
    """Collapse seeds: mean Err per cell, dispersion over the pooled per-point errors."""
    groups = {}
    for r in runs:
        groups.setdefault((r.target_index, r.strategy, r.learner), []).append(r)
    reports = []
    for (ti, strategy, learner), rs in groups.items():
        pooled = np.array([e for r in rs for e in r.evaluation.per_point])
        reports.append(
            ErrReport(
                source_env=str(spec.source.env),
                target_env=str(spec.targets[ti].env),
                strategy=strategy,
                learner=learner,
                metric=spec.metric,
                err_percent=float(np.mean([r.evaluation.err_percent for r in rs])),
                err_dispersion=float(np.std(pooled, ddof=1)) if len(pooled) > 1 else 0.0,
                cost=max(r.cost for r in rs),
                seeds=tuple(r.seed for r in rs),
            )
        )
    return reports


def run_experiment(spec: ExperimentSpec) -> list:
    return aggregate(spec, run_matrix(spec))


@dataclass(frozen=True)
class ComparisonRow:
    learner: str
    metric: str
    baseline: str
    improved: str
    baseline_err: float
    improved_err: float
    relative_reduction_percent: float


def relative_reduction(err_baseline: float, err_improved: float) -> float:
    """How much lower, in percent of the baseline, the improved error is."""
    if err_baseline == 0.0:
        raise ValueError("baseline error is zero; relative reduction undefined")
    return (err_baseline - err_improved) / err_baseline * 100.0


def compare(reports, baseline: str, improved: str) -> list:
    """Relative Err reduction of ``improved`` over ``baseline`` per (learner, metric).

    Errors are first averaged over target environments.
    """
    cells = {}
    for r in reports:
        cells.setdefault((r.learner, r.metric), {}).setdefault(r.strategy, {})[r.target_env] = r.err_percent
    rows = []
    for (learner, metric), by_strategy in cells.items():
        if baseline not in by_strategy or improved not in by_strategy:
            raise KeyError(f"missing cell: need both {baseline!r} and {improved!r} for {learner}/{metric}")
        base, imp = by_strategy[baseline], by_strategy[improved]
        if set(base) != set(imp):
            raise KeyError(f"{baseline!r} and {improved!r} cover different targets for {learner}/{metric}")
        eb = math.fsum(base.values()) / len(base)
        ei = math.fsum(imp[t] for t in base) / len(base)
        rows.append(ComparisonRow(learner, metric, baseline, improved, eb, ei, relative_reduction(eb, ei)))
    return rows


def _fmt(x: float) -> str:
    return repr(float(x))


def report_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow([
            r.source_env, r.target_env, r.strategy, r.learner, r.metric,
            _fmt(r.err_percent), _fmt(r.err_dispersion), r.cost, ";".join(str(s) for s in r.seeds),
        ])
    return buf.getvalue()


def read_report_csv(path) -> list:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
            raise DataError(f"{path}: not a report CSV (columns {reader.fieldnames})")
        return [
            ErrReport(
                row["source_env"], row["target_env"], row["strategy"], row["learner"], row["metric"],
                float(row["err_percent"]), float(row["err_dispersion"]), int(row["cost"]),
                tuple(int(s) for s in row["seeds"].split(";") if s),
            )
            for row in reader
        ]


def report_table(reports, comparisons=()) -> str:
    header = ("target", "strategy", "learner", "metric", "Err %", "+/- %", "cost")
    rows = [
        (r.target_env, r.strategy, r.learner, r.metric, f"{r.err_percent:.3f}", f"{r.err_dispersion:.3f}", str(r.cost))
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    right = {4, 5, 6}

    def line(cells):
        return "  ".join(c.rjust(w) if i in right else c.ljust(w) for i, (c, w) in enumerate(zip(cells, widths))).rstrip()

    out = [f"source: {reports[0].source_env}", line(header), line(["-" * w for w in widths])]
    out += [line(row) for row in rows]
    if comparisons:
        out += ["", "Relative reduction of mean Err (averaged over targets): (baseline - improved) / baseline"]
        for c in comparisons:
            out.append(
                f"  {c.learner:<4} {c.metric:<15} {c.improved} vs {c.baseline}: "
                f"{c.relative_reduction_percent:.2f}% lower ({c.improved_err:.3f} vs {c.baseline_err:.3f})"
            )
    return "\n".join(out) + "\n"


def plot_data(reports) -> dict:
    """Whitespace-separated error-bar data, one file per (learner, metric)."""
    files = {}
    for r in reports:
        name = f"plot_{r.learner}_{r.metric}.dat"
        if name not in files:
            files[name] = [
                f"# learner={r.learner} metric={r.metric}; error bars = dispersion; intended y-scale: log",
                "# target strategy err_percent err_dispersion",
            ]
        target = "_".join(r.target_env.split())
        files[name].append(f"{target} {r.strategy} {_fmt(r.err_percent)} {_fmt(r.err_dispersion)}")
    return {name: "\n".join(lines) + "\n" for name, lines in files.items()}


def render_report(reports, comparisons=()) -> dict:
    if not reports:
        raise ValueError("no reports to emit")
    files = {"report.csv": report_csv(reports), "report.txt": report_table(reports, comparisons)}
    files.update(plot_data(reports))
    return files


def write_files_atomically(files: dict, out_dir) -> list:
    """Write all files into ``out_dir`` or none of them.

    Contents are staged in a temporary directory next to ``out_dir`` and
    moved into place only once every file has been written.
    """
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".stage-", dir=out_dir.parent))
    try:
        for name, text in files.items():
            (stage / name).write_text(text, encoding="utf-8")
        out_dir.mkdir(exist_ok=True)
        written = []
        for name in files:
            os.replace(stage / name, out_dir / name)
            written.append(out_dir / name)
        return written
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def emit_report(reports, out_dir, comparisons=()) -> list:
    return write_files_atomically(render_report(reports, comparisons), out_dir)
