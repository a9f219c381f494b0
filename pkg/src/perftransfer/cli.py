"""Command-line interface: ``perftransfer {synth,fit,transfer,eval,bench,report}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dataset import Oracle, load_csv, save_csv
from .errors import PerfTransferError
from .evaluation import (
    ExperimentSpec,
    compare,
    emit_report,
    evaluate_model,
    read_report_csv,
    run_experiment,
    write_files_atomically,
    render_report,
)
from .learners import fit_forest, fit_nn, fit_tree, stepwise_fit
from .models import dumps_model, load_model
from .space import load_space, save_space
from .synthetic import load_scenario, true_influential
from .transfer import DEFAULT_BUDGET_FRACTION, STRATEGIES, TransferContext, run_strategy, train_source_model

log = logging.getLogger("perftransfer")


class UsageError(Exception):
    pass


def _metric_for(dataset, requested):
    if requested:
        if requested not in dataset.metrics:
            raise UsageError(f"dataset has no {requested!r} records (has {', '.join(dataset.metrics)})")
        return requested
    if len(dataset.metrics) != 1:
        raise UsageError(f"dataset holds several metrics {dataset.metrics}; pass --metric")
    return dataset.metrics[0]


def _nn_params(args) -> dict:
    params = {}
    for key in ("epochs", "batch", "step"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return params


def _write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_files_atomically({path.name: text}, path.parent)


def cmd_synth(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = type(scenario)(**{**scenario.__dict__, "seed": args.seed})
    source, target, truth = scenario.generate()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_csv(source, out / "source.csv")
    save_csv(target, out / "target.csv")
    save_space(scenario.space, out / "space.json")
    infl = true_influential(truth)
    (out / "truth.json").write_text(
        json.dumps(
            {
                **truth.to_dict(),
                "shift": scenario.shift.to_dict(),
                "influential_options": sorted(infl.options),
                "influential_pairs": sorted(list(p) for p in infl.pairs),
            },
            indent=2,
        ) + "\n",
        encoding="utf-8",
    )
    names = scenario.space.names
    print("influential options:", ", ".join(names[o] for o in sorted(infl.options)) or "(none)")
    print("influential interactions:", ", ".join(f"{names[i]}*{names[j]}" for i, j in sorted(infl.pairs)) or "(none)")
    print(f"wrote {out / 'source.csv'}, {out / 'target.csv'}, {out / 'truth.json'}")


def cmd_fit(args):
    space = load_space(args.space)
    data = load_csv(args.data, space)
    metric = _metric_for(data, args.metric)
    _, X, y = data.arrays(metric)
    if args.learner == "rt":
        model = fit_tree(X, y)
    elif args.learner == "nn":
        model = fit_nn(X, y, seed=args.seed, **_nn_params(args))
    elif args.learner == "rf":
        model = fit_forest(X, y, seed=args.seed)
    else:
        model = stepwise_fit(data, metric, fs_epsilon=args.fs_epsilon, be_alpha=args.be_alpha)
        terms = ", ".join(f"{t}={c:.6g}" for t, c in zip(model.terms, model.coefficients))
        print(f"stepwise terms: {terms}")
    result = evaluate_model(model, data, metric)
    _write_text(args.out, dumps_model(model))
    print(f"training Err: {result.err_percent:.4f}% (+/- {result.err_dispersion:.4f})")
    print(f"wrote {args.out}")


def cmd_transfer(args):
    space = load_space(args.space)
    source = load_csv(args.source, space)
    target = load_csv(args.target, space)
    metric = _metric_for(source, args.metric)
    params = _nn_params(args) if args.learner == "nn" else {}
    if args.source_model:
        source_model = load_model(args.source_model)
    else:
        source_model = train_source_model(source, metric, args.learner, args.seed, **params)
    oracle = Oracle(target)
    ctx = TransferContext(
        source_model, source, oracle, space, metric,
        budget_fraction=args.budget_fraction, learner=args.learner, seed=args.seed,
        learner_params=params, fs_epsilon=args.fs_epsilon, be_alpha=args.be_alpha,
    )
    outcome = run_strategy(args.strategy, ctx)
    if outcome.fallback:
        print(f"note: {outcome.note}")
    if outcome.shift_coefficients is not None:
        b0, b1 = outcome.shift_coefficients
        print(f"shift: target = {b0:.6g} + {b1:.6g} * source")
    if outcome.influence is not None:
        print("influential options:", ", ".join(space.names[o] for o in sorted(outcome.influence.options)) or "(none)")
    print(f"cost: {outcome.cost} target evaluations (budget {ctx.budget})")
    unseen = target.subset(set(target.configs()) - oracle.evaluated)
    if unseen.records:
        result = evaluate_model(outcome.target_model, unseen, metric)
        print(f"Err on {len(unseen.configs())} unqueried target configurations: {result.err_percent:.4f}%")
    _write_text(args.out, dumps_model(outcome.target_model))
    print(f"wrote {args.out}")


def cmd_eval(args):
    space = load_space(args.space)
    data = load_csv(args.data, space)
    metric = _metric_for(data, args.metric)
    result = evaluate_model(load_model(args.model), data, metric)
    print(f"Err: {result.err_percent:.6f}% (+/- {result.err_dispersion:.6f}) over {len(result.per_point)} configurations")


def load_experiment(path, workers: int = 1):
    """Parse a JSON experiment file; relative paths resolve against its directory."""
    path = Path(path)
    d = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent
    try:
        space = load_space(base / d["space"])
        source = load_csv(base / d["source"], space)
        targets = [load_csv(base / t, space) for t in d["targets"]]
        strategies = tuple(d.get("strategies", STRATEGIES))
        learners = tuple(d.get("learners", ("rt", "nn")))
        metric = d.get("metric") or _metric_for(source, None)
        spec = ExperimentSpec(
            source=source,
            targets=targets,
            strategies=strategies,
            learners=learners,
            metric=metric,
            budget_fraction=float(d.get("budget_fraction", DEFAULT_BUDGET_FRACTION)),
            fs_epsilon=float(d.get("fs_epsilon", 1e-3)),
            be_alpha=float(d.get("be_alpha", 0.05)),
            seeds=tuple(int(s) for s in d.get("seeds", (0,))),
            test_count=int(d.get("test_count", 10)),
            learner_params=d.get("learner_params", {}),
            workers=workers,
        )
    except KeyError as exc:
        raise UsageError(f"{path}: missing key {exc}") from None
    if not set(strategies) <= set(STRATEGIES):
        raise UsageError(f"{path}: strategies must be a subset of {STRATEGIES}")
    if not set(learners) <= {"rt", "nn"}:
        raise UsageError(f"{path}: learners must be a subset of ('rt', 'nn')")
    out = base / d.get("out", "report")
    return spec, out


def _comparisons(reports):
    strategies = {r.strategy for r in reports}
    if "gs" not in strategies:
        return []
    rows = []
    for baseline in ("dm", "lms", "nlms"):
        if baseline in strategies:
            try:
                rows += compare(reports, baseline, "gs")
            except ValueError as exc:
                log.warning("skipping gs vs %s comparison: %s", baseline, exc)
    return rows


def cmd_bench(args):
    spec, out = load_experiment(args.spec, workers=args.workers)
    if args.out:
        out = Path(args.out)
    reports = run_experiment(spec)
    comparisons = _comparisons(reports)
    emit_report(reports, out, comparisons)
    sys.stdout.write(render_report(reports, comparisons)["report.txt"])
    print(f"wrote reports to {out}")


def cmd_report(args):
    reports = read_report_csv(args.reports)
    if not reports:
        raise UsageError(f"{args.reports}: no report rows")
    comparisons = compare(reports, args.baseline, args.improved) if args.baseline else _comparisons(reports)
    files = render_report(reports, comparisons)
    if args.out:
        write_files_atomically(files, args.out)
    sys.stdout.write(files["report.txt"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perftransfer", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, space=True, out=True):
        if space:
            p.add_argument("--space", required=True, help="space definition (JSON)")
        p.add_argument("--seed", type=int, default=0)
        if out:
            p.add_argument("--out", required=True)
        p.add_argument("--workers", type=int, default=1, help="worker threads for matrix cells")

    def nn_flags(p):
        p.add_argument("--epochs", type=int)
        p.add_argument("--batch", type=int)
        p.add_argument("--step", type=float)

    def stepwise_flags(p):
        p.add_argument("--fs-epsilon", type=float, default=1e-3)
        p.add_argument("--be-alpha", type=float, default=0.05)

    p = sub.add_parser("synth", help="generate a synthetic source/target pair")
    p.add_argument("scenario")
    common(p, space=False)
    p.set_defaults(func=cmd_synth, seed=None)

    p = sub.add_parser("fit", help="fit a performance model")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--learner", choices=("rt", "nn", "rf", "stepwise"), required=True)
    p.add_argument("--metric")
    nn_flags(p)
    stepwise_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("transfer", help="transfer a model to a target environment")
    common(p)
    p.add_argument("--source", required=True, help="source measurements (CSV)")
    p.add_argument("--target", required=True, help="target measurements (CSV) acting as the oracle")
    p.add_argument("--source-model", help="pre-trained source model; trained from --source if omitted")
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--learner", choices=("rt", "nn"), default="rt")
    p.add_argument("--metric")
    p.add_argument("--budget-fraction", type=float, default=DEFAULT_BUDGET_FRACTION)
    nn_flags(p)
    stepwise_flags(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("eval", help="Err of a saved model on a dataset")
    common(p, out=False)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--metric")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run an experiment matrix and write reports")
    p.add_argument("spec", help="experiment file (JSON)")
    p.add_argument("--out", help="report directory (overrides the spec)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="re-render reports from a report CSV")
    p.add_argument("reports", help="report.csv written by bench")
    p.add_argument("--out")
    p.add_argument("--baseline", choices=STRATEGIES)
    p.add_argument("--improved", choices=STRATEGIES, default="gs")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"perftransfer {args.command}: {exc}", file=sys.stderr)
        return 2
    except (PerfTransferError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"perftransfer {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
