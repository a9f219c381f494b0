"""Measurement records, CSV ingestion, sampling, and the metered oracle."""
from __future__ import annotations

import csv
import io
import math
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DataError, SpaceError, UnmeasuredConfigurationError
from .space import Configuration, ConfigurationSpace, encode_many

METRICS = ("inference_time", "energy")
ENV_COLUMNS = ("env_hardware", "env_model", "env_workload")


@dataclass(frozen=True, order=True)
class EnvironmentId:
    hardware: str
    model: str
    workload: str

    def __post_init__(self):
        if not (self.hardware and self.model and self.workload):
            raise DataError("environment labels must all be non-empty")

    def __str__(self):
        return f"{self.hardware}/{self.model}/{self.workload}"


@dataclass(frozen=True)
class MeasurementRecord:
    config: Configuration
    metric: str
    value: float
    replicate: int = 0

    def __post_init__(self):
        if self.metric not in METRICS:
            raise DataError(f"unknown metric {self.metric!r}; expected one of {METRICS}")
        if not (math.isfinite(self.value) and self.value > 0):
            raise DataError(f"non-positive metric value {self.value!r}")
        if self.replicate < 0:
            raise DataError(f"negative replicate index {self.replicate}")


@dataclass(frozen=True)
class MeasurementDataset:
    env: EnvironmentId
    space: ConfigurationSpace
    records: tuple = field(default=())

    def __post_init__(self):
        records = tuple(self.records)
        seen = set()
        for r in records:
            try:
                self.space.validate(r.config)
            except SpaceError as exc:
                raise DataError(f"record outside the space: {exc}") from exc
            key = (r.config, r.metric, r.replicate)
            if key in seen:
                raise DataError(f"duplicate (config, metric, replicate) triple {key}")
            seen.add(key)
        object.__setattr__(self, "records", records)

    def __len__(self):
        return len(self.records)

    @property
    def metrics(self) -> tuple:
        present = {r.metric for r in self.records}
        return tuple(m for m in METRICS if m in present)

    def configs(self, metric: str | None = None) -> list:
        """Distinct configurations, sorted lexicographically."""
        return sorted({r.config for r in self.records if metric is None or r.metric == metric})

    def mean_values(self, metric: str) -> dict:
        """Replicate-averaged value per configuration for ``metric``."""
        acc = defaultdict(list)
        for r in self.records:
            if r.metric == metric:
                acc[r.config].append(r.value)
        return {c: math.fsum(v) / len(v) for c, v in sorted(acc.items())}

    def arrays(self, metric: str):
        """``(configs, X, y)`` with replicate-averaged targets, lexicographic order."""
        means = self.mean_values(metric)
        if not means:
            raise DataError(f"dataset for {self.env} has no {metric!r} records")
        configs = list(means)
        return configs, encode_many(configs, self.space), np.array([means[c] for c in configs])

    def subset(self, configs: Iterable[Configuration]) -> "MeasurementDataset":
        keep = set(configs)
        return MeasurementDataset(self.env, self.space, tuple(r for r in self.records if r.config in keep))


def _parse_number(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(f"cannot parse {what} value {text!r}") from None


def load_csv(path, space: ConfigurationSpace) -> MeasurementDataset:
    """Read a measurement CSV whose option columns are named as in ``space``."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return read_csv(fh, space, source=str(path))


def read_csv(fh, space: ConfigurationSpace, source: str = "<csv>") -> MeasurementDataset:
    reader = csv.DictReader(fh)
    header = reader.fieldnames or []
    expected = set(space.names) | {"metric", "value", "replicate"} | set(ENV_COLUMNS)
    unknown = [h for h in header if h not in expected]
    if unknown:
        raise DataError(f"{source}: unknown option column(s) {unknown}")
    missing = [h for h in (*space.names, "metric", "value", *ENV_COLUMNS) if h not in header]
    if missing:
        raise DataError(f"{source}: missing column(s) {missing}")

    env = None
    records = []
    for lineno, row in enumerate(reader, start=2):
        try:
            config = tuple(
                opt.index_of(_parse_number(row[opt.name], opt.name)) for opt in space.options
            )
        except SpaceError as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from None
        row_env = EnvironmentId(*(row[c] for c in ENV_COLUMNS))
        if env is None:
            env = row_env
        elif row_env != env:
            raise DataError(f"{source}:{lineno}: mixed environments {env} and {row_env} in one file")
        value = _parse_number(row["value"], "metric")
        if not (math.isfinite(value) and value > 0):
            raise DataError(f"{source}:{lineno}: non-positive metric value {value!r}")
        rep = row.get("replicate") or "0"
        try:
            records.append(MeasurementRecord(config, row["metric"], value, int(rep)))
        except (DataError, ValueError) as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from None
    if env is None:
        raise DataError(f"{source}: no records")
    return MeasurementDataset(env, space, tuple(records))


def write_csv(dataset: MeasurementDataset, fh) -> None:
    space = dataset.space
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([*space.names, "metric", "value", "replicate", *ENV_COLUMNS])
    env = (dataset.env.hardware, dataset.env.model, dataset.env.workload)
    for r in dataset.records:
        writer.writerow([*(repr(v) for v in space.values(r.config)), r.metric, repr(r.value), r.replicate, *env])


def dump_csv(dataset: MeasurementDataset) -> str:
    buf = io.StringIO()
    write_csv(dataset, buf)
    return buf.getvalue()


def save_csv(dataset: MeasurementDataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        write_csv(dataset, fh)


def random_sample(space: ConfigurationSpace, n: int, seed: int) -> list:
    """``n`` distinct configurations drawn uniformly without replacement."""
    if not 1 <= n <= space.cardinality:
        raise SpaceError(f"sample size {n} outside [1, {space.cardinality}]")
    rng = np.random.default_rng(seed)
    flat = rng.choice(space.cardinality, size=n, replace=False)
    return [space.from_flat_index(int(i)) for i in flat]


def split(dataset: MeasurementDataset, test_count: int = 10, seed: int = 0):
    """Hold out ``test_count`` configurations; return ``(train, test)``."""
    configs = dataset.configs()
    if test_count < 1:
        raise DataError("test_count must be at least 1")
    if test_count >= len(configs):
        raise DataError(
            f"test_count {test_count} leaves no training data ({len(configs)} distinct configurations)"
        )
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(configs), size=test_count, replace=False)
    test_configs = {configs[int(i)] for i in picked}
    train = tuple(r for r in dataset.records if r.config not in test_configs)
    test = tuple(r for r in dataset.records if r.config in test_configs)
    return (
        MeasurementDataset(dataset.env, dataset.space, train),
        MeasurementDataset(dataset.env, dataset.space, test),
    )


class Oracle:
    """Replicate-averaged lookup that meters distinct configurations queried.

    Stands in for running a configuration in an environment. The tally is
    guarded by a lock so concurrent strategies can share one oracle.
    """

    def __init__(self, dataset: MeasurementDataset):
        if not dataset.records:
            raise DataError("oracle needs a non-empty dataset")
        self.dataset = dataset
        self.space = dataset.space
        self._table = {m: dataset.mean_values(m) for m in dataset.metrics}
        self._configs = frozenset(c for t in self._table.values() for c in t)
        self._evaluated = set()
        self._lock = threading.Lock()

    def __contains__(self, config) -> bool:
        return tuple(config) in self._configs

    def available(self, metric: str) -> list:
        """Configurations measurable for ``metric``, lexicographic order."""
        return list(self._table.get(metric, {}))

    def query(self, config, metric: str) -> float:
        config = tuple(config)
        try:
            value = self._table[metric][config]
        except KeyError:
            raise UnmeasuredConfigurationError(f"unmeasured configuration {config} for {metric!r}") from None
        with self._lock:
            self._evaluated.add(config)
        return value

    def query_many(self, configs, metric: str) -> np.ndarray:
        return np.array([self.query(c, metric) for c in configs], dtype=np.float64)

    @property
    def tally(self) -> int:
        with self._lock:
            return len(self._evaluated)

    @property
    def evaluated(self) -> frozenset:
        with self._lock:
            return frozenset(self._evaluated)


def oracle(dataset: MeasurementDataset) -> Oracle:
    return Oracle(dataset)
