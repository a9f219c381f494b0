"""Discrete configuration spaces.

A configuration is a tuple of level indices, one per option, in the
declaration order of the space. Features handed to learners are the
min-max encoded indices, so every component lies in [0, 1].
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import SpaceError

Configuration = tuple  # tuple[int, ...] of level indices


@dataclass(frozen=True)
class OptionSpec:
    name: str
    levels: tuple
    unit: str = ""

    def __post_init__(self):
        if not self.name:
            raise SpaceError("option name must be non-empty")
        levels = tuple(float(v) for v in self.levels)
        if not levels:
            raise SpaceError(f"option {self.name!r} has no levels")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise SpaceError(f"levels of option {self.name!r} must be strictly increasing")
        object.__setattr__(self, "levels", levels)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def index_of(self, value: float) -> int:
        """Snap a raw option value to its level index (exact match only)."""
        for i, level in enumerate(self.levels):
            if level == value:
                return i
        raise SpaceError(f"off-domain value {value!r} for option {self.name!r}")


@dataclass(frozen=True)
class ConfigurationSpace:
    options: tuple

    def __post_init__(self):
        options = tuple(self.options)
        if not options:
            raise SpaceError("a configuration space needs at least one option")
        names = [o.name for o in options]
        if len(set(names)) != len(names):
            raise SpaceError(f"duplicate option names in {names}")
        object.__setattr__(self, "options", options)

    @classmethod
    def from_level_counts(cls, counts: Sequence[int]) -> "ConfigurationSpace":
        """Space with options ``o0, o1, ...`` whose levels are ``0..count-1``."""
        return cls(tuple(OptionSpec(f"o{i}", tuple(range(c))) for i, c in enumerate(counts)))

    @property
    def dim(self) -> int:
        return len(self.options)

    @property
    def level_counts(self) -> tuple:
        return tuple(o.n_levels for o in self.options)

    @property
    def names(self) -> tuple:
        return tuple(o.name for o in self.options)

    @property
    def cardinality(self) -> int:
        return math.prod(self.level_counts)

    def validate(self, config: Sequence[int]) -> Configuration:
        config = tuple(int(i) for i in config)
        if len(config) != self.dim:
            raise SpaceError(f"dimension mismatch: configuration has {len(config)} components, space has {self.dim}")
        for idx, n in zip(config, self.level_counts):
            if not 0 <= idx < n:
                raise SpaceError(f"off-domain value: level index {idx} outside [0, {n})")
        return config

    def values(self, config: Configuration) -> tuple:
        """Raw option values (e.g. MHz) of a configuration."""
        return tuple(o.levels[i] for o, i in zip(self.options, config))

    def flat_index(self, config: Configuration) -> int:
        idx = 0
        for i, n in zip(config, self.level_counts):
            idx = idx * n + i
        return idx

    def from_flat_index(self, flat: int) -> Configuration:
        out = []
        for n in reversed(self.level_counts):
            flat, r = divmod(flat, n)
            out.append(r)
        return tuple(reversed(out))

    def median_config(self) -> Configuration:
        return tuple((n - 1) // 2 for n in self.level_counts)

    def to_dict(self) -> dict:
        return {"options": [{"name": o.name, "unit": o.unit, "levels": list(o.levels)} for o in self.options]}

    @classmethod
    def from_dict(cls, data: dict) -> "ConfigurationSpace":
        try:
            return cls(tuple(OptionSpec(o["name"], tuple(o["levels"]), o.get("unit", "")) for o in data["options"]))
        except (KeyError, TypeError) as exc:
            raise SpaceError(f"malformed space definition: {exc}") from exc


def enumerate_space(space: ConfigurationSpace) -> Iterator[Configuration]:
    """Yield every configuration in lexicographic order of level indices."""
    return itertools.product(*(range(n) for n in space.level_counts))


def encode(config: Sequence[int], space: ConfigurationSpace) -> np.ndarray:
    if len(config) != space.dim:
        raise SpaceError(f"dimension mismatch: configuration has {len(config)} components, space has {space.dim}")
    return encode_many([config], space)[0]


def encode_many(configs, space: ConfigurationSpace) -> np.ndarray:
    """Encode configurations row-wise into an ``(n, dim)`` float array."""
    idx = np.asarray(configs, dtype=np.float64).reshape(-1, space.dim)
    denom = np.array([max(n - 1, 1) for n in space.level_counts], dtype=np.float64)
    return idx / denom


def encode_space(space: ConfigurationSpace) -> np.ndarray:
    return encode_many(list(enumerate_space(space)), space)


def budget(space: ConfigurationSpace, fraction: float) -> int:
    """Number of evaluations a strategy may spend: ``ceil(fraction * |space|)``.

    The product is rounded to 12 significant digits before the ceiling so that
    binary representation error (0.0244 * 46080 = 1124.352...) cannot bump an
    exact integer product up by one.
    """
    if not 0.0 < fraction <= 1.0:
        raise SpaceError(f"budget fraction must be in (0, 1], got {fraction}")
    product = float(f"{fraction * space.cardinality:.12g}")
    return max(1, math.ceil(product))


def load_space(path) -> ConfigurationSpace:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise SpaceError(f"{path}: invalid space file: {exc}") from exc
    return ConfigurationSpace.from_dict(data)


def save_space(space: ConfigurationSpace, path) -> None:
    Path(path).write_text(json.dumps(space.to_dict(), indent=2) + "\n", encoding="utf-8")
