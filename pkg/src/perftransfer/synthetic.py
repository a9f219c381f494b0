"""Synthetic source/target environment pairs with known response surfaces.

The source environment follows a sparse degree-2 polynomial over encoded
features; the target environment is a deterministic shift of the source
ground truth. Both are sampled full-factorially, with independent noise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import EnvironmentId, MeasurementDataset, MeasurementRecord
from .errors import PositivityError
from .learners.linear import Influence
from .space import ConfigurationSpace, encode_space, enumerate_space, load_space
from .terms import Term, design_matrix

NOISE_KINDS = ("absolute", "relative")
SHIFT_KINDS = ("identity", "linear", "power", "term_perturbation")


@dataclass(frozen=True)
class GroundTruthSurface:
    """``sum(coef * term(x))`` plus Gaussian noise.

    With ``noise_kind="absolute"`` the noise has standard deviation
    ``noise_sd``; with ``"relative"`` a value ``v`` becomes ``v * (1 + e)``,
    ``e ~ N(0, noise_sd)``.
    """

    terms: tuple  # ((Term, coefficient), ...)
    noise_sd: float = 0.0
    noise_kind: str = "absolute"

    def __post_init__(self):
        terms = tuple((t, float(c)) for t, c in self.terms)
        kinds = [t for t, _ in terms]
        if len(set(kinds)) != len(kinds):
            raise ValueError("surface terms must be unique")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"noise_kind must be one of {NOISE_KINDS}")
        object.__setattr__(self, "terms", terms)

    def check_dim(self, dim: int) -> None:
        for t, _ in self.terms:
            t.check_dim(dim)

    def response(self, X) -> np.ndarray:
        """Noise-free response at encoded features ``X``."""
        X = np.asarray(X, dtype=np.float64)
        if not self.terms:
            return np.zeros(X.shape[0])
        return design_matrix([t for t, _ in self.terms], X) @ np.array([c for _, c in self.terms])

    def with_intercept_offset(self, offset: float) -> "GroundTruthSurface":
        coefs = dict(self.terms)
        coefs[Term.intercept()] = coefs.get(Term.intercept(), 0.0) + offset
        ordered = sorted(coefs.items(), key=lambda tc: tc[0] != Term.intercept())
        return replace(self, terms=tuple(ordered))

    def to_dict(self) -> dict:
        return {
            "terms": [{**t.to_dict(), "coef": c} for t, c in self.terms],
            "noise_sd": self.noise_sd,
            "noise_kind": self.noise_kind,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthSurface":
        return cls(
            tuple((Term.from_dict(t), float(t["coef"])) for t in d["terms"]),
            float(d.get("noise_sd", 0.0)),
            d.get("noise_kind", "absolute"),
        )


@dataclass(frozen=True)
class ShiftSpec:
    """Map from source ground truth ``y`` to target ground truth.

    ``linear``: ``a*y + b``; ``power``: ``a*y**gamma + b``;
    ``term_perturbation``: the source surface with coefficient ``deltas`` added.
    """

    kind: str = "identity"
    a: float = 1.0
    b: float = 0.0
    gamma: float = 1.0
    deltas: tuple = field(default=())  # ((Term, delta), ...)

    def __post_init__(self):
        if self.kind not in SHIFT_KINDS:
            raise ValueError(f"shift kind must be one of {SHIFT_KINDS}")
        if self.kind in ("linear", "power") and not self.a > 0:
            raise ValueError("shift scale a must be positive")
        if self.kind == "power" and not self.gamma > 0:
            raise ValueError("power shift exponent gamma must be positive")
        object.__setattr__(self, "deltas", tuple((t, float(d)) for t, d in self.deltas))

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def linear(cls, a, b):
        return cls("linear", a=a, b=b)

    @classmethod
    def power(cls, a, gamma, b=0.0):
        return cls("power", a=a, gamma=gamma, b=b)

    @classmethod
    def term_perturbation(cls, deltas):
        return cls("term_perturbation", deltas=tuple(deltas))

    def apply(self, y, truth: GroundTruthSurface, X) -> np.ndarray:
        if self.kind == "identity":
            return np.array(y, dtype=np.float64)
        if self.kind == "linear":
            return self.a * y + self.b
        if self.kind == "power":
            return self.a * np.power(y, self.gamma) + self.b
        coefs = dict(truth.terms)
        for t, d in self.deltas:
            coefs[t] = coefs.get(t, 0.0) + d
        if all(d == 0.0 for _, d in self.deltas):
            return np.array(y, dtype=np.float64)
        return replace(truth, terms=tuple(coefs.items())).response(X)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("linear", "power"):
            d.update(a=self.a, b=self.b)
        if self.kind == "power":
            d["gamma"] = self.gamma
        if self.kind == "term_perturbation":
            d["deltas"] = [{**t.to_dict(), "delta": v} for t, v in self.deltas]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftSpec":
        deltas = tuple((Term.from_dict(x), float(x["delta"])) for x in d.get("deltas", ()))
        return cls(
            d.get("kind", "identity"),
            float(d.get("a", 1.0)),
            float(d.get("b", 0.0)),
            float(d.get("gamma", 1.0)),
            deltas,
        )


def _add_noise(values, truth: GroundTruthSurface, rng):
    if truth.noise_sd == 0.0:
        return values
    eps = rng.normal(0.0, truth.noise_sd, size=values.shape)
    if truth.noise_kind == "relative":
        return values * (1.0 + eps)
    return values + eps


def generate_pair(
    space: ConfigurationSpace,
    surface: GroundTruthSurface,
    shift: ShiftSpec = ShiftSpec(),
    seed: int = 0,
    metric: str = "inference_time",
    source_env: EnvironmentId = EnvironmentId("src", "synthetic", "w0"),
    target_env: EnvironmentId = EnvironmentId("tgt", "synthetic", "w0"),
):
    """Full-factorial source and target datasets plus the (offset) ground truth.

    If the surface is not positive everywhere its intercept is raised by
    ``|min| + 1``. Raises :class:`PositivityError` if the shifted or noisy
    values are not strictly positive.
    """
    surface.check_dim(space.dim)
    X = encode_space(space)
    y = surface.response(X)
    lo = float(y.min())
    truth = surface if lo > 0 else surface.with_intercept_offset(abs(lo) + 1.0)
    y = truth.response(X)
    y_target = shift.apply(y, truth, X)
    if not np.all(np.isfinite(y_target) & (y_target > 0)):
        raise PositivityError("positivity violated: shifted target response is not strictly positive")

    rng = np.random.default_rng(seed)
    src_vals = _add_noise(y, truth, rng)
    tgt_vals = _add_noise(y_target, truth, rng)
    if not (np.all(src_vals > 0) and np.all(tgt_vals > 0)):
        raise PositivityError("positivity violated: noise drove a measurement to a non-positive value")

    configs = list(enumerate_space(space))

    def dataset(env, vals):
        return MeasurementDataset(
            env, space, tuple(MeasurementRecord(c, metric, float(v)) for c, v in zip(configs, vals))
        )

    return dataset(source_env, src_vals), dataset(target_env, tgt_vals), truth


def true_terms(truth: GroundTruthSurface) -> frozenset:
    """Non-intercept terms with a nonzero coefficient."""
    return frozenset(t for t, c in truth.terms if c != 0.0 and t.kind != "intercept")


def true_influential(truth: GroundTruthSurface) -> Influence:
    options, pairs = set(), set()
    for t in true_terms(truth):
        options.update(t.options)
        if t.kind == "interaction":
            pairs.add((t.i, t.j))
    return Influence(frozenset(options), frozenset(pairs))


@dataclass(frozen=True)
class Scenario:
    space: ConfigurationSpace
    surface: GroundTruthSurface
    shift: ShiftSpec
    seed: int = 0
    metric: str = "inference_time"
    source_env: EnvironmentId = EnvironmentId("src", "synthetic", "w0")
    target_env: EnvironmentId = EnvironmentId("tgt", "synthetic", "w0")

    def generate(self):
        return generate_pair(
            self.space, self.surface, self.shift, self.seed, self.metric, self.source_env, self.target_env
        )


def load_scenario(path) -> Scenario:
    """Read a JSON scenario; a string ``space`` is a path relative to the scenario file."""
    path = Path(path)
    d = json.loads(path.read_text(encoding="utf-8"))
    space_ref = d["space"]
    if isinstance(space_ref, str):
        space = load_space(path.parent / space_ref)
    else:
        space = ConfigurationSpace.from_dict(space_ref)
    surface = GroundTruthSurface.from_dict(d)
    env = lambda key, default: EnvironmentId(**d[key]) if key in d else default
    return Scenario(
        space,
        surface,
        ShiftSpec.from_dict(d.get("shift", {})),
        int(d.get("seed", 0)),
        d.get("metric", "inference_time"),
        env("source_env", Scenario.source_env),
        env("target_env", Scenario.target_env),
    )
