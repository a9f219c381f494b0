"""Degree-2 polynomial terms over encoded configuration features."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("intercept", "main", "quadratic", "interaction")


@dataclass(frozen=True, order=True)
class Term:
    kind: str
    i: int = -1
    j: int = -1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind == "intercept" and (self.i, self.j) != (-1, -1):
            raise ValueError("intercept takes no option indices")
        if self.kind in ("main", "quadratic") and (self.i < 0 or self.j != -1):
            raise ValueError(f"{self.kind} term needs exactly one option index")
        if self.kind == "interaction" and not 0 <= self.i < self.j:
            raise ValueError("interaction term needs option indices i < j")

    @classmethod
    def intercept(cls):
        return cls("intercept")

    @classmethod
    def main(cls, i):
        return cls("main", i)

    @classmethod
    def quadratic(cls, i):
        return cls("quadratic", i)

    @classmethod
    def interaction(cls, i, j):
        i, j = sorted((i, j))
        return cls("interaction", i, j)

    @property
    def options(self) -> tuple:
        if self.kind == "intercept":
            return ()
        if self.kind == "interaction":
            return (self.i, self.j)
        return (self.i,)

    def check_dim(self, dim: int) -> None:
        if any(o >= dim for o in self.options):
            raise ValueError(f"term {self} references an option outside a {dim}-option space")

    def column(self, X: np.ndarray) -> np.ndarray:
        if self.kind == "intercept":
            return np.ones(X.shape[0])
        if self.kind == "main":
            return X[:, self.i].copy()
        if self.kind == "quadratic":
            return X[:, self.i] * X[:, self.i]
        return X[:, self.i] * X[:, self.j]

    def __str__(self):
        if self.kind == "intercept":
            return "intercept"
        if self.kind == "interaction":
            return f"interaction({self.i},{self.j})"
        return f"{self.kind}({self.i})"

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind != "intercept":
            d["i"] = self.i
        if self.kind == "interaction":
            d["j"] = self.j
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Term":
        kind = d["kind"]
        if kind == "interaction":
            return cls.interaction(int(d["i"]), int(d["j"]))
        if kind == "intercept":
            return cls.intercept()
        return cls(kind, int(d["i"]))


def candidate_terms(dim: int) -> list:
    """Intercept, mains, quadratics, then pairwise interactions."""
    terms = [Term.intercept()]
    terms += [Term.main(i) for i in range(dim)]
    terms += [Term.quadratic(i) for i in range(dim)]
    terms += [Term.interaction(i, j) for i in range(dim) for j in range(i + 1, dim)]
    return terms


def design_matrix(terms, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if not terms:
        return np.empty((X.shape[0], 0))
    return np.column_stack([t.column(X) for t in terms])
