"""Least squares and stepwise term selection.

Stepwise regression starts from the intercept, greedily adds the candidate
term with the largest gain in R^2 (forward selection) and, after each
addition, drops terms whose coefficient t-test is not significant
(backward elimination). Surviving terms with negligible coefficients are
pruned afterwards; the remaining options and option pairs are what guided
sampling treats as influential.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..errors import FitError
from ..terms import Term, candidate_terms, design_matrix

logger = logging.getLogger(__name__)

PRUNE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class OLSResult:
    coefficients: np.ndarray
    r_squared: float
    residuals: np.ndarray
    rank: int


def fit_ols(A, y) -> OLSResult:
    """Least squares fit of ``y`` on the columns of ``A`` (minimum-norm if rank deficient).

    ``r_squared`` is ``1 - SSE/SST`` and is defined as 1.0 when the targets are
    constant.
    """
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if y.size == 0 or A.shape[0] == 0:
        raise FitError("cannot fit least squares on empty input")
    if A.shape[0] != y.shape[0]:
        raise FitError(f"design has {A.shape[0]} rows but there are {y.shape[0]} targets")
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    sse = float(resid @ resid)
    centered = y - y.mean()
    sst = float(centered @ centered)
    r2 = 1.0 if sst == 0.0 else 1.0 - sse / sst
    return OLSResult(coef, min(max(r2, 0.0), 1.0), resid, int(rank))


def coefficient_pvalues(A, fit: OLSResult) -> np.ndarray:
    """Two-sided t-test p-values for each coefficient of an OLS fit.

    Returns NaN everywhere when there are no residual degrees of freedom.
    """
    n, p = A.shape
    dof = n - fit.rank
    if dof <= 0:
        return np.full(p, np.nan)
    sigma2 = float(fit.residuals @ fit.residuals) / dof
    coef = fit.coefficients
    if sigma2 == 0.0:
        return np.where(coef != 0.0, 0.0, 1.0)
    se = np.sqrt(sigma2 * np.diag(np.linalg.pinv(A.T @ A)))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.abs(coef) / se
    pvals = 2.0 * stats.t.sf(t, dof)
    return np.where(se > 0, pvals, np.where(coef != 0.0, 0.0, 1.0))


@dataclass(frozen=True)
class LinearTermModel:
    terms: tuple
    coefficients: tuple
    r_squared: float
    dim: int
    fs_history: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.terms) != len(self.coefficients):
            raise ValueError("terms and coefficients differ in length")
        for t in self.terms:
            t.check_dim(self.dim)

    def predict_encoded(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if not self.terms:
            return np.zeros(X.shape[0])
        return design_matrix(self.terms, X) @ np.asarray(self.coefficients, dtype=np.float64)

    def coefficient(self, term: Term) -> float:
        return dict(zip(self.terms, self.coefficients)).get(term, 0.0)

    def to_dict(self) -> dict:
        return {
            "terms": [t.to_dict() for t in self.terms],
            "coefficients": [float(c) for c in self.coefficients],
            "r_squared": float(self.r_squared),
        }

    @classmethod
    def from_dict(cls, d: dict, dim: int) -> "LinearTermModel":
        return cls(
            tuple(Term.from_dict(t) for t in d["terms"]),
            tuple(float(c) for c in d["coefficients"]),
            float(d["r_squared"]),
            dim,
        )


def stepwise_regression(
    X,
    y,
    candidates=None,
    fs_epsilon: float = 1e-3,
    be_alpha: float = 0.05,
    prune: bool = True,
) -> LinearTermModel:
    """Stepwise selection of polynomial terms on encoded features ``X``.

    A term dropped by backward elimination is not offered to forward
    selection again, which rules out add/remove cycles.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, dim = X.shape
    if fs_epsilon <= 0:
        raise ValueError("fs_epsilon must be positive")
    if not 0 < be_alpha < 1:
        raise ValueError("be_alpha must be in (0, 1)")
    if len(np.unique(X, axis=0)) < 2:
        raise FitError("stepwise regression needs at least 2 distinct configurations")
    if candidates is None:
        candidates = candidate_terms(dim)
    for t in candidates:
        t.check_dim(dim)
    columns = {t: t.column(X) for t in candidates}
    columns.setdefault(Term.intercept(), np.ones(n))

    def fit(terms):
        A = np.column_stack([columns[t] for t in terms])
        return A, fit_ols(A, y)

    included = [Term.intercept()]
    banned = set()
    _, current = fit(included)
    history = []

    while True:
        best_term, best_fit = None, None
        for t in candidates:
            if t in included or t in banned:
                continue
            _, trial = fit(included + [t])
            if best_fit is None or trial.r_squared > best_fit.r_squared:
                best_term, best_fit = t, trial
        if best_term is None or best_fit.r_squared - current.r_squared < fs_epsilon:
            break
        history.append((current.r_squared, best_fit.r_squared))
        logger.debug("FS add %s: R2 %.6f -> %.6f", best_term, current.r_squared, best_fit.r_squared)
        included.append(best_term)
        current = best_fit

        while len(included) > 1:
            A, current = fit(included)
            pvals = coefficient_pvalues(A, current)[1:]
            if np.all(np.isnan(pvals)):
                break
            worst = int(np.nanargmax(pvals))
            if not pvals[worst] > be_alpha:
                break
            dropped = included.pop(worst + 1)
            banned.add(dropped)
            logger.debug("BE drop %s (p=%.3g)", dropped, pvals[worst])
        _, current = fit(included)

    model = LinearTermModel(
        tuple(included),
        tuple(float(c) for c in current.coefficients),
        current.r_squared,
        dim,
        tuple(history),
    )
    return prune_small_coefficients(model) if prune else model


def stepwise_fit(dataset, metric: str, candidates=None, fs_epsilon: float = 1e-3, be_alpha: float = 0.05):
    """Stepwise regression on the replicate-averaged measurements of ``dataset``."""
    _, X, y = dataset.arrays(metric)
    return stepwise_regression(X, y, candidates, fs_epsilon, be_alpha)


def prune_small_coefficients(model: LinearTermModel, threshold: float = PRUNE_THRESHOLD) -> LinearTermModel:
    """Drop terms whose |coefficient| is strictly below ``threshold``.

    The intercept is structural and always kept.
    """
    keep = [
        (t, c)
        for t, c in zip(model.terms, model.coefficients)
        if t.kind == "intercept" or abs(c) >= threshold
    ]
    return LinearTermModel(
        tuple(t for t, _ in keep),
        tuple(c for _, c in keep),
        model.r_squared,
        model.dim,
        model.fs_history,
    )


@dataclass(frozen=True)
class Influence:
    options: frozenset
    pairs: frozenset

    def __bool__(self):
        return bool(self.options)


def influential_terms(model: LinearTermModel) -> Influence:
    options, pairs = set(), set()
    for t in model.terms:
        options.update(t.options)
        if t.kind == "interaction":
            pairs.add((t.i, t.j))
    return Influence(frozenset(options), frozenset(pairs))
