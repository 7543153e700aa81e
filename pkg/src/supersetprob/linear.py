"""Normal linear model side: per-subset fit and posterior over subsets.

Each covariate subset is scored by the log Bayes factor of the
standardized linear model against the intercept-only model under the
heavy-tailed mixing prior; exponentiating and normalizing over the model
space yields the posterior used on the "linear" side of the superset
probability.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .data import Dataset, SubsetMask
from .errors import (
    CollinearSubsetError,
    DegenerateColumnError,
    InsufficientObservationsError,
    InvalidArgumentError,
    NumericalError,
    SaturatedFitError,
    SaturatedFitWarning,
)
from .numerics import log_g_integral, log_sum_exp

# Condition-number cutoff (squared singular-value ratio) for treating the
# standardized design as collinear.
_COND_LIMIT = 1e12

# R^2 is clipped to this ceiling before the mixing integral.
R2_CEILING = 1.0 - 1e-12


@dataclass(frozen=True)
class H1ModelScore:
    """Fit summary of one subset under the linear model."""

    subset: SubsetMask
    r2: float
    log_bf: float


@dataclass(frozen=True, eq=False)
class ModelPosterior:
    """Normalized posterior over a model space of covariate subsets.

    ``log_weights`` holds the unnormalized log scores the posterior was
    built from; ``probabilities`` is the normalized distribution in the
    same subset order as ``subsets``.
    """

    hypothesis: str
    subsets: tuple[SubsetMask, ...]
    probabilities: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probabilities, dtype=float, copy=True)
        lw = np.array(self.log_weights, dtype=float, copy=True)
        if len(self.subsets) != probs.shape[0] or probs.shape != lw.shape:
            raise InvalidArgumentError("posterior fields have mismatched lengths")
        probs.setflags(write=False)
        lw.setflags(write=False)
        object.__setattr__(self, "subsets", tuple(self.subsets))
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "log_weights", lw)

    def probability(self, subset: SubsetMask) -> float:
        for mask, prob in zip(self.subsets, self.probabilities):
            if mask == subset:
                return float(prob)
        raise InvalidArgumentError("subset not in this posterior's model space")

    def top(self, count: int = 10) -> list[tuple[SubsetMask, float]]:
        """Highest-probability subsets, ties broken by subset encoding."""
        order = sorted(
            range(len(self.subsets)),
            key=lambda i: (-self.probabilities[i], self.subsets[i].as_int()),
        )
        return [(self.subsets[i], float(self.probabilities[i])) for i in order[:count]]


def normalize_posterior(
    hypothesis: str, scores: Mapping[SubsetMask, float]
) -> ModelPosterior:
    """Turn per-subset log scores into a posterior summing to one.

    Weights are exponentiated after subtracting their log-sum, then
    renormalized once more in probability space so the total is one to
    within accumulated rounding (verified to 1e-12 downstream).
    """
    if not scores:
        raise InvalidArgumentError("cannot normalize an empty model space")
    subsets = sorted(scores, key=SubsetMask.as_int)
    lw = np.array([scores[s] for s in subsets], dtype=float)
    if np.isnan(lw).any():
        raise NumericalError("model score is NaN")
    total = log_sum_exp(lw)
    if total == -math.inf:
        raise NumericalError(
            f"all {len(subsets)} model scores are -inf; posterior undefined"
        )
    probs = np.exp(lw - total)
    probs /= probs.sum()
    return ModelPosterior(
        hypothesis=hypothesis,
        subsets=tuple(subsets),
        probabilities=probs,
        log_weights=lw,
    )


def _standardized_design(dataset: Dataset, subset: SubsetMask) -> np.ndarray:
    cols = subset.indices()
    X = dataset.X[:, cols]
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    zero = np.flatnonzero(sd == 0.0)
    if zero.size:
        name = dataset.names[cols[int(zero[0])]]
        raise DegenerateColumnError(f"column {name!r} is constant across the dataset")
    return (X - mean) / sd


def r_squared(dataset: Dataset, subset: SubsetMask) -> float:
    """Coefficient of determination of the least-squares fit on a subset.

    The selected columns are standardized on the full dataset and the
    centered response is regressed on them via a QR factorization.  The
    empty subset returns 0.0.  Values at or above ``R2_CEILING`` are
    clipped to it with a :class:`SaturatedFitWarning`.
    """
    if subset.p != dataset.p:
        raise InvalidArgumentError(
            f"mask width {subset.p} does not match dataset with p={dataset.p}"
        )
    k = subset.k
    if k == 0:
        return 0.0
    if dataset.n <= k + 1:
        raise InsufficientObservationsError(
            f"n={dataset.n} observations cannot fit k={k} covariates plus intercept"
        )
    Z = _standardized_design(dataset, subset)
    yc = dataset.y - dataset.y.mean()
    tss = float(yc @ yc)
    if tss == 0.0:
        raise SaturatedFitError("response is constant; R^2 is undefined")
    Q, R = np.linalg.qr(Z)
    diag = np.abs(np.diag(R))
    if diag.min() == 0.0 or np.linalg.cond(R) ** 2 >= _COND_LIMIT:
        raise CollinearSubsetError(
            f"columns {subset.label(dataset.names)} are collinear to working precision"
        )
    coef = solve_triangular(R, Q.T @ yc, lower=False)
    resid = yc - Z @ coef
    rss = float(resid @ resid)
    r2 = 1.0 - rss / tss
    if r2 < 0.0:
        r2 = 0.0
    if r2 > R2_CEILING:
        warnings.warn(
            f"R^2 = {r2} for {subset.label(dataset.names)} clipped to {R2_CEILING}",
            SaturatedFitWarning,
            stacklevel=2,
        )
        r2 = R2_CEILING
    return r2


def score_subset(dataset: Dataset, subset: SubsetMask, a: float = 3.0) -> H1ModelScore:
    """Log Bayes factor of one subset's linear model against the null."""
    r2 = r_squared(dataset, subset)
    return H1ModelScore(
        subset=subset,
        r2=r2,
        log_bf=log_g_integral(dataset.n, subset.k, r2, a),
    )


def h1_posterior(
    dataset: Dataset,
    model_space: Sequence[SubsetMask],
    a: float = 3.0,
) -> ModelPosterior:
    """Posterior over subsets under the linear model with a flat model prior.

    Parameters
    ----------
    dataset : Dataset
    model_space : sequence of SubsetMask
        Subsets to compare; must be non-empty and may include the empty
        subset (scored as the null with log Bayes factor 0).
    a : float
        Tail parameter of the mixing prior, must exceed 2.

    Returns
    -------
    ModelPosterior
        Probabilities summing to one over ``model_space``.
    """
    scores = {s: score_subset(dataset, s, a).log_bf for s in model_space}
    return normalize_posterior("linear", scores)
