"""Local-constant alternative model scored by cross-validated marginals.

For every covariate subset, each fold's training rows supply a
least-squares working prior for the local mean at each distinct test
covariate point.  The marginal likelihood of the test responses at that
point, conditional on a local noise variance, is maximized over the
variance (empirical Bayes, closed form via a cubic).  Per-fold
geometric-mean marginals are averaged across folds and raised to the
n-th power to give the subset's log marginal likelihood.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .data import (
    Dataset,
    FoldPlan,
    LocalGroup,
    StandardizedFold,
    SubsetMask,
    group_distinct,
    standardize_fold,
)
from .errors import (
    CollinearSubsetError,
    DegenerateFitWarning,
    DegeneratePriorError,
    DomainError,
    InsufficientTrainingError,
    InternalInvariantError,
    NumericalError,
)
from .linear import ModelPosterior, normalize_posterior
from .numerics import log_sum_exp, solve_cubic

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Relative residual below which a training fit counts as exact.
_EXACT_FIT_REL = 1e-26

# Log-marginal candidates within this gap are tied; the smaller variance wins.
_TIE_TOL = 1e-12

_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class FoldFit:
    """Least-squares summary of one fold's training rows.

    Attributes
    ----------
    ybar0 : float
        Training response mean.
    beta_hat : ndarray, shape (k,)
        Coefficients of the standardized covariates.
    gram_inv : ndarray, shape (k, k)
        Inverse Gram matrix of the standardized training design.
    s2 : float
        Residual variance with denominator ``|D0| - k - 1``; exactly 0.0
        when the fit is exact.
    """

    ybar0: float
    beta_hat: np.ndarray
    gram_inv: np.ndarray
    s2: float


@dataclass(frozen=True)
class LocalPrior:
    """Normal working prior for the local mean at one covariate point."""

    yhat_x: float
    t2_x: float


@dataclass(frozen=True)
class LocalMLResult:
    """Outcome of maximizing one group's conditional marginal likelihood.

    ``candidates`` lists every (variance, log marginal) pair examined,
    in evaluation order; ``sigma2_hat`` is the winning variance.
    """

    sigma2_hat: float
    log_ml: float
    candidates: tuple[tuple[float, float], ...]


def fit_fold(fold: StandardizedFold, dataset: Dataset, subset: SubsetMask) -> FoldFit:
    """Least-squares fit of the response on a fold's standardized design.

    Regresses the training responses on an intercept plus the
    standardized selected columns.  With an empty subset the fit is the
    training mean and ``s2`` the sample variance.  An exact fit (zero
    residual sum of squares relative to total) sets ``s2`` to 0.0 and
    emits :class:`DegenerateFitWarning`.
    """
    train = fold.train_ids
    y0 = dataset.y[train]
    n0 = train.size
    k = fold.k
    if n0 <= k + 1:
        raise InsufficientTrainingError(
            f"fold {fold.fold_id}: {n0} training rows cannot fit k={k} covariates"
        )
    ybar0 = float(y0.mean())
    yc = y0 - ybar0
    tss = float(yc @ yc)
    if k == 0:
        beta = np.empty(0)
        gram_inv = np.empty((0, 0))
        rss = tss
    else:
        Z = fold.Z_train
        Q, R = np.linalg.qr(Z)
        diag = np.abs(np.diag(R))
        if diag.min() == 0.0 or np.linalg.cond(R) ** 2 >= _COND_LIMIT:
            raise CollinearSubsetError(
                f"fold {fold.fold_id}: standardized design for "
                f"{subset.label(dataset.names)} is collinear"
            )
        beta = solve_triangular(R, Q.T @ yc, lower=False)
        r_inv = solve_triangular(R, np.eye(k), lower=False)
        gram_inv = r_inv @ r_inv.T
        resid = yc - Z @ beta
        rss = float(resid @ resid)
    if tss == 0.0 or rss <= _EXACT_FIT_REL * tss:
        warnings.warn(
            f"fold {fold.fold_id}: training fit for {subset.label(dataset.names)} "
            "is exact; residual variance is zero",
            DegenerateFitWarning,
            stacklevel=2,
        )
        s2 = 0.0
    else:
        s2 = rss / (n0 - k - 1)
    return FoldFit(ybar0=ybar0, beta_hat=np.asarray(beta), gram_inv=gram_inv, s2=s2)


def local_prior(fit: FoldFit, x_std: np.ndarray, d0_size: int) -> LocalPrior:
    """Working prior for the local mean at a standardized covariate point.

    Mean is the fold fit's prediction; variance is
    ``s2 * (1/d0_size + x' G x)`` with ``G`` the inverse Gram matrix.
    """
    if d0_size < 1:
        raise DomainError(f"training size {d0_size} must be positive")
    if fit.s2 <= 0.0:
        raise DegeneratePriorError(
            "training residual variance is zero; local prior is degenerate"
        )
    x = np.asarray(x_std, dtype=float)
    if fit.beta_hat.size:
        yhat = fit.ybar0 + float(fit.beta_hat @ x)
        quad = float(x @ fit.gram_inv @ x)
        if quad < 0.0:
            quad = 0.0
    else:
        yhat = fit.ybar0
        quad = 0.0
    return LocalPrior(yhat_x=yhat, t2_x=fit.s2 * (1.0 / d0_size + quad))


def log_cond_ml(group: LocalGroup, prior: LocalPrior, sigma2: float) -> float:
    """Log conditional marginal likelihood of a group at noise variance sigma2.

    Computes the log of

        tau / ((sqrt(2 pi) sigma)^n_x t)
            * exp(-(sum(y^2)/sigma^2 + yhat^2/t^2 - mu^2/tau^2) / 2)

    with ``mu = tau^2 (sum(y)/sigma^2 + yhat/t^2)`` and
    ``tau^2 = (n_x/sigma^2 + 1/t^2)^(-1)``.  The quadratic form is
    evaluated in the cancellation-free rearrangement

        n_x s2_y / sigma2 + n_x (ybar - yhat)^2 / (n_x t^2 + sigma2),

    which keeps full relative precision as sigma2 approaches zero.
    """
    if sigma2 <= 0.0:
        raise DomainError(f"noise variance {sigma2} must be positive")
    t2 = prior.t2_x
    if t2 <= 0.0:
        raise DegeneratePriorError("prior variance must be positive")
    nx = group.n_x
    dev = group.ybar_x - prior.yhat_x
    quad = nx * group.s2_y / sigma2 + nx * dev * dev / (nx * t2 + sigma2)
    log_tau = -0.5 * math.log(nx / sigma2 + 1.0 / t2)
    return (
        log_tau
        - nx * (_HALF_LOG_2PI + 0.5 * math.log(sigma2))
        - 0.5 * math.log(t2)
        - 0.5 * quad
    )


def cubic_coefficients(
    n_x: int, s2_y: float, t2_x: float, dev2: float
) -> tuple[float, float, float, float]:
    """Coefficients of the stationarity cubic in the noise variance.

    The stationary points of the log conditional marginal likelihood
    solve ``a1 v^3 + a2 v^2 + a3 v + a4 = 0`` in ``v = sigma2`` with

        a1 = -1/t^4
        a2 = (1 - 2 n_x)/t^2 + (s2_y + dev2)/t^4
        a3 = n_x - n_x^2 + 2 n_x s2_y / t^2
        a4 = n_x^2 s2_y.
    """
    if t2_x <= 0.0:
        raise DomainError(f"prior variance {t2_x} must be positive")
    inv_t2 = 1.0 / t2_x
    inv_t4 = inv_t2 * inv_t2
    a1 = -inv_t4
    a2 = inv_t2 * (1.0 - 2.0 * n_x) + inv_t4 * (s2_y + dev2)
    a3 = -float(n_x) * n_x + n_x + 2.0 * n_x * s2_y * inv_t2
    a4 = float(n_x) * n_x * s2_y
    return a1, a2, a3, a4


def boundary_log_ml(prior: LocalPrior, dev2: float) -> float:
    """Log of the zero-variance limit value of the conditional marginal.

    Equals ``log( exp(-dev2 / (2 t^2)) / (sqrt(2 pi) t) )``.  This is
    the value assigned to the candidate ``sigma2 = 0``.
    """
    t2 = prior.t2_x
    if t2 <= 0.0:
        raise DegeneratePriorError("prior variance must be positive")
    return -_HALF_LOG_2PI - 0.5 * math.log(t2) - 0.5 * dev2 / t2


def maximize_local_ml(group: LocalGroup, prior: LocalPrior) -> LocalMLResult:
    """Empirical-Bayes maximum of a group's conditional marginal likelihood.

    The candidates are the positive roots of the stationarity cubic,
    joined for ``s2_y = 0`` by the zero-variance boundary value and, when
    ``dev^2 > t^2``, the one-member-form optimum ``sigma2 = dev^2 - t^2``
    (for single-member groups the latter coincides with the cubic root).
    With ``s2_y > 0`` at least one positive root exists.  Ties within
    1e-12 in log marginal go to the smaller variance.
    """
    dev = group.ybar_x - prior.yhat_x
    dev2 = dev * dev
    coeffs = cubic_coefficients(group.n_x, group.s2_y, prior.t2_x, dev2)
    stationary = [r for r in solve_cubic(*coeffs).roots if r > 0.0]
    candidates: list[tuple[float, float]] = [
        (r, log_cond_ml(group, prior, r)) for r in stationary
    ]
    if group.s2_y > 0.0:
        if not candidates:
            raise InternalInvariantError(
                f"no positive stationary variance for group with n_x={group.n_x}, "
                f"s2_y={group.s2_y}, t2={prior.t2_x}, dev2={dev2}"
            )
    else:
        candidates.append((0.0, boundary_log_ml(prior, dev2)))
        interior = dev2 - prior.t2_x
        if interior > 0.0 and not any(
            math.isclose(interior, r, rel_tol=1e-9) for r in stationary
        ):
            candidates.append((interior, log_cond_ml(group, prior, interior)))
    best_val = max(v for _, v in candidates)
    sigma2_hat, log_ml = min(
        (s, v) for s, v in candidates if v >= best_val - _TIE_TOL
    )
    return LocalMLResult(
        sigma2_hat=sigma2_hat, log_ml=log_ml, candidates=tuple(candidates)
    )


def fold_log_ml_per_obs(
    fold: StandardizedFold, dataset: Dataset, subset: SubsetMask
) -> float:
    """Per-observation log marginal of one fold's test set.

    Sums the maximized log marginals over the fold's distinct covariate
    groups and divides by the test-set size (log of the geometric mean).
    Errors from the training fit or a degenerate prior propagate.
    """
    fit = fit_fold(fold, dataset, subset)
    d0_size = int(fold.train_ids.size)
    groups = group_distinct(fold, dataset, subset)
    terms = [
        maximize_local_ml(g, local_prior(fit, g.x_std, d0_size)).log_ml
        for g in groups
    ]
    return math.fsum(terms) / fold.test_ids.size


def h0_log_marginal(dataset: Dataset, subset: SubsetMask, plan: FoldPlan) -> float:
    """Cross-validated log marginal likelihood of a subset's local model.

    Averages the per-observation fold marginals (in probability space)
    over all folds and raises to the n-th power:

        n * (log_sum_exp(L_1..L_m) - log m)

    where ``L_f`` is the fold's per-observation log marginal.  A fold
    whose training fit is exact leaves no prior variance; the subset is
    scored ``-inf`` with a warning instead of aborting the run.  Other
    numerical failures abort with fold context attached.
    """
    fold_logs = []
    for fold_id in range(1, plan.m + 1):
        fold = standardize_fold(dataset, subset, plan, fold_id)
        try:
            fold_logs.append(fold_log_ml_per_obs(fold, dataset, subset))
        except DegeneratePriorError:
            warnings.warn(
                f"subset {subset.label(dataset.names)}: degenerate local prior in "
                f"fold {fold_id}; subset scored as -inf",
                DegenerateFitWarning,
                stacklevel=2,
            )
            return -math.inf
        except NumericalError as exc:
            raise type(exc)(
                f"subset {subset.label(dataset.names)}, fold {fold_id}: {exc}"
            ) from exc
    return dataset.n * (log_sum_exp(fold_logs) - math.log(plan.m))


def h0_posterior(
    dataset: Dataset,
    model_space: Sequence[SubsetMask],
    plan: FoldPlan,
) -> ModelPosterior:
    """Posterior over subsets under the local-constant model.

    Parameters
    ----------
    dataset : Dataset
    model_space : sequence of SubsetMask
        Subsets to compare (flat model prior).
    plan : FoldPlan
        Cross-validation plan shared by every subset.

    Returns
    -------
    ModelPosterior
        Probabilities summing to one over ``model_space``.
    """
    scores = {s: h0_log_marginal(dataset, s, plan) for s in model_space}
    return normalize_posterior("local", scores)
