"""Local-constant model: fold fits, group marginals, and the H0 posterior."""

import math
import warnings

import numpy as np
import pytest
from scipy.stats import norm

import oracles
from supersetprob.data import (
    Dataset,
    FoldPlan,
    LocalGroup,
    SubsetMask,
    all_subsets,
    group_distinct,
    make_folds,
    standardize_fold,
)
from supersetprob.errors import (
    DegenerateFitWarning,
    DegeneratePriorError,
    DomainError,
    InsufficientTrainingError,
)
from supersetprob.linear import h1_posterior
from supersetprob.local import (
    LocalPrior,
    boundary_log_ml,
    cubic_coefficients,
    fit_fold,
    fold_log_ml_per_obs,
    h0_log_marginal,
    h0_posterior,
    local_prior,
    log_cond_ml,
    maximize_local_ml,
)
from supersetprob.synth import SynthConfig, generate


def _mask(p, *indices):
    return SubsetMask.from_indices(p, indices)


def _plan(assignment):
    a = np.asarray(assignment, dtype=int)
    return FoldPlan(m=int(a.max()), assignment=a, seed=0)


def _group(ys, x_std=(), member_ids=None):
    # Mirrors group_distinct: identical responses get an exact zero
    # variance, never a rounded residual of the mean computation.
    ys = np.asarray(ys, dtype=float)
    ids = np.arange(ys.size) if member_ids is None else np.asarray(member_ids)
    if float(ys.min()) == float(ys.max()):
        ybar, s2y = float(ys[0]), 0.0
    else:
        ybar = float(ys.mean())
        s2y = float(np.mean((ys - ybar) ** 2))
    return LocalGroup(
        member_ids=ids,
        x_raw=np.asarray(x_std, dtype=float),
        x_std=np.asarray(x_std, dtype=float),
        n_x=ys.size,
        ybar_x=ybar,
        s2_y=s2y,
    )


# --- fit_fold ---------------------------------------------------------------


def test_fit_fold_mean_only():
    ds = Dataset.from_columns(
        [1.0, 2.0, 3.0, 9.0, 9.0], {"x": [0.0, 1.0, 2.0, 3.0, 4.0]}
    )
    plan = _plan([2, 2, 2, 1, 1])
    fold = standardize_fold(ds, _mask(1), plan, 1)
    fit = fit_fold(fold, ds, _mask(1))
    assert fit.ybar0 == pytest.approx(2.0)
    assert fit.s2 == pytest.approx(1.0)
    assert fit.beta_hat.size == 0


def test_fit_fold_exact_fit_warns():
    x = np.arange(8.0)
    ds = Dataset.from_columns(2.0 * x + 1.0, {"x": x})
    plan = _plan([1, 2, 1, 2, 1, 2, 1, 2])
    fold = standardize_fold(ds, _mask(1, 0), plan, 1)
    with pytest.warns(DegenerateFitWarning):
        fit = fit_fold(fold, ds, _mask(1, 0))
    assert fit.s2 == 0.0


def test_fit_fold_too_few_training_rows():
    ds = Dataset.from_columns(
        [1.0, 2.0, 3.0, 4.0], {"a": [0.0, 1.0, 0.5, 2.0], "b": [3.0, 1.0, 4.0, 1.5]}
    )
    plan = _plan([2, 2, 1, 1])  # fold 2 trains on 2 rows, k = 2
    fold = standardize_fold(ds, _mask(2, 0, 1), plan, 2)
    with pytest.raises(InsufficientTrainingError):
        fit_fold(fold, ds, _mask(2, 0, 1))


def test_fit_fold_matches_ols_oracle(diabetes):
    plan = make_folds(diabetes.n, 10, seed=0)
    subset = _mask(10, 2, 3, 8)
    fold = standardize_fold(diabetes, subset, plan, 1)
    fit = fit_fold(fold, diabetes, subset)
    want = oracles.ols_fit(diabetes.y[fold.train_ids], fold.Z_train)
    assert fit.ybar0 == pytest.approx(want["intercept"], abs=1e-8)
    assert fit.beta_hat == pytest.approx(want["beta"], abs=1e-8)
    assert fit.s2 == pytest.approx(want["s2"], rel=1e-10)
    assert fit.gram_inv == pytest.approx(want["gram_inv"], abs=1e-10)


# --- local_prior ------------------------------------------------------------


def test_local_prior_mean_only_example():
    from supersetprob.local import FoldFit

    fit = FoldFit(ybar0=2.0, beta_hat=np.empty(0), gram_inv=np.empty((0, 0)), s2=1.0)
    prior = local_prior(fit, np.empty(0), d0_size=4)
    assert prior.yhat_x == pytest.approx(2.0)
    assert prior.t2_x == pytest.approx(0.25)


def test_local_prior_matches_oracle(diabetes):
    plan = make_folds(diabetes.n, 10, seed=0)
    subset = _mask(10, 2, 3)
    fold = standardize_fold(diabetes, subset, plan, 3)
    fit = fit_fold(fold, diabetes, subset)
    want = oracles.ols_fit(diabetes.y[fold.train_ids], fold.Z_train)
    n0 = fold.train_ids.size
    for i in range(min(5, fold.Z_test.shape[0])):
        x = fold.Z_test[i]
        prior = local_prior(fit, x, n0)
        t2_want = want["s2"] * (1.0 / n0 + float(x @ want["gram_inv"] @ x))
        yhat_want = want["intercept"] + float(want["beta"] @ x)
        assert prior.yhat_x == pytest.approx(yhat_want, abs=1e-8)
        assert prior.t2_x == pytest.approx(t2_want, rel=1e-8)


def test_local_prior_degenerate_and_domain():
    from supersetprob.local import FoldFit

    fit = FoldFit(ybar0=0.0, beta_hat=np.empty(0), gram_inv=np.empty((0, 0)), s2=0.0)
    with pytest.raises(DegeneratePriorError):
        local_prior(fit, np.empty(0), d0_size=4)
    ok = FoldFit(ybar0=0.0, beta_hat=np.empty(0), gram_inv=np.empty((0, 0)), s2=1.0)
    with pytest.raises(DomainError):
        local_prior(ok, np.empty(0), d0_size=0)


# --- log_cond_ml ------------------------------------------------------------


def test_log_cond_ml_standard_normal_point():
    g = _group([0.0])
    prior = LocalPrior(yhat_x=0.0, t2_x=1.0)
    assert log_cond_ml(g, prior, 1.0) == pytest.approx(
        -0.5 * math.log(4.0 * math.pi), abs=1e-14
    )


def test_log_cond_ml_single_member_predictive_identity(rng):
    for _ in range(50):
        y = float(rng.normal(scale=5.0))
        yhat = float(rng.normal())
        t2 = float(rng.lognormal())
        s2 = float(rng.lognormal())
        got = log_cond_ml(_group([y]), LocalPrior(yhat, t2), s2)
        want = norm.logpdf(y, loc=yhat, scale=math.sqrt(t2 + s2))
        assert got == pytest.approx(want, abs=1e-12)


def test_log_cond_ml_matches_mvn_oracle(rng):
    for _ in range(50):
        nx = int(rng.integers(1, 7))
        ys = rng.normal(scale=3.0, size=nx)
        if rng.random() < 0.3:
            ys[:] = ys[0]  # tied responses
        yhat = float(rng.normal())
        t2 = float(rng.lognormal())
        s2 = float(rng.lognormal())
        got = log_cond_ml(_group(ys), LocalPrior(yhat, t2), s2)
        want = oracles.log_ml_mvn(ys, yhat, t2, s2)
        assert got == pytest.approx(want, abs=1e-10)


def test_log_cond_ml_matches_quadrature_oracle():
    ys = np.array([1.0, 1.5, -0.5])
    got = log_cond_ml(_group(ys), LocalPrior(0.3, 0.7), 2.1)
    want = oracles.log_ml_theta_quad(ys, 0.3, 0.7, 2.1)
    assert got == pytest.approx(want, abs=1e-10)


def test_log_cond_ml_extreme_magnitudes_stay_finite():
    # Log-domain arithmetic must survive |log ml| of order 1e4.
    g = _group([30.0])
    prior = LocalPrior(yhat_x=0.0, t2_x=1e-5)
    got = log_cond_ml(g, prior, 4.5e-5)
    want = norm.logpdf(30.0, loc=0.0, scale=math.sqrt(1e-5 + 4.5e-5))
    assert math.isfinite(got)
    assert abs(got) > 1e4
    assert got == pytest.approx(float(want), rel=1e-12)


def test_log_cond_ml_domain_errors():
    g = _group([1.0])
    with pytest.raises(DomainError):
        log_cond_ml(g, LocalPrior(0.0, 1.0), 0.0)
    with pytest.raises(DegeneratePriorError):
        log_cond_ml(g, LocalPrior(0.0, 0.0), 1.0)


# --- stationarity cubic and maximization ------------------------------------


def test_cubic_coefficients_examples():
    assert cubic_coefficients(1, 0.0, 1.0, 4.0) == pytest.approx((-1.0, 3.0, 0.0, 0.0))
    assert cubic_coefficients(2, 1.0, 1.0, 0.0) == pytest.approx((-1.0, -2.0, 2.0, 4.0))
    with pytest.raises(DomainError):
        cubic_coefficients(2, 1.0, 0.0, 0.0)


def test_boundary_log_ml_example():
    assert boundary_log_ml(LocalPrior(0.0, 1.0), 0.0) == pytest.approx(
        -0.5 * math.log(2.0 * math.pi)
    )
    assert boundary_log_ml(LocalPrior(0.0, 1.0), 4.0) == pytest.approx(
        -0.5 * math.log(2.0 * math.pi) - 2.0
    )


def test_maximize_single_member_at_prior_mean():
    res = maximize_local_ml(_group([0.0]), LocalPrior(0.0, 1.0))
    assert res.sigma2_hat == 0.0
    assert res.log_ml == pytest.approx(-0.9189385332046727, abs=1e-12)


def test_maximize_single_member_offset():
    # dev^2 = 4 > t^2 = 1: optimum at sigma2 = 3 with predictive value
    # N(2; 0, 4), about log 0.1210.
    res = maximize_local_ml(_group([2.0]), LocalPrior(0.0, 1.0))
    assert res.sigma2_hat == pytest.approx(3.0, rel=1e-9)
    want = -0.5 * math.log(8.0 * math.pi) - 0.5
    assert res.log_ml == pytest.approx(want, abs=1e-10)
    assert math.exp(res.log_ml) == pytest.approx(0.1210, abs=5e-5)


def test_maximize_symmetric_pair_root():
    # ys (-1, 1), prior (0, 1): stationary cubic factors with positive
    # root sqrt(2).
    res = maximize_local_ml(_group([-1.0, 1.0]), LocalPrior(0.0, 1.0))
    assert res.sigma2_hat == pytest.approx(math.sqrt(2.0), rel=1e-10)
    want = oracles.log_ml_mvn(np.array([-1.0, 1.0]), 0.0, 1.0, math.sqrt(2.0))
    assert res.log_ml == pytest.approx(want, abs=1e-10)


def test_maximize_matches_grid_oracle_untied(rng):
    for _ in range(100):
        nx = int(rng.integers(2, 8))
        ys = rng.normal(loc=rng.normal(), scale=rng.lognormal(), size=nx)
        yhat = float(rng.normal())
        t2 = float(rng.lognormal(sigma=1.5))
        res = maximize_local_ml(_group(ys), LocalPrior(yhat, t2))
        want = oracles.maximize_group_oracle(ys, yhat, t2)
        assert res.log_ml == pytest.approx(want["log_ml"], abs=1e-6)
        assert res.sigma2_hat == pytest.approx(want["sigma2_hat"], rel=1e-4)


def test_maximize_matches_grid_oracle_tied(rng):
    # Fully tied responses exercise the boundary-value candidates and any
    # stationary roots jointly.
    for _ in range(100):
        nx = int(rng.integers(1, 8))
        ys = np.full(nx, float(rng.normal(scale=2.0)))
        yhat = float(rng.normal(scale=2.0))
        t2 = float(rng.lognormal(sigma=1.5))
        res = maximize_local_ml(_group(ys), LocalPrior(yhat, t2))
        want = oracles.maximize_group_oracle(ys, yhat, t2)
        assert res.log_ml == pytest.approx(want["log_ml"], abs=1e-6)


def test_maximize_reports_candidates():
    res = maximize_local_ml(_group([2.0]), LocalPrior(0.0, 1.0))
    assert len(res.candidates) >= 2  # stationary root plus boundary value
    assert all(math.isfinite(v) for _, v in res.candidates)
    assert res.log_ml == max(v for _, v in res.candidates)


# --- fold scoring and subset marginals --------------------------------------


def test_fold_per_obs_single_pooled_group():
    ds = Dataset.from_columns(
        [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], {"x": [0, 1, 2, 3, 4, 5]}
    )
    plan = _plan([2, 1, 2, 1, 2, 1])
    subset = _mask(1)  # empty: all test rows share the (empty) point
    fold = standardize_fold(ds, subset, plan, 1)
    fit = fit_fold(fold, ds, subset)
    groups = group_distinct(fold, ds, subset)
    assert len(groups) == 1
    prior = local_prior(fit, groups[0].x_std, fold.train_ids.size)
    want = maximize_local_ml(groups[0], prior).log_ml / fold.test_ids.size
    assert fold_log_ml_per_obs(fold, ds, subset) == pytest.approx(want, abs=1e-15)


def test_fold_per_obs_matches_oracle_synthetic(rng):
    n = 24
    x = np.repeat([0.0, 1.0, 2.0, 3.0], 6)
    y = 1.5 * x + rng.normal(scale=0.8, size=n)
    y[x == 2.0] = 5.0  # one fully tied group
    ds = Dataset.from_columns(y, {"x": x, "z": rng.normal(size=n)})
    plan = make_folds(n, 4, seed=7)
    for subset in (_mask(2, 0), _mask(2), _mask(2, 0, 1)):
        for fold_id in (1, 3):
            fold = standardize_fold(ds, subset, plan, fold_id)
            got = fold_log_ml_per_obs(fold, ds, subset)
            want = oracles.fold_per_obs_oracle(ds, subset, plan, fold_id)
            assert got == pytest.approx(want, abs=1e-9)


def test_fold_per_obs_matches_oracle_diabetes(diabetes):
    plan = make_folds(diabetes.n, 10, seed=0)
    subset = _mask(10, 1, 2, 3)
    fold = standardize_fold(diabetes, subset, plan, 2)
    got = fold_log_ml_per_obs(fold, diabetes, subset)
    want = oracles.fold_per_obs_oracle(diabetes, subset, plan, 2)
    assert got == pytest.approx(want, abs=1e-9)


def test_h0_log_marginal_aggregation_identity(rng):
    n = 30
    ds = Dataset.from_columns(
        rng.normal(size=n) + 2.0, {"x": rng.normal(size=n)}
    )
    plan = make_folds(n, 3, seed=1)
    subset = _mask(1, 0)
    per_fold = [
        fold_log_ml_per_obs(standardize_fold(ds, subset, plan, f), ds, subset)
        for f in (1, 2, 3)
    ]
    from supersetprob.numerics import log_sum_exp

    want = n * (log_sum_exp(per_fold) - math.log(3))
    assert h0_log_marginal(ds, subset, plan) == pytest.approx(want, abs=1e-12)


def test_h0_log_marginal_equal_folds_identity(monkeypatch):
    # With every fold scoring the same per-observation value L, the
    # marginal is exactly n * L regardless of fold count.
    ds = Dataset.from_columns(
        np.arange(10.0), {"x": np.arange(10.0) % 3}
    )
    monkeypatch.setattr(
        "supersetprob.local.fold_log_ml_per_obs", lambda fold, d, s: -1.7
    )
    plan = make_folds(10, 5, seed=0)
    assert h0_log_marginal(ds, _mask(1), plan) == pytest.approx(-17.0, abs=1e-12)


def test_h0_log_marginal_mixture_arithmetic(monkeypatch):
    # Folds at log 2 and log 4 average to log 3 per observation: n = 10
    # observations give 10 log 3.
    ds = Dataset.from_columns(np.arange(10.0), {"x": np.arange(10.0)})
    vals = {1: math.log(2.0), 2: math.log(4.0)}
    monkeypatch.setattr(
        "supersetprob.local.fold_log_ml_per_obs",
        lambda fold, d, s: vals[fold.fold_id],
    )
    plan = make_folds(10, 2, seed=0)
    got = h0_log_marginal(ds, _mask(1), plan)
    assert got == pytest.approx(10.0 * math.log(3.0), abs=1e-12)


def test_h0_log_marginal_fold_relabel_invariant(rng):
    n = 20
    ds = Dataset.from_columns(
        rng.normal(size=n), {"x": rng.integers(0, 4, size=n).astype(float)}
    )
    plan = make_folds(n, 4, seed=3)
    relabel = {1: 3, 2: 1, 3: 4, 4: 2}
    permuted = FoldPlan(
        m=4,
        assignment=np.array([relabel[f] for f in plan.assignment]),
        seed=plan.seed,
    )
    a = h0_log_marginal(ds, _mask(1, 0), plan)
    b = h0_log_marginal(ds, _mask(1, 0), permuted)
    assert a == b  # bit-identical: fold order must not matter


def test_h0_log_marginal_degenerate_training_scores_neg_inf():
    x = np.arange(12.0)
    ds = Dataset.from_columns(2.0 * x + 1.0, {"x": x})
    plan = make_folds(12, 3, seed=0)
    with pytest.warns(DegenerateFitWarning):
        got = h0_log_marginal(ds, _mask(1, 0), plan)
    assert got == -math.inf


def test_h0_posterior_single_model(rng):
    ds = Dataset.from_columns(
        rng.normal(size=12), {"x": rng.integers(0, 3, 12).astype(float)}
    )
    post = h0_posterior(ds, [_mask(1)], make_folds(12, 3, seed=0))
    assert post.probabilities.tolist() == [1.0]
    assert post.hypothesis == "local"


def test_h0_posterior_identical_columns_split_evenly(rng):
    x = rng.integers(0, 4, 20).astype(float)
    ds = Dataset.from_columns(
        rng.normal(size=20) + x, {"a": x, "b": x.copy()}
    )
    plan = make_folds(20, 4, seed=2)
    post = h0_posterior(ds, [_mask(2, 0), _mask(2, 1)], plan)
    assert post.probabilities == pytest.approx([0.5, 0.5], abs=1e-14)


def test_quadratic_truth_posterior_modes():
    # Frozen behavior on the bundled generator at its defaults: the local
    # model's mode keeps both the linear and quadratic columns (plus a
    # distractor); the linear model's mode is exactly those two columns.
    ds = generate(SynthConfig(seed=0))
    plan = make_folds(ds.n, 10, seed=0)
    space = all_subsets(ds.p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateFitWarning)
        p0 = h0_posterior(ds, space, plan)
    p1 = h1_posterior(ds, space)
    top0, prob0 = p0.top(1)[0]
    assert {0, 1} <= set(top0.indices())
    assert prob0 > 0.5
    top1, prob1 = p1.top(1)[0]
    assert top1.indices() == (0, 1)
    assert prob1 > 0.9
