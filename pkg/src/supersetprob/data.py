"""Dataset container, covariate subsets, fold plans, and test-side grouping.

Everything downstream consumes these types: a :class:`Dataset` of raw
columns, a :class:`SubsetMask` choosing covariates, a :class:`FoldPlan`
assigning observations to cross-validation folds, per-fold standardized
design matrices, and groups of test observations that share identical
raw covariate values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateColumnError,
    EmptyPartitionError,
    InvalidArgumentError,
    InvalidFoldCountError,
    UnknownColumnError,
)

DEFAULT_PRECISION_COLUMNS = ("BP", "S4")

# Tolerance for deciding that a recorded value is a whole number.
INTEGRAL_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable numeric dataset: response vector plus covariate matrix.

    Attributes
    ----------
    y : ndarray, shape (n,)
        Response values.
    X : ndarray, shape (n, p)
        Raw (unstandardized) covariate columns.
    names : tuple of str
        Column name for each covariate, in matrix order.
    """

    y: np.ndarray
    X: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        y = _readonly(np.asarray(self.y, dtype=float).reshape(-1))
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise InvalidArgumentError("covariate matrix must be 2-dimensional")
        X = _readonly(X)
        names = tuple(str(c) for c in self.names)
        if X.shape[0] != y.shape[0]:
            raise InvalidArgumentError(
                f"response has {y.shape[0]} rows but covariates have {X.shape[0]}"
            )
        if y.shape[0] < 2:
            raise InvalidArgumentError("dataset needs at least 2 observations")
        if X.shape[1] < 1:
            raise InvalidArgumentError("dataset needs at least 1 covariate")
        if len(names) != X.shape[1]:
            raise InvalidArgumentError(
                f"{len(names)} names given for {X.shape[1]} covariate columns"
            )
        if len(set(names)) != len(names):
            raise InvalidArgumentError("covariate names must be unique")
        if not np.isfinite(y).all():
            raise InvalidArgumentError("response contains non-finite values")
        if not np.isfinite(X).all():
            raise InvalidArgumentError("covariates contain non-finite values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_columns(
        cls,
        response: Sequence[float],
        covariates: Mapping[str, Sequence[float]],
    ) -> "Dataset":
        """Build a dataset from a response sequence and named columns."""
        names = tuple(covariates)
        if not names:
            raise InvalidArgumentError("no covariate columns given")
        X = np.column_stack([np.asarray(covariates[c], dtype=float) for c in names])
        return cls(y=np.asarray(response, dtype=float), X=X, names=names)

    def column_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownColumnError(
                f"unknown column {name!r}; available: {', '.join(self.names)}"
            ) from None

    def take_rows(self, rows: np.ndarray) -> "Dataset":
        """New dataset restricted to the given row indices (order kept)."""
        rows = np.asarray(rows, dtype=int)
        return Dataset(y=self.y[rows], X=self.X[rows], names=self.names)


@dataclass(frozen=True)
class SubsetMask:
    """A subset of covariate columns, stored as a p-tuple of booleans.

    Bit i corresponds to column i of the owning dataset.  Masks are
    hashable and ordered by their little-endian integer encoding, so a
    full model space enumerates deterministically.
    """

    bits: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    @classmethod
    def from_indices(cls, p: int, indices: Iterable[int]) -> "SubsetMask":
        idx = set(int(i) for i in indices)
        bad = [i for i in idx if i < 0 or i >= p]
        if bad:
            raise InvalidArgumentError(f"column indices {sorted(bad)} outside 0..{p - 1}")
        return cls(tuple(i in idx for i in range(p)))

    @property
    def p(self) -> int:
        return len(self.bits)

    @property
    def k(self) -> int:
        return sum(self.bits)

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def as_int(self) -> int:
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    def label(self, names: Sequence[str]) -> str:
        chosen = [names[i] for i in self.indices()]
        return "+".join(chosen) if chosen else "(empty)"


def all_subsets(p: int, include_empty: bool = True) -> list[SubsetMask]:
    """Enumerate every covariate subset of a p-column dataset.

    Subsets are ordered by their integer encoding, empty set first when
    included.
    """
    if p < 1:
        raise InvalidArgumentError("p must be at least 1")
    start = 0 if include_empty else 1
    return [
        SubsetMask(tuple(bool(code >> i & 1) for i in range(p)))
        for code in range(start, 1 << p)
    ]


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Assignment of each observation to one of m cross-validation folds.

    Attributes
    ----------
    m : int
        Number of folds.
    assignment : ndarray of int, shape (n,)
        Fold id in 1..m for each observation.
    seed : int
        Seed used to draw the assignment.
    prng : str
        Identifier of the shuffle recipe, for report provenance.
    """

    m: int
    assignment: np.ndarray
    seed: int
    prng: str = "fisher-yates/pcg64"

    def __post_init__(self):
        a = np.array(self.assignment, dtype=int, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def n(self) -> int:
        return self.assignment.shape[0]

    def test_ids(self, fold_id: int) -> np.ndarray:
        """Ascending indices of observations held out in the given fold."""
        self._check_fold(fold_id)
        return np.flatnonzero(self.assignment == fold_id)

    def train_ids(self, fold_id: int) -> np.ndarray:
        """Ascending indices of observations used for fitting in the fold."""
        self._check_fold(fold_id)
        return np.flatnonzero(self.assignment != fold_id)

    def fold_sizes(self) -> list[int]:
        return [int(np.sum(self.assignment == f)) for f in range(1, self.m + 1)]

    def _check_fold(self, fold_id: int) -> None:
        if not 1 <= fold_id <= self.m:
            raise InvalidArgumentError(f"fold id {fold_id} outside 1..{self.m}")


def _fisher_yates(n: int, rng: np.random.Generator) -> np.ndarray:
    # Explicit backward Fisher-Yates so the draw sequence is pinned to the
    # seed independently of library-internal shuffle implementations.
    idx = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def make_folds(n: int, m: int, seed: int) -> FoldPlan:
    """Randomly partition n observations into m folds of near-equal size.

    Observations are shuffled with a seeded Fisher-Yates pass and then
    dealt round-robin, so fold sizes differ by at most one: ``n mod m``
    folds receive ``ceil(n / m)`` observations and the rest receive
    ``floor(n / m)``.

    Parameters
    ----------
    n : int
        Number of observations.
    m : int
        Number of folds, between 2 and n inclusive.
    seed : int
        Seed for the shuffle.

    Returns
    -------
    FoldPlan
    """
    if n < 2:
        raise InvalidArgumentError("need at least 2 observations to fold")
    if not 2 <= m <= n:
        raise InvalidFoldCountError(f"fold count {m} outside valid range 2..{n}")
    rng = np.random.default_rng(seed)
    order = _fisher_yates(n, rng)
    assignment = np.empty(n, dtype=int)
    for pos, obs in enumerate(order):
        assignment[obs] = pos % m + 1
    return FoldPlan(m=m, assignment=assignment, seed=int(seed))


@dataclass(frozen=True, eq=False)
class StandardizedFold:
    """Train/test split of one fold with train-standardized covariates.

    Standardization statistics come from the training rows only and are
    applied unchanged to the held-out rows; the response is never
    standardized.
    """

    fold_id: int
    train_ids: np.ndarray
    test_ids: np.ndarray
    train_mean: np.ndarray
    train_sd: np.ndarray
    Z_train: np.ndarray
    Z_test: np.ndarray

    @property
    def k(self) -> int:
        return self.train_mean.shape[0]


def standardize_fold(
    dataset: Dataset, subset: SubsetMask, plan: FoldPlan, fold_id: int
) -> StandardizedFold:
    """Extract one fold and standardize the selected covariate columns.

    Each selected column is centered by its training mean and divided by
    its training sample standard deviation (denominator n - 1).  A
    training column with zero standard deviation cannot be standardized
    and raises :class:`DegenerateColumnError`.
    """
    if subset.p != dataset.p:
        raise InvalidArgumentError(
            f"mask width {subset.p} does not match dataset with p={dataset.p}"
        )
    if plan.n != dataset.n:
        raise InvalidArgumentError(
            f"fold plan for n={plan.n} applied to dataset with n={dataset.n}"
        )
    train = plan.train_ids(fold_id)
    test = plan.test_ids(fold_id)
    cols = subset.indices()
    if not cols:
        empty_tr = np.empty((train.size, 0))
        empty_te = np.empty((test.size, 0))
        return StandardizedFold(
            fold_id=fold_id,
            train_ids=train,
            test_ids=test,
            train_mean=np.empty(0),
            train_sd=np.empty(0),
            Z_train=empty_tr,
            Z_test=empty_te,
        )
    Xtr = dataset.X[np.ix_(train, cols)]
    Xte = dataset.X[np.ix_(test, cols)]
    mean = Xtr.mean(axis=0)
    sd = Xtr.std(axis=0, ddof=1)
    zero = np.flatnonzero(sd == 0.0)
    if zero.size:
        bad = dataset.names[cols[int(zero[0])]]
        raise DegenerateColumnError(
            f"column {bad!r} is constant on the training rows of fold {fold_id}"
        )
    return StandardizedFold(
        fold_id=fold_id,
        train_ids=train,
        test_ids=test,
        train_mean=mean,
        train_sd=sd,
        Z_train=(Xtr - mean) / sd,
        Z_test=(Xte - mean) / sd,
    )


@dataclass(frozen=True, eq=False)
class LocalGroup:
    """Test observations of one fold sharing identical raw covariate values.

    Attributes
    ----------
    member_ids : ndarray of int
        Dataset row indices of the group's observations, ascending.
    x_raw : ndarray
        The shared raw covariate values (selected columns only).
    x_std : ndarray
        The same point after the fold's training standardization.
    n_x : int
        Group size.
    ybar_x : float
        Mean response within the group.
    s2_y : float
        Within-group response variance with denominator ``n_x`` (not
        ``n_x - 1``); exactly 0.0 when all responses coincide.
    """

    member_ids: np.ndarray
    x_raw: np.ndarray
    x_std: np.ndarray
    n_x: int
    ybar_x: float
    s2_y: float


def group_distinct(
    fold: StandardizedFold, dataset: Dataset, subset: SubsetMask
) -> list[LocalGroup]:
    """Group the fold's test observations by exact raw covariate equality.

    Grouping compares the raw stored values of the selected columns for
    exact equality; no tolerance is applied.  With an empty subset every
    test observation falls into a single group.  Groups are returned in
    order of first appearance along ascending dataset row index, so the
    output is deterministic for a given fold plan.
    """
    cols = subset.indices()
    test = fold.test_ids
    raw = dataset.X[np.ix_(test, cols)] if cols else np.empty((test.size, 0))
    by_key: dict[tuple, list[int]] = {}
    for pos in range(test.size):
        by_key.setdefault(tuple(raw[pos]), []).append(pos)
    groups = []
    for key, positions in by_key.items():
        ids = test[positions]
        ys = dataset.y[ids]
        lo = ys.min()
        if lo == ys.max():
            # All responses identical: pin the mean to the common value and
            # the variance to an exact zero so downstream boundary logic
            # sees the degenerate case it expects.
            ybar = float(lo)
            s2_y = 0.0
        else:
            ybar = float(ys.mean())
            s2_y = float(np.mean((ys - ybar) ** 2))
        groups.append(
            LocalGroup(
                member_ids=ids,
                x_raw=np.array(key),
                x_std=fold.Z_test[positions[0]].copy(),
                n_x=len(positions),
                ybar_x=ybar,
                s2_y=s2_y,
            )
        )
    return groups


def is_integral(values: np.ndarray, tol: float = INTEGRAL_TOL) -> np.ndarray:
    """Boolean mask of entries within ``tol`` of a whole number."""
    v = np.asarray(values, dtype=float)
    return np.abs(v - np.round(v)) < tol


def precision_split(
    dataset: Dataset,
    precision_columns: Sequence[str] = DEFAULT_PRECISION_COLUMNS,
) -> tuple[Dataset, Dataset]:
    """Split rows into the two recording-precision groups of the columns.

    Rows where every precision column holds a whole number (within
    :data:`INTEGRAL_TOL`) form the *fine* partition; rows where at least
    one column carries a fractional value (averaged readings, ratios
    kept to extra decimals) form the *coarse* partition.  Returns
    ``(fine, coarse)``; together they partition the rows.
    """
    if not precision_columns:
        raise InvalidArgumentError("need at least one precision column")
    idx = [dataset.column_index(c) for c in precision_columns]
    integral = np.ones(dataset.n, dtype=bool)
    for j in idx:
        integral &= is_integral(dataset.X[:, j])
    fine_rows = np.flatnonzero(integral)
    coarse_rows = np.flatnonzero(~integral)
    cols = ", ".join(precision_columns)
    if fine_rows.size == 0:
        raise EmptyPartitionError(
            f"no rows have whole-number values in precision columns ({cols})"
        )
    if coarse_rows.size == 0:
        raise EmptyPartitionError(
            f"no rows have fractional values in precision columns ({cols})"
        )
    return dataset.take_rows(fine_rows), dataset.take_rows(coarse_rows)
