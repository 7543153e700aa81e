"""Combine the two model posteriors into the superset model probability.

The probability that linear-model selection lands on a strict superset
of the subset favored by the local-constant model is the double sum of
``P_linear(M) * P_local(M*)`` over ordered pairs with ``M`` strictly
containing ``M*``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .data import SubsetMask
from .errors import InvalidArgumentError
from .linear import ModelPosterior

# Pair contributions below this threshold are left out of the report's
# listing, subject to the dropped-mass guard below.
PAIR_LIST_THRESHOLD = 1e-15

# Listed contributions must account for the probability up to this slack.
_DROPPED_MASS_LIMIT = 1e-13


@dataclass(frozen=True, eq=False)
class SupersetReport:
    """Result of the superset probability computation.

    Attributes
    ----------
    probability : float
        Total superset probability, in [0, 1].
    inclusive : bool
        Whether equal subsets counted as containment.
    pair_contributions : tuple
        ``(linear_subset, local_subset, contribution)`` triples sorted by
        decreasing contribution; tiny terms are omitted but the listed
        terms sum to ``probability`` within 1e-12.
    settings : mapping
        Free-form provenance (fold count, seed, prior parameter, ...).
    """

    probability: float
    inclusive: bool
    pair_contributions: tuple[tuple[SubsetMask, SubsetMask, float], ...]
    settings: Mapping[str, object] = field(default_factory=dict)


def is_strict_superset(big: SubsetMask, small: SubsetMask) -> bool:
    """True when ``big`` contains every column of ``small`` plus at least one more."""
    if big.p != small.p:
        raise InvalidArgumentError(
            f"mask widths differ: {big.p} vs {small.p}"
        )
    b, s = big.as_int(), small.as_int()
    return (b & s) == s and b != s


def is_superset(big: SubsetMask, small: SubsetMask) -> bool:
    """True when ``big`` contains every column of ``small`` (equality allowed)."""
    if big.p != small.p:
        raise InvalidArgumentError(
            f"mask widths differ: {big.p} vs {small.p}"
        )
    b, s = big.as_int(), small.as_int()
    return (b & s) == s


def superset_probability(
    local_posterior: ModelPosterior,
    linear_posterior: ModelPosterior,
    inclusive: bool = False,
    settings: Mapping[str, object] | None = None,
) -> SupersetReport:
    """Probability that the linear side selects a superset of the local side.

    Parameters
    ----------
    local_posterior : ModelPosterior
        Posterior over subsets under the local-constant model.
    linear_posterior : ModelPosterior
        Posterior over subsets under the linear model.  Both posteriors
        must share the same model space.
    inclusive : bool
        Count equal subsets as containment (default strict).
    settings : mapping, optional
        Provenance copied into the report.

    Returns
    -------
    SupersetReport
    """
    if local_posterior.subsets != linear_posterior.subsets:
        raise InvalidArgumentError(
            "posteriors were computed over different model spaces"
        )
    masks = linear_posterior.subsets
    codes = np.array([mask.as_int() for mask in masks], dtype=np.int64)
    p_lin = linear_posterior.probabilities
    p_loc = local_posterior.probabilities

    contains = (codes[:, None] & codes[None, :]) == codes[None, :]
    if not inclusive:
        contains &= codes[:, None] != codes[None, :]
    contrib = np.where(contains, p_lin[:, None] * p_loc[None, :], 0.0)
    probability = float(contrib.sum())

    rows, cols = np.nonzero(contrib)
    values = contrib[rows, cols]
    order = np.argsort(-values, kind="stable")
    rows, cols, values = rows[order], cols[order], values[order]
    # Tail mass dropped from the listing must stay negligible next to the
    # 1e-12 agreement guarantee between the listing and the total.
    keep = values.size
    tail = 0.0
    for i in range(values.size - 1, -1, -1):
        if values[i] >= PAIR_LIST_THRESHOLD or tail + values[i] > _DROPPED_MASS_LIMIT:
            break
        tail += values[i]
        keep = i
    pairs = tuple(
        (masks[rows[i]], masks[cols[i]], float(values[i])) for i in range(keep)
    )
    return SupersetReport(
        probability=probability,
        inclusive=inclusive,
        pair_contributions=pairs,
        settings=dict(settings or {}),
    )
