"""Synthetic benchmark generator: quadratic response on a gridded covariate.

The generated dataset has one true covariate ``xT`` observed on a small
repeated grid (so identical covariate values recur in test folds), an
engineered column ``xU = xT^2``, and independent standard normal
distractor columns.  The response is quadratic in ``xT``, which a
linear model can only capture through ``xU``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class SynthConfig:
    """Settings of the synthetic quadratic benchmark.

    Attributes
    ----------
    n_per_point : int
        Replicates of each grid value.
    grid : tuple of float
        Support of the true covariate.
    alpha, beta1, beta2 : float
        Intercept, linear, and quadratic response coefficients
        (``beta2 = 0`` gives a purely linear response).
    noise_sd : float
        Standard deviation of the response noise.
    distractors : int
        Number of independent N(0, 1) nuisance columns.
    seed : int
        Seed for all random draws.
    """

    n_per_point: int = 40
    grid: tuple[float, ...] = (-2.0, -1.0, 0.0, 1.0, 2.0)
    alpha: float = 0.0
    beta1: float = 1.0
    beta2: float = 1.0
    noise_sd: float = 0.5
    distractors: int = 2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        if self.n_per_point < 2:
            raise InvalidArgumentError("need at least 2 replicates per grid point")
        if len(set(self.grid)) < 2:
            raise InvalidArgumentError("grid needs at least 2 distinct values")
        if not self.noise_sd > 0.0:
            raise InvalidArgumentError("noise standard deviation must be positive")
        if self.distractors < 0:
            raise InvalidArgumentError("distractor count cannot be negative")

    @property
    def n(self) -> int:
        return self.n_per_point * len(self.grid)


def generate(config: SynthConfig) -> Dataset:
    """Draw one synthetic dataset under the given configuration.

    Column order is ``xT, xU, z1, ..., zd``.  Draw order is fixed
    (response noise first, then distractor columns), so two configs
    differing only in coefficients share identical noise for the same
    seed.
    """
    rng = np.random.default_rng(config.seed)
    x = np.repeat(np.array(config.grid, dtype=float), config.n_per_point)
    noise = rng.normal(0.0, config.noise_sd, size=x.size)
    y = config.alpha + config.beta1 * x + config.beta2 * x**2 + noise
    columns: dict[str, np.ndarray] = {"xT": x, "xU": x**2}
    for j in range(config.distractors):
        columns[f"z{j + 1}"] = rng.standard_normal(x.size)
    return Dataset.from_columns(y, columns)
