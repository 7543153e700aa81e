"""End-to-end orchestration: run configuration, full analysis, fold
sweep, and precision-split runs.

The heavy lifting lives in the model modules; this module wires a
dataset and a :class:`RunConfig` into the two posteriors, the superset
probability, and a serializable report dictionary.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import asdict, dataclass
from typing import Sequence

from .data import (
    DEFAULT_PRECISION_COLUMNS,
    Dataset,
    FoldPlan,
    SubsetMask,
    all_subsets,
    make_folds,
    precision_split,
)
from .errors import ConfigError, InvalidArgumentError
from .linear import ModelPosterior, h1_posterior, normalize_posterior
from .local import h0_log_marginal
from .superset import superset_probability

TOP_SUBSETS = 10
TOP_PAIRS = 20


@dataclass(frozen=True)
class RunConfig:
    """Settings of one full analysis run.

    ``data``/``response``/``out`` stay None for in-memory use; the CLI
    fills them from flags.
    """

    data: str | None = None
    response: str | None = None
    log_response: str | None = None  # None, "e", or "10"
    folds: int = 10
    seed: int = 0
    hyper_a: float = 3.0
    inclusive: bool = False
    include_empty: bool = True
    precision_columns: tuple[str, ...] = DEFAULT_PRECISION_COLUMNS
    out: str | None = None
    format: str = "json"
    plot: bool = False
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(
            self, "precision_columns", tuple(self.precision_columns)
        )
        if self.folds < 2:
            raise ConfigError(f"fold count {self.folds} must be at least 2")
        if not self.hyper_a > 2.0:
            raise ConfigError(f"prior parameter a={self.hyper_a} must exceed 2")
        if self.log_response not in (None, "e", "10"):
            raise ConfigError(
                f"log-response must be 'e' or '10', got {self.log_response!r}"
            )
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be 'json' or 'csv', got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    """Posteriors, combined report, and the fold plan of one run."""

    local: ModelPosterior
    linear: ModelPosterior
    report: SupersetReport
    plan: FoldPlan
    config: RunConfig


def _score_subset_h0(args) -> float:
    dataset, subset, plan = args
    return h0_log_marginal(dataset, subset, plan)


def local_posterior(
    dataset: Dataset,
    model_space: Sequence[SubsetMask],
    plan: FoldPlan,
    jobs: int = 1,
) -> ModelPosterior:
    """Local-model posterior with optional process-parallel subset scoring.

    Results are reduced in model-space order regardless of worker
    scheduling, so output is bit-identical for any job count.
    """
    if jobs > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(jobs) as pool:
            values = pool.map(
                _score_subset_h0,
                [(dataset, s, plan) for s in model_space],
                chunksize=max(1, len(model_space) // (4 * jobs)),
            )
        scores = dict(zip(model_space, values))
    else:
        scores = {s: h0_log_marginal(dataset, s, plan) for s in model_space}
    return normalize_posterior("local", scores)


def analyze(dataset: Dataset, config: RunConfig) -> AnalysisResult:
    """Run the full pipeline on an in-memory dataset.

    Builds the fold plan, enumerates the model space, computes both
    posteriors, and combines them into the superset probability.
    """
    plan = make_folds(dataset.n, config.folds, config.seed)
    space = all_subsets(dataset.p, config.include_empty)
    linear_post = h1_posterior(dataset, space, config.hyper_a)
    local_post = local_posterior(dataset, space, plan, config.jobs)
    settings = {
        "folds": plan.m,
        "seed": config.seed,
        "a": config.hyper_a,
        "strict": not config.inclusive,
        "model_space_size": len(space),
        "prng": plan.prng,
    }
    report = superset_probability(
        local_post, linear_post, inclusive=config.inclusive, settings=settings
    )
    return AnalysisResult(
        local=local_post, linear=linear_post, report=report, plan=plan, config=config
    )


def _top_entries(posterior: ModelPosterior, names, count: int) -> list[dict]:
    return [
        {"subset": [names[i] for i in mask.indices()], "probability": prob}
        for mask, prob in posterior.top(count)
    ]


def build_report(result: AnalysisResult, dataset: Dataset, source: str) -> dict:
    """Serializable report dictionary for one analysis result."""
    names = dataset.names
    config = asdict(result.config)
    config["precision_columns"] = list(result.config.precision_columns)
    config["prng"] = result.plan.prng
    pairs = [
        {
            "linear": [names[i] for i in big.indices()],
            "local": [names[i] for i in small.indices()],
            "contribution": value,
        }
        for big, small, value in result.report.pair_contributions[:TOP_PAIRS]
    ]
    return {
        "probability": result.report.probability,
        "strict": not result.config.inclusive,
        "folds": result.config.folds,
        "seed": result.config.seed,
        "a": result.config.hyper_a,
        "model_space_size": len(result.local.subsets),
        "include_empty": result.config.include_empty,
        "top_h0": _top_entries(result.local, names, TOP_SUBSETS),
        "top_h1": _top_entries(result.linear, names, TOP_SUBSETS),
        "top_pairs": pairs,
        "dataset": {
            "n": dataset.n,
            "p": dataset.p,
            "source": source,
            "columns": list(names),
        },
        "config": config,
    }


def sweep_folds(
    dataset: Dataset,
    config: RunConfig,
    m_min: int = 2,
    m_max: int = 15,
) -> list[tuple[int, float]]:
    """Superset probability for every fold count in ``m_min..m_max``.

    The linear-model posterior does not depend on the folds and is
    computed once; only the local side is redone per fold count.  The
    seed is shared across fold counts.
    """
    if m_min < 2 or m_max < m_min:
        raise InvalidArgumentError(
            f"invalid sweep range {m_min}..{m_max}: need 2 <= m_min <= m_max"
        )
    if m_max > dataset.n:
        raise InvalidArgumentError(
            f"sweep upper bound {m_max} exceeds the {dataset.n} observations"
        )
    space = all_subsets(dataset.p, config.include_empty)
    linear_post = h1_posterior(dataset, space, config.hyper_a)
    rows = []
    for m in range(m_min, m_max + 1):
        plan = make_folds(dataset.n, m, config.seed)
        local_post = local_posterior(dataset, space, plan, config.jobs)
        rep = superset_probability(local_post, linear_post, inclusive=config.inclusive)
        rows.append((m, rep.probability))
    return rows


def split_run(dataset: Dataset, config: RunConfig, source: str) -> dict:
    """Independent analyses of the fine and coarse precision partitions.

    Returns a dictionary with keys ``fine`` and ``coarse`` holding the
    two full reports, plus the partition sizes.
    """
    fine, coarse = precision_split(dataset, config.precision_columns)
    for label, part in (("fine", fine), ("coarse", coarse)):
        if part.n < config.folds:
            raise ConfigError(
                f"{label} partition has {part.n} rows, fewer than the requested "
                f"{config.folds} folds; reduce --folds"
            )
    reports = {}
    for label, part in (("fine", fine), ("coarse", coarse)):
        result = analyze(part, config)
        reports[label] = build_report(result, part, f"{source}#{label}")
    return {
        "precision_columns": list(config.precision_columns),
        "fine": reports["fine"],
        "coarse": reports["coarse"],
    }
