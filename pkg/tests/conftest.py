"""Shared fixtures: the progression dataset and small synthetic helpers."""

import numpy as np
import pytest

from supersetprob.cli import DIABETES_COLUMNS, ingest
from supersetprob.data import Dataset


def _format_cell(v: float) -> str:
    return format(v, ".17g")


@pytest.fixture(scope="session")
def diabetes_tsv(tmp_path_factory) -> str:
    """Tab-separated progression file regenerated from its canonical source."""
    sklearn = pytest.importorskip("sklearn.datasets")
    raw = sklearn.load_diabetes(scaled=False)
    path = tmp_path_factory.mktemp("data") / "diabetes.tsv"
    lines = ["\t".join(DIABETES_COLUMNS)]
    for row, target in zip(raw.data, raw.target):
        lines.append("\t".join(_format_cell(v) for v in (*row, target)))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture(scope="session")
def diabetes(diabetes_tsv) -> Dataset:
    """Progression dataset with natural-log response, n=442, p=10."""
    dataset, response = ingest(diabetes_tsv, log_response="e")
    assert response == "Y"
    return dataset


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)
