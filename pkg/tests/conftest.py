"""Shared fixtures: the metric grid and deterministic sample sets."""

from __future__ import annotations

import json

import numpy as np
import pytest

from finsler import FinslerStructure, parse_metric, sample_points


def _eye(n: int) -> list[list[float]]:
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def euclidean(n: int) -> dict:
    return {"family": "euclidean", "n": n}


def riemannian_hyperbolic() -> dict:
    return {"family": "riemannian", "n": 2,
            "params": {"a": [[1, 0], [0, "exp(2*x1)"]]}}


def randers(n: int, b1: float) -> dict:
    b = [0.0] * n
    b[0] = b1
    return {"family": "randers", "n": n, "params": {"a": _eye(n), "b": b}}


def quartic(n: int) -> dict:
    return {"family": "quartic", "n": n}


# The acceptance-grid metrics, keyed by a stable label.
GRID_METRICS: dict[str, dict] = {
    "euclid2": euclidean(2),
    "euclid3": euclidean(3),
    "hyperb2": riemannian_hyperbolic(),
    "randers2-02": randers(2, 0.2),
    "randers2-05": randers(2, 0.5),
    "randers3-02": randers(3, 0.2),
    "randers3-05": randers(3, 0.5),
    "quartic2": quartic(2),
    "quartic3": quartic(3),
}

GRID_SIGMAS: tuple[str, ...] = ("0", "0.3", "0.1*x1", "0.1*x1+0.05*x2")

_STRUCTURES: dict[str, FinslerStructure] = {}
_SAMPLES: dict[tuple[str, int, int], list] = {}


def structure(label: str) -> FinslerStructure:
    if label not in _STRUCTURES:
        _STRUCTURES[label] = parse_metric(json.dumps(GRID_METRICS[label]))
    return _STRUCTURES[label]


def samples(label: str, count: int = 20, seed: int = 7) -> list:
    key = (label, count, seed)
    if key not in _SAMPLES:
        _SAMPLES[key] = sample_points(structure(label), count, seed)
    return _SAMPLES[key]


@pytest.fixture
def euclid2():
    return structure("euclid2")


@pytest.fixture
def hyperb2():
    return structure("hyperb2")


@pytest.fixture
def randers2():
    return structure("randers2-02")


@pytest.fixture
def randers3():
    return structure("randers3-05")


@pytest.fixture
def quartic2():
    return structure("quartic2")


@pytest.fixture
def quartic3():
    return structure("quartic3")


@pytest.fixture
def rng():
    return np.random.default_rng(123)
