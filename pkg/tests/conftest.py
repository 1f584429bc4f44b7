import random

import pytest

from quadratic import QuadraticOrder
from ring_core import HurwitzRing, IntegerRing, PolynomialRing


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def z2():
    return QuadraticOrder(2)


@pytest.fixture
def z5():
    return QuadraticOrder(5)


@pytest.fixture(params=["z", "fp[x]", "hurwitz"])
def ring(request):
    return {"z": IntegerRing(), "fp[x]": PolynomialRing(2), "hurwitz": HurwitzRing()}[request.param]


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    """Keep a developer's .env and data/ out of the tests."""
    for name in ("UNITSUMS_SEED", "UNITSUMS_SAMPLES", "UNITSUMS_BIG_SAMPLES", "UNITSUMS_THREADS",
                 "UNITSUMS_PRECISION_BITS", "UNITSUMS_FORMAT", "UNITSUMS_DATA_DIR"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
