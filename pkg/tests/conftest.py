import numpy as np
import pytest

from spectral_burgers.params import ModelParams


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    """Settings() must never see the developer's SBURGERS_* variables."""
    import os

    for key in list(os.environ):
        if key.startswith("SBURGERS_"):
            monkeypatch.delenv(key)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def params() -> ModelParams:
    return ModelParams()
