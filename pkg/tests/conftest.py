"""Pytest configuration and shared fixtures."""

import os
import sys

import numpy as np
import pytest

# Add the project root to the path so ``src`` imports resolve
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.models.initialization import InitScheme, RngSeed, SchemeKind  # noqa: E402
from src.models.network import Dataset, NetworkSpec  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run desk-scale reproductions at full trial counts")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale reproduction, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def even_uniform():
    return InitScheme(SchemeKind.EVEN_UNIFORM)


@pytest.fixture
def even_truncated():
    return InitScheme(SchemeKind.EVEN_TRUNCATED_NORMAL)


@pytest.fixture
def seed():
    return RngSeed(20240917)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_spec():
    return NetworkSpec((3, 4, 2))


@pytest.fixture
def landscape_spec():
    return NetworkSpec((2, 2, 2))


@pytest.fixture
def generic_data():
    """Four patterns in two dimensions with targets that are not a rank-one map."""
    inputs = np.array([[0.9, -0.4, 0.3, -0.8],
                       [0.2, 0.7, -0.6, -0.5]])
    targets = np.array([[1.0, -0.5, 0.25, 0.8],
                        [-0.3, 0.6, 0.9, -0.7]])
    return Dataset(inputs, targets)


@pytest.fixture
def isolated_settings(tmp_path, monkeypatch):
    """Point the settings file at an empty temp location."""
    path = tmp_path / "settings.json"
    monkeypatch.setenv("EVENINIT_SETTINGS_FILE", str(path))
    return path
