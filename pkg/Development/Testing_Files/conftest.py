"""
Shared fixtures for the rendezvous test scripts
"""
import os
import sys

import numpy as np
import pytest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from rendezvous.models import Wind  # noqa: E402
from rendezvous.path import Path, Segment, straight_path  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
                     help="run the full rendezvous solves (minutes each)")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full rendezvous solves, enabled with --run-slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def field_wind():
    return Wind(-4.33, 2.5, 0.0)


@pytest.fixture
def calm():
    return Wind()


@pytest.fixture
def road():
    return straight_path(3000.0)


@pytest.fixture
def arc_road():
    return Path((Segment(600.0, 1.0 / 35.0),), 0.0, 0.0, 0.0)
