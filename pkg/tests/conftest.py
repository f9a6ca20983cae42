# tests/conftest.py

import os

import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: deep-horizon runs, enabled with CONFDIM_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.getenv("CONFDIM_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set CONFDIM_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
