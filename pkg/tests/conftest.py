"""Shared fixtures for entrolab tests."""

import pytest
import tempfile
from pathlib import Path

from entrolab.config import Budget
from entrolab.finab import FinAbGroup
from entrolab.window import WindowGroup


@pytest.fixture
def temp_config_path():
    """Provide a temporary config file path."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir) / "config.json"


@pytest.fixture
def temp_log_path():
    """Provide a temporary log file path."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir) / "test.log"


@pytest.fixture
def small_budget():
    """Budget that keeps base suprema quick."""
    return Budget(max_steps=32, confirm_window=4, base_prefix=4)


@pytest.fixture(params=[(2,), (3,), (4,), (2, 2)], ids=lambda m: "Z" + "+Z".join(map(str, m)))
def shift_base(request):
    """Base groups K for the shift tests."""
    return FinAbGroup(request.param)


@pytest.fixture
def binary_sum():
    """Z(2)^(N)."""
    return WindowGroup(FinAbGroup((2,)))
