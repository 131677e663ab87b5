"""Shared pytest fixtures."""

import pytest
import structlog


@pytest.fixture(autouse=True)
def reset_logging():
    """Commands bind structlog to the captured stderr of the running test."""
    yield
    structlog.reset_defaults()
