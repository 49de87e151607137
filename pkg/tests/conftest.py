"""Shared fixtures."""

import logging

import pytest

from src.config import reset_config
from src.services import logging_service

from tests.builders import camera


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """Each test sees a fresh environment configuration with a single worker."""
    monkeypatch.setenv("FUZZFORGE_JOBS", "1")
    monkeypatch.delenv("FUZZFORGE_LOG_DIR", raising=False)
    monkeypatch.delenv("FUZZFORGE_LOG_LEVEL", raising=False)
    monkeypatch.delenv("FUZZFORGE_ROOT", raising=False)
    monkeypatch.setattr(logging_service, '_logging_service', None)
    reset_config()
    yield
    reset_config()
    for handler in list(logging.getLogger().handlers):
        if getattr(handler, '_fuzzforge', False):
            logging.getLogger().removeHandler(handler)
            handler.close()
    for handler in list(logging.getLogger("fuzzforge.structured").handlers):
        logging.getLogger("fuzzforge.structured").removeHandler(handler)
        handler.close()


@pytest.fixture
def axis_camera():
    """Camera at the origin, f=500, principal point (500, 500), 1000x1000 image."""
    return camera()
