import numpy as np
import pytest

from speclab.config import settings as app_settings


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def quiet_progress(monkeypatch):
    monkeypatch.setattr(app_settings, "SHOW_PROGRESS", False)


@pytest.fixture
def settings():
    return app_settings
