import os
import sys

import numpy as np
import pytest

# Add project root to the Python path to allow importing from 'bergman'
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.append(PROJECT_ROOT)

from bergman.geometry import BIDISC, HARTOGS_TRIANGLE, UNIT_DISC, sample


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def disc_points():
    return sample(UNIT_DISC, 50, seed=11).points


@pytest.fixture
def bidisc_points():
    return sample(BIDISC, 100, seed=12).points


@pytest.fixture
def hartogs_points():
    return sample(HARTOGS_TRIANGLE, 20, seed=13).points


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    from bergman.config import settings

    monkeypatch.setattr(settings, "output_dir", str(tmp_path))
    return tmp_path
