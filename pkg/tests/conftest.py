import os
import sys

import pytest

sys.path.append(os.getcwd())

from src.adapters.gateways.model_file_repository import ModelFileRepository  # noqa: E402


@pytest.fixture(scope="session")
def frankie_model():
    """Bundled Panda-on-differential-drive model"""
    return ModelFileRepository().load("frankie")


@pytest.fixture(scope="session")
def omni_model():
    return ModelFileRepository().load("frankie_omni")
