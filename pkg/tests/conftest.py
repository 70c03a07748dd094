import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from originnet.ingest import generate_synthetic  # noqa: E402
from originnet.preprocess import preprocess_pipeline  # noqa: E402


@pytest.fixture(scope="session")
def raw42():
    return generate_synthetic(42)


@pytest.fixture(scope="session")
def dataset42(raw42):
    return preprocess_pipeline(raw42)
