import os
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(autouse=True, scope="session")
def _repo_root():
    # fixture paths in the tests are relative to the repository root
    old = os.getcwd()
    os.chdir(ROOT)
    yield
    os.chdir(old)
