import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import antipodal_sphere, toy_matrix  # noqa: E402


@pytest.fixture(scope="session")
def toy():
    """Six-word 2-D matrix: ball/goal/team vs cat/dog/bird."""
    return toy_matrix()


@pytest.fixture(scope="session")
def sphere():
    """Antipodal 50-word clusters plus 1000 background words, seed 0."""
    return antipodal_sphere(rng_seed=0)
