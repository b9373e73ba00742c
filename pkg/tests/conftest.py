import sys
from pathlib import Path

# make tests/oracles.py importable regardless of invocation directory
sys.path.insert(0, str(Path(__file__).parent))

import pytest

from fanochain import ChainModel


@pytest.fixture
def semi_model():
    """The work-horse parameter set: three well-separated resonances."""
    return ChainModel.semi_infinite(4, -0.5, 0.2)


@pytest.fixture
def infinite_model():
    return ChainModel.infinite(-0.6, 0.2)
