from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def rings():
    from topolesion.image_io import load_image

    return load_image(FIXTURES / "rings.csv")[:, :, 0] > 0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
