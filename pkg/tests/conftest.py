import numpy as np
import pytest

from hierlogic import FIXTURE_NAMES, load_fixture


@pytest.fixture
def six_node():
    return load_fixture("six_node")


@pytest.fixture
def mapillary():
    return load_fixture("mapillary_vistas_2")


@pytest.fixture
def cityscapes():
    return load_fixture("cityscapes")


@pytest.fixture(params=FIXTURE_NAMES)
def any_fixture(request):
    return load_fixture(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20260818)
