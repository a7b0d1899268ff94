import numpy as np
import pytest

from fair_nrm import Instance, ModelParams

from helpers import make_demo_instance


@pytest.fixture
def demo_params() -> ModelParams:
    """Two-product linear model with diagonal price sensitivity."""
    return ModelParams(alpha=[8.0, 9.0], B=[[-1.5, 0.0], [0.0, -3.0]])


@pytest.fixture
def demo_instance(demo_params) -> Instance:
    return make_demo_instance()
