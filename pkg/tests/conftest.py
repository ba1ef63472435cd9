import pytest

from contestlab import CostModel, Perfect, RewardScheme, ScenarioConfig, Uniform


@pytest.fixture
def uniform():
    return Uniform()


@pytest.fixture
def base_scenario():
    """Two agents, perfect ranking, p_B=1, c_C=0.1: threshold 0.1."""
    return ScenarioConfig(2, Uniform(), RewardScheme(1.0, 0.0, 0.0), CostModel(0.1, 0.0), Perfect())
