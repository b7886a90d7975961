import random

import pytest

from firegrid.mdp import FireState, GridSpec, RewardModel, SpreadModel, Wildfire


@pytest.fixture
def grid2x2():
    spec = GridSpec(2, 2)
    spread = SpreadModel.uniform(spec, 0.06, 0.8)
    rewards = RewardModel((-1.0, -2.0, -2.0, -10.0))
    return Wildfire(spec, spread, rewards)


@pytest.fixture
def rng():
    return random.Random(20240817)
