import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from firegrid.mdp import (
    EnumerationCapError,
    FireState,
    GridSpec,
    RewardModel,
    SpreadModel,
    Wildfire,
    burning_cells,
    idle_action,
    is_terminal,
    make_action,
)


def test_grid_indexing_round_trip():
    spec = GridSpec(5, 3)
    for cell in range(spec.n_cells):
        col, row = spec.coords(cell)
        assert spec.index(col, row) == cell


def test_neighbors_stay_inside_grid():
    for neighborhood in ("four", "eight"):
        spec = GridSpec(4, 4, neighborhood)
        for cell in range(spec.n_cells):
            for y in spec.neighbors(cell):
                assert 0 <= y < spec.n_cells
        corner_degree = len(spec.neighbors(0))
        assert corner_degree == (2 if neighborhood == "four" else 3)


def test_spread_model_validation():
    spec = GridSpec(2, 2)
    with pytest.raises(ValueError):
        SpreadModel(spec, {(0, 3): 0.5}, [0.8] * 4)  # 3 not adjacent to 0
    with pytest.raises(ValueError):
        SpreadModel(spec, {(0, 1): 1.5}, [0.8] * 4)
    with pytest.raises(ValueError):
        SpreadModel(spec, {}, [0.8] * 3)


def test_reward_model_rejects_positive():
    with pytest.raises(ValueError):
        RewardModel((0.0, 0.5))


def test_ignition_prob_zero_fuel(grid2x2):
    state = FireState((0, 1, 1, 0), (0, 1, 1, 0))
    assert grid2x2.ignition_prob(state, 0) == 0.0


def test_ignition_prob_single_neighbor(grid2x2):
    state = FireState((0, 1, 0, 0), (3, 1, 3, 3))
    assert grid2x2.ignition_prob(state, 0) == pytest.approx(0.06)


def test_ignition_prob_two_neighbors(grid2x2):
    # frozen from 1 - (1 - 0.06)^2
    state = FireState((0, 1, 1, 0), (3, 1, 1, 3))
    assert grid2x2.ignition_prob(state, 0) == pytest.approx(0.1164, abs=1e-12)


def test_extinguish_prob_zero_fuel_certain(grid2x2):
    state = FireState((1, 0, 0, 0), (0, 3, 3, 3))
    assert grid2x2.extinguish_prob(state, idle_action(2), 0) == 1.0


def test_extinguish_prob_no_team(grid2x2):
    state = FireState((1, 0, 0, 0), (2, 3, 3, 3))
    assert grid2x2.extinguish_prob(state, (2, 3), 0) == 0.0


def test_extinguish_prob_two_teams(grid2x2):
    # frozen from 1 - (1 - 0.8)^2, checked by enumerating the joint outcomes:
    # P(at least one of two independent 0.8 attempts) = 0.8*0.8 + 2*0.8*0.2
    state = FireState((1, 0, 0, 0), (2, 3, 3, 3))
    both = 0.8 * 0.8 + 2 * 0.8 * 0.2
    assert grid2x2.extinguish_prob(state, (0, 0), 0) == pytest.approx(0.96)
    assert both == pytest.approx(0.96)


def test_step_decrements_fuel_only_while_burning(grid2x2, rng):
    state = FireState((1, 0, 0, 0), (3, 5, 5, 5))
    nxt, _ = grid2x2.step(state, idle_action(1), rng)
    assert nxt.fuel[0] == 2
    assert nxt.fuel[1] == 5


def test_step_reward_charges_pre_transition_set(grid2x2, rng):
    state = FireState((1, 1, 1, 1), (4, 4, 4, 4))
    rewards = RewardModel((-1.0,) * 4)
    model = Wildfire(grid2x2.spec, grid2x2.spread, rewards)
    _, reward = model.step(state, idle_action(1), rng)
    assert reward == -4.0


def test_step_rejects_bad_action(grid2x2, rng):
    state = FireState((1, 0, 0, 0), (3, 5, 5, 5))
    with pytest.raises(ValueError):
        grid2x2.step(state, (7,), rng)


def test_is_terminal():
    assert is_terminal(FireState((0, 0), (3, 1)))
    assert not is_terminal(FireState((0, 1), (3, 2)))
    # a burning cell with no fuel still burns this step, then dies
    assert not is_terminal(FireState((0, 1), (3, 0)))


def test_zero_fuel_burning_cell_dies_in_one_step(grid2x2, rng):
    state = FireState((1, 0, 0, 0), (0, 0, 0, 0))
    nxt, _ = grid2x2.step(state, idle_action(0), rng)
    assert nxt == FireState((0, 0, 0, 0), (0, 0, 0, 0))


def test_enumerate_deterministic_state(grid2x2):
    # nothing burning: a single certain outcome
    state = FireState((0, 0, 0, 0), (2, 2, 2, 2))
    outs = grid2x2.enumerate_transitions(state, idle_action(1))
    assert len(outs) == 1
    assert outs[0][1] == 1.0
    assert outs[0][2] == 0.0


def test_enumerate_single_bernoulli(grid2x2):
    # one burning corner igniting exactly one fueled neighbor candidate;
    # suppression is off the burning cell so it keeps burning for sure
    state = FireState((1, 0, 0, 0), (0, 3, 0, 0))
    outs = grid2x2.enumerate_transitions(state, idle_action(0))
    probs = sorted(p for _, p, _ in outs)
    assert probs == pytest.approx([0.06, 0.94])


def test_enumerate_cap(grid2x2):
    # two suppressed burning cells + two ignitable neighbors = 4 coin flips
    state = FireState((1, 1, 0, 0), (3, 3, 3, 3))
    with pytest.raises(EnumerationCapError):
        grid2x2.enumerate_transitions(state, (0, 1), cap=2)


def test_enumerate_probabilities_sum_to_one(grid2x2):
    state = FireState((1, 1, 0, 0), (3, 3, 3, 3))
    outs = grid2x2.enumerate_transitions(state, (0, 1))
    assert len(outs) == 16
    assert sum(p for _, p, _ in outs) == pytest.approx(1.0, abs=1e-12)
    assert all(r == -3.0 for _, _, r in outs)


def test_enumerate_two_teams_all_burning_q08():
    # 2x2 all burning, one team doubled on a cell: that cell survives with
    # (1-0.8)^2, others with certainty; next fuel drops everywhere
    spec = GridSpec(2, 2)
    model = Wildfire(spec, SpreadModel.uniform(spec, 0.06, 0.8),
                     RewardModel((-1.0,) * 4))
    state = FireState((1, 1, 1, 1), (2, 2, 2, 2))
    outs = model.enumerate_transitions(state, (0, 0))
    assert len(outs) == 2
    by_burning = {s.burning: p for s, p, _ in outs}
    assert by_burning[(1, 1, 1, 1)] == pytest.approx(0.2 ** 2)
    assert by_burning[(0, 1, 1, 1)] == pytest.approx(1 - 0.2 ** 2)


def test_make_action_canonical():
    assert make_action([3, 1, 2]) == (1, 2, 3)
    assert make_action([2], teams=3) == (-1, -1, 2)
    with pytest.raises(ValueError):
        make_action([1, 2], teams=1)


# -- sampled-frequency agreement with the exact law ------------------------

def test_step_frequencies_match_enumeration(grid2x2):
    state = FireState((1, 0, 1, 0), (2, 1, 0, 3))
    action = (0, 0)
    outs = grid2x2.enumerate_transitions(state, action)
    rng = random.Random(7)
    n = 40_000
    counts = {}
    for _ in range(n):
        nxt, _ = grid2x2.step(state, action, rng)
        counts[nxt] = counts.get(nxt, 0) + 1
    for nxt, prob, _ in outs:
        se = math.sqrt(prob * (1 - prob) / n)
        assert abs(counts.get(nxt, 0) / n - prob) <= 3 * se + 1e-9


# -- property tests ---------------------------------------------------------

@st.composite
def small_states(draw):
    burning = draw(st.lists(st.integers(0, 1), min_size=4, max_size=4))
    fuel = draw(st.lists(st.integers(0, 4), min_size=4, max_size=4))
    return FireState(tuple(burning), tuple(fuel))


@given(small_states(), st.integers(0, 2 ** 31))
@settings(max_examples=60, deadline=None)
def test_fuel_never_increases(state, seed):
    spec = GridSpec(2, 2)
    model = Wildfire(spec, SpreadModel.uniform(spec, 0.2, 0.5),
                     RewardModel((-1.0,) * 4))
    rng = random.Random(seed)
    current = state
    for _ in range(6):
        nxt, _ = model.step(current, idle_action(1), rng)
        assert all(nf <= f for nf, f in zip(nxt.fuel, current.fuel))
        current = nxt


@given(small_states(), st.integers(0, 2 ** 31))
@settings(max_examples=60, deadline=None)
def test_exhausted_cells_never_reignite(state, seed):
    spec = GridSpec(2, 2)
    model = Wildfire(spec, SpreadModel.uniform(spec, 0.3, 0.5),
                     RewardModel((-1.0,) * 4))
    rng = random.Random(seed)
    current = state
    for _ in range(8):
        dead = [x for x in range(4) if current.fuel[x] == 0 and current.burning[x]]
        nxt, _ = model.step(current, idle_action(0), rng)
        for x in dead:
            assert not nxt.burning[x]
        for x in range(4):
            if current.fuel[x] == 0 and not current.burning[x]:
                assert not nxt.burning[x]
        current = nxt


@given(small_states(), st.integers(0, 2 ** 31))
@settings(max_examples=40, deadline=None)
def test_no_spread_without_transmission(state, seed):
    spec = GridSpec(2, 2)
    model = Wildfire(spec, SpreadModel.uniform(spec, 0.0, 0.0),
                     RewardModel((-1.0,) * 4))
    rng = random.Random(seed)
    current = state
    for _ in range(5):
        nxt, _ = model.step(current, idle_action(0), rng)
        assert set(burning_cells(nxt)) <= set(burning_cells(current))
        current = nxt


@given(small_states())
@settings(max_examples=40, deadline=None)
def test_reward_is_deterministic_given_state(state):
    spec = GridSpec(2, 2)
    model = Wildfire(spec, SpreadModel.uniform(spec, 0.1, 0.5),
                     RewardModel((-1.0, -2.0, -3.0, -4.0)))
    expected = sum(-float(x + 1) for x in range(4) if state.burning[x])
    outs = model.enumerate_transitions(state, idle_action(1))
    assert all(r == expected for _, _, r in outs)


def test_same_seed_same_trajectory(grid2x2):
    state = FireState((1, 1, 0, 0), (3, 2, 4, 4))
    a = (0, 1)
    t1, t2 = [], []
    for out in (t1, t2):
        rng = random.Random(99)
        cur = state
        for _ in range(5):
            cur, r = grid2x2.step(cur, a, rng)
            out.append((cur, r))
    assert t1 == t2
