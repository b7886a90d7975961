"""Stochastic wildfire-suppression MDP on a grid.

State is a pair of per-cell vectors (burning flags, integer fuel).  One
decision epoch assigns each suppression team to a target cell; every cell
then transitions simultaneously using the pre-step state: an unburning cell
with fuel ignites with probability 1 - prod(1 - P(x,y)) over burning
neighbors y, a burning cell is extinguished with probability
1 - prod(1 - Q(x)) over the teams targeting it (or with certainty once its
fuel is exhausted).  Fuel drops by one per burning step.  The step reward
charges R(x) <= 0 for every cell burning in the pre-step state.

All step randomness comes from an explicit ``random.Random`` stream, so a
fixed seed reproduces a trajectory exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

IDLE = -1  # sentinel target for a team with nothing to suppress

Action = tuple  # tuple[int, ...]; one non-negative cell index (or IDLE) per team


class FireState(NamedTuple):
    """Immutable MDP state: per-cell burning flags (0/1) and integer fuel."""

    burning: tuple
    fuel: tuple


class EnumerationCapError(ValueError):
    """Joint outcome space too large to enumerate exactly."""


@dataclass(frozen=True)
class GridSpec:
    """Rectangular cell grid; ``neighborhood`` picks 4- or 8-connectivity.

    Cells are indexed row-major from the bottom-left corner: cell
    ``row * width + col`` sits at column ``col`` (0 = left) and row ``row``
    (0 = bottom).
    """

    width: int
    height: int
    neighborhood: str = "four"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.neighborhood not in ("four", "eight"):
            raise ValueError(f"unknown neighborhood {self.neighborhood!r}")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def index(self, col: int, row: int) -> int:
        if not (0 <= col < self.width and 0 <= row < self.height):
            raise ValueError(f"cell ({col}, {row}) outside grid")
        return row * self.width + col

    def coords(self, cell: int) -> tuple:
        return cell % self.width, cell // self.width

    def neighbors(self, cell: int) -> tuple:
        col, row = self.coords(cell)
        if self.neighborhood == "four":
            offsets = ((1, 0), (-1, 0), (0, 1), (0, -1))
        else:
            offsets = (
                (1, 0), (-1, 0), (0, 1), (0, -1),
                (1, 1), (1, -1), (-1, 1), (-1, -1),
            )
        out = []
        for dc, dr in offsets:
            c, r = col + dc, row + dr
            if 0 <= c < self.width and 0 <= r < self.height:
                out.append(r * self.width + c)
        return tuple(out)


class SpreadModel:
    """Transmission probabilities P(x, y) and suppression success Q(x).

    ``P(x, y)`` is the chance that a fire in y ignites x in one step; it is
    stored sparsely and only allowed on pairs where y neighbors x.  ``Q(x)``
    is the per-attempt success probability of one suppression team on x.
    """

    def __init__(self, spec: GridSpec, p_edges: dict, q: Sequence[float]):
        n = spec.n_cells
        if len(q) != n:
            raise ValueError("Q must have one entry per cell")
        for x, prob in enumerate(q):
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"Q({x}) = {prob} outside [0, 1]")
        incoming = [[] for _ in range(n)]
        for (x, y), prob in p_edges.items():
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"P({x}, {y}) = {prob} outside [0, 1]")
            if y not in spec.neighbors(x):
                raise ValueError(f"P({x}, {y}) set but {y} is not a neighbor of {x}")
            if prob > 0.0:
                incoming[x].append((y, prob))
        self.spec = spec
        self.q = tuple(float(v) for v in q)
        self.p_edges = {k: float(v) for k, v in p_edges.items() if v > 0.0}
        self.in_edges = tuple(tuple(sorted(v)) for v in incoming)

    @classmethod
    def uniform(cls, spec: GridSpec, p: float, q: float) -> "SpreadModel":
        edges = {}
        for x in range(spec.n_cells):
            for y in spec.neighbors(x):
                edges[(x, y)] = p
        return cls(spec, edges, [q] * spec.n_cells)

    def p(self, x: int, y: int) -> float:
        return self.p_edges.get((x, y), 0.0)


@dataclass(frozen=True)
class RewardModel:
    """Per-cell burn cost; every value must be nonpositive."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for x, v in enumerate(self.values):
            if v > 0.0:
                raise ValueError(f"R({x}) = {v} must be <= 0")

    def __getitem__(self, x: int) -> float:
        return self.values[x]

    def __len__(self) -> int:
        return len(self.values)


def idle_action(teams: int) -> Action:
    return (IDLE,) * teams


def make_action(cells: Iterable[int], teams: int | None = None) -> Action:
    """Canonical action: targets sorted ascending, padded with IDLE if short."""
    targets = sorted(cells)
    if teams is not None:
        if len(targets) > teams:
            raise ValueError("more targets than teams")
        targets = [IDLE] * (teams - len(targets)) + targets
    return tuple(targets)


def is_terminal(state: FireState) -> bool:
    """True once nothing burns; exhausted cells extinguish within one step."""
    return 1 not in state.burning


def burning_cells(state: FireState) -> tuple:
    burning = state.burning
    return tuple(x for x in range(len(burning)) if burning[x])


class Wildfire:
    """Generative model G: samples (next state, reward) given (state, action).

    Pure value-in/value-out; a single instance can back any number of
    concurrent episodes as long as each uses its own random stream.
    """

    def __init__(self, spec: GridSpec, spread: SpreadModel, rewards: RewardModel):
        if spread.spec != spec:
            raise ValueError("spread model built for a different grid")
        if len(rewards) != spec.n_cells:
            raise ValueError("reward model size mismatch")
        self.spec = spec
        self.spread = spread
        self.rewards = rewards
        self._in_edges = spread.in_edges
        self._q = spread.q
        self._r = rewards.values

    # -- transition law ------------------------------------------------

    def ignition_prob(self, state: FireState, x: int) -> float:
        """P(nonburning cell x ignites) given the current burning set."""
        if state.fuel[x] <= 0:
            return 0.0
        burning = state.burning
        keep = 1.0
        for y, p in self._in_edges[x]:
            if burning[y]:
                keep *= 1.0 - p
        return 1.0 - keep

    def extinguish_prob(self, state: FireState, action: Action, x: int) -> float:
        """P(burning cell x stops burning) under ``action``."""
        if state.fuel[x] <= 0:
            return 1.0
        qx = self._q[x]
        keep = 1.0
        for target in action:
            if target == x:
                keep *= 1.0 - qx
        return 1.0 - keep

    def step_reward(self, state: FireState) -> float:
        """Reward charged this step: sum of R(x) over the pre-step burning set."""
        total = 0.0
        burning = state.burning
        r = self._r
        for x in range(len(burning)):
            if burning[x]:
                total += r[x]
        return total

    def _burn_next_probs(self, state: FireState, action: Action) -> list:
        """Per-cell probability of burning in the next state."""
        burning, fuel = state
        n = len(burning)
        in_edges = self._in_edges
        q = self._q
        survive = None
        for target in action:
            if target >= 0 and burning[target] and fuel[target] > 0:
                if survive is None:
                    survive = {}
                survive[target] = survive.get(target, 1.0) * (1.0 - q[target])
        probs = [0.0] * n
        for x in range(n):
            if burning[x]:
                if fuel[x] > 0:
                    probs[x] = 1.0 if survive is None else survive.get(x, 1.0)
            elif fuel[x] > 0:
                keep = 1.0
                for y, p in in_edges[x]:
                    if burning[y]:
                        keep *= 1.0 - p
                probs[x] = 1.0 - keep
        return probs

    def _next_fuel(self, state: FireState) -> tuple:
        return tuple(
            f - 1 if b and f > 0 else f for b, f in zip(state.burning, state.fuel)
        )

    def _check_action(self, action: Action):
        n = self.spec.n_cells
        for target in action:
            if target != IDLE and not 0 <= target < n:
                raise ValueError(f"action targets cell {target} outside grid")

    def step(self, state: FireState, action: Action, rng) -> tuple:
        """Sample one synchronous transition; returns (next_state, reward)."""
        self._check_action(action)
        probs = self._burn_next_probs(state, action)
        rand = rng.random
        new_burning = tuple(
            1 if (p >= 1.0 or (p > 0.0 and rand() < p)) else 0 for p in probs
        )
        return FireState(new_burning, self._next_fuel(state)), self.step_reward(state)

    def enumerate_transitions(self, state: FireState, action: Action, cap: int = 20):
        """Exact joint outcome distribution as (next_state, prob, reward) triples.

        Cells whose next-burning probability is strictly inside (0, 1) are the
        stochastic ones; raises ``EnumerationCapError`` when there are more
        than ``cap`` of them.
        """
        self._check_action(action)
        probs = self._burn_next_probs(state, action)
        base = [1 if p >= 1.0 else 0 for p in probs]
        stochastic = [(x, p) for x, p in enumerate(probs) if 0.0 < p < 1.0]
        if len(stochastic) > cap:
            raise EnumerationCapError(
                f"{len(stochastic)} stochastic cells exceed cap {cap}: "
                "too large to enumerate"
            )
        next_fuel = self._next_fuel(state)
        reward = self.step_reward(state)
        outcomes = []
        for bits in itertools.product((0, 1), repeat=len(stochastic)):
            prob = 1.0
            burning = list(base)
            for (x, p), bit in zip(stochastic, bits):
                if bit:
                    prob *= p
                    burning[x] = 1
                else:
                    prob *= 1.0 - p
            outcomes.append((FireState(tuple(burning), next_fuel), prob, reward))
        return outcomes

    @staticmethod
    def is_terminal(state: FireState) -> bool:
        return 1 not in state.burning
