"""Baseline suppression policies: random targeting and the distance-weighted rule.

The weighted rule scores each cell by summing R(y) / D(x, y) over all other
cells, where D is the all-pairs shortest-path length using the transmission
probability P(x, y) as the length of the edge between adjacent cells.  Cells
sitting close (in that metric) to large-magnitude burn costs get the highest
suppression priority.  Distances are computed once offline and shared
read-only by any number of episodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import floyd_warshall

from .mdp import Action, FireState, RewardModel, SpreadModel, idle_action


@dataclass(frozen=True)
class DistanceTable:
    """Dense all-pairs shortest-path matrix; +inf marks unreachable pairs."""

    matrix: np.ndarray

    def __post_init__(self):
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise ValueError("distance matrix must be square")


@dataclass(frozen=True)
class WeightMap:
    """Per-cell score w and the derived suppression priority (-w)."""

    w: np.ndarray
    priority: np.ndarray


def all_pairs_distances(spread: SpreadModel) -> DistanceTable:
    """Shortest paths under edge length P(x, y), exact, via Floyd-Warshall."""
    n = spread.spec.n_cells
    rows, cols, vals = [], [], []
    for (x, y), p in spread.p_edges.items():
        rows.append(x)
        cols.append(y)
        vals.append(p)
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    dist = floyd_warshall(graph, directed=True)
    np.fill_diagonal(dist, 0.0)
    return DistanceTable(dist)


def fw_weights(distances: DistanceTable, rewards: RewardModel) -> WeightMap:
    """Score w(x) = sum_{y != x} R(y) / D(x, y); priority ranks -w descending.

    The self term is excluded (D(x, x) = 0 would divide by zero) and
    unreachable cells contribute nothing.
    """
    d = distances.matrix
    r = np.asarray(rewards.values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = r[np.newaxis, :] / d
    contrib[~np.isfinite(contrib)] = 0.0
    np.fill_diagonal(contrib, 0.0)
    w = contrib.sum(axis=1)
    return WeightMap(w=w, priority=-w)


def _burning(state: FireState) -> list:
    burning = state.burning
    return [x for x in range(len(burning)) if burning[x]]


def fw_policy(state: FireState, weights: WeightMap, teams: int) -> Action:
    """Deterministically cover the highest-priority burning cells.

    One team per cell down the priority order; once every burning cell is
    covered the remaining teams wrap back to the top.  Ties break toward the
    lower cell index.
    """
    cells = _burning(state)
    if not cells:
        return idle_action(teams)
    priority = weights.priority
    cells.sort(key=lambda x: (-priority[x], x))
    return tuple(sorted(cells[i % len(cells)] for i in range(teams)))


def _priority_ranks(cells, priority) -> list:
    """Competition ranks (1 = best); cells with equal priority share a rank."""
    return [1 + sum(1 for y in cells if priority[y] > priority[x]) for x in cells]


def _weighted_index(weights, rng) -> int:
    u = rng.random() * sum(weights)
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def fw_sample_policy(state: FireState, weights: WeightMap, teams: int, rng) -> Action:
    """Randomized variant of ``fw_policy`` used as the rollout policy.

    Burning cells are drawn without replacement with probability proportional
    to 1 / rank, where rank is the competition rank of the cell's priority;
    once the burning set is exhausted the remaining teams draw with
    replacement from the same distribution.
    """
    cells = _burning(state)
    if not cells:
        return idle_action(teams)
    ranks = _priority_ranks(cells, weights.priority)
    base = [1.0 / r for r in ranks]
    chosen = []
    pool = list(range(len(cells)))
    for _ in range(min(teams, len(cells))):
        pick = _weighted_index([base[i] for i in pool], rng)
        chosen.append(cells[pool.pop(pick)])
    for _ in range(teams - len(cells)):
        chosen.append(cells[_weighted_index(base, rng)])
    return tuple(sorted(chosen))


def random_policy(state: FireState, teams: int, rng) -> Action:
    """Uniform straw man: burning cells without replacement, extras with."""
    cells = _burning(state)
    if not cells:
        return idle_action(teams)
    take = min(teams, len(cells))
    chosen = rng.sample(cells, take)
    for _ in range(teams - take):
        chosen.append(cells[rng.randrange(len(cells))])
    return tuple(sorted(chosen))
