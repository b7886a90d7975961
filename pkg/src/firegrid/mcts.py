"""Monte Carlo tree search with double progressive widening.

Search statistics are keyed by state, so transpositions share one node.  Two
widening gates keep the tree deep rather than broad: a node may only try a
new action while |A(s)| < k * N(s)**alpha, and a tried action may only sample
a fresh child state while |V(s,a)| < k' * N(s,a)**alpha' (at least one child
is always allowed); otherwise a stored child is replayed proportionally to
its visit count with its cached reward.  Action selection maximizes
Q(s,a) + c * sqrt(log N(s) / N(s,a)), with untried actions taking priority.

New candidate actions come from a genetic generator: with probability
``u_mutate`` a tournament-selected known action is mutated, with probability
``u_recombine`` two are crossed over, otherwise the rollout policy proposes
one.  Duplicates are retried a bounded number of times and then returned
as-is (the tree keeps a single copy of the statistics).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import ceil, log, sqrt

from .mdp import Action, FireState, Wildfire, burning_cells, idle_action


@dataclass
class MctsConfig:
    """Search hyperparameters; defaults follow the benchmark configuration."""

    exploration_c: float = 50.0
    widen_k_action: float = 40.0
    widen_alpha_action: float = 0.5
    widen_k_state: float = 40.0
    widen_alpha_state: float = 0.2
    depth: int = 10
    gamma: float = 1.0
    budget_seconds: float | None = 60.0
    budget_iterations: int | None = None
    u_mutate: float = 0.3
    u_recombine: float = 0.3
    use_genetic: bool = True
    rollout: str = "fw"  # "fw" or "random"
    reuse_tree: bool = True
    prior_n_state: float = 0.0
    prior_n_action: float = 0.0
    prior_q: float = 0.0
    prior_n_child: float = 0.0
    gen_retries: int = 10

    def __post_init__(self):
        if not 0.0 < self.widen_alpha_action <= 1.0:
            raise ValueError("action widening exponent must be in (0, 1]")
        if not 0.0 < self.widen_alpha_state <= 1.0:
            raise ValueError("state widening exponent must be in (0, 1]")
        if self.u_mutate + self.u_recombine > 1.0 + 1e-12:
            raise ValueError("u_mutate + u_recombine must not exceed 1")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if self.budget_seconds is None and self.budget_iterations is None:
            raise ValueError("need a wall-clock or iteration budget")
        if self.rollout not in ("fw", "random"):
            raise ValueError(f"unknown rollout policy {self.rollout!r}")


class _Edge:
    __slots__ = ("n", "q", "children", "child_visits")

    def __init__(self, n0: float, q0: float):
        self.n = n0
        self.q = q0
        self.children = {}  # state -> [visits, cached reward]
        self.child_visits = 0.0


class _Node:
    __slots__ = ("n", "edges", "burning")

    def __init__(self, n0: float, burning):
        self.n = n0
        self.edges = {}  # action -> _Edge, in insertion order
        self.burning = burning


@dataclass
class PlanResult:
    action: Action
    iterations: int
    fallback: bool = False
    root_value: float | None = None


def mutate(action: Action, state: FireState, rng) -> Action:
    """Resample a nonempty random subset of assignments onto other burning cells.

    Each team is independently selected with probability 1/|teams|,
    conditioned on at least one selection; a selected team moves to a
    uniformly random burning cell different from its current target (or
    stays put when no alternative exists).
    """
    teams = len(action)
    if teams == 0:
        return action
    burning = burning_cells(state)
    picked = None
    while not picked:
        picked = [i for i in range(teams) if rng.random() * teams < 1.0]
    out = list(action)
    for i in picked:
        options = [c for c in burning if c != out[i]]
        if options:
            out[i] = options[rng.randrange(len(options))]
    return tuple(sorted(out))


def recombine(a: Action, b: Action, rng) -> Action:
    """Uniform crossover: each slot keeps one parent's target at random."""
    if len(a) != len(b):
        raise ValueError("actions must have the same team count")
    return tuple(sorted(x if rng.random() < 0.5 else y for x, y in zip(a, b)))


def tournament_select(actions, q_values, rng) -> Action:
    """Binary tournament by Q rank: draw two with replacement, keep the better."""
    m = len(actions)
    if m == 0:
        raise ValueError("tournament over an empty action set")
    i = rng.randrange(m)
    j = rng.randrange(m)
    return actions[i] if q_values[i] >= q_values[j] else actions[j]


class Planner:
    """One search owner per planning call sequence; see ``plan``.

    ``pi0`` is the rollout/default policy, a callable (state, rng) -> action.
    The planner never mutates the generative model and may be used for many
    sequential episodes; distinct episodes running in parallel need distinct
    planners.
    """

    def __init__(self, model: Wildfire, teams: int, config: MctsConfig, pi0):
        self.model = model
        self.teams = teams
        self.config = config
        self.pi0 = pi0
        self._nodes = {}

    # -- public surface --------------------------------------------------

    def reset(self):
        self._nodes.clear()

    def plan(self, root: FireState, rng, trace: list | None = None) -> PlanResult:
        """Run simulations from ``root`` until the budget runs out, then return
        the action with the best Q.  A zero/insufficient budget falls back to
        the rollout policy and flags it."""
        if 1 not in root.burning:
            raise ValueError("plan() requires a non-terminal root state")
        cfg = self.config
        if cfg.reuse_tree:
            self._prune_to(root)
        else:
            self._nodes.clear()
        deadline = None
        if cfg.budget_seconds is not None:
            deadline = time.monotonic() + cfg.budget_seconds
        iterations = 0
        while True:
            if cfg.budget_iterations is not None and iterations >= cfg.budget_iterations:
                break
            if deadline is not None and time.monotonic() >= deadline:
                break
            if cfg.budget_iterations is None and deadline is None:
                break
            self._simulate(root, cfg.depth, rng)
            iterations += 1
            if trace is not None:
                node = self._nodes.get(root)
                if node is not None and node.edges:
                    best = max(node.edges.values(), key=lambda e: e.q)
                    trace.append((iterations, node.n, len(node.edges), best.q))
                else:
                    trace.append((iterations, 0, 0, float("nan")))
        node = self._nodes.get(root)
        if node is None or not node.edges:
            return PlanResult(self.pi0(root, rng), iterations, fallback=True)
        best_action, best_q = None, None
        for action, edge in node.edges.items():
            if best_q is None or edge.q > best_q:
                best_action, best_q = action, edge.q
        return PlanResult(best_action, iterations, root_value=best_q)

    # -- internals --------------------------------------------------------

    def _prune_to(self, root: FireState):
        """Keep only statistics reachable from the new root (tree reuse)."""
        nodes = self._nodes
        if not nodes:
            return
        keep = set()
        frontier = [root]
        while frontier:
            state = frontier.pop()
            if state in keep:
                continue
            node = nodes.get(state)
            if node is None:
                continue
            keep.add(state)
            for edge in node.edges.values():
                frontier.extend(edge.children.keys())
        if len(keep) < len(nodes):
            self._nodes = {s: nodes[s] for s in keep}

    def _simulate(self, state: FireState, depth: int, rng) -> float:
        if depth == 0:
            return 0.0
        cfg = self.config
        nodes = self._nodes
        node = nodes.get(state)
        if node is None:
            node = _Node(cfg.prior_n_state, burning_cells(state))
            nodes[state] = node
            return self._rollout(state, depth, rng)
        if not node.burning:
            return 0.0  # terminal: zero reward forever after
        node.n += 1
        edges = node.edges
        if len(edges) < cfg.widen_k_action * node.n ** cfg.widen_alpha_action:
            action = self._generate(node, state, rng)[0]
            if action not in edges:
                edges[action] = _Edge(cfg.prior_n_action, cfg.prior_q)
        # UCB selection; untried actions take priority in insertion order
        best_action = best_edge = None
        best_score = None
        log_n = log(node.n) if node.n > 1.0 else 0.0
        c = cfg.exploration_c
        for action, edge in edges.items():
            if edge.n <= 0.0:
                best_action, best_edge = action, edge
                break
            score = edge.q + c * sqrt(log_n / edge.n)
            if best_score is None or score > best_score:
                best_action, best_edge, best_score = action, edge, score
        edge = best_edge
        children = edge.children
        if len(children) < cfg.widen_k_state * edge.n ** cfg.widen_alpha_state or not children:
            child, reward = self.model.step(state, best_action, rng)
            record = children.get(child)
            if record is None:
                children[child] = [cfg.prior_n_child, reward]
                edge.child_visits += cfg.prior_n_child
            else:
                record[0] += 1
                edge.child_visits += 1
        else:
            child, reward = self._sample_child(edge, rng)
        q = reward + cfg.gamma * self._simulate(child, depth - 1, rng)
        edge.n += 1
        edge.q += (q - edge.q) / edge.n
        return q

    def _sample_child(self, edge: _Edge, rng):
        children = edge.children
        total = edge.child_visits
        if total <= 0.0:
            # all stored children unvisited (possible with zero priors)
            items = list(children.items())
            state, record = items[rng.randrange(len(items))]
        else:
            u = rng.random() * total
            acc = 0.0
            state = record = None
            for state, record in children.items():
                acc += record[0]
                if u < acc:
                    break
        record[0] += 1
        edge.child_visits += 1
        return state, record[1]

    def _generate(self, node: _Node, state: FireState, rng):
        """Propose a candidate action; see module docstring for the scheme."""
        cfg = self.config
        edges = node.edges
        u1, u2 = (cfg.u_mutate, cfg.u_recombine) if cfg.use_genetic else (0.0, 0.0)
        candidate, branch = None, "default"
        for _ in range(cfg.gen_retries + 1):
            u = rng.random()
            if u < u1 and len(edges) >= 1:
                actions = list(edges.keys())
                qs = [edges[a].q for a in actions]
                candidate = mutate(tournament_select(actions, qs, rng), state, rng)
                branch = "mutate"
            elif u < u1 + u2 and len(edges) >= 2:
                actions = list(edges.keys())
                qs = [edges[a].q for a in actions]
                first = tournament_select(actions, qs, rng)
                second = tournament_select(actions, qs, rng)
                candidate = recombine(first, second, rng)
                branch = "recombine"
            else:
                candidate = self.pi0(state, rng)
                branch = "default"
            if candidate not in edges:
                return candidate, branch
        return candidate, branch

    def _rollout(self, state: FireState, depth: int, rng) -> float:
        model = self.model
        pi0 = self.pi0
        gamma = self.config.gamma
        total = 0.0
        weight = 1.0
        for _ in range(depth):
            if 1 not in state.burning:
                break
            action = pi0(state, rng)
            state, reward = model.step(state, action, rng)
            total += weight * reward
            weight *= gamma
        return total
