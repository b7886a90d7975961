"""Benchmark harness: scenario files, initial-fire generators, episode loop.

Two scenario families mirror the benchmark grids.  The first seeds the
bottom-left corner of a k x k grid with linearly growing burn costs and a
-10 hotspot in the opposite corner; the second seeds the center with costs
decaying exponentially across columns.  Both let the fire spread uncontrolled
for a fuel-scaled warmup and then shrink all fuel by k**-0.25.

Benchmarks are paired: replication r of every policy plays against the
identical initial fire, because the generator consumes a dedicated stream
seeded only by (seed + r).  Results and summaries serialize to CSV with a
versioned header comment.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field, replace

import numpy as np

from . import heuristics
from .fluid import MoConfig, MoPolicy
from .mcts import MctsConfig, Planner
from .mdp import (
    Action,
    FireState,
    GridSpec,
    RewardModel,
    SpreadModel,
    Wildfire,
    idle_action,
)

RESULTS_SCHEMA = "# firegrid results v1"
SUMMARY_SCHEMA = "# firegrid summary v1"
STATS_SCHEMA = "# firegrid initial-fire-stats v1"

POLICY_NAMES = ("random", "fw", "mcts", "mo")


class ScenarioError(ValueError):
    """Malformed scenario document; the message names the offending field."""


def grid1_rewards(k: int, height: int | None = None) -> RewardModel:
    """Burn cost -(1 + col + row) from the bottom-left, top-right forced to -10."""
    if k < 2:
        raise ScenarioError("field 'k': grid1 needs k >= 2")
    height = k if height is None else height
    values = []
    for row in range(height):
        for col in range(k):
            values.append(-float(1 + col + row))
    values[(height - 1) * k + (k - 1)] = -10.0
    return RewardModel(tuple(values))


def grid2_rewards(k: int, lam: float, height: int | None = None) -> RewardModel:
    """Column-only cost -C * exp(-lam * col), scaled so one row sums to -1."""
    if k < 2:
        raise ScenarioError("field 'k': grid2 needs k >= 2")
    if lam <= 0:
        raise ScenarioError("field 'lambda': grid2 needs lambda > 0")
    height = k if height is None else height
    norm = sum(math.exp(-lam * i) for i in range(1, k + 1))
    row = [-math.exp(-lam * (col + 1)) / norm for col in range(k)]
    return RewardModel(tuple(row * height))


def _propagate(model: Wildfire, state: FireState, steps: int, rng) -> FireState:
    action = idle_action(0)
    for _ in range(steps):
        state, _ = model.step(state, action, rng)
    return state


def _scale_fuel(state: FireState, factor: float) -> FireState:
    return FireState(state.burning, tuple(int(f * factor) for f in state.fuel))


def gen_grid1_initial(spec: GridSpec, spread: SpreadModel, p: float, rng) -> FireState:
    """Uniform fuel floor(k / 2p), corner ignition, floor(k / 2p) uncontrolled
    steps, then all fuel scaled by k**-0.25 (floored)."""
    k = spec.width
    horizon = int(k / (2.0 * p))
    fuel = (horizon,) * spec.n_cells
    burning = tuple(1 if x == spec.index(0, 0) else 0 for x in range(spec.n_cells))
    model = Wildfire(spec, spread, RewardModel((0.0,) * spec.n_cells))
    state = _propagate(model, FireState(burning, fuel), horizon, rng)
    return _scale_fuel(state, k ** -0.25)


def gen_grid2_initial(spec: GridSpec, spread: SpreadModel, p: float, rng) -> FireState:
    """Center ignition with fuel floor(k / 4p); otherwise like grid1."""
    k = spec.width
    horizon = int(k / (4.0 * p))
    fuel = (horizon,) * spec.n_cells
    center = spec.index(math.ceil(k / 2) - 1, math.ceil(spec.height / 2) - 1)
    burning = tuple(1 if x == center else 0 for x in range(spec.n_cells))
    model = Wildfire(spec, spread, RewardModel((0.0,) * spec.n_cells))
    state = _propagate(model, FireState(burning, fuel), horizon, rng)
    return _scale_fuel(state, k ** -0.25)


@dataclass
class ScenarioConfig:
    """One experiment description; see README for the JSON schema."""

    family: str = "grid1"
    k: int = 8
    height: int | None = None
    neighborhood: str = "four"
    p_default: float = 0.06
    q_default: float = 0.8
    teams: int = 4
    lam: float | None = None
    seed: int = 0
    reps: int = 64
    rewards: list | None = None
    fuel: list | None = None
    burning: list | None = None
    mcts: dict = field(default_factory=dict)
    mo: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in ("grid1", "grid2", "explicit"):
            raise ScenarioError(f"field 'family': unknown family {self.family!r}")
        if self.k < 1:
            raise ScenarioError("field 'k': must be >= 1")
        if not 0.0 <= self.p_default <= 1.0:
            raise ScenarioError("field 'P_default': must be in [0, 1]")
        if not 0.0 <= self.q_default <= 1.0:
            raise ScenarioError("field 'Q_default': must be in [0, 1]")
        if self.teams < 0:
            raise ScenarioError("field 'teams': must be >= 0")
        if self.family == "grid2":
            if self.lam is None:
                raise ScenarioError("field 'lambda': required for grid2")
            if self.lam <= 0:
                raise ScenarioError("field 'lambda': must be > 0")
        if self.family == "explicit":
            n = self.spec().n_cells
            for name, arr in (("fuel", self.fuel), ("burning", self.burning)):
                if arr is None:
                    raise ScenarioError(f"field '{name}': required for explicit family")
                if len(arr) != n:
                    raise ScenarioError(f"field '{name}': expected {n} entries")
            if any(f < 0 for f in self.fuel):
                raise ScenarioError("field 'fuel': entries must be >= 0")
            if any(b not in (0, 1) for b in self.burning):
                raise ScenarioError("field 'burning': entries must be 0 or 1")
        if self.rewards is not None and len(self.rewards) != self.spec().n_cells:
            raise ScenarioError("field 'rewards': wrong length")
        if self.reps < 1:
            raise ScenarioError("field 'reps': must be >= 1")

    # -- construction ---------------------------------------------------

    def spec(self) -> GridSpec:
        return GridSpec(self.k, self.height or self.k, self.neighborhood)

    def spread(self) -> SpreadModel:
        return SpreadModel.uniform(self.spec(), self.p_default, self.q_default)

    def reward_model(self) -> RewardModel:
        if self.rewards is not None:
            try:
                return RewardModel(tuple(self.rewards))
            except ValueError as exc:
                raise ScenarioError(f"field 'rewards': {exc}") from exc
        if self.family == "grid1":
            return grid1_rewards(self.k, self.height)
        if self.family == "grid2":
            return grid2_rewards(self.k, self.lam, self.height)
        raise ScenarioError("field 'rewards': required for explicit family")

    def model(self) -> Wildfire:
        return Wildfire(self.spec(), self.spread(), self.reward_model())

    def initial_state(self, rng) -> FireState:
        if self.family == "grid1":
            return gen_grid1_initial(self.spec(), self.spread(), self.p_default, rng)
        if self.family == "grid2":
            return gen_grid2_initial(self.spec(), self.spread(), self.p_default, rng)
        return FireState(tuple(int(b) for b in self.burning),
                         tuple(int(f) for f in self.fuel))

    def generation_horizon(self) -> int:
        if self.family == "grid2":
            return int(self.k / (4.0 * self.p_default))
        if self.family == "grid1":
            return int(self.k / (2.0 * self.p_default))
        return max(self.fuel, default=1) + 1

    def make_policy(self, name: str):
        name = name.lower()
        spread = self.spread()
        rewards = self.reward_model()
        teams = self.teams
        if name == "random":
            return RandomPolicy(teams)
        if name in ("fw", "fw_sample"):
            weights = heuristics.fw_weights(heuristics.all_pairs_distances(spread), rewards)
            if name == "fw":
                return FwPolicy(weights, teams)
            return FwSamplePolicy(weights, teams)
        if name == "mcts":
            cfg = MctsConfig(**self.mcts)
            return MctsPolicy(self.model(), teams, cfg, spread, rewards)
        if name == "mo":
            cfg = MoConfig(**self.mo)
            return MoPolicy(spread, rewards, teams, cfg)
        raise ScenarioError(f"field 'policies': unknown policy {name!r}")


_FIELD_MAP = {
    "family": "family",
    "k": "k",
    "height": "height",
    "neighborhood": "neighborhood",
    "P_default": "p_default",
    "Q_default": "q_default",
    "teams": "teams",
    "lambda": "lam",
    "seed": "seed",
    "reps": "reps",
    "rewards": "rewards",
    "fuel": "fuel",
    "burning": "burning",
    "mcts": "mcts",
    "mo": "mo",
}


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    kwargs = {}
    for key, value in doc.items():
        if key not in _FIELD_MAP:
            raise ScenarioError(f"field {key!r}: unknown scenario field")
        kwargs[_FIELD_MAP[key]] = value
    try:
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON in {path}: {exc}") from exc
    return scenario_from_dict(doc)


def scenario_to_dict(config: ScenarioConfig) -> dict:
    reverse = {v: k for k, v in _FIELD_MAP.items()}
    doc = {}
    for attr, key in ((a, reverse[a]) for a in reverse):
        value = getattr(config, attr)
        if value in (None, {}, []):
            continue
        doc[key] = value
    return doc


def state_snapshot(config: ScenarioConfig, state: FireState) -> dict:
    """State snapshot in the scenario layout (dense row-major arrays)."""
    doc = scenario_to_dict(config)
    doc["family"] = "explicit"
    doc["burning"] = list(state.burning)
    doc["fuel"] = list(state.fuel)
    doc["rewards"] = list(config.reward_model().values)
    return doc


# -- policies -----------------------------------------------------------


class RandomPolicy:
    def __init__(self, teams: int):
        self.teams = teams

    def reset(self):
        pass

    def __call__(self, state: FireState, rng) -> Action:
        return heuristics.random_policy(state, self.teams, rng)


class FwPolicy:
    def __init__(self, weights, teams: int):
        self.weights = weights
        self.teams = teams

    def reset(self):
        pass

    def __call__(self, state: FireState, rng) -> Action:
        return heuristics.fw_policy(state, self.weights, self.teams)


class FwSamplePolicy(FwPolicy):
    def __call__(self, state: FireState, rng) -> Action:
        return heuristics.fw_sample_policy(state, self.weights, self.teams, rng)


class MctsPolicy:
    def __init__(self, model: Wildfire, teams: int, config: MctsConfig,
                 spread: SpreadModel, rewards: RewardModel):
        if config.rollout == "fw":
            weights = heuristics.fw_weights(
                heuristics.all_pairs_distances(spread), rewards)

            def pi0(state, rng, _w=weights, _t=teams):
                return heuristics.fw_sample_policy(state, _w, _t, rng)
        else:
            def pi0(state, rng, _t=teams):
                return heuristics.random_policy(state, _t, rng)

        self.planner = Planner(model, teams, config, pi0)
        self.teams = teams
        self.fallbacks = 0

    def reset(self):
        self.planner.reset()
        self.fallbacks = 0

    def __call__(self, state: FireState, rng) -> Action:
        if 1 not in state.burning:
            return idle_action(self.teams)
        result = self.planner.plan(state, rng)
        if result.fallback:
            self.fallbacks += 1
        return result.action


# -- episodes and benchmarks ---------------------------------------------


@dataclass
class EpisodeResult:
    policy: str
    seed: int
    reward: float
    steps: int
    step_cap_hit: bool = False
    mo_fallbacks: int = 0
    mcts_fallbacks: int = 0

    def flags(self) -> str:
        parts = []
        if self.step_cap_hit:
            parts.append("step-cap")
        if self.mo_fallbacks:
            parts.append(f"mo-fallback={self.mo_fallbacks}")
        if self.mcts_fallbacks:
            parts.append(f"mcts-fallback={self.mcts_fallbacks}")
        return ";".join(parts)


@dataclass
class PolicySummary:
    policy: str
    mean: float
    median: float
    q1: float
    q3: float
    improvement_vs_random: float | None


@dataclass
class RunSummary:
    policies: list
    mean_burning: float
    max_burning: int
    mean_fuel_burning: float
    fuel_non_burnt: float


def episode_rng(seed: int) -> random.Random:
    return random.Random(f"firegrid-episode:{seed}")


def run_episode(config: ScenarioConfig, policy, seed: int,
                policy_name: str = "?") -> EpisodeResult:
    """Play one full episode: generate the initial fire, then act until the
    fire is out or the hard step cap (10x the generation horizon) trips.

    The rng stream is seeded only by ``seed``; generation consumes a fixed
    prefix, so every policy sees the identical initial fire for a given seed.
    """
    rng = episode_rng(seed)
    model = config.model()
    state = config.initial_state(rng)
    if hasattr(policy, "reset"):
        policy.reset()
    cap = 10 * max(1, config.generation_horizon())
    total = 0.0
    steps = 0
    cap_hit = False
    while 1 in state.burning:
        if steps >= cap:
            cap_hit = True
            break
        action = policy(state, rng)
        state, reward = model.step(state, action, rng)
        total += reward
        steps += 1
    return EpisodeResult(
        policy=policy_name,
        seed=seed,
        reward=total,
        steps=steps,
        step_cap_hit=cap_hit,
        mo_fallbacks=policy.fallbacks if isinstance(policy, MoPolicy) else 0,
        mcts_fallbacks=policy.fallbacks if isinstance(policy, MctsPolicy) else 0,
    )


def _episode_task(args):
    doc, policy_name, seed = args
    config = scenario_from_dict(doc)
    policy = config.make_policy(policy_name)
    return run_episode(config, policy, seed, policy_name)


def initial_fire_stats(config: ScenarioConfig, reps: int | None = None):
    """Table-style statistics over the generated initial fires.

    Returns (mean burning, max burning, mean fuel over burning cells, fuel
    level of never-burnt cells).  The last figure is the scaled initial fuel
    of an untouched cell as produced by the generator; the corresponding
    published figures disagree with that procedure, so it is reported rather
    than matched.
    """
    reps = config.reps if reps is None else reps
    burn_counts = []
    fuel_means = []
    for r in range(reps):
        rng = episode_rng(config.seed + r)
        state = config.initial_state(rng)
        cells = [x for x in range(len(state.burning)) if state.burning[x]]
        burn_counts.append(len(cells))
        if cells:
            fuel_means.append(sum(state.fuel[x] for x in cells) / len(cells))
    horizon = config.generation_horizon()
    untouched = int(horizon * config.k ** -0.25)
    return (
        float(np.mean(burn_counts)),
        int(np.max(burn_counts)),
        float(np.mean(fuel_means)) if fuel_means else 0.0,
        float(untouched),
    )


def run_benchmark(config: ScenarioConfig, policies, reps: int | None = None,
                  jobs: int = 1):
    """Paired-seed comparison of ``policies``; returns (results, RunSummary).

    Replication r of every policy uses seed ``config.seed + r``.  With
    ``jobs > 1`` episodes fan out to a process pool; results are merged in
    (policy, seed) order so the output does not depend on scheduling or on
    the order the policies were given.
    """
    reps = config.reps if reps is None else reps
    doc = scenario_to_dict(config)
    tasks = [(doc, name, config.seed + r) for name in policies for r in range(reps)]
    if jobs > 1:
        import multiprocessing as mp

        # fork keeps workers importable from any entry point (pytest, stdin)
        with mp.get_context("fork").Pool(jobs) as pool:
            results = pool.map(_episode_task, tasks, chunksize=1)
    else:
        results = [_episode_task(t) for t in tasks]
    results.sort(key=lambda res: (res.policy, res.seed))

    by_policy = {}
    for res in results:
        by_policy.setdefault(res.policy, []).append(res.reward)
    random_mean = None
    if "random" in by_policy:
        random_mean = float(np.mean(by_policy["random"]))
    summaries = []
    for name in sorted(by_policy):
        rewards = np.asarray(by_policy[name])
        q1, med, q3 = np.percentile(rewards, [25, 50, 75], method="linear")
        improvement = None
        if random_mean is not None and random_mean != 0.0:
            improvement = 100.0 * (float(rewards.mean()) - random_mean) / abs(random_mean)
        summaries.append(PolicySummary(
            policy=name, mean=float(rewards.mean()), median=float(med),
            q1=float(q1), q3=float(q3), improvement_vs_random=improvement,
        ))
    mean_burn, max_burn, mean_fuel, untouched = initial_fire_stats(config, reps)
    summary = RunSummary(
        policies=summaries,
        mean_burning=mean_burn,
        max_burning=max_burn,
        mean_fuel_burning=mean_fuel,
        fuel_non_burnt=untouched,
    )
    return results, summary


def branching_factor(n_burning: float, teams: int):
    """Distinct team-to-burning-cell assignments: N**teams / teams!, plus its
    Stirling approximation (e N / teams)**teams / sqrt(2 pi teams)."""
    if teams < 1:
        raise ValueError("teams must be >= 1")
    if n_burning < 0:
        raise ValueError("n_burning must be >= 0")
    exact = n_burning ** teams / math.factorial(teams)
    if n_burning == 0:
        return exact, 0.0
    stirling = (math.e * n_burning / teams) ** teams / math.sqrt(2 * math.pi * teams)
    return exact, stirling


# -- CSV serialization ----------------------------------------------------


def results_to_csv(results) -> str:
    out = io.StringIO()
    out.write(RESULTS_SCHEMA + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["policy", "seed", "reward", "steps", "flags"])
    for res in results:
        writer.writerow([res.policy, res.seed, repr(res.reward), res.steps,
                         res.flags()])
    return out.getvalue()


def summary_to_csv(summary: RunSummary) -> str:
    out = io.StringIO()
    out.write(SUMMARY_SCHEMA + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["policy", "mean", "median", "q1", "q3",
                     "improvement_vs_random_pct"])
    for ps in summary.policies:
        writer.writerow([
            ps.policy, repr(ps.mean), repr(ps.median), repr(ps.q1), repr(ps.q3),
            "" if ps.improvement_vs_random is None else repr(ps.improvement_vs_random),
        ])
    writer.writerow([])
    writer.writerow(["mean_cells_burning", repr(summary.mean_burning)])
    writer.writerow(["max_cells_burning", summary.max_burning])
    writer.writerow(["mean_fuel_burning_cells", repr(summary.mean_fuel_burning)])
    writer.writerow(["fuel_non_burnt_cells", repr(summary.fuel_non_burnt)])
    return out.getvalue()


def stats_to_csv(config: ScenarioConfig, reps: int | None = None) -> str:
    mean_burn, max_burn, mean_fuel, untouched = initial_fire_stats(config, reps)
    out = io.StringIO()
    out.write(STATS_SCHEMA + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["statistic", "value"])
    writer.writerow(["mean_cells_burning", repr(mean_burn)])
    writer.writerow(["max_cells_burning", max_burn])
    writer.writerow(["mean_fuel_burning_cells", repr(mean_fuel)])
    writer.writerow(["fuel_non_burnt_cells", repr(untouched)])
    return out.getvalue()
