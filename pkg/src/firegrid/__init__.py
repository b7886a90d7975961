"""Dynamic-resource-allocation planning toolkit for grid wildfire suppression.

Modules:
    mdp         -- grid state, stochastic transition law, rewards
    heuristics  -- random baseline and the distance-weighted priority rule
    mcts        -- tree search with double progressive widening
    fluid       -- fluid intensity MILP and the receding-horizon controller
    lp / milp   -- bundled simplex and branch-and-bound solvers
    mpsio       -- fixed-format MPS writer/parser
    harness     -- scenario generators, episode runner, paired benchmarks
    cli         -- command-line interface
"""

from .mdp import (
    Action,
    FireState,
    GridSpec,
    RewardModel,
    SpreadModel,
    Wildfire,
    idle_action,
    is_terminal,
    make_action,
)

__all__ = [
    "Action",
    "FireState",
    "GridSpec",
    "RewardModel",
    "SpreadModel",
    "Wildfire",
    "idle_action",
    "is_terminal",
    "make_action",
]

__version__ = "0.1.0"
