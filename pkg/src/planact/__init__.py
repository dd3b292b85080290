"""Ordered task decomposition planning and acting with task-list rewriting.

The core formalism and offline planner live in `htn`; the interleaved
plan-act loop in `acting`; the two simulation worlds in `rainy_grid` and
`minefield`; and the experiment machinery in `harness`, `stats`, and `cli`.
"""

from .acting import (
    Environment,
    EpisodeOver,
    EpisodeResult,
    Observation,
    Outcome,
    identity_modifier,
    run_episode,
)
from .htn import (
    UNKNOWN,
    Domain,
    Plan,
    PlanStep,
    ReplayError,
    State,
    Task,
    TaskKind,
    replay,
    seek_plan,
)
from .harness import RunRecord, SweepSpec, aggregate, episode_seed, run_sweep
from .stats import TestReport, welch_t

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "Environment",
    "EpisodeOver",
    "EpisodeResult",
    "Observation",
    "Outcome",
    "Plan",
    "PlanStep",
    "ReplayError",
    "RunRecord",
    "State",
    "SweepSpec",
    "Task",
    "TaskKind",
    "TestReport",
    "UNKNOWN",
    "aggregate",
    "episode_seed",
    "identity_modifier",
    "replay",
    "run_episode",
    "run_sweep",
    "seek_plan",
    "welch_t",
    "__version__",
]
