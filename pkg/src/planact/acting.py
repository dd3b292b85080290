"""Interleaved planning and execution over an episodic environment.

The acting loop works on the first task of an ordered task list, executing
actions in the environment as soon as they are chosen instead of building a
plan. After every executed action a task modifier may rewrite the remaining
task list in response to the new observation.
"""

import enum
import zlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .htn import Domain, State, Task, TaskKind, TaskList


@dataclass(frozen=True)
class Observation:
    """A possibly partial view of the environment plus the terminal signal."""

    state: State
    terminated: bool = False


class EpisodeOver(RuntimeError):
    """An environment was driven past its terminal signal."""


class Environment(ABC):
    """Episodic, seeded world driven one action at a time.

    Resetting with equal seeds must reproduce the episode exactly under
    identical action sequences. Calling execute after the terminal signal
    is a contract violation and raises EpisodeOver.
    """

    @abstractmethod
    def reset(self, seed: int) -> Observation:
        """Start a new episode and return the initial observation."""

    @abstractmethod
    def execute(self, action: str, task: Task) -> Optional[Observation]:
        """Run one action and return the next observation.

        Returns None when the action is not applicable; the world does not
        advance in that case.
        """

    @abstractmethod
    def metric(self) -> float:
        """The episode's performance number so far."""


# A task modifier receives the latest observation and the remaining task
# list and returns the (possibly rewritten) task list. It must be total.
TaskModifier = Callable[[Observation, TaskList], Iterable[Task]]


def identity_modifier(obs: Observation, tasks: TaskList) -> TaskList:
    """The do-nothing task modifier."""
    return tasks


class Outcome(enum.Enum):
    COMPLETED = "completed"
    TERMINATED = "terminated-by-environment"
    FAILED = "failed"
    CAPPED = "capped"


@dataclass(frozen=True)
class EpisodeResult:
    final_metric: float
    steps_executed: int
    trace: tuple[tuple[Task, int], ...]  # (executed task, observation digest)
    outcome: Outcome


def observation_digest(obs: Observation) -> int:
    """Stable 32-bit fingerprint of an observation (hash-seed independent)."""
    items = sorted(repr(kv) for kv in obs.state.items())
    payload = ("T|" if obs.terminated else "F|") + "|".join(items)
    return zlib.crc32(payload.encode("utf-8"))


def run_episode(
    env: Environment,
    seed: int,
    tasks: Iterable[Task],
    domain: Domain,
    modifier: TaskModifier = identity_modifier,
    step_cap: Optional[int] = None,
) -> EpisodeResult:
    """Run one episode of the acting loop and package the result.

    Resets the environment with the seed, then repeatedly: return on an
    empty task list or a terminated episode; execute the head task's action
    when it is primitive and applicable, invoke the modifier on the
    remainder, and continue; otherwise expand the head task with the first
    applicable method, falling back to later methods on dead ends.

    Executed actions are irreversible, so executing one discards every
    pending method alternative: a dead end after that fails the episode
    instead of silently backtracking over a real action.
    """
    initial = tuple(tasks)
    if not initial:
        raise ValueError("initial task list is empty")
    for t in initial:
        if domain.kind_of(t) is TaskKind.UNKNOWN:
            raise ValueError(f"initial task {t!r} is not registered in the domain")

    obs = env.reset(seed)
    cur_tasks: TaskList = initial
    # Method alternatives saved since the last executed action: (tasks, next index).
    choices: list[tuple[TaskList, int]] = []
    retry_from = 0
    steps = 0
    trace: list[tuple[Task, int]] = []
    failed = False
    capped = False

    while True:
        if obs.terminated or not cur_tasks:
            break
        if step_cap is not None and steps >= step_cap:
            capped = True
            break
        head, rest = cur_tasks[0], cur_tasks[1:]
        kind = domain.kind_of(head)

        if kind is TaskKind.PRIMITIVE:
            model = domain.actions[head.name]
            if model.apply(obs.state, head) is not None:
                next_obs = env.execute(head.name, head)
                if next_obs is not None:
                    obs = next_obs
                    steps += 1
                    trace.append((head, observation_digest(obs)))
                    cur_tasks = tuple(modifier(obs, rest))
                    choices.clear()  # commit point: the action cannot be undone
                    retry_from = 0
                    continue
        elif kind is TaskKind.COMPOUND:
            methods = domain.methods[head.name]
            advanced = False
            for index in range(retry_from, len(methods)):
                subtasks = methods[index].decompose(obs.state, head)
                if subtasks is not None:
                    choices.append((cur_tasks, index + 1))
                    cur_tasks = tuple(subtasks) + rest
                    retry_from = 0
                    advanced = True
                    break
            if advanced:
                continue
        # Unknown task names (a modifier may insert one) fall through and
        # fail like any other dead end rather than being skipped.

        if not choices:
            failed = True
            break
        cur_tasks, retry_from = choices.pop()

    if capped:
        outcome = Outcome.CAPPED
    elif failed:
        outcome = Outcome.FAILED
    elif not cur_tasks or steps == 0:
        # An episode that was already terminal before any action counts as
        # completed, same as one whose agenda was fully worked off.
        outcome = Outcome.COMPLETED
    else:
        outcome = Outcome.TERMINATED
    return EpisodeResult(env.metric(), steps, tuple(trace), outcome)
