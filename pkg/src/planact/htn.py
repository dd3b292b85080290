"""Core task-decomposition formalism.

States, tasks, action and method registries, and an offline depth-first
planner that decomposes an ordered task list into a validated plan.
"""

import enum
from dataclasses import dataclass
from typing import Any, Callable, Iterable, NamedTuple, Optional


class _Unknown:
    """Sentinel for state variables that have no recorded value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNKNOWN"

    def __bool__(self):
        return False


UNKNOWN = _Unknown()

Value = Any  # symbol, bool, int, or an integer pair


class State:
    """Map from (name, args) variable keys to values.

    Reading an absent key yields UNKNOWN instead of raising, so partial
    observations can be queried uniformly. Updates return a new State;
    instances are treated as immutable, which keeps backtracking cheap.
    """

    __slots__ = ("_vars",)

    def __init__(self, variables=None):
        self._vars = dict(variables) if variables else {}

    def get(self, name, *args):
        return self._vars.get((name, args), UNKNOWN)

    def set(self, name, *args, value):
        """Return a copy of this state with one variable set."""
        new = dict(self._vars)
        new[(name, args)] = value
        return State(new)

    def select(self, name) -> dict:
        """All variables with the given name, keyed by their args tuple."""
        return {args: v for (n, args), v in self._vars.items() if n == name}

    def items(self):
        return self._vars.items()

    def __len__(self):
        return len(self._vars)

    def __eq__(self, other):
        return isinstance(other, State) and self._vars == other._vars

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in sorted(self._vars.items(), key=repr))
        return f"State({inner})"


@dataclass(frozen=True)
class Task:
    """A named activity with ground arguments.

    Whether a task is primitive or compound is decided by the Domain it is
    interpreted against; the task itself carries no kind flag.
    """

    name: str
    args: tuple = ()

    def __repr__(self):
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(map(repr, self.args))})"


TaskList = tuple[Task, ...]

# An action maps (state, task) to the successor state, or None when it is
# not applicable. A method maps (state, task) to a replacement task list
# (empty means trivially done), or None when it is not applicable.
ApplyFn = Callable[[State, Task], Optional[State]]
DecomposeFn = Callable[[State, Task], Optional[Iterable[Task]]]


@dataclass(frozen=True)
class Action:
    name: str
    apply: ApplyFn


@dataclass(frozen=True)
class Method:
    name: str
    decompose: DecomposeFn


class TaskKind(enum.Enum):
    PRIMITIVE = "primitive"
    COMPOUND = "compound"
    UNKNOWN = "unknown"


class Domain:
    """Registry mapping each task name to one action or an ordered method list.

    A name is either primitive (has an action) or compound (has methods),
    never both. Method registration order is the backtracking trial order.
    """

    def __init__(self):
        self.actions: dict[str, Action] = {}
        self.methods: dict[str, list[Method]] = {}

    def add_action(self, name: str, apply_fn: ApplyFn) -> None:
        if name in self.methods:
            raise ValueError(f"{name!r} already has methods and cannot be an action")
        if name in self.actions:
            raise ValueError(f"action {name!r} registered twice")
        self.actions[name] = Action(name, apply_fn)

    def add_method(self, name: str, decompose_fn: DecomposeFn) -> None:
        if name in self.actions:
            raise ValueError(f"{name!r} is an action and cannot have methods")
        self.methods.setdefault(name, []).append(Method(name, decompose_fn))

    def kind_of(self, task: Task) -> TaskKind:
        if task.name in self.actions:
            return TaskKind.PRIMITIVE
        if task.name in self.methods:
            return TaskKind.COMPOUND
        return TaskKind.UNKNOWN


class PlanStep(NamedTuple):
    action: str
    task: Task


@dataclass(frozen=True)
class Plan:
    """An ordered sequence of ground action applications."""

    steps: tuple[PlanStep, ...] = ()

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


class ReplayError(Exception):
    """A plan step was inapplicable during replay; carries the step index."""

    def __init__(self, index: int, task: Task):
        super().__init__(f"plan step {index} ({task!r}) is not applicable")
        self.index = index
        self.task = task


def replay(state: State, plan: Plan, domain: Domain) -> State:
    """Fold the domain's action models over a plan.

    Serves as the independent validity check for seek_plan output: any
    returned plan must replay from the same initial state without error.
    """
    for index, step in enumerate(plan.steps):
        action = domain.actions.get(step.action)
        successor = action.apply(state, step.task) if action else None
        if successor is None:
            raise ReplayError(index, step.task)
        state = successor
    return state


def seek_plan(
    state: State,
    tasks: Iterable[Task],
    domain: Domain,
    max_expansions: int = 10_000,
) -> Optional[Plan]:
    """Depth-first ordered decomposition of a task list into a plan.

    The first task is always worked on next. A primitive task contributes
    its action when applicable; a compound task is replaced by the subtasks
    of the first applicable method, with later methods tried on backtracking.
    Returns None when every branch dead-ends, or when the expansion budget
    is exhausted (recursive methods with no terminating condition would
    otherwise loop forever).
    """
    cur_state = state
    cur_tasks: TaskList = tuple(tasks)
    cur_plan: tuple[PlanStep, ...] = ()
    # Saved alternatives: (state, tasks, plan, next method index to try).
    choices: list[tuple[State, TaskList, tuple[PlanStep, ...], int]] = []
    retry_from = 0
    expansions = 0

    while True:
        if not cur_tasks:
            return Plan(cur_plan)
        head, rest = cur_tasks[0], cur_tasks[1:]
        kind = domain.kind_of(head)

        if kind is TaskKind.PRIMITIVE:
            successor = domain.actions[head.name].apply(cur_state, head)
            if successor is not None:
                cur_state = successor
                cur_tasks = rest
                cur_plan = cur_plan + (PlanStep(head.name, head),)
                retry_from = 0
                continue
        elif kind is TaskKind.COMPOUND:
            methods = domain.methods[head.name]
            advanced = False
            for index in range(retry_from, len(methods)):
                expansions += 1
                if expansions > max_expansions:
                    return None
                subtasks = methods[index].decompose(cur_state, head)
                if subtasks is not None:
                    choices.append((cur_state, cur_tasks, cur_plan, index + 1))
                    cur_tasks = tuple(subtasks) + rest
                    retry_from = 0
                    advanced = True
                    break
            if advanced:
                continue
        else:
            raise ValueError(f"task {head!r} is not registered in the domain")

        # Dead end: resume the most recent compound choice at its next method.
        if not choices:
            return None
        cur_state, cur_tasks, cur_plan, retry_from = choices.pop()
