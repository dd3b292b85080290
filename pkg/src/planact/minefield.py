"""Minefield: a 20x20 patrol world.

Ten transport ships cross the central band of the grid while a pirate boat,
indistinguishable from three fishing boats, wanders that band dropping
mines. The agent moves with 8-way adjacency, sweeps mines out of any cell
it enters, and can arrest a boat it is alongside. Includes the
environment, the movement/arrest models, the patrol methods, a
suspicion-count pirate estimator, the three-rule task modifier, and a
random-insertion baseline modifier.
"""

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .acting import Environment, EpisodeOver, Observation
from .htn import UNKNOWN, Domain, State, Task

GRID = 20
RIGHT_EDGE = GRID - 1
CENTRAL_ROWS = range(5, 15)
UPPER_ROWS = range(15, 20)
LOWER_ROWS = range(0, 5)
TRANSPORT_DELAY = 20
MINES_PER_DROP = 20
MINE_SIGMA = 2.0
SUSPICION_THRESHOLD = 5
BOAT_IDS = ("b0", "b1", "b2", "b3")

CENTRAL_CELLS = tuple((x, y) for y in CENTRAL_ROWS for x in range(GRID))
OUTER_CELLS = tuple(
    (x, y) for y in (*LOWER_ROWS, *UPPER_ROWS) for x in range(GRID)
)
# Neighbor offsets counterclockwise starting east; also the search sweep order.
NEIGHBORS_CCW = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


def move(cell) -> Task:
    return Task("move", (cell,))


def arrest(boat_id: str) -> Task:
    return Task("arrest", (boat_id,))


def random_moves() -> Task:
    return Task("random_moves")


def move_diag(cell) -> Task:
    return Task("move_diag", (cell,))


def search_near(cell) -> Task:
    return Task("search_near", (cell,))


def follow(boat_id: str) -> Task:
    return Task("follow", (boat_id,))


def chebyshev(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def in_grid(cell) -> bool:
    return 0 <= cell[0] < GRID and 0 <= cell[1] < GRID


def in_central(cell) -> bool:
    return cell[1] in CENTRAL_ROWS


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def _diag_step(frm, to):
    """One 8-way step from frm that closes both coordinate gaps toward to."""
    return (frm[0] + _sign(to[0] - frm[0]), frm[1] + _sign(to[1] - frm[1]))


@dataclass
class _Boat:
    id: str
    pos: tuple
    is_pirate: bool
    arrested: bool = False
    waypoint: Optional[tuple] = None


@dataclass
class _Transport:
    pos: tuple
    alive: bool = True


class MinefieldEnv(Environment):
    """One episode of the minefield.

    Each executed agent action advances the world one tick, in order: the
    agent acts; the pirate (unless arrested) steps toward its waypoint and
    may drop a Gaussian scatter of mines; the fishing boats random-walk
    inside their outer bands; after the start delay every living transport
    moves one column right; transports on mined cells detonate; then the
    terminal condition is checked. The episode ends when all surviving
    transports reach the right edge or none survive.

    Boats and transports are globally visible (roles are not); mine counts
    are visible only for the agent's current cell.
    """

    def __init__(
        self,
        p_mines: float,
        mine_sigma: float = MINE_SIGMA,
        mines_per_drop: int = MINES_PER_DROP,
        transport_delay: int = TRANSPORT_DELAY,
    ):
        if not 0.0 <= p_mines <= 1.0:
            raise ValueError(f"p_mines must be in [0, 1], got {p_mines}")
        self.p_mines = p_mines
        self.mine_sigma = mine_sigma
        self.mines_per_drop = mines_per_drop
        self.transport_delay = transport_delay
        self._terminated = True

    def reset(self, seed: int) -> Observation:
        rng = random.Random(seed)
        self._rng = rng
        self._transports = [_Transport((0, row)) for row in CENTRAL_ROWS]
        spots = rng.sample(OUTER_CELLS, 5)
        self._agent = spots[0]
        pirate_index = rng.randrange(4)
        self._boats = [
            _Boat(BOAT_IDS[i], spots[i + 1], is_pirate=(i == pirate_index))
            for i in range(4)
        ]
        self._mines: Counter = Counter()
        self._tick = 0
        self._cleared_last = 0
        self._terminated = False
        self.total_mines_dropped = 0
        self.total_mines_cleared = 0
        self.total_mines_detonated = 0
        return self._observe()

    @property
    def terminated(self) -> bool:
        return self._terminated

    @property
    def tick(self) -> int:
        return self._tick

    @property
    def mines_remaining(self) -> int:
        return sum(self._mines.values())

    def execute(self, action: str, task: Task) -> Optional[Observation]:
        if self._terminated:
            raise EpisodeOver("execute called after the episode terminated")
        if not self._agent_substep(action, task):
            return None
        self._world_substeps()
        return self._observe()

    def idle(self) -> Observation:
        """Advance one tick with no agent action (agentless rollouts)."""
        if self._terminated:
            raise EpisodeOver("idle called after the episode terminated")
        self._cleared_last = 0
        self._world_substeps()
        return self._observe()

    def metric(self) -> float:
        return float(sum(1 for t in self._transports if t.alive))

    # -- tick machinery -------------------------------------------------

    def _agent_substep(self, action: str, task: Task) -> bool:
        if action == "move":
            cell = task.args[0]
            if not in_grid(cell) or chebyshev(self._agent, cell) != 1:
                return False
            self._agent = cell
            cleared = self._mines.pop(cell, 0)
            self._cleared_last = cleared
            self.total_mines_cleared += cleared
            return True
        if action == "arrest":
            boat = self._boat(task.args[0])
            if boat is None or chebyshev(self._agent, boat.pos) > 1:
                return False
            if boat.is_pirate:
                boat.arrested = True
            self._cleared_last = 0
            return True
        return False

    def _world_substeps(self):
        self._step_pirate()
        self._step_fishers()
        if self._tick >= self.transport_delay:
            for transport in self._transports:
                if transport.alive and transport.pos[0] < RIGHT_EDGE:
                    transport.pos = (transport.pos[0] + 1, transport.pos[1])
        self._detonate()
        living = [t for t in self._transports if t.alive]
        if not living or all(t.pos[0] == RIGHT_EDGE for t in living):
            self._terminated = True
        self._tick += 1

    def _step_pirate(self):
        pirate = next(b for b in self._boats if b.is_pirate)
        if pirate.arrested:
            return
        if pirate.waypoint is None:
            pirate.waypoint = self._rng.choice(CENTRAL_CELLS)
        pirate.pos = _diag_step(pirate.pos, pirate.waypoint)
        if pirate.pos == pirate.waypoint:
            pirate.waypoint = None
        if self._rng.random() < self.p_mines:
            px, py = pirate.pos
            for _ in range(self.mines_per_drop):
                mx = round(self._rng.gauss(px, self.mine_sigma))
                my = round(self._rng.gauss(py, self.mine_sigma))
                if in_grid((mx, my)):  # out-of-grid samples are discarded
                    self._mines[(mx, my)] += 1
                    self.total_mines_dropped += 1

    def _step_fishers(self):
        for boat in self._boats:
            if boat.is_pirate:
                continue
            band = UPPER_ROWS if boat.pos[1] in UPPER_ROWS else LOWER_ROWS
            options = [
                (boat.pos[0] + dx, boat.pos[1] + dy)
                for dx, dy in NEIGHBORS_CCW
                if 0 <= boat.pos[0] + dx < GRID and boat.pos[1] + dy in band
            ]
            boat.pos = self._rng.choice(options)

    def _detonate(self):
        for transport in self._transports:
            if transport.alive and self._mines.get(transport.pos, 0) > 0:
                transport.alive = False
                self._mines[transport.pos] -= 1
                if self._mines[transport.pos] == 0:
                    del self._mines[transport.pos]
                self.total_mines_detonated += 1

    def _boat(self, boat_id) -> Optional[_Boat]:
        for boat in self._boats:
            if boat.id == boat_id:
                return boat
        return None

    def _observe(self) -> Observation:
        variables = {
            ("agent", ()): self._agent,
            ("tick", ()): self._tick,
            ("mines_here", ()): self._mines.get(self._agent, 0),
            ("mines_cleared", ()): self._cleared_last,
        }
        for boat in self._boats:
            variables[("boat", (boat.id,))] = boat.pos
            variables[("arrested", (boat.id,))] = boat.arrested
        for index, transport in enumerate(self._transports):
            variables[("transport", (index,))] = transport.pos
            variables[("alive", (index,))] = transport.alive
        return Observation(State(variables), self._terminated)


def run_out(env: MinefieldEnv) -> float:
    """Idle a live episode to its natural end and return the metric."""
    while not env.terminated:
        env.idle()
    return env.metric()


# -- agent-side models and methods --------------------------------------


def _apply_move(state: State, task: Task) -> Optional[State]:
    cell = task.args[0] if task.args else None
    agent = state.get("agent")
    if agent is UNKNOWN or cell is None:
        return None
    if not in_grid(cell) or chebyshev(agent, cell) != 1:
        return None
    return state.set("agent", value=cell)


def _apply_arrest(state: State, task: Task) -> Optional[State]:
    boat_id = task.args[0] if task.args else None
    agent = state.get("agent")
    boat_pos = state.get("boat", boat_id)
    if agent is UNKNOWN or boat_pos is UNKNOWN:
        return None
    if chebyshev(agent, boat_pos) > 1:
        return None
    # The model cannot see roles, so it predicts no state change.
    return state


def _decompose_move_diag(state: State, task: Task):
    cell = task.args[0]
    agent = state.get("agent")
    if agent is UNKNOWN or not in_grid(cell):
        return None
    if agent == cell:
        return ()
    return (move(_diag_step(agent, cell)), task)


def _decompose_search_near(state: State, task: Task):
    cell = task.args[0]
    targets = [
        (cell[0] + dx, cell[1] + dy)
        for dx, dy in NEIGHBORS_CCW
        if in_grid((cell[0] + dx, cell[1] + dy))
    ]
    return tuple(move_diag(t) for t in targets)


def _decompose_follow(state: State, task: Task):
    boat_id = task.args[0]
    agent = state.get("agent")
    target = state.get("boat", boat_id)
    if agent is UNKNOWN or target is UNKNOWN:
        return None
    if agent == target:
        return ()
    # The target is re-read on every decomposition, so the chase tracks a
    # moving boat.
    return (move(_diag_step(agent, target)), task)


def build_domain(agent_rng: random.Random) -> Domain:
    """Task registry for the minefield agent.

    The patrol method draws its waypoints from agent_rng, the agent's own
    stream, so episodes stay reproducible per seed.
    """

    def decompose_random_moves(state: State, task: Task):
        agent = state.get("agent")
        cells = [c for c in CENTRAL_CELLS if c != agent]
        return (move_diag(agent_rng.choice(cells)), task)

    domain = Domain()
    domain.add_action("move", _apply_move)
    domain.add_action("arrest", _apply_arrest)
    domain.add_method("random_moves", decompose_random_moves)
    domain.add_method("move_diag", _decompose_move_diag)
    domain.add_method("search_near", _decompose_search_near)
    domain.add_method("follow", _decompose_follow)
    return domain


@dataclass
class Belief:
    """What the agent has inferred so far about the hidden pirate."""

    suspicion: Counter = field(default_factory=Counter)
    encountered_mines: set = field(default_factory=set)
    pirate_arrested: bool = False


class PirateEstimator:
    """Residency-count pirate identification.

    Every observed tick, each unarrested boat seen inside the central band
    gains one suspicion point; fishing boats keep to the outer bands, so
    only the pirate accrues points under the default dynamics. A boat
    becomes the suspect once its count reaches the threshold (ties go to
    the lexicographically smallest id). No suspect is reported once the
    pirate is known to be arrested.
    """

    def __init__(self, threshold: int = SUSPICION_THRESHOLD, belief: Optional[Belief] = None):
        self.threshold = threshold
        self.belief = belief if belief is not None else Belief()

    def observe(self, obs: Observation) -> Optional[str]:
        state = obs.state
        arrested = state.select("arrested")
        if any(arrested.values()):
            self.belief.pirate_arrested = True
        for (boat_id,), pos in sorted(state.select("boat").items()):
            if not arrested.get((boat_id,)) and in_central(pos):
                self.belief.suspicion[boat_id] += 1
        return self.suspect()

    def suspect(self) -> Optional[str]:
        if self.belief.pirate_arrested or not self.belief.suspicion:
            return None
        top = max(self.belief.suspicion.values())
        if top < self.threshold:
            return None
        return min(b for b, n in self.belief.suspicion.items() if n == top)


class MinefieldModifier:
    """Three-rule agenda rewriter for the minefield agent.

    In order, per invocation: sweep around a cell where mines were just
    cleared; chase the estimator's suspect, dropping any stale chase tasks
    first; and arrest the suspect once alongside it.
    """

    def __init__(self, threshold: int = SUSPICION_THRESHOLD):
        self.belief = Belief()
        self.estimator = PirateEstimator(threshold, self.belief)

    def __call__(self, obs: Observation, tasks):
        state = obs.state
        suspect = self.estimator.observe(obs)
        agenda = list(tasks)

        cell = state.get("agent")
        cleared = state.get("mines_cleared")
        if cleared and cleared >= 1:
            self.belief.encountered_mines.add(cell)
            sweep = search_near(cell)
            if not agenda or agenda[0] != sweep:
                agenda.insert(0, sweep)

        if suspect is not None:
            agenda = [t for t in agenda if t.name != "follow"]
            agenda.insert(0, follow(suspect))
            if chebyshev(cell, state.get("boat", suspect)) <= 1:
                agenda.insert(0, arrest(suspect))

        return tuple(agenda)


class RandomInsertModifier:
    """Baseline rewriter: prepend one uniformly drawn task each invocation.

    The task kind, target cells, and boat ids are all sampled uniformly, so
    inserted tasks are frequently useless and occasionally inapplicable.
    """

    def __init__(self, rng: random.Random):
        self._rng = rng

    def __call__(self, obs: Observation, tasks):
        kind = self._rng.randrange(4)
        if kind == 0:
            inserted = search_near(self._cell())
        elif kind == 1:
            inserted = follow(self._boat())
        elif kind == 2:
            inserted = arrest(self._boat())
        else:
            inserted = move_diag(self._cell())
        return (inserted, *tasks)

    def _cell(self):
        return (self._rng.randrange(GRID), self._rng.randrange(GRID))

    def _boat(self) -> str:
        return BOAT_IDS[self._rng.randrange(len(BOAT_IDS))]
