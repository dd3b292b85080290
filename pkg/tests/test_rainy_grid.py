"""Rainy grid environment, go_to method, route modifier, and baselines."""

import random

import pytest
from scipy.stats import chisquare

from planact.acting import EpisodeOver, Outcome, run_episode
from planact.htn import State
from planact.rainy_grid import (
    EXIT,
    GRID,
    RainyGridEnv,
    RainyGridModifier,
    baseline_tasks,
    build_domain,
    expected_move_cost,
    go_to,
    manhattan,
    move,
)


def _obs_for(agent, beacon, reached=False):
    from planact.acting import Observation

    return Observation(
        State(
            {
                ("agent", ()): agent,
                ("beacon", ()): beacon,
                ("exit", ()): EXIT,
                ("beacon_reached", ()): reached,
            }
        )
    )


# -- reset ---------------------------------------------------------------


def test_reset_is_deterministic_per_seed():
    a = RainyGridEnv(0.5).reset(123)
    b = RainyGridEnv(0.5).reset(123)
    assert a == b


def test_reset_respects_distinctness_invariants():
    env = RainyGridEnv(0.5)
    for seed in range(10_000):
        obs = env.reset(seed)
        agent = obs.state.get("agent")
        beacon = obs.state.get("beacon")
        assert agent != beacon
        assert agent != EXIT
        assert beacon != EXIT


def test_reset_agent_distribution_is_uniform():
    # Chi-squared goodness of fit over the 99 non-exit cells.
    env = RainyGridEnv(0.5)
    counts = {}
    for seed in range(100_000):
        agent = env.reset(seed).state.get("agent")
        counts[agent] = counts.get(agent, 0) + 1
    assert EXIT not in counts
    assert len(counts) == GRID * GRID - 1
    result = chisquare(list(counts.values()))
    assert result.pvalue > 0.01


# -- execute -------------------------------------------------------------


def test_dry_move_steps_and_costs_one():
    env = RainyGridEnv(0.0)
    obs = env.reset(0)
    agent = obs.state.get("agent")
    before = dict(obs.state.items())
    nxt = env.execute("move", move("right"))
    moved = nxt.state.get("agent")
    assert moved == (min(GRID - 1, agent[0] + 1), agent[1])
    assert nxt.state.get("last_reward") == -1
    assert before[("beacon", ())] == nxt.state.get("beacon")


def test_rainy_move_is_wasted_at_minus_five():
    env = RainyGridEnv(1.0)
    obs = env.reset(0)
    agent = obs.state.get("agent")
    nxt = env.execute("move", move("up"))
    assert nxt.state.get("agent") == agent
    assert nxt.state.get("last_reward") == -5
    assert env.metric() == -5.0


def test_rain_stops_after_beacon():
    env = RainyGridEnv(1.0)
    env.reset(0)
    # Force the post-beacon regime and check motion resumes at -1.
    env._beacon_reached = True
    start = env._agent
    nxt = env.execute("move", move("up"))
    assert nxt.state.get("last_reward") == -1
    assert nxt.state.get("agent") != start or start[1] == GRID - 1


def test_reaching_exit_terminates():
    env = RainyGridEnv(0.0)
    env.reset(0)
    env._agent = (8, 9)
    obs = env.execute("move", move("right"))
    assert obs.terminated
    with pytest.raises(EpisodeOver):
        env.execute("move", move("left"))


def test_moves_clamp_at_the_border():
    env = RainyGridEnv(0.0)
    env.reset(0)
    env._agent = (0, 0)
    obs = env.execute("move", move("left"))
    assert obs.state.get("agent") == (0, 0)
    assert obs.state.get("last_reward") == -1


def test_rain_probability_is_not_observable():
    obs = RainyGridEnv(0.73).reset(5)
    assert all(key[0] != "p_rain" for key, _ in obs.state.items())


# -- go_to method --------------------------------------------------------


def test_go_to_done_when_at_destination():
    domain = build_domain()
    state = State({("agent", ()): (9, 9), ("exit", ()): EXIT})
    assert domain.methods["go_to"][0].decompose(state, go_to("exit")) == ()


def test_go_to_tie_breaks_horizontal():
    domain = build_domain()
    state = State({("agent", ()): (0, 0), ("exit", ()): EXIT})
    subtasks = domain.methods["go_to"][0].decompose(state, go_to("exit"))
    assert subtasks == (move("right"), go_to("exit"))


def test_go_to_single_axis():
    domain = build_domain()
    state = State({("agent", ()): (5, 0), ("beacon", ()): (5, 9)})
    subtasks = domain.methods["go_to"][0].decompose(state, go_to("beacon"))
    assert subtasks == (move("up"), go_to("beacon"))


# -- expected cost and modifier -------------------------------------------


@pytest.mark.parametrize(
    "p,expected", [(0.5, 3.0), (0.0, 1.0), (0.9, pytest.approx(19.0))]
)
def test_expected_move_cost_values(p, expected):
    assert expected_move_cost(p) == expected


def test_expected_move_cost_rejects_certain_rain():
    with pytest.raises(ValueError):
        expected_move_cost(1.0)


def test_expected_move_cost_weighted_variant():
    assert expected_move_cost(0.5, penalty_weighted=True) == pytest.approx(6.0)
    assert expected_move_cost(0.0, penalty_weighted=True) == 1.0


def test_modifier_tie_goes_direct():
    # agent (0,0), beacon (9,9): direct 3*18=54 vs via 3*18+0=54.
    modifier = RainyGridModifier()
    assert modifier(_obs_for((0, 0), (9, 9)), (go_to("exit"),)) == (go_to("exit"),)


def test_modifier_prefers_direct_when_beacon_is_far():
    # agent (8,9), beacon (0,0): direct 3*1=3 vs via 3*17+18=69.
    modifier = RainyGridModifier()
    out = modifier(_obs_for((8, 9), (0, 0)), (go_to("beacon"), go_to("exit")))
    assert out == (go_to("exit"),)


def test_modifier_prefers_beacon_when_cheap():
    # agent (0,0), beacon (0,1): direct 54 vs via 3*1+17=20.
    modifier = RainyGridModifier()
    out = modifier(_obs_for((0, 0), (0, 1)), (go_to("exit"),))
    assert out == (go_to("beacon"), go_to("exit"))


def test_modifier_always_heads_to_exit_once_beacon_reached():
    modifier = RainyGridModifier()
    out = modifier(_obs_for((3, 3), (3, 4), reached=True), (go_to("beacon"), go_to("exit")))
    assert out == (go_to("exit"),)


def test_route_choice_invariant_under_cost_scaling():
    # Scaling both route costs by the same positive factor never changes
    # the argmin, so any two modifiers with the same expected cost agree.
    rng = random.Random(0)
    modifier = RainyGridModifier()
    for _ in range(200):
        agent = (rng.randrange(10), rng.randrange(10))
        beacon = (rng.randrange(10), rng.randrange(10))
        if beacon in (agent, EXIT) or agent == EXIT:
            continue
        obs = _obs_for(agent, beacon)
        direct = manhattan(agent, EXIT) * modifier.expected_cost
        via = manhattan(agent, beacon) * modifier.expected_cost + manhattan(beacon, EXIT)
        chosen = modifier(obs, (go_to("exit"),))
        for scale in (0.5, 7.0):
            assert (direct * scale <= via * scale) == (chosen == (go_to("exit"),))


# -- baselines -----------------------------------------------------------


def test_baseline_task_lists():
    assert baseline_tasks(1) == (go_to("exit"),)
    assert baseline_tasks(2) == (go_to("beacon"), go_to("exit"))
    with pytest.raises(ValueError):
        baseline_tasks(3)


# -- whole episodes ------------------------------------------------------


def test_no_rain_baseline1_reward_is_exact_distance():
    domain = build_domain()
    for seed in range(50):
        env = RainyGridEnv(0.0)
        start = env.reset(seed).state.get("agent")
        env2 = RainyGridEnv(0.0)
        result = run_episode(env2, seed, baseline_tasks(1), domain)
        assert result.outcome is Outcome.TERMINATED
        assert result.final_metric == -manhattan(start, EXIT)


def test_reward_bounded_by_distance():
    # Cumulative reward can never beat the straight-line cost.
    domain = build_domain()
    for seed in range(30):
        env = RainyGridEnv(0.7)
        start = env.reset(seed).state.get("agent")
        env2 = RainyGridEnv(0.7)
        result = run_episode(env2, seed, baseline_tasks(1), domain, step_cap=10_000)
        assert result.final_metric <= -manhattan(start, EXIT)


def test_baseline2_visits_beacon_first():
    domain = build_domain()
    env = RainyGridEnv(0.0)
    start_obs = env.reset(11)
    beacon = start_obs.state.get("beacon")
    env2 = RainyGridEnv(0.0)
    result = run_episode(env2, 11, baseline_tasks(2), domain)
    start = start_obs.state.get("agent")
    expected = -(manhattan(start, beacon) + manhattan(beacon, EXIT))
    assert result.final_metric == expected
