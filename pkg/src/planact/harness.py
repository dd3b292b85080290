"""Experiment harness: seeded sweeps, aggregation, and CSV emission.

A sweep runs a batch of episodes per (probability, agent) point. Every
episode's seed is a pure function of the sweep spec, so the emitted CSV is
byte-identical across runs and across worker counts.
"""

import csv
import random
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import fsum, sqrt
from statistics import stdev
from typing import Iterable, Optional, Sequence

from . import minefield, rainy_grid
from .acting import Outcome, run_episode
from .stats import TestReport, welch_t

AGENTS = {
    "rainy-grid": ("tm", "baseline1", "baseline2"),
    "minefield": ("tm", "none", "random"),
}
DEFAULT_EPISODES = {"rainy-grid": 500, "minefield": 50}
DEFAULT_STEP_CAP = 10_000

_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    """SplitMix64 finalizer; a stable stand-in for hash() across processes."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def episode_seed(base_seed: int, prob_index: int, episode_index: int) -> int:
    """Decorrelated per-episode seed derived from the sweep coordinates."""
    return (base_seed ^ _mix64(((prob_index + 1) << 40) ^ (episode_index + 1))) & _MASK64


@dataclass(frozen=True)
class SweepSpec:
    domain: str
    agent: str
    probabilities: tuple[float, ...]
    episodes_per_point: int
    base_seed: int
    step_cap: int = DEFAULT_STEP_CAP

    def __post_init__(self):
        if self.domain not in AGENTS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.agent not in AGENTS[self.domain]:
            raise ValueError(
                f"agent {self.agent!r} is not valid for {self.domain!r}; "
                f"choose from {AGENTS[self.domain]}"
            )
        if self.episodes_per_point < 1:
            raise ValueError("episodes_per_point must be at least 1")
        if not self.probabilities:
            raise ValueError("probabilities must be non-empty")
        for p in self.probabilities:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")


@dataclass(frozen=True)
class RunRecord:
    domain: str
    agent: str
    probability: float
    seed: int
    metric: float
    steps: int
    outcome: str


def _run_one(domain: str, agent: str, probability: float, seed: int, step_cap: int) -> RunRecord:
    # The addressable episode seed is split into independent environment
    # and agent streams.
    env_seed = _mix64(seed ^ 0x1)
    agent_seed = _mix64(seed ^ 0x2)

    if domain == "rainy-grid":
        env = rainy_grid.RainyGridEnv(probability)
        dom = rainy_grid.build_domain()
        if agent == "tm":
            tasks = rainy_grid.baseline_tasks(1)
            result = run_episode(
                env, env_seed, tasks, dom, rainy_grid.RainyGridModifier(), step_cap
            )
        else:
            tasks = rainy_grid.baseline_tasks(1 if agent == "baseline1" else 2)
            result = run_episode(env, env_seed, tasks, dom, step_cap=step_cap)
        return RunRecord(
            domain, agent, probability, seed,
            result.final_metric, result.steps_executed, result.outcome.value,
        )

    env = minefield.MinefieldEnv(probability)
    if agent == "none":
        env.reset(env_seed)
        ticks = 0
        while not env.terminated and ticks < step_cap:
            env.idle()
            ticks += 1
        outcome = Outcome.COMPLETED if env.terminated else Outcome.CAPPED
        return RunRecord(domain, agent, probability, seed, env.metric(), ticks, outcome.value)

    agent_rng = random.Random(agent_seed)
    dom = minefield.build_domain(agent_rng)
    if agent == "tm":
        modifier = minefield.MinefieldModifier()
    else:
        modifier = minefield.RandomInsertModifier(agent_rng)
    result = run_episode(env, env_seed, (minefield.random_moves(),), dom, modifier, step_cap)
    metric = result.final_metric
    if result.outcome is Outcome.FAILED and not env.terminated:
        # The agent's controller gave up mid-episode; the world still runs
        # to its natural end, and survivors are counted there.
        metric = minefield.run_out(env)
    return RunRecord(
        domain, agent, probability, seed, metric, result.steps_executed, result.outcome.value
    )


def _run_one_args(args) -> RunRecord:
    return _run_one(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[RunRecord]:
    """Run every episode of a sweep; the result is a pure function of spec.

    With jobs > 1 episodes run in worker processes; ordering (and therefore
    any CSV written from the records) is unaffected.
    """
    work = [
        (
            spec.domain,
            spec.agent,
            probability,
            episode_seed(spec.base_seed, prob_index, episode_index),
            spec.step_cap,
        )
        for prob_index, probability in enumerate(spec.probabilities)
        for episode_index in range(spec.episodes_per_point)
    ]
    if jobs <= 1:
        return [_run_one(*args) for args in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one_args, work, chunksize=max(1, len(work) // (jobs * 4))))


@dataclass(frozen=True)
class SeriesPoint:
    probability: float
    agent: str
    n: int
    mean: float
    stderr: float


def aggregate(records: Iterable[RunRecord]) -> list[SeriesPoint]:
    """Per-(probability, agent) mean and standard error, stably ordered."""
    groups: dict[tuple[float, str], list[float]] = defaultdict(list)
    for record in records:
        groups[(record.probability, record.agent)].append(record.metric)
    points = []
    for (probability, agent), metrics in sorted(groups.items()):
        n = len(metrics)
        mean = fsum(metrics) / n
        err = stdev(metrics) / sqrt(n) if n > 1 else 0.0
        points.append(SeriesPoint(probability, agent, n, mean, err))
    return points


# -- CSV emission --------------------------------------------------------

RECORD_FIELDS = ("domain", "agent", "probability", "seed", "metric", "steps", "outcome")
SERIES_FIELDS = ("agent", "probability", "mean", "stderr")
REPORT_FIELDS = ("group_a", "group_b", "probability", "t_statistic", "p_value", "df", "n_a", "n_b")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _open_writer(path):
    handle = open(path, "w", encoding="utf-8", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


def write_records_csv(records: Sequence[RunRecord], path) -> None:
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow(
                [r.domain, r.agent, _fmt(r.probability), r.seed, _fmt(r.metric), r.steps, r.outcome]
            )


def read_records_csv(path) -> list[RunRecord]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(handle) if row and not row[0].startswith("#")]
    if not rows or tuple(rows[0]) != RECORD_FIELDS:
        raise ValueError(f"{path} does not look like a run-records CSV")
    records = []
    for row in rows[1:]:
        domain, agent, probability, seed, metric, steps, outcome = row
        records.append(
            RunRecord(domain, agent, float(probability), int(seed), float(metric), int(steps), outcome)
        )
    return records


def write_series_csv(points: Sequence[SeriesPoint], path) -> None:
    """Per-agent plot series, ordered by agent then probability."""
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(SERIES_FIELDS)
        for p in sorted(points, key=lambda p: (p.agent, p.probability)):
            writer.writerow([p.agent, _fmt(p.probability), _fmt(p.mean), _fmt(p.stderr)])


def write_reports_csv(reports: Sequence[tuple[Optional[float], TestReport]], path) -> None:
    """Rows of (probability, test report); probability 'all' marks a pooled test."""
    handle, writer = _open_writer(path)
    with handle:
        handle.write("# p_value is two-tailed (Welch unequal-variance t-test)\n")
        writer.writerow(REPORT_FIELDS)
        for probability, r in reports:
            writer.writerow(
                [
                    r.group_a,
                    r.group_b,
                    "all" if probability is None else _fmt(probability),
                    _fmt(r.t_statistic),
                    _fmt(r.p_value),
                    _fmt(r.df),
                    r.n_a,
                    r.n_b,
                ]
            )


def compare_groups(
    records: Iterable[RunRecord],
    agent_a: str,
    agent_b: str,
    by_probability: bool = False,
) -> list[tuple[Optional[float], TestReport]]:
    """Welch tests between two agents' metrics, pooled or per probability."""
    a_groups: dict[Optional[float], list[float]] = defaultdict(list)
    b_groups: dict[Optional[float], list[float]] = defaultdict(list)
    for record in records:
        key = record.probability if by_probability else None
        if record.agent == agent_a:
            a_groups[key].append(record.metric)
        elif record.agent == agent_b:
            b_groups[key].append(record.metric)
    if not a_groups or not b_groups:
        missing = agent_a if not a_groups else agent_b
        raise ValueError(f"no records found for agent {missing!r}")
    reports = []
    for key in sorted(a_groups, key=lambda k: (k is not None, k)):
        if key not in b_groups:
            continue
        reports.append((key, welch_t(a_groups[key], b_groups[key], agent_a, agent_b)))
    if not reports:
        raise ValueError("the two agents share no probability points")
    return reports
