"""Predicate-evaluation throughput and parallel scaling measurements."""

from __future__ import annotations

import multiprocessing as mp
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .registry import TaskSetDef, builtin_registry, evaluate_all
from .telemetry import Trajectory


def available_cpus() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # not on every platform
        return os.cpu_count() or 1


@dataclass(frozen=True)
class Throughput:
    games: int
    frame_players: int
    seconds: float

    @property
    def per_second(self) -> float:
        return self.frame_players / self.seconds if self.seconds > 0 else float("inf")


def measure_throughput(
    trajectories: Sequence[Trajectory], registry: Sequence[TaskSetDef] | None = None, repeat: int = 3
) -> Throughput:
    """Best-of-``repeat`` single-threaded time to produce every player's mask."""
    reg = builtin_registry() if registry is None else registry
    work = sum(t.alive.shape[0] * t.alive.shape[1] for t in trajectories)
    best = float("inf")
    for _ in range(max(1, repeat)):
        t0 = time.perf_counter()
        for traj in trajectories:
            evaluate_all(traj, reg)
        best = min(best, time.perf_counter() - t0)
    return Throughput(len(trajectories), work, best)


_SHARED: Sequence[Trajectory] = ()


def _evaluate_range(bounds: tuple[int, int]) -> int:
    work = 0
    for traj in _SHARED[bounds[0]:bounds[1]]:
        evaluate_all(traj)
        work += int(traj.alive.size)
    return work


@dataclass(frozen=True)
class Scaling:
    jobs: int
    serial_seconds: float
    parallel_seconds: float
    cpus: int

    @property
    def speedup(self) -> float:
        return self.serial_seconds / self.parallel_seconds if self.parallel_seconds > 0 else float("inf")


def _run(bounds: list[tuple[int, int]], jobs: int) -> float:
    t0 = time.perf_counter()
    if jobs <= 1:
        for b in bounds:
            _evaluate_range(b)
    else:
        # forked workers inherit the loaded games; only index ranges cross the pipe
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            list(pool.map(_evaluate_range, bounds))
    return time.perf_counter() - t0


def measure_scaling(trajectories: Sequence[Trajectory], jobs: int = 8) -> Scaling:
    """Wall time to evaluate every game in-process, then split over ``jobs`` workers.

    Parsing is excluded: both runs start from loaded trajectories. Worker
    start-up is included in the parallel time.
    """
    global _SHARED
    n = len(trajectories)
    step = max(1, -(-n // (4 * max(jobs, 1))))
    bounds = [(k, min(n, k + step)) for k in range(0, n, step)]
    _SHARED = trajectories
    try:
        serial = _run(bounds, 1)
        par = _run(bounds, jobs)
    finally:
        _SHARED = ()
    return Scaling(jobs, serial, par, available_cpus())
