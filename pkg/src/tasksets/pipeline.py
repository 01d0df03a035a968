"""File-level orchestration: evaluate trajectories and reduce them into tallies.

Each (game, player) is reduced to a :class:`PlayerGameTally` of integer
counts; every downstream analysis merges those by addition, so worker count
and completion order never change the results.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .curves import DEFAULT_HORIZON, curves_from_counts, window_counts
from .errors import DataError, IoError, MalformedRecord, NoAffordances
from .manifold import MIN_GAMES, PlayerFeatureVector, player_features, theme_pair_groups
from .overlap import AFFORDANCE, COMPLETION, FightOverlapCounts, OccupancyCounts, OverlapCounts, fight_ids
from .registry import EvalMask, TaskSetDef, builtin_registry, evaluate_all, theme_groups, THEMES
from .telemetry import CLASSES, GameMeta, load_meta, load_trajectory

log = logging.getLogger(__name__)

TRAJECTORY_SUFFIXES = (".jsonl", ".jsonl.gz")

T = TypeVar("T")
R = TypeVar("R")


def list_inputs(in_dir: str | Path) -> list[Path]:
    """Trajectory files under ``in_dir`` (or the file itself), sorted by name."""
    p = Path(in_dir)
    if p.is_file():
        return [p]
    if not p.is_dir():
        raise IoError(f"{p}: no such directory")
    files = sorted(f for f in p.iterdir() if f.is_file() and f.name.endswith(TRAJECTORY_SUFFIXES))
    if not files:
        raise IoError(f"{p}: no trajectory files")
    return files


def parallel_map(fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    """Order-preserving map, in-process for ``jobs <= 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# ---------------------------------------------------------------------------
# Character filter and game counts
# ---------------------------------------------------------------------------


def character_selector(
    metas: Iterable[GameMeta], character: str | Sequence[str] | None
) -> Callable[[str, str], bool]:
    """Match on character name; a name no character carries falls back to class.

    ``character`` may list several names, any of which selects.
    """
    if not character:
        return lambda name, cls: True
    wanted = [character] if isinstance(character, str) else list(character)
    names = {e.character_name for m in metas for e in m.character_roster.values()}
    by_name, by_class = set(), set()
    for c in wanted:
        if c in names:
            by_name.add(c)
        elif c in CLASSES:
            by_class.add(c)
        else:
            raise DataError(f"no character or class named {c!r} in the input")
    return lambda name, cls: name in by_name or cls in by_class


def _meta(path: Path) -> GameMeta:
    try:
        return load_meta(path)
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from None


def eligible_players(
    metas: Sequence[GameMeta], min_games: int, selector: Callable[[str, str], bool]
) -> tuple[dict[str, set[str]], list[tuple[str, str, int]]]:
    """Per game id, the players to evaluate; plus (player, character, games) dropped by the min-games filter."""
    games: dict[tuple[str, str], int] = {}
    for m in metas:
        for pid, e in m.character_roster.items():
            if selector(e.character_name, e.character_class):
                games[(pid, e.character_name)] = games.get((pid, e.character_name), 0) + 1
    keep = {k for k, n in games.items() if n >= min_games}
    dropped = sorted((pid, ch, n) for (pid, ch), n in games.items() if n < min_games)
    per_game: dict[str, set[str]] = {}
    for m in metas:
        per_game[m.game_id] = {
            pid for pid, e in m.character_roster.items() if (pid, e.character_name) in keep
        }
    return per_game, dropped


# ---------------------------------------------------------------------------
# Per-(game, player) tallies
# ---------------------------------------------------------------------------


@dataclass
class PlayerGameTally:
    game_id: str
    player_id: str
    character_name: str
    character_class: str
    final_score: float
    curve_counts: dict[str, tuple[dict[str, np.ndarray], int]]
    afforded: OverlapCounts
    completed: OverlapCounts
    occupancy: OccupancyCounts
    fight: FightOverlapCounts


def tally_mask(mask: EvalMask, registry: Sequence[TaskSetDef], horizon: int) -> PlayerGameTally:
    curves = {}
    for theme in THEMES:
        for group, ids in theme_groups(registry, theme):
            curves[group] = window_counts(mask, ids, horizon)
    return PlayerGameTally(
        mask.game_id, mask.player_id, mask.character_name, mask.character_class, mask.final_score, curves,
        OverlapCounts.from_mask(mask, AFFORDANCE), OverlapCounts.from_mask(mask, COMPLETION),
        OccupancyCounts.from_mask(mask), FightOverlapCounts.from_mask(mask, fight_ids(registry)),
    )


@dataclass(frozen=True)
class _FileJob:
    path: Path
    players: tuple[str, ...] | None
    registry: tuple[TaskSetDef, ...]
    horizon: int
    fight_includes_kill: bool


def _tally_file(job: _FileJob) -> list[PlayerGameTally]:
    try:
        traj = load_trajectory(job.path)
    except OSError as exc:
        raise IoError(f"{job.path}: {exc}") from None
    except MalformedRecord as exc:
        raise MalformedRecord(exc.line_no, f"{job.path.name}: {exc.reason}") from None
    masks = evaluate_all(traj, list(job.registry), fight_includes_kill=job.fight_includes_kill,
                         players=None if job.players is None else list(job.players))
    return [tally_mask(masks[pid], job.registry, job.horizon) for pid in sorted(masks)]


@dataclass
class Collection:
    files: list[Path]
    tallies: list[PlayerGameTally]
    dropped: list[tuple[str, str, int]] = field(default_factory=list)


def collect(
    in_dir: str | Path,
    *,
    registry: Sequence[TaskSetDef] | None = None,
    horizon: int = DEFAULT_HORIZON,
    min_games: int = MIN_GAMES,
    character: str | Sequence[str] | None = None,
    jobs: int = 1,
    fight_includes_kill: bool = True,
) -> Collection:
    """Evaluate every eligible (game, player) under ``in_dir``.

    Eligible players match the character filter and appear in at least
    ``min_games`` games with that character; headers are read first so
    ineligible players are never evaluated.
    """
    reg = tuple(builtin_registry() if registry is None else registry)
    files = list_inputs(in_dir)
    metas = [_meta(f) for f in files]
    selector = character_selector(metas, character)
    per_game, dropped = eligible_players(metas, min_games, selector)
    jobs_list = [
        _FileJob(f, tuple(sorted(per_game[m.game_id])), reg, horizon, fight_includes_kill)
        for f, m in zip(files, metas)
        if per_game[m.game_id]
    ]
    log.info("evaluating %d of %d files", len(jobs_list), len(files))
    tallies = [t for part in parallel_map(_tally_file, jobs_list, jobs) for t in part]
    tallies.sort(key=lambda t: (t.player_id, t.character_name, t.game_id))
    return Collection(files, tallies, dropped)


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------


@dataclass
class PlayerPool:
    player_id: str
    character_name: str
    character_class: str
    game_ids: list[str] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    curve_counts: dict[str, tuple[dict[str, np.ndarray], int]] = field(default_factory=dict)

    def add(self, t: PlayerGameTally) -> None:
        self.game_ids.append(t.game_id)
        self.scores.append(t.final_score)
        for group, (counts, n) in t.curve_counts.items():
            if group not in self.curve_counts:
                self.curve_counts[group] = ({k: v.copy() for k, v in counts.items()}, n)
            else:
                acc, n0 = self.curve_counts[group]
                for k, v in counts.items():
                    acc[k] += v
                self.curve_counts[group] = (acc, n0 + n)

    @property
    def mean_score(self) -> float:
        return float(np.mean(self.scores)) if self.scores else math.nan


def pool_players(tallies: Iterable[PlayerGameTally]) -> list[PlayerPool]:
    pools: dict[tuple[str, str], PlayerPool] = {}
    for t in tallies:
        key = (t.player_id, t.character_name)
        if key not in pools:
            pools[key] = PlayerPool(t.player_id, t.character_name, t.character_class)
        pools[key].add(t)
    return [pools[k] for k in sorted(pools)]


def pool_curves(pool: PlayerPool, group: str):
    counts, n = pool.curve_counts[group]
    return curves_from_counts(counts, n)


@dataclass(frozen=True)
class Skip:
    player_id: str
    character_name: str
    reason: str


def population_features(
    pools: Sequence[PlayerPool],
    theme: str,
    *,
    min_games: int = MIN_GAMES,
    registry: Sequence[TaskSetDef] | None = None,
) -> tuple[list[PlayerFeatureVector], list[Skip]]:
    """Feature vectors for each pooled player; players whose theme was never
    afforded at all are skipped with a reason instead of failing the run."""
    out, skipped = [], []
    groups = theme_pair_groups(theme, registry)
    for pool in pools:
        n_games = len(set(pool.game_ids))
        if n_games < min_games:
            skipped.append(Skip(pool.player_id, pool.character_name, f"only {n_games} games (< {min_games})"))
            continue
        sets = {}
        for group, _ in groups:
            try:
                sets[group] = pool_curves(pool, group)
            except NoAffordances:
                sets[group] = None
        if all(v is None for v in sets.values()):
            skipped.append(Skip(pool.player_id, pool.character_name, "no simultaneous affordances"))
            continue
        out.append(player_features(sets, pool.player_id, theme, min_games, games_used=n_games,
                                   character_name=pool.character_name, color_reward=pool.mean_score,
                                   registry=registry))
    return out, skipped


def merge_all(items: Iterable[T]) -> T | None:
    total = None
    for x in items:
        total = x if total is None else total.merge(x)  # type: ignore[attr-defined]
    return total
