"""Task-set registry, per-tick ego features, and affordance/completion masks.

Every predicate is evaluated for all ticks and all player slots of a game at
once. Distances are planar, thresholds use strict inequalities, and the
nearest entity among equals is the one with the lowest id.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import TickOutOfRange, UnknownPlayer, UnknownTaskSet
from .telemetry import DEALT_DAMAGE, HEALED_ALLY, KILL_CREDIT, TOOK_DAMAGE, Trajectory

FIGHT_FLIGHT = "FightFlight"
EXPLORE_EXPLOIT = "ExploreExploit"
SOLO_MULTI = "SoloMulti"
THEMES = (FIGHT_FLIGHT, EXPLORE_EXPLOIT, SOLO_MULTI)

NEAR_RADIUS = 2100.0
FLEE_RADIUS = 3500.0
HEALTH_SPLIT = 0.5
TEAM_RADIUS = 3500.0
REGROUP_RADIUS = 2100.0

# Radial-speed dead band (units/tick) for the moving toward/away flags.
MOTION_EPSILON = 1.0


@dataclass(frozen=True)
class TaskSetDef:
    id: str
    theme: str
    group: str
    role: str
    params: dict[str, float] = field(default_factory=dict, hash=False, compare=True)

    def as_record(self) -> dict:
        return {
            "id": self.id,
            "theme": self.theme,
            "group": self.group,
            "role": self.role,
            "params": dict(sorted(self.params.items())),
        }


# (group, theme, [(role, id), ...]) in the fixed analysis order.
FF_GROUPS = (
    ("enemy_health_good", [
        ("fight", "Attack_Approach_Damage_Enemy_Health_Good"),
        ("flight", "Run_From_Enemy_In_Good_Health"),
    ]),
    ("enemy_health_poor", [
        ("fight", "Attack_Approach_Damage_Enemy_Health_Poor"),
        ("flight", "Run_From_Enemy_In_Poor_Health"),
    ]),
    ("attacked_enemy_health_greater", [
        ("fight", "Fight_Damage_Enemy_When_Attacked_Enemy_Health_Greater"),
        ("flight", "Run_When_Attacked_Enemy_Health_Greater"),
    ]),
    ("attacked_enemy_health_poorer", [
        ("fight", "Fight_Damage_Enemy_When_Attacked_Enemy_Health_Poorer"),
        ("flight", "Run_When_Attacked_Enemy_Health_Poorer"),
    ]),
)
EE_GROUPS = (
    ("seed_cluster", [
        ("exploit", "Attempt_Direct_Pickup_Nearest_Seed_Cluster"),
        ("explore", "Explore_Away_From_Nearest_Seed_Cluster"),
    ]),
    ("active_platform", [
        ("exploit", "Attempt_Direct_Deposit_Nearest_Active_Platform"),
        ("explore", "Explore_Away_From_Nearest_Active_Platform_with_Seeds"),
    ]),
    ("inactive_platform", [
        ("exploit", "Attempt_Direct_Deposit_Nearest_Inactive_Platform"),
        ("explore", "Explore_Away_From_Nearest_Inactive_Platform_with_Seeds"),
    ]),
)
SM_GROUP = ("teammates", [
    ("solo", "Continue_To_Play_Solo"),
    ("regroup", "Regroup_With_Allies"),
    ("diad", "Regroup_With_Single_Ally"),
    ("multi", "Regroup_With_Multiple_Allies"),
])

SOLO_ID = "Continue_To_Play_Solo"
REGROUP_ID = "Regroup_With_Allies"
DIAD_ID = "Regroup_With_Single_Ally"
MULTI_ID = "Regroup_With_Multiple_Allies"


def builtin_registry(
    *,
    near_radius: float = NEAR_RADIUS,
    flee_radius: float = FLEE_RADIUS,
    health_split: float = HEALTH_SPLIT,
    team_radius: float = TEAM_RADIUS,
    regroup_radius: float = REGROUP_RADIUS,
) -> tuple[TaskSetDef, ...]:
    """The 18 task-sets: 8 fight-flight, 6 explore-exploit, 4 solo-multi."""
    for name, value in [("near_radius", near_radius), ("flee_radius", flee_radius),
                        ("health_split", health_split), ("team_radius", team_radius),
                        ("regroup_radius", regroup_radius)]:
        if not value > 0:
            raise ValueError(f"{name} must be positive")
    defs = []
    for k, (group, members) in enumerate(FF_GROUPS):
        params = {"near_radius": near_radius, "flee_radius": flee_radius}
        if k < 2:
            params["health_split"] = health_split
        for role, tid in members:
            defs.append(TaskSetDef(tid, FIGHT_FLIGHT, group, role, dict(params)))
    for group, members in EE_GROUPS:
        for role, tid in members:
            defs.append(TaskSetDef(tid, EXPLORE_EXPLOIT, group, role, {"near_radius": near_radius}))
    group, members = SM_GROUP
    for role, tid in members:
        defs.append(TaskSetDef(tid, SOLO_MULTI, group, role,
                               {"team_radius": team_radius, "regroup_radius": regroup_radius}))
    return tuple(defs)


def registry_dump(registry: Sequence[TaskSetDef]) -> str:
    return json.dumps([d.as_record() for d in registry], indent=2, sort_keys=False) + "\n"


def registry_hash(registry: Sequence[TaskSetDef]) -> str:
    return hashlib.sha256(registry_dump(registry).encode("utf-8")).hexdigest()


def theme_groups(registry: Sequence[TaskSetDef], theme: str) -> list[tuple[str, list[str]]]:
    """Ordered (group, [taskset ids]) for one theme."""
    out: dict[str, list[str]] = {}
    for d in registry:
        if d.theme == theme:
            out.setdefault(d.group, []).append(d.id)
    return list(out.items())


# ---------------------------------------------------------------------------
# Ego features
# ---------------------------------------------------------------------------


@dataclass
class _Nearest:
    """Nearest live entity of one kind, per (tick, player); inf/-1 when absent."""

    index: np.ndarray
    distance: np.ndarray
    toward: np.ndarray
    away: np.ndarray


@dataclass
class FeatureArrays:
    """Vectorised ego features, every array shaped (ticks, players)."""

    alive: np.ndarray
    health: np.ndarray
    seeds: np.ndarray
    dealt_damage: np.ndarray
    took_damage: np.ndarray
    kill_credit: np.ndarray
    healed_ally: np.ndarray
    enemy: _Nearest
    enemy_health: np.ndarray
    mate_index: np.ndarray
    mate_distance: np.ndarray
    mates_within: dict[float, np.ndarray]
    cluster: _Nearest
    active_platform: _Nearest
    inactive_platform: _Nearest


def _offsets(ego_pos: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ego-to-target x/y offsets and distances, each (T,P,M); targets (T,M,2)."""
    ex, ey = ego_pos[..., 0][:, :, None], ego_pos[..., 1][:, :, None]
    dx = targets[..., 0][:, None, :] - ex
    dy = targets[..., 1][:, None, :] - ey
    return dx, dy, np.sqrt(dx * dx + dy * dy)


def _pick(off: tuple[np.ndarray, np.ndarray, np.ndarray], valid: np.ndarray, ego_vel: np.ndarray) -> _Nearest:
    """Nearest valid target per (tick, player), lowest index on ties."""
    dx, dy, dist = off
    t_n, p_n, m_n = dist.shape
    if m_n == 0:
        inf = np.full((t_n, p_n), np.inf)
        no = np.zeros((t_n, p_n), dtype=bool)
        return _Nearest(np.full((t_n, p_n), -1, dtype=np.int64), inf, no, no.copy())
    masked = np.where(valid, dist, np.inf)
    idx = np.argmin(masked, axis=2)[..., None]
    d = np.take_along_axis(masked, idx, axis=2)[..., 0]
    present = np.isfinite(d)
    dot = (ego_vel[..., 0] * np.take_along_axis(dx, idx, axis=2)[..., 0]
           + ego_vel[..., 1] * np.take_along_axis(dy, idx, axis=2)[..., 0])
    ok = present & (d > 0)
    # closing speed = -d(distance)/dt
    closing = np.where(ok, dot / np.where(ok, d, 1.0), 0.0)
    toward = closing >= MOTION_EPSILON
    away = closing <= -MOTION_EPSILON
    return _Nearest(np.where(present, idx[..., 0], -1), d, toward, away)


def feature_arrays(traj: Trajectory, radii: Sequence[float] = (NEAR_RADIUS, FLEE_RADIUS)) -> FeatureArrays:
    pos, vel, alive = traj.position, traj.velocity, traj.alive
    t_n, p_n = alive.shape
    teams = traj.teams()
    same_team = teams[:, None] == teams[None, :]
    not_self = ~np.eye(p_n, dtype=bool)

    off = _offsets(pos, pos)  # shared by enemy and teammate queries
    dist = off[2]
    live_target = alive[:, None, :]
    enemy = _pick(off, live_target & ~same_team[None], vel)
    enemy_health = np.where(enemy.index >= 0, np.take_along_axis(traj.health, np.maximum(enemy.index, 0), axis=1), np.nan)

    mate_dist_all = np.where(live_target & (same_team & not_self)[None], dist, np.inf)
    if p_n > 1:
        mate_index = np.argmin(mate_dist_all, axis=2)
        mate_distance = np.take_along_axis(mate_dist_all, mate_index[..., None], axis=2)[..., 0]
        mate_index = np.where(np.isfinite(mate_distance), mate_index, -1)
    else:
        mate_index = np.full((t_n, p_n), -1)
        mate_distance = np.full((t_n, p_n), np.inf)
    mates_within = {float(r): (mate_dist_all < r).sum(axis=2) for r in radii}

    cvalid = traj.cluster_present & traj.cluster_visible
    cluster = _pick(_offsets(pos, traj.cluster_position), cvalid[:, None, :], vel)
    qa = traj.platform_present & traj.platform_active
    qi = traj.platform_present & ~traj.platform_active
    qoff = _offsets(pos, traj.platform_position)
    active = _pick(qoff, qa[:, None, :], vel)
    inactive = _pick(qoff, qi[:, None, :], vel)

    ev = traj.events
    return FeatureArrays(
        alive=alive,
        health=traj.health,
        seeds=traj.seeds,
        dealt_damage=ev[..., DEALT_DAMAGE],
        took_damage=ev[..., TOOK_DAMAGE],
        kill_credit=ev[..., KILL_CREDIT],
        healed_ally=ev[..., HEALED_ALLY],
        enemy=enemy,
        enemy_health=enemy_health,
        mate_index=mate_index,
        mate_distance=mate_distance,
        mates_within=mates_within,
        cluster=cluster,
        active_platform=active,
        inactive_platform=inactive,
    )


@dataclass(frozen=True)
class EgoFeatures:
    """Features of one player at one tick. Absent entities are ``None``."""

    nearest_enemy: tuple[str, float, float] | None
    nearest_teammate: tuple[str, float] | None
    teammates_within: dict[float, int]
    moving_toward_nearest_enemy: bool
    moving_away_from_nearest_enemy: bool
    nearest_seed_cluster: tuple[str, float] | None
    moving_toward_nearest_seed_cluster: bool
    moving_away_from_nearest_seed_cluster: bool
    nearest_active_platform: tuple[str, float] | None
    moving_toward_nearest_active_platform: bool
    moving_away_from_nearest_active_platform: bool
    nearest_inactive_platform: tuple[str, float] | None
    moving_toward_nearest_inactive_platform: bool
    moving_away_from_nearest_inactive_platform: bool
    health_fraction: float
    seeds_carried: int
    dealt_damage: bool
    took_damage: bool
    kill_credit: bool
    healed_ally: bool
    alive: bool


def compute_ego_features(
    traj: Trajectory, player_id: str, tick: int,
    radii: Sequence[float] = (NEAR_RADIUS, FLEE_RADIUS),
) -> EgoFeatures:
    i = traj.player_index(player_id)
    if not 0 <= tick < traj.n_ticks:
        raise TickOutOfRange(f"tick {tick} not in [0, {traj.n_ticks})")
    f = feature_arrays(_one_tick(traj, tick), radii)

    def ent(near: _Nearest, ids: Sequence[str]):
        j = int(near.index[0, i])
        return None if j < 0 else (ids[j], float(near.distance[0, i]))

    enemy = ent(f.enemy, traj.player_ids)
    mj = int(f.mate_index[0, i])
    return EgoFeatures(
        nearest_enemy=None if enemy is None else (enemy[0], enemy[1], float(f.enemy_health[0, i])),
        nearest_teammate=None if mj < 0 else (traj.player_ids[mj], float(f.mate_distance[0, i])),
        teammates_within={r: int(c[0, i]) for r, c in f.mates_within.items()},
        moving_toward_nearest_enemy=bool(f.enemy.toward[0, i]),
        moving_away_from_nearest_enemy=bool(f.enemy.away[0, i]),
        nearest_seed_cluster=ent(f.cluster, traj.cluster_ids),
        moving_toward_nearest_seed_cluster=bool(f.cluster.toward[0, i]),
        moving_away_from_nearest_seed_cluster=bool(f.cluster.away[0, i]),
        nearest_active_platform=ent(f.active_platform, traj.platform_ids),
        moving_toward_nearest_active_platform=bool(f.active_platform.toward[0, i]),
        moving_away_from_nearest_active_platform=bool(f.active_platform.away[0, i]),
        nearest_inactive_platform=ent(f.inactive_platform, traj.platform_ids),
        moving_toward_nearest_inactive_platform=bool(f.inactive_platform.toward[0, i]),
        moving_away_from_nearest_inactive_platform=bool(f.inactive_platform.away[0, i]),
        health_fraction=float(f.health[0, i]),
        seeds_carried=int(f.seeds[0, i]),
        dealt_damage=bool(f.dealt_damage[0, i]),
        took_damage=bool(f.took_damage[0, i]),
        kill_credit=bool(f.kill_credit[0, i]),
        healed_ally=bool(f.healed_ally[0, i]),
        alive=bool(f.alive[0, i]),
    )


def _one_tick(traj: Trajectory, tick: int) -> Trajectory:
    sl = slice(tick, tick + 1)
    arrays = {name: getattr(traj, name)[sl] for name in Trajectory._ARRAYS}
    return Trajectory(traj.meta, traj.player_ids, cluster_ids=traj.cluster_ids,
                      platform_ids=traj.platform_ids, **arrays)


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

Predicate = Callable[[FeatureArrays, dict], np.ndarray]


def _enemy_near(f: FeatureArrays, p: dict) -> np.ndarray:
    return f.enemy.distance < p["near_radius"]


_AFFORD: dict[str, Predicate] = {
    "enemy_health_good": lambda f, p: _enemy_near(f, p) & (f.enemy_health > p["health_split"]) & f.enemy.toward,
    "enemy_health_poor": lambda f, p: _enemy_near(f, p) & (f.enemy_health < p["health_split"]),
    "attacked_enemy_health_greater": lambda f, p: _enemy_near(f, p) & (f.enemy_health > f.health) & f.took_damage,
    "attacked_enemy_health_poorer": lambda f, p: _enemy_near(f, p) & (f.enemy_health < f.health) & f.took_damage,
    "seed_cluster": lambda f, p: np.isfinite(f.cluster.distance) & (f.cluster.distance > p["near_radius"]),
    # No active/inactive platform at all leaves "farther than all of them" vacuously true.
    "active_platform": lambda f, p: (f.seeds > 0) & (f.active_platform.distance > p["near_radius"]),
    "inactive_platform": lambda f, p: (f.seeds > 0) & (f.inactive_platform.distance > p["near_radius"]),
    "teammates": lambda f, p: f.mates_within[p["team_radius"]] == 0,
}


def _completion(d: TaskSetDef, f: FeatureArrays, fight_includes_kill: bool) -> np.ndarray:
    p = d.params
    if d.role == "fight":
        return f.dealt_damage | f.kill_credit if fight_includes_kill else f.dealt_damage.copy()
    if d.role == "flight":
        return f.enemy.away & (f.enemy.distance < p["flee_radius"])
    if d.group == "seed_cluster":
        near = f.cluster
        if d.role == "exploit":
            return np.isfinite(near.distance) & near.toward
        return near.away.copy()
    if d.group in ("active_platform", "inactive_platform"):
        near = f.active_platform if d.group == "active_platform" else f.inactive_platform
        if d.role == "exploit":
            return (f.seeds > 0) & near.toward
        return near.away.copy()
    r = p["regroup_radius"]
    if d.role == "solo":
        return f.mate_distance > r
    if d.role == "regroup":
        return f.mate_distance < r
    if d.role == "diad":
        return f.mates_within[r] == 1
    if d.role == "multi":
        return f.mates_within[r] > 1
    raise UnknownTaskSet(d.id)


@dataclass
class EvalMask:
    """Per-tick afforded/completed flags for one player in one game."""

    game_id: str
    player_id: str
    character_name: str
    character_class: str
    taskset_ids: tuple[str, ...]
    afforded: np.ndarray
    completed: np.ndarray
    alive: np.ndarray
    final_score: float = 0.0

    @property
    def n_ticks(self) -> int:
        return int(self.afforded.shape[0])

    def column(self, taskset_id: str) -> int:
        try:
            return self.taskset_ids.index(taskset_id)
        except ValueError:
            raise UnknownTaskSet(taskset_id) from None


def _radii(registry: Sequence[TaskSetDef]) -> tuple[float, ...]:
    rs = {NEAR_RADIUS, FLEE_RADIUS}
    for d in registry:
        for k in ("team_radius", "regroup_radius"):
            if k in d.params:
                rs.add(float(d.params[k]))
    return tuple(sorted(rs))


def evaluate_all(
    traj: Trajectory,
    registry: Sequence[TaskSetDef] | None = None,
    *,
    fight_includes_kill: bool = True,
    players: Sequence[str] | None = None,
) -> dict[str, EvalMask]:
    """Masks for every player (or the listed ones), sharing one feature pass."""
    registry = builtin_registry() if registry is None else registry
    wanted = traj.player_ids if players is None else tuple(players)
    slots = [traj.player_index(p) for p in wanted]
    f = feature_arrays(traj, _radii(registry))
    t_n, p_n = f.alive.shape
    k_n = len(registry)
    afforded = np.zeros((t_n, p_n, k_n), dtype=bool)
    completed = np.zeros((t_n, p_n, k_n), dtype=bool)
    cache: dict[tuple, np.ndarray] = {}
    for k, d in enumerate(registry):
        key = (d.group, tuple(sorted(d.params.items())))
        if key not in cache:
            cache[key] = _AFFORD[d.group](f, d.params) & f.alive
        afforded[:, :, k] = cache[key]
        completed[:, :, k] = _completion(d, f, fight_includes_kill)
    ids = tuple(d.id for d in registry)
    roster = traj.meta.character_roster
    final = traj.score[-1] if t_n else np.zeros(p_n)
    out = {}
    for pid, i in zip(wanted, slots):
        entry = roster[pid]
        out[pid] = EvalMask(
            game_id=traj.meta.game_id,
            player_id=pid,
            character_name=entry.character_name,
            character_class=entry.character_class,
            taskset_ids=ids,
            afforded=np.ascontiguousarray(afforded[:, i, :]),
            completed=np.ascontiguousarray(completed[:, i, :]),
            alive=f.alive[:, i].copy(),
            final_score=float(final[i]),
        )
    return out


def evaluate(
    traj: Trajectory,
    player_id: str,
    registry: Sequence[TaskSetDef] | None = None,
    *,
    fight_includes_kill: bool = True,
) -> EvalMask:
    if player_id not in traj.player_ids:
        raise UnknownPlayer(player_id)
    return evaluate_all(traj, registry, fight_includes_kill=fight_includes_kill, players=[player_id])[player_id]
