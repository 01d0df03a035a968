"""Deterministic 4v4 arena that emits trajectories from planted archetypes.

The world is a square map with seed clusters and deposit platforms. Games
alternate a collection phase (all platforms inactive) with a deposit phase
(half of the platforms active, alternating each round). Kinematics are first
order: the policy sets a velocity, positions integrate it, nothing collides.

Tick order: spawn/refill bookkeeping, policy (velocities and intents from
start-of-tick positions), heals, damage, pickups, deposits, record the frame,
then integrate positions. A frame therefore carries the start-of-tick
position together with the velocity chosen at that tick.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import InvalidConfig
from .registry import NEAR_RADIUS
from .telemetry import (
    CLASSES, DEALT_DAMAGE, HEALED_ALLY, KILL_CREDIT, PLAYERS_PER_GAME, TEAMS, TOOK_DAMAGE,
    GameMeta, RosterEntry, Trajectory,
)

PHASE_COLLECTION, PHASE_DEPOSIT = 0, 1


@dataclass(frozen=True)
class ArchetypeParams:
    aggression: float = 0.5
    exploration: float = 0.5
    sociality: float = 0.3

    def check(self, path: str = "archetype") -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{path}.{f.name}", "must be a number in [0, 1]")


@dataclass(frozen=True)
class CharacterSpec:
    name: str
    character_class: str
    max_hp: float
    attack_power: float
    heal_power: float
    move_speed: float
    carry_cap: int


CHARACTERS: dict[str, CharacterSpec] = {
    "Daemon": CharacterSpec("Daemon", "Damage", 100.0, 4.0, 0.0, 32.0, 5),
    "Vandal": CharacterSpec("Vandal", "Damage", 95.0, 4.5, 0.0, 33.0, 5),
    "Mender": CharacterSpec("Mender", "Support", 110.0, 2.0, 3.0, 30.0, 5),
    "Warden": CharacterSpec("Warden", "Tank", 200.0, 2.5, 0.0, 27.0, 5),
}

FILLER_CHARACTERS = (("Mender", "Warden", "Vandal"), ("Daemon", "Mender", "Warden", "Vandal"))


@dataclass(frozen=True)
class PlayerSlot:
    player_id: str
    team: str
    character: str
    archetype: ArchetypeParams = field(default_factory=ArchetypeParams)
    spawn: tuple[float, float] | None = None


def _default_clusters(e: float) -> tuple[tuple[float, float], ...]:
    a, b = 0.45 * e, 0.8 * e
    return ((-a, -a), (-a, a), (a, -a), (a, a), (0.0, -b), (0.0, b), (-b, 0.0), (b, 0.0))


def _default_platforms(e: float) -> tuple[tuple[float, float], ...]:
    a = 0.25 * e
    return ((0.0, -a), (0.0, a), (-a, 0.0), (a, 0.0))


@dataclass(frozen=True)
class SimConfig:
    players: tuple[PlayerSlot, ...]
    game_id: str = "game-00000"
    ticks: int = 6000
    tick_rate: int = 10
    rng_seed: int = 0
    map_half_extent: float = 8000.0
    clusters: tuple[tuple[float, float], ...] | None = None
    cluster_seeds: int = 3
    platforms: tuple[tuple[float, float], ...] | None = None
    collection_ticks: int = 600
    deposit_ticks: int = 300
    threat_radius: float = NEAR_RADIUS
    engage_radius: float = 400.0
    respawn_delay: int = 60
    pickup_radius: float = 150.0
    deposit_radius: float = 200.0
    decision_interval: int = 10
    waypoint_ticks: int = 300
    courage: float = 0.0
    seed_points: float = 10.0
    kill_points: float = 5.0
    score_mode: str = "rules"
    rollout_mode: str = "self_play"
    ego_ids: tuple[str, ...] = ()
    characters: Mapping[str, CharacterSpec] = field(default_factory=lambda: dict(CHARACTERS))

    def cluster_positions(self) -> tuple[tuple[float, float], ...]:
        return self.clusters if self.clusters is not None else _default_clusters(self.map_half_extent)

    def platform_positions(self) -> tuple[tuple[float, float], ...]:
        return self.platforms if self.platforms is not None else _default_platforms(self.map_half_extent)


def validate_config(cfg: SimConfig) -> None:
    """Raise ``InvalidConfig`` naming the first offending field."""
    if not isinstance(cfg.ticks, int) or cfg.ticks < 1:
        raise InvalidConfig("ticks", "must be an integer >= 1")
    if not isinstance(cfg.tick_rate, int) or cfg.tick_rate < 1:
        raise InvalidConfig("tick_rate", "must be an integer >= 1")
    if not cfg.map_half_extent > 3500.0:
        raise InvalidConfig("map_half_extent", "must exceed 3500 so flight is observable")
    if not cfg.game_id:
        raise InvalidConfig("game_id", "must be non-empty")
    for name in ("engage_radius", "pickup_radius", "deposit_radius", "threat_radius"):
        if not getattr(cfg, name) > 0:
            raise InvalidConfig(name, "must be positive")
    for name in ("respawn_delay", "decision_interval", "waypoint_ticks", "collection_ticks", "deposit_ticks"):
        v = getattr(cfg, name)
        if not isinstance(v, int) or v < 1:
            raise InvalidConfig(name, "must be an integer >= 1")
    if isinstance(cfg.courage, bool) or not isinstance(cfg.courage, (int, float)) or not 0.0 <= cfg.courage <= 1.0:
        raise InvalidConfig("courage", "must be a number in [0, 1]")
    if cfg.cluster_seeds < 0:
        raise InvalidConfig("cluster_seeds", "must be non-negative")
    if not cfg.cluster_positions():
        raise InvalidConfig("clusters", "at least one cluster is required")
    if cfg.score_mode not in ("rules", "random"):
        raise InvalidConfig("score_mode", "must be 'rules' or 'random'")
    if cfg.rollout_mode not in ("self_play", "freeze_others"):
        raise InvalidConfig("rollout_mode", "must be 'self_play' or 'freeze_others'")
    if len(cfg.players) != 8:
        raise InvalidConfig("players", "exactly 8 players are required")
    ids = [p.player_id for p in cfg.players]
    if len(set(ids)) != 8 or not all(ids):
        raise InvalidConfig("players", "player ids must be unique and non-empty")
    for team in TEAMS:
        if sum(p.team == team for p in cfg.players) != 4:
            raise InvalidConfig("players", f"team {team} must have 4 players")
    for k, p in enumerate(cfg.players):
        if p.team not in TEAMS:
            raise InvalidConfig(f"players[{k}].team", f"unknown team {p.team!r}")
        if p.character not in cfg.characters:
            raise InvalidConfig(f"players[{k}].character", f"unknown character {p.character!r}")
        p.archetype.check(f"players[{k}].archetype")
    for ego in cfg.ego_ids:
        if ego not in ids:
            raise InvalidConfig("ego_ids", f"{ego!r} is not a player")
    for name, spec in cfg.characters.items():
        if spec.character_class not in CLASSES:
            raise InvalidConfig(f"characters.{name}.character_class", "unknown class")
        if not (spec.max_hp > 0 and spec.move_speed > 0 and spec.carry_cap >= 0):
            raise InvalidConfig(f"characters.{name}", "max_hp and move_speed must be positive")


# ---------------------------------------------------------------------------
# Counter-based randomness
# ---------------------------------------------------------------------------
# Every random number is a hash of (game key, tick, slot, stream), so a game's
# trajectory does not depend on which other games share its batch.

STREAM_FIGHT, STREAM_DIRECT, STREAM_WAYPOINT_X, STREAM_WAYPOINT_Y, STREAM_SCORE_HIT, STREAM_SCORE_GAIN = range(6)
_N_STREAMS = 8
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def game_keys(seeds: Sequence[int]) -> np.ndarray:
    return _mix64(np.array([s & 0xFFFFFFFFFFFFFFFF for s in seeds], dtype=np.uint64))


def uniform_draws(keys: np.ndarray, tick: int, n_slots: int, stream: int) -> np.ndarray:
    """(games, slots) uniforms in [0, 1)."""
    ctr = (np.arange(n_slots, dtype=np.uint64) + np.uint64(tick * n_slots)) * np.uint64(_N_STREAMS)
    ctr = _mix64((ctr + np.uint64(stream + 1)) * _GOLDEN)
    z = _mix64(keys[:, None] ^ ctr[None, :])
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


# ---------------------------------------------------------------------------
# Policy
# ---------------------------------------------------------------------------

WAYPOINT_REACHED = 300.0
# the pull toward allies fades linearly inside this distance of their centroid
GATHER_RADIUS = 4200.0
# allies this close embolden an agent when courage > 0
COURAGE_RADIUS = 2100.0


@dataclass
class AgentState:
    player_id: str
    x: float
    y: float
    health_fraction: float
    seeds: int
    spec: CharacterSpec
    fight: bool = False
    direct: bool = True
    waypoint: tuple[float, float] | None = None
    waypoint_until: int = 0


@dataclass
class WorldView:
    tick: int
    enemies: Sequence[tuple[str, float, float]]
    allies: Sequence[tuple[str, float, float, float]]  # id, x, y, health_fraction
    clusters: Sequence[tuple[str, float, float]]  # clusters holding seeds
    platforms: Sequence[tuple[str, float, float]]  # active ones; empty while collecting
    map_half_extent: float = 8000.0
    threat_radius: float = NEAR_RADIUS
    engage_radius: float = 400.0
    pickup_radius: float = 150.0
    deposit_radius: float = 200.0
    waypoint_ticks: int = 300
    courage: float = 0.0
    decide: bool = True


@dataclass(frozen=True)
class Action:
    vx: float
    vy: float
    attack: str | None = None
    heal: str | None = None


@dataclass
class _Agents:
    """Per-agent arrays (any common shape) read and updated by :func:`_steer`."""

    x: np.ndarray
    y: np.ndarray
    seeds: np.ndarray
    speed: np.ndarray
    cap: np.ndarray
    support: np.ndarray
    aggression: np.ndarray
    exploration: np.ndarray
    sociality: np.ndarray
    fight: np.ndarray
    direct: np.ndarray
    wpx: np.ndarray
    wpy: np.ndarray
    wp_until: np.ndarray


@dataclass
class _Sense:
    """Nearest-object queries for each agent; ``*_d`` is inf when absent."""

    enemy_idx: np.ndarray
    enemy_x: np.ndarray
    enemy_y: np.ndarray
    enemy_d: np.ndarray
    ally_x: np.ndarray
    ally_y: np.ndarray
    has_allies: np.ndarray
    allies_near: np.ndarray
    hurt_idx: np.ndarray
    hurt_d: np.ndarray
    plat_x: np.ndarray
    plat_y: np.ndarray
    has_plat: np.ndarray
    clus_x: np.ndarray
    clus_y: np.ndarray
    has_clus: np.ndarray


def _seek(x, y, tx, ty, speed, stop, slow=0.0):
    """Velocity toward (tx, ty) halting at ``stop``; within ``slow`` of the
    stopping point the speed ramps down linearly (arrival steering)."""
    dx, dy = tx - x, ty - y
    d = np.hypot(dx, dy)
    ok = d > stop
    gap = d - stop
    want = np.minimum(speed, speed * gap / slow) if slow > 0 else np.minimum(speed, gap)
    f = np.where(ok, want / np.where(ok, d, 1.0), 0.0)
    return dx * f, dy * f


def _steer(a: _Agents, s: _Sense, active: np.ndarray, tick: int, decide: bool,
           draws: Sequence[np.ndarray], view: WorldView):
    """Vectorized decision rule shared by :func:`policy_step` and the simulator.

    Updates commitments and waypoints of ``active`` agents in place and
    returns (vx, vy, attack_idx, heal_idx) with -1 for no intent.
    """
    u_fight, u_direct, u_wx, u_wy = draws
    if decide:
        # courage shifts the fight odds toward the share of allies close by
        p_fight = a.aggression
        if view.courage > 0:
            p_fight = (1.0 - view.courage) * a.aggression + view.courage * np.minimum(s.allies_near, 3) / 3.0
        a.fight[...] = np.where(active, u_fight < p_fight, a.fight)
        a.direct[...] = np.where(active, u_direct < 1.0 - a.exploration, a.direct)
    e = view.map_half_extent
    x, y, speed = a.x, a.y, a.speed
    renew = active & (np.isnan(a.wpx) | (tick >= a.wp_until)
                      | (np.hypot(a.wpx - x, a.wpy - y) < WAYPOINT_REACHED))
    # random heading rather than a random point: no pull toward the map centre
    theta, leg = 2.0 * np.pi * u_wx, e * (0.5 + u_wy)
    a.wpx[...] = np.where(renew, np.clip(x + leg * np.cos(theta), -0.9 * e, 0.9 * e), a.wpx)
    a.wpy[...] = np.where(renew, np.clip(y + leg * np.sin(theta), -0.9 * e, 0.9 * e), a.wpy)
    a.wp_until[...] = np.where(renew, tick + view.waypoint_ticks, a.wp_until)

    threat = s.enemy_d < view.threat_radius
    deposit = ~threat & (a.seeds > 0) & s.has_plat
    collect = ~threat & ~deposit & s.has_clus & (a.seeds < a.cap)
    hold = ~threat & ~deposit & ~collect & a.direct & (a.seeds >= a.cap)

    # target and stopping distance of the seek behaviours
    tx, ty, stop = a.wpx.copy(), a.wpy.copy(), np.zeros_like(x)
    for m, px, py, r in (
        (threat & a.fight, s.enemy_x, s.enemy_y, 0.5 * view.engage_radius),
        (deposit & a.direct, s.plat_x, s.plat_y, 0.5 * view.deposit_radius),
        (collect & a.direct, s.clus_x, s.clus_y, 0.5 * view.pickup_radius),
    ):
        tx, ty, stop = np.where(m, px, tx), np.where(m, py, ty), np.where(m, r, stop)
    bx, by = _seek(x, y, tx, ty, speed, stop)
    flee = threat & ~a.fight
    d = np.where(s.enemy_d > 0, s.enemy_d, 1.0)
    fx = np.where(s.enemy_d > 0, (x - s.enemy_x) / d * speed, speed)
    fy = np.where(s.enemy_d > 0, (y - s.enemy_y) / d * speed, 0.0)
    bx, by = np.where(flee, fx, bx), np.where(flee, fy, by)

    soc = np.where(s.has_allies, a.sociality, 0.0)
    cx, cy = _seek(x, y, s.ally_x, s.ally_y, speed, 0.0, GATHER_RADIUS)
    cx, cy = np.where(soc > 0, cx, 0.0), np.where(soc > 0, cy, 0.0)
    vx, vy = (1.0 - soc) * bx + soc * cx, (1.0 - soc) * by + soc * cy
    norm = np.hypot(vx, vy)
    target = np.minimum(speed, (1.0 - soc) * np.hypot(bx, by) + soc * np.hypot(cx, cy))
    scale = np.where(norm > 1e-12, target / np.where(norm > 1e-12, norm, 1.0), 0.0)
    still = hold | ~active  # a full agent waits in place for a platform to open
    vx = np.where(still, 0.0, vx * scale)
    vy = np.where(still, 0.0, vy * scale)
    # stay on the map: the velocity is the displacement actually taken
    vx = np.clip(x + vx, -e, e) - x
    vy = np.clip(y + vy, -e, e) - y

    heal = np.where(active & a.support & (s.hurt_d < view.engage_radius), s.hurt_idx, -1)
    attack = np.where(active & (heal < 0) & (s.enemy_d < view.engage_radius), s.enemy_idx, -1)
    return vx, vy, attack, heal


def _nearest(x: float, y: float, items: Sequence[tuple]) -> tuple[int, float]:
    """Index and distance of the nearest item; ties go to the earliest."""
    best, best_d = -1, math.inf
    for k, it in enumerate(items):
        d = math.hypot(it[1] - x, it[2] - y)
        if d < best_d:
            best, best_d = k, d
    return best, best_d


def policy_step(agent: AgentState, view: WorldView, params: ArchetypeParams, rng: random.Random) -> Action:
    """One decision for a live agent.

    Priority: threat (approach or flee), deposit run, seed pickup, waiting
    when full, waypoint; then blend with the heading to the allied centroid
    by ``sociality``. Fight and direct commitments are re-drawn only on
    decision ticks. Four numbers are drawn from ``rng`` per call.
    """
    draws = [np.array([rng.random()]) for _ in range(4)]
    one = lambda v, dt=np.float64: np.array([v], dtype=dt)  # noqa: E731
    a = _Agents(
        one(agent.x), one(agent.y), one(agent.seeds, np.int64), one(agent.spec.move_speed),
        one(agent.spec.carry_cap, np.int64), one(agent.spec.character_class == "Support", bool),
        one(params.aggression), one(params.exploration), one(params.sociality),
        one(agent.fight, bool), one(agent.direct, bool),
        one(math.nan if agent.waypoint is None else agent.waypoint[0]),
        one(math.nan if agent.waypoint is None else agent.waypoint[1]),
        one(agent.waypoint_until, np.int64),
    )
    ei, ed = _nearest(agent.x, agent.y, view.enemies)
    hurt = [m for m in view.allies if m[3] < 0.5]
    hi, hd = _nearest(agent.x, agent.y, hurt)
    pi, _ = _nearest(agent.x, agent.y, view.platforms)
    ci, _ = _nearest(agent.x, agent.y, view.clusters)
    k = len(view.allies)
    s = _Sense(
        one(ei, np.int64), one(view.enemies[ei][1] if ei >= 0 else 0.0),
        one(view.enemies[ei][2] if ei >= 0 else 0.0), one(ed),
        one(sum(m[1] for m in view.allies) / k if k else 0.0),
        one(sum(m[2] for m in view.allies) / k if k else 0.0), one(k > 0, bool),
        one(sum(math.hypot(m[1] - agent.x, m[2] - agent.y) < COURAGE_RADIUS for m in view.allies), np.int64),
        one(hi, np.int64), one(hd),
        one(view.platforms[pi][1] if pi >= 0 else 0.0), one(view.platforms[pi][2] if pi >= 0 else 0.0),
        one(pi >= 0, bool),
        one(view.clusters[ci][1] if ci >= 0 else 0.0), one(view.clusters[ci][2] if ci >= 0 else 0.0),
        one(ci >= 0, bool),
    )
    vx, vy, att, heal = _steer(a, s, one(True, bool), view.tick, view.decide, draws, view)
    agent.fight, agent.direct = bool(a.fight[0]), bool(a.direct[0])
    agent.waypoint = (float(a.wpx[0]), float(a.wpy[0]))
    agent.waypoint_until = int(a.wp_until[0])
    return Action(
        float(vx[0]), float(vy[0]),
        view.enemies[int(att[0])][0] if att[0] >= 0 else None,
        hurt[int(heal[0])][0] if heal[0] >= 0 else None,
    )


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def _team_spawns(e: float) -> dict[str, list[tuple[float, float]]]:
    return {
        "A": [(-0.75 * e, (k - 1.5) * 300.0) for k in range(4)],
        "B": [(0.75 * e, (k - 1.5) * 300.0) for k in range(4)],
    }


def derive_seed(master_seed: int, counter: int) -> int:
    """Per-game seed: 63 bits of SeedSequence([master_seed, counter])."""
    state = np.random.SeedSequence([int(master_seed), int(counter)]).generate_state(2, np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1])) & ((1 << 63) - 1)


_PER_GAME_FIELDS = ("players", "game_id", "rng_seed", "ego_ids", "characters")


def _world_key(cfg: SimConfig) -> tuple:
    """Configs with equal keys can be stepped together in one batch."""
    return tuple(
        (f.name, getattr(cfg, name) if (name := f.name) not in ("clusters", "platforms")
         else (cfg.cluster_positions() if name == "clusters" else cfg.platform_positions()))
        for f in fields(cfg) if f.name not in _PER_GAME_FIELDS
    )


def simulate(cfg: SimConfig) -> Trajectory:
    """One game; identical to simulating it inside any batch."""
    return next(iter_simulate([cfg]))


def iter_simulate(configs: Sequence[SimConfig], batch_size: int = 32):
    """Yield one trajectory per config, in order.

    Consecutive configs sharing world parameters are stepped together as
    one vectorized batch of at most ``batch_size`` games.
    """
    for cfg in configs:
        validate_config(cfg)
    start = 0
    while start < len(configs):
        key = _world_key(configs[start])
        stop = start + 1
        while stop < len(configs) and stop - start < batch_size and _world_key(configs[stop]) == key:
            stop += 1
        yield from _run_batch(configs[start:stop])
        start = stop


def simulate_many(configs: Sequence[SimConfig], batch_size: int = 32) -> list[Trajectory]:
    return list(iter_simulate(configs, batch_size))


def _run_batch(cfgs: Sequence[SimConfig]) -> list[Trajectory]:
    c0 = cfgs[0]
    G, P, T = len(cfgs), PLAYERS_PER_GAME, c0.ticks
    e = c0.map_half_extent
    gi = np.arange(G)[:, None]
    slots = [sorted(c.players, key=lambda p: p.player_id) for c in cfgs]
    specs = [[c.characters[p.character] for p in sl] for c, sl in zip(cfgs, slots)]

    def per_slot(fn, dtype=np.float64):
        return np.array([[fn(c, p, sp) for p, sp in zip(sl, sps)] for c, sl, sps in zip(cfgs, slots, specs)],
                        dtype=dtype)

    team_a = per_slot(lambda c, p, sp: p.team == "A", bool)
    max_hp = per_slot(lambda c, p, sp: sp.max_hp)
    atk = per_slot(lambda c, p, sp: sp.attack_power)
    healp = per_slot(lambda c, p, sp: sp.heal_power)
    frozen = per_slot(lambda c, p, sp: c.rollout_mode == "freeze_others" and p.player_id not in c.ego_ids, bool)
    spawn = np.zeros((G, P, 2))
    spawns_by_team = _team_spawns(e)
    for g, c in enumerate(cfgs):
        order = {}
        count = {"A": 0, "B": 0}
        for p in c.players:  # team spawn slots follow config order
            order[p.player_id] = count[p.team]
            count[p.team] += 1
        for i, p in enumerate(slots[g]):
            spawn[g, i] = p.spawn if p.spawn is not None else spawns_by_team[p.team][order[p.player_id]]

    a = _Agents(
        x=spawn[..., 0].copy(), y=spawn[..., 1].copy(), seeds=np.zeros((G, P), np.int64),
        speed=per_slot(lambda c, p, sp: sp.move_speed), cap=per_slot(lambda c, p, sp: sp.carry_cap, np.int64),
        support=per_slot(lambda c, p, sp: sp.character_class == "Support", bool),
        aggression=per_slot(lambda c, p, sp: p.archetype.aggression),
        exploration=per_slot(lambda c, p, sp: p.archetype.exploration),
        sociality=per_slot(lambda c, p, sp: p.archetype.sociality),
        fight=np.zeros((G, P), bool), direct=np.ones((G, P), bool),
        wpx=np.full((G, P), np.nan), wpy=np.full((G, P), np.nan), wp_until=np.zeros((G, P), np.int64),
    )
    hp = max_hp.copy()
    alive = np.ones((G, P), bool)
    respawn_at = np.zeros((G, P), np.int64)
    score = np.zeros((G, P))
    last_vx, last_vy = np.zeros((G, P)), np.zeros((G, P))
    keys = game_keys([c.rng_seed for c in cfgs])
    score_keys = game_keys([derive_seed(c.rng_seed, 1) for c in cfgs])

    cpos = np.array(c0.cluster_positions(), dtype=np.float64).reshape(-1, 2)
    qpos = np.array(c0.platform_positions(), dtype=np.float64).reshape(-1, 2)
    C, Q = len(cpos), len(qpos)
    cseeds = np.full((G, C), c0.cluster_seeds, np.int64)
    cycle = c0.collection_ticks + c0.deposit_ticks
    same_team = team_a[:, :, None] == team_a[:, None, :]
    not_self = ~np.eye(P, dtype=bool)[None]
    rules = c0.score_mode == "rules"
    view = WorldView(
        tick=0, enemies=(), allies=(), clusters=(), platforms=(), map_half_extent=e,
        threat_radius=c0.threat_radius, engage_radius=c0.engage_radius, pickup_radius=c0.pickup_radius,
        deposit_radius=c0.deposit_radius, waypoint_ticks=c0.waypoint_ticks, courage=c0.courage,
    )
    zeros = np.zeros((G, P))

    rec_pos = np.zeros((T, G, P, 2))
    rec_vel = np.zeros((T, G, P, 2))
    rec_health = np.zeros((T, G, P))
    rec_seeds = np.zeros((T, G, P), np.int64)
    rec_score = np.zeros((T, G, P))
    rec_events = np.zeros((T, G, P, 4), bool)
    rec_alive = np.zeros((T, G, P), bool)
    rec_phase = np.zeros(T, np.int8)
    rec_cseeds = np.zeros((T, G, C), np.int64)
    rec_qactive = np.zeros((T, Q), bool)

    for t in range(T):
        rnd, within = divmod(t, cycle)
        phase = PHASE_COLLECTION if within < c0.collection_ticks else PHASE_DEPOSIT
        qactive = np.array([phase == PHASE_DEPOSIT and (j + rnd) % 2 == 0 for j in range(Q)], dtype=bool)
        if within == 0 and t > 0:
            cseeds[:] = c0.cluster_seeds  # scripted refill of every cluster
        back = ~alive & (respawn_at == t)
        if back.any():
            alive |= back
            hp = np.where(back, max_hp, hp)
            a.x[...] = np.where(back, spawn[..., 0], a.x)
            a.y[...] = np.where(back, spawn[..., 1], a.y)
            a.seeds[...] = np.where(back, 0, a.seeds)
            a.wpx[...] = np.where(back, np.nan, a.wpx)
        hf = hp / max_hp

        x, y = a.x, a.y
        d = np.hypot(x[:, None, :] - x[:, :, None], y[:, None, :] - y[:, :, None])  # d[g, i, j]
        live_j = alive[:, None, :]
        de = np.where(~same_team & live_j, d, np.inf)
        e_idx = de.argmin(axis=2)
        e_d = np.take_along_axis(de, e_idx[..., None], 2)[..., 0]
        ally = same_team & live_j & not_self
        n_ally = ally.sum(axis=2)
        denom = np.maximum(n_ally, 1)
        dh = np.where(ally & (hf[:, None, :] < 0.5), d, np.inf)
        h_idx = dh.argmin(axis=2)
        dc = np.hypot(cpos[None, None, :, 0] - x[..., None], cpos[None, None, :, 1] - y[..., None])
        vis = cseeds > 0
        dcv = np.where(vis[:, None, :], dc, np.inf)
        c_idx = dcv.argmin(axis=2)
        if qactive.any():
            dq = np.hypot(qpos[None, None, :, 0] - x[..., None], qpos[None, None, :, 1] - y[..., None])
            dq = np.where(qactive[None, None, :], dq, np.inf)
            q_idx = dq.argmin(axis=2)
            plat_x, plat_y, has_plat = qpos[q_idx, 0], qpos[q_idx, 1], np.ones((G, P), bool)
        else:
            dq = None
            plat_x, plat_y, has_plat = zeros, zeros, np.zeros((G, P), bool)
        sense = _Sense(
            enemy_idx=e_idx, enemy_x=x[gi, e_idx], enemy_y=y[gi, e_idx], enemy_d=e_d,
            ally_x=(ally * x[:, None, :]).sum(axis=2) / denom, ally_y=(ally * y[:, None, :]).sum(axis=2) / denom,
            has_allies=n_ally > 0, allies_near=(ally & (d < COURAGE_RADIUS)).sum(axis=2), hurt_idx=h_idx, hurt_d=np.take_along_axis(dh, h_idx[..., None], 2)[..., 0],
            plat_x=plat_x, plat_y=plat_y, has_plat=has_plat,
            clus_x=cpos[c_idx, 0], clus_y=cpos[c_idx, 1], has_clus=np.broadcast_to(vis.any(axis=1)[:, None], (G, P)),
        )
        decide = t % c0.decision_interval == 0
        draws = [uniform_draws(keys, t, P, st) if decide or st >= STREAM_WAYPOINT_X else None
                 for st in (STREAM_FIGHT, STREAM_DIRECT, STREAM_WAYPOINT_X, STREAM_WAYPOINT_Y)]
        view.tick = t
        active = alive & ~frozen
        vx, vy, attack, heal = _steer(a, sense, active, t, decide, draws, view)
        hold = alive & frozen
        if hold.any():
            vx = np.where(hold, np.clip(x + last_vx, -e, e) - x, vx)
            vy = np.where(hold, np.clip(y + last_vy, -e, e) - y, vy)
        last_vx = np.where(active, vx, last_vx)
        last_vy = np.where(active, vy, last_vy)

        events = np.zeros((G, P, 4), bool)
        healer = heal >= 0
        if healer.any():
            events[..., HEALED_ALLY] = healer
            gain = np.zeros((G, P))
            g_h, i_h = np.nonzero(healer)
            np.add.at(gain, (g_h, heal[g_h, i_h]), healp[g_h, i_h])
            hp = np.minimum(max_hp, hp + gain)
        died = np.zeros((G, P), bool)
        for i in range(P):
            g_a = np.nonzero(attack[:, i] >= 0)[0]
            if g_a.size == 0:
                continue
            j = attack[g_a, i]
            before = hp[g_a, j]
            after = np.maximum(0.0, before - atk[g_a, i])
            hp[g_a, j] = after
            events[g_a, i, DEALT_DAMAGE] = True
            events[g_a, j, TOOK_DAMAGE] = True
            kill = (before > 0.0) & (after <= 0.0)
            if kill.any():
                events[g_a[kill], i, KILL_CREDIT] = True
                died[g_a[kill], j[kill]] = True
                if rules:
                    score[g_a[kill], i] += c0.kill_points
        if died.any():
            alive &= ~died
            respawn_at = np.where(died, t + c0.respawn_delay, respawn_at)
            vx, vy = np.where(died, 0.0, vx), np.where(died, 0.0, vy)
            last_vx, last_vy = np.where(died, 0.0, last_vx), np.where(died, 0.0, last_vy)
            g_d, i_d = np.nonzero(died & (a.seeds > 0))
            np.add.at(cseeds, (g_d, dc[g_d, i_d].argmin(axis=1)), a.seeds[g_d, i_d])
            a.seeds[died] = 0

        for i in range(P):  # pickups in slot order: one seed per tick
            dci = np.where(cseeds > 0, dc[:, i, :], np.inf)
            best = dci.argmin(axis=1)
            ok = alive[:, i] & (a.seeds[:, i] < a.cap[:, i]) & (dci[np.arange(G), best] < c0.pickup_radius)
            if ok.any():
                cseeds[ok, best[ok]] -= 1
                a.seeds[ok, i] += 1
        if dq is not None:
            dep = alive & (a.seeds > 0) & (dq < c0.deposit_radius).any(axis=2)
            if dep.any():
                if rules:
                    score += np.where(dep, c0.seed_points * a.seeds, 0.0)
                a.seeds[dep] = 0
        if not rules:
            hit = uniform_draws(score_keys, t, P, STREAM_SCORE_HIT) < 0.02
            score += np.where(hit, 1.0 + 19.0 * uniform_draws(score_keys, t, P, STREAM_SCORE_GAIN), 0.0)

        rec_pos[t, ..., 0], rec_pos[t, ..., 1] = x, y
        moving = alive & (active | frozen)
        rec_vel[t, ..., 0] = np.where(moving, vx, 0.0)
        rec_vel[t, ..., 1] = np.where(moving, vy, 0.0)
        rec_health[t] = hp / max_hp
        rec_seeds[t] = a.seeds
        rec_score[t] = score
        rec_events[t] = events
        rec_alive[t] = alive
        rec_phase[t] = phase
        rec_cseeds[t] = cseeds
        rec_qactive[t] = qactive
        a.x = x + rec_vel[t, ..., 0]
        a.y = y + rec_vel[t, ..., 1]

    ticks = np.arange(T, dtype=np.int64)
    cids = [f"c{j}" for j in range(C)]
    qids = [f"q{j}" for j in range(Q)]
    out = []
    for g, c in enumerate(cfgs):
        roster = {
            p.player_id: RosterEntry(p.character, sp.character_class, p.team, sp.carry_cap)
            for p, sp in zip(slots[g], specs[g])
        }
        meta = GameMeta(c.game_id, c.tick_rate, roster, "synthetic arena units")
        cs = rec_cseeds[:, g].copy()
        out.append(Trajectory(
            meta,
            [p.player_id for p in slots[g]],
            ticks=ticks.copy(),
            phase=rec_phase.copy(),
            position=rec_pos[:, g].copy(),
            velocity=rec_vel[:, g].copy(),
            health=rec_health[:, g].copy(),
            seeds=rec_seeds[:, g].copy(),
            score=rec_score[:, g].copy(),
            events=rec_events[:, g].copy(),
            alive=rec_alive[:, g].copy(),
            cluster_ids=cids,
            cluster_present=np.ones((T, C), dtype=bool),
            cluster_position=np.broadcast_to(cpos.reshape(1, C, 2), (T, C, 2)).copy(),
            cluster_seeds=cs,
            cluster_visible=cs > 0,
            platform_ids=qids,
            platform_present=np.ones((T, Q), dtype=bool),
            platform_position=np.broadcast_to(qpos.reshape(1, Q, 2), (T, Q, 2)).copy(),
            platform_active=rec_qactive.copy(),
        ))
    return out


# ---------------------------------------------------------------------------
# Populations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Assignment:
    """One synthetic player controlling one character for ``games`` games."""

    player_id: str
    character: str
    archetype: ArchetypeParams
    games: int = 3


def archetype_grid(
    knob: str,
    levels: Sequence[float],
    replicates: int,
    *,
    base: ArchetypeParams = ArchetypeParams(),
    character: str = "Daemon",
    games: int = 3,
    prefix: str = "p",
) -> list[Assignment]:
    """``levels`` x ``replicates`` players differing only in one knob."""
    out = []
    for li, level in enumerate(levels):
        for r in range(replicates):
            arch = replace(base, **{knob: float(level)})
            out.append(Assignment(f"{prefix}{li:02d}-{r:02d}", character, arch, games))
    return out


def make_population(
    assignments: Sequence[Assignment],
    base: SimConfig | None = None,
    *,
    master_seed: int = 0,
    filler: ArchetypeParams = ArchetypeParams(),
    min_games: int = 3,
) -> list[SimConfig]:
    """One game per (assignment, repetition); the focal player joins team A
    with seven filler players. Game ``k`` (in assignment order) is seeded with
    ``derive_seed(master_seed, k)``.
    """
    if not assignments:
        raise InvalidConfig("population", "no players")
    if base is None:
        base = SimConfig(players=())
    out = []
    k = 0
    for ai, a in enumerate(assignments):
        a.archetype.check(f"population[{ai}].archetype")
        if a.games < min_games:
            raise InvalidConfig(f"population[{ai}].games", f"must be >= {min_games}")
        if a.character not in base.characters:
            raise InvalidConfig(f"population[{ai}].character", f"unknown character {a.character!r}")
        for _ in range(a.games):
            gid = f"g{k:05d}"
            players = [PlayerSlot(a.player_id, "A", a.character, a.archetype)]
            for m, ch in enumerate(FILLER_CHARACTERS[0]):
                players.append(PlayerSlot(f"{gid}-a{m}", "A", ch, filler))
            for m, ch in enumerate(FILLER_CHARACTERS[1]):
                players.append(PlayerSlot(f"{gid}-b{m}", "B", ch, filler))
            cfg = replace(base, players=tuple(players), game_id=gid, rng_seed=derive_seed(master_seed, k))
            out.append(cfg)
            k += 1
    return out


# ---------------------------------------------------------------------------
# Config records (JSON-compatible)
# ---------------------------------------------------------------------------

_SCALAR_FIELDS = {
    f.name for f in fields(SimConfig) if f.name not in ("players", "clusters", "platforms", "characters", "ego_ids")
}


def config_to_record(cfg: SimConfig) -> dict[str, Any]:
    rec: dict[str, Any] = {name: getattr(cfg, name) for name in sorted(_SCALAR_FIELDS)}
    rec["clusters"] = None if cfg.clusters is None else [list(c) for c in cfg.clusters]
    rec["platforms"] = None if cfg.platforms is None else [list(c) for c in cfg.platforms]
    rec["ego_ids"] = list(cfg.ego_ids)
    rec["characters"] = {k: asdict(v) for k, v in sorted(cfg.characters.items())}
    rec["players"] = [
        {"player_id": p.player_id, "team": p.team, "character": p.character,
         "archetype": asdict(p.archetype), "spawn": None if p.spawn is None else list(p.spawn)}
        for p in cfg.players
    ]
    return rec


def _archetype_from(rec: Any, path: str) -> ArchetypeParams:
    if rec is None:
        return ArchetypeParams()
    if not isinstance(rec, dict):
        raise InvalidConfig(path, "expected object")
    unknown = set(rec) - {"aggression", "exploration", "sociality"}
    if unknown:
        raise InvalidConfig(f"{path}.{sorted(unknown)[0]}", "unknown field")
    arch = ArchetypeParams(**rec)
    arch.check(path)
    return arch


def config_from_record(rec: Mapping[str, Any], path: str = "config", *, require_players: bool = True) -> SimConfig:
    if not isinstance(rec, Mapping):
        raise InvalidConfig(path, "expected object")
    known = _SCALAR_FIELDS | {"players", "clusters", "platforms", "characters", "ego_ids"}
    unknown = set(rec) - known
    if unknown:
        raise InvalidConfig(f"{path}.{sorted(unknown)[0]}", "unknown field")
    kwargs: dict[str, Any] = {k: rec[k] for k in _SCALAR_FIELDS if k in rec}
    for name in ("clusters", "platforms"):
        if rec.get(name) is not None:
            try:
                kwargs[name] = tuple((float(x), float(y)) for x, y in rec[name])
            except (TypeError, ValueError):
                raise InvalidConfig(f"{path}.{name}", "expected list of [x, y]") from None
    if "ego_ids" in rec:
        kwargs["ego_ids"] = tuple(rec["ego_ids"])
    if "characters" in rec:
        chars = dict(CHARACTERS)
        for name, spec in rec["characters"].items():
            try:
                chars[name] = CharacterSpec(**spec)
            except TypeError:
                raise InvalidConfig(f"{path}.characters.{name}", "bad character spec") from None
        kwargs["characters"] = chars
    players = []
    for k, p in enumerate(rec.get("players") or []):
        pp = f"{path}.players[{k}]"
        if not isinstance(p, Mapping) or not {"player_id", "team", "character"} <= set(p):
            raise InvalidConfig(pp, "needs player_id, team, character")
        spawn = p.get("spawn")
        players.append(PlayerSlot(
            str(p["player_id"]), p["team"], p["character"],
            _archetype_from(p.get("archetype"), f"{pp}.archetype"),
            None if spawn is None else (float(spawn[0]), float(spawn[1])),
        ))
    cfg = SimConfig(players=tuple(players), **kwargs)
    if require_players:
        try:
            validate_config(cfg)
        except InvalidConfig as exc:
            raise InvalidConfig(f"{path}.{exc.path}", exc.reason) from None
    return cfg


def population_from_record(rec: Mapping[str, Any]) -> tuple[list[SimConfig], int]:
    """Expand a population file into per-game configs.

    Accepted keys: ``master_seed``, ``games_per_player``, ``base`` (SimConfig
    fields without players), ``filler`` (archetype), ``players`` (explicit
    assignments) and/or ``grid`` ({knob, levels, replicates, base, character}).
    A record with ``players`` holding 8 slots and no ``games_per_player`` is a
    single game.
    """
    if not isinstance(rec, Mapping):
        raise InvalidConfig("config", "expected object")
    master = rec.get("master_seed", 0)
    if not isinstance(master, int):
        raise InvalidConfig("config.master_seed", "must be an integer")
    if "games_per_player" not in rec and "grid" not in rec:
        cfg = config_from_record({k: v for k, v in rec.items() if k != "master_seed"})
        return [cfg], master
    base = config_from_record(rec.get("base", {}), "config.base", require_players=False)
    games = rec.get("games_per_player", 3)
    if not isinstance(games, int) or games < 1:
        raise InvalidConfig("config.games_per_player", "must be a positive integer")
    filler = _archetype_from(rec.get("filler"), "config.filler")
    assignments: list[Assignment] = []
    for k, p in enumerate(rec.get("players", [])):
        path = f"config.players[{k}]"
        if not isinstance(p, Mapping) or "player_id" not in p:
            raise InvalidConfig(path, "needs player_id")
        assignments.append(Assignment(
            str(p["player_id"]), p.get("character", "Daemon"),
            _archetype_from(p.get("archetype"), f"{path}.archetype"), p.get("games", games),
        ))
    grid = rec.get("grid")
    if grid is not None:
        if not isinstance(grid, Mapping) or not {"knob", "levels", "replicates"} <= set(grid):
            raise InvalidConfig("config.grid", "needs knob, levels, replicates")
        if grid["knob"] not in ("aggression", "exploration", "sociality"):
            raise InvalidConfig("config.grid.knob", "unknown knob")
        assignments.extend(archetype_grid(
            grid["knob"], grid["levels"], grid["replicates"],
            base=_archetype_from(grid.get("base"), "config.grid.base"),
            character=grid.get("character", "Daemon"), games=games,
        ))
    configs = make_population(assignments, base, master_seed=master, filler=filler, min_games=1)
    for cfg in configs[:1]:
        validate_config(cfg)
    return configs, master
