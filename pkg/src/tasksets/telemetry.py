"""Trajectory data model, line-delimited record format, and validation.

A trajectory is stored column-wise (one numpy array per field, indexed by
tick and by player/entity slot) because every downstream analysis is a
vectorised scan over ticks. ``Trajectory.frames`` materialises the per-tick
record view on demand.

Record format (one JSON object per line)::

    {"format": "tasksets/1", "game_id": ..., "map_units_note": ...,
     "tick_rate": ..., "character_roster": {player_id: {...}}}
    {"tick": 0, "phase": "Collection", "players": [...],
     "seed_clusters": [...], "platforms": [...]}
    ...
"""

from __future__ import annotations

import gzip
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import MalformedRecord, UnknownPlayer

FORMAT_VERSION = "tasksets/1"
PHASES = ("Collection", "Deposit")
CLASSES = ("Damage", "Support", "Tank")
TEAMS = ("A", "B")
EVENT_NAMES = ("dealt_damage", "took_damage", "kill_credit", "healed_ally")
PLAYERS_PER_GAME = 8

DEALT_DAMAGE, TOOK_DAMAGE, KILL_CREDIT, HEALED_ALLY = range(4)


@dataclass(frozen=True)
class RosterEntry:
    character_name: str
    character_class: str
    team: str
    # Optional: absent means "no cap recorded", and the carry check is skipped.
    carry_cap: int | None = None


@dataclass
class GameMeta:
    game_id: str
    tick_rate: int
    character_roster: dict[str, RosterEntry]
    map_units_note: str = ""


@dataclass(frozen=True)
class Events:
    dealt_damage: bool = False
    took_damage: bool = False
    kill_credit: bool = False
    healed_ally: bool = False


@dataclass(frozen=True)
class PlayerState:
    player_id: str
    position: tuple[float, float]
    velocity: tuple[float, float]
    health_fraction: float
    seeds_carried: int
    score: float
    events: Events = field(default_factory=Events)
    alive: bool = True


@dataclass(frozen=True)
class SeedCluster:
    cluster_id: str
    position: tuple[float, float]
    seeds_remaining: int
    visible: bool


@dataclass(frozen=True)
class Platform:
    platform_id: str
    position: tuple[float, float]
    active: bool


@dataclass(frozen=True)
class GameFrame:
    tick: int
    phase: str
    players: tuple[PlayerState, ...]
    seed_clusters: tuple[SeedCluster, ...] = ()
    platforms: tuple[Platform, ...] = ()


@dataclass(frozen=True)
class Violation:
    tick: int | None
    field: str
    rule: str
    entity: str | None = None


class Trajectory:
    """One game: metadata plus per-tick state arrays.

    Player, cluster and platform slots are ordered by id so that "lowest id"
    tie-breaking is simply "lowest slot index". Cluster and platform slots
    carry a ``*_present`` mask because the set of entities may change across
    ticks; absent slots hold zeros.
    """

    _ARRAYS = (
        "ticks", "phase", "position", "velocity", "health", "seeds", "score",
        "events", "alive", "cluster_present", "cluster_position",
        "cluster_seeds", "cluster_visible", "platform_present",
        "platform_position", "platform_active",
    )

    def __init__(
        self,
        meta: GameMeta,
        player_ids: Sequence[str],
        *,
        ticks: np.ndarray,
        phase: np.ndarray,
        position: np.ndarray,
        velocity: np.ndarray,
        health: np.ndarray,
        seeds: np.ndarray,
        score: np.ndarray,
        events: np.ndarray,
        alive: np.ndarray,
        cluster_ids: Sequence[str] = (),
        cluster_present: np.ndarray | None = None,
        cluster_position: np.ndarray | None = None,
        cluster_seeds: np.ndarray | None = None,
        cluster_visible: np.ndarray | None = None,
        platform_ids: Sequence[str] = (),
        platform_present: np.ndarray | None = None,
        platform_position: np.ndarray | None = None,
        platform_active: np.ndarray | None = None,
    ) -> None:
        self.meta = meta
        self.player_ids = tuple(player_ids)
        self.cluster_ids = tuple(cluster_ids)
        self.platform_ids = tuple(platform_ids)
        n = len(ticks)
        c = len(self.cluster_ids)
        q = len(self.platform_ids)
        self.ticks = np.asarray(ticks, dtype=np.int64)
        self.phase = np.asarray(phase, dtype=np.int8)
        self.position = np.asarray(position, dtype=np.float64)
        self.velocity = np.asarray(velocity, dtype=np.float64)
        self.health = np.asarray(health, dtype=np.float64)
        self.seeds = np.asarray(seeds, dtype=np.int64)
        self.score = np.asarray(score, dtype=np.float64)
        self.events = np.asarray(events, dtype=bool)
        self.alive = np.asarray(alive, dtype=bool)

        def _or(arr, shape, dtype):
            return np.zeros(shape, dtype=dtype) if arr is None else np.asarray(arr, dtype=dtype)

        self.cluster_present = _or(cluster_present, (n, c), bool)
        self.cluster_position = _or(cluster_position, (n, c, 2), np.float64)
        self.cluster_seeds = _or(cluster_seeds, (n, c), np.int64)
        self.cluster_visible = _or(cluster_visible, (n, c), bool)
        self.platform_present = _or(platform_present, (n, q), bool)
        self.platform_position = _or(platform_position, (n, q, 2), np.float64)
        self.platform_active = _or(platform_active, (n, q), bool)
        self._frames: list[GameFrame] | None = None

    # -- shape helpers -----------------------------------------------------

    @property
    def n_ticks(self) -> int:
        return int(self.ticks.shape[0])

    @property
    def n_players(self) -> int:
        return len(self.player_ids)

    def player_index(self, player_id: str) -> int:
        try:
            return self.player_ids.index(player_id)
        except ValueError:
            raise UnknownPlayer(player_id) from None

    def teams(self) -> np.ndarray:
        """Team label per player slot (0 = A, 1 = B)."""
        roster = self.meta.character_roster
        return np.array([TEAMS.index(roster[p].team) for p in self.player_ids], dtype=np.int8)

    def copy(self) -> "Trajectory":
        arrays = {name: getattr(self, name).copy() for name in self._ARRAYS}
        return Trajectory(
            self.meta, self.player_ids, cluster_ids=self.cluster_ids,
            platform_ids=self.platform_ids, **arrays,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        if (
            self.meta != other.meta
            or self.player_ids != other.player_ids
            or self.cluster_ids != other.cluster_ids
            or self.platform_ids != other.platform_ids
        ):
            return False
        return all(
            getattr(self, name).shape == getattr(other, name).shape
            and np.array_equal(getattr(self, name), getattr(other, name))
            for name in self._ARRAYS
        )

    def __repr__(self) -> str:
        return f"Trajectory(game_id={self.meta.game_id!r}, ticks={self.n_ticks})"

    # -- record view -------------------------------------------------------

    @property
    def frames(self) -> list[GameFrame]:
        if self._frames is None:
            self._frames = list(self._iter_frames())
        return self._frames

    def _iter_frames(self) -> Iterable[GameFrame]:
        pos = self.position.tolist()
        vel = self.velocity.tolist()
        health = self.health.tolist()
        seeds = self.seeds.tolist()
        score = self.score.tolist()
        events = self.events.tolist()
        alive = self.alive.tolist()
        cp = self.cluster_present.tolist()
        cpos = self.cluster_position.tolist()
        cseeds = self.cluster_seeds.tolist()
        cvis = self.cluster_visible.tolist()
        pp = self.platform_present.tolist()
        ppos = self.platform_position.tolist()
        pact = self.platform_active.tolist()
        for t, tick in enumerate(self.ticks.tolist()):
            players = tuple(
                PlayerState(
                    player_id=pid,
                    position=tuple(pos[t][i]),
                    velocity=tuple(vel[t][i]),
                    health_fraction=health[t][i],
                    seeds_carried=seeds[t][i],
                    score=score[t][i],
                    events=Events(*events[t][i]),
                    alive=alive[t][i],
                )
                for i, pid in enumerate(self.player_ids)
            )
            clusters = tuple(
                SeedCluster(cid, tuple(cpos[t][j]), cseeds[t][j], cvis[t][j])
                for j, cid in enumerate(self.cluster_ids)
                if cp[t][j]
            )
            platforms = tuple(
                Platform(qid, tuple(ppos[t][j]), pact[t][j])
                for j, qid in enumerate(self.platform_ids)
                if pp[t][j]
            )
            yield GameFrame(tick, PHASES[int(self.phase[t])], players, clusters, platforms)

    @classmethod
    def from_frames(cls, meta: GameMeta, frames: Sequence[GameFrame]) -> "Trajectory":
        """Build the columnar form from record objects.

        Every frame must list exactly the roster's players; raises
        ``ValueError`` otherwise.
        """
        player_ids = sorted(meta.character_roster)
        slot = {p: i for i, p in enumerate(player_ids)}
        cluster_ids = sorted({c.cluster_id for f in frames for c in f.seed_clusters})
        platform_ids = sorted({q.platform_id for f in frames for q in f.platforms})
        cslot = {c: i for i, c in enumerate(cluster_ids)}
        qslot = {q: i for i, q in enumerate(platform_ids)}
        n, p, c, q = len(frames), len(player_ids), len(cluster_ids), len(platform_ids)
        arrays = _empty_arrays(n, p, c, q)
        for t, frame in enumerate(frames):
            arrays["ticks"][t] = frame.tick
            arrays["phase"][t] = PHASES.index(frame.phase)
            seen = set()
            for ps in frame.players:
                if ps.player_id not in slot or ps.player_id in seen:
                    raise ValueError(f"frame {t}: unexpected or duplicate player {ps.player_id!r}")
                seen.add(ps.player_id)
                i = slot[ps.player_id]
                arrays["position"][t, i] = ps.position
                arrays["velocity"][t, i] = ps.velocity
                arrays["health"][t, i] = ps.health_fraction
                arrays["seeds"][t, i] = ps.seeds_carried
                arrays["score"][t, i] = ps.score
                arrays["events"][t, i] = [getattr(ps.events, e) for e in EVENT_NAMES]
                arrays["alive"][t, i] = ps.alive
            if len(seen) != p:
                raise ValueError(f"frame {t}: missing players")
            for cl in frame.seed_clusters:
                j = cslot[cl.cluster_id]
                arrays["cluster_present"][t, j] = True
                arrays["cluster_position"][t, j] = cl.position
                arrays["cluster_seeds"][t, j] = cl.seeds_remaining
                arrays["cluster_visible"][t, j] = cl.visible
            for pl in frame.platforms:
                j = qslot[pl.platform_id]
                arrays["platform_present"][t, j] = True
                arrays["platform_position"][t, j] = pl.position
                arrays["platform_active"][t, j] = pl.active
        return cls(meta, player_ids, cluster_ids=cluster_ids, platform_ids=platform_ids, **arrays)


def _empty_arrays(n: int, p: int, c: int, q: int) -> dict[str, np.ndarray]:
    return {
        "ticks": np.zeros(n, dtype=np.int64),
        "phase": np.zeros(n, dtype=np.int8),
        "position": np.zeros((n, p, 2)),
        "velocity": np.zeros((n, p, 2)),
        "health": np.zeros((n, p)),
        "seeds": np.zeros((n, p), dtype=np.int64),
        "score": np.zeros((n, p)),
        "events": np.zeros((n, p, 4), dtype=bool),
        "alive": np.zeros((n, p), dtype=bool),
        "cluster_present": np.zeros((n, c), dtype=bool),
        "cluster_position": np.zeros((n, c, 2)),
        "cluster_seeds": np.zeros((n, c), dtype=np.int64),
        "cluster_visible": np.zeros((n, c), dtype=bool),
        "platform_present": np.zeros((n, q), dtype=bool),
        "platform_position": np.zeros((n, q, 2)),
        "platform_active": np.zeros((n, q), dtype=bool),
    }


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def meta_record(meta: GameMeta) -> dict:
    roster = {}
    for pid in sorted(meta.character_roster):
        entry = meta.character_roster[pid]
        rec = {
            "character_name": entry.character_name,
            "character_class": entry.character_class,
            "team": entry.team,
        }
        if entry.carry_cap is not None:
            rec["carry_cap"] = entry.carry_cap
        roster[pid] = rec
    return {
        "format": FORMAT_VERSION,
        "game_id": meta.game_id,
        "map_units_note": meta.map_units_note,
        "tick_rate": meta.tick_rate,
        "character_roster": roster,
    }


def serialize_trajectory(traj: Trajectory) -> bytes:
    """Encode a valid trajectory; floats use shortest round-trip repr."""
    out = io.StringIO()
    write_trajectory(traj, out)
    return out.getvalue().encode("utf-8")


def write_trajectory(traj: Trajectory, fh: IO[str]) -> None:
    fh.write(_dumps(meta_record(traj.meta)))
    fh.write("\n")
    pos = traj.position.tolist()
    vel = traj.velocity.tolist()
    health = traj.health.tolist()
    seeds = traj.seeds.tolist()
    score = traj.score.tolist()
    events = traj.events.tolist()
    alive = traj.alive.tolist()
    cp = traj.cluster_present.tolist()
    cpos = traj.cluster_position.tolist()
    cseeds = traj.cluster_seeds.tolist()
    cvis = traj.cluster_visible.tolist()
    pp = traj.platform_present.tolist()
    ppos = traj.platform_position.tolist()
    pact = traj.platform_active.tolist()
    for t, tick in enumerate(traj.ticks.tolist()):
        players = []
        for i, pid in enumerate(traj.player_ids):
            ev = events[t][i]
            players.append({
                "player_id": pid,
                "position": pos[t][i],
                "velocity": vel[t][i],
                "health_fraction": health[t][i],
                "seeds_carried": seeds[t][i],
                "score": score[t][i],
                "events": {name: ev[k] for k, name in enumerate(EVENT_NAMES)},
                "alive": alive[t][i],
            })
        clusters = [
            {"cluster_id": cid, "position": cpos[t][j], "seeds_remaining": cseeds[t][j], "visible": cvis[t][j]}
            for j, cid in enumerate(traj.cluster_ids)
            if cp[t][j]
        ]
        platforms = [
            {"platform_id": qid, "position": ppos[t][j], "active": pact[t][j]}
            for j, qid in enumerate(traj.platform_ids)
            if pp[t][j]
        ]
        fh.write(_dumps({
            "tick": tick,
            "phase": PHASES[int(traj.phase[t])],
            "players": players,
            "seed_clusters": clusters,
            "platforms": platforms,
        }))
        fh.write("\n")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _Fields:
    """Strict field accessor for one decoded record."""

    def __init__(self, obj: object, line_no: int, what: str, keys: Sequence[str], optional: Sequence[str] = ()):
        if not isinstance(obj, dict):
            raise MalformedRecord(line_no, f"{what} is not an object")
        missing = [k for k in keys if k not in obj]
        if missing:
            raise MalformedRecord(line_no, f"{what} missing field {missing[0]!r}")
        extra = set(obj) - set(keys) - set(optional)
        if extra:
            raise MalformedRecord(line_no, f"{what} has unknown field {sorted(extra)[0]!r}")
        self.obj = obj
        self.line_no = line_no
        self.what = what

    def fail(self, key: str, reason: str) -> MalformedRecord:
        return MalformedRecord(self.line_no, f"{self.what}.{key}: {reason}")

    def str(self, key: str) -> str:
        v = self.obj[key]
        if not isinstance(v, str):
            raise self.fail(key, "expected string")
        return v

    def int(self, key: str) -> int:
        v = self.obj[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise self.fail(key, "expected integer")
        return v

    def num(self, key: str) -> float:
        v = self.obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.fail(key, "expected number")
        return float(v)

    def bool(self, key: str) -> bool:
        v = self.obj[key]
        if not isinstance(v, bool):
            raise self.fail(key, "expected boolean")
        return v

    def vec2(self, key: str) -> list[float]:
        v = self.obj[key]
        if (
            not isinstance(v, list)
            or len(v) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v)
        ):
            raise self.fail(key, "expected two-element numeric array")
        return [float(v[0]), float(v[1])]

    def list(self, key: str) -> list:
        v = self.obj[key]
        if not isinstance(v, list):
            raise self.fail(key, "expected array")
        return v


def _parse_meta(line: str, line_no: int) -> GameMeta:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from None
    f = _Fields(obj, line_no, "meta", ("format", "game_id", "map_units_note", "tick_rate", "character_roster"))
    if obj["format"] != FORMAT_VERSION:
        raise f.fail("format", f"unsupported version {obj['format']!r}")
    roster_obj = obj["character_roster"]
    if not isinstance(roster_obj, dict):
        raise f.fail("character_roster", "expected object")
    roster = {}
    for pid, rec in roster_obj.items():
        rf = _Fields(rec, line_no, f"character_roster[{pid}]", ("character_name", "character_class", "team"), ("carry_cap",))
        cls = rf.str("character_class")
        if cls not in CLASSES:
            raise rf.fail("character_class", f"unknown class {cls!r}")
        team = rf.str("team")
        if team not in TEAMS:
            raise rf.fail("team", f"unknown team {team!r}")
        cap = rf.int("carry_cap") if "carry_cap" in rec else None
        roster[pid] = RosterEntry(rf.str("character_name"), cls, team, cap)
    return GameMeta(
        game_id=f.str("game_id"),
        tick_rate=f.int("tick_rate"),
        character_roster=roster,
        map_units_note=f.str("map_units_note"),
    )


_FRAME_KEYS = ("tick", "phase", "players", "seed_clusters", "platforms")
_PLAYER_KEYS = ("player_id", "position", "velocity", "health_fraction", "seeds_carried", "score", "events", "alive")
_CLUSTER_KEYS = ("cluster_id", "position", "seeds_remaining", "visible")
_PLATFORM_KEYS = ("platform_id", "position", "active")


def parse_trajectory(stream: bytes | str | IO) -> Trajectory:
    """Decode the line-delimited format; raises ``MalformedRecord`` on any schema violation."""
    if isinstance(stream, bytes):
        text = stream.decode("utf-8")
        lines = text.splitlines()
    elif isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [ln.decode("utf-8") if isinstance(ln, bytes) else ln for ln in stream]
        lines = [ln.rstrip("\r\n") for ln in lines]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise MalformedRecord(1, "missing meta record")
    meta = _parse_meta(lines[0], 1)
    if not lines[1:]:
        raise MalformedRecord(2, "empty trajectory")

    player_ids = sorted(meta.character_roster)
    slot = {p: i for i, p in enumerate(player_ids)}
    n, p = len(lines) - 1, len(player_ids)
    arrays = _empty_arrays(n, p, 0, 0)
    cluster_rows: list[list[tuple]] = []
    platform_rows: list[list[tuple]] = []

    for t, line in enumerate(lines[1:]):
        line_no = t + 2
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from None
        f = _Fields(obj, line_no, "frame", _FRAME_KEYS)
        tick = f.int("tick")
        if tick != t:
            if t == 0:
                raise MalformedRecord(line_no, "first tick must be 0")
            raise MalformedRecord(line_no, "tick gap" if tick > t else "tick order")
        phase = f.str("phase")
        if phase not in PHASES:
            raise f.fail("phase", f"unknown phase {phase!r}")
        arrays["ticks"][t] = tick
        arrays["phase"][t] = PHASES.index(phase)

        players = f.list("players")
        seen = set()
        for rec in players:
            pf = _Fields(rec, line_no, "player", _PLAYER_KEYS)
            pid = pf.str("player_id")
            if pid not in slot:
                raise pf.fail("player_id", f"{pid!r} not in roster")
            if pid in seen:
                raise pf.fail("player_id", f"duplicate {pid!r}")
            seen.add(pid)
            i = slot[pid]
            arrays["position"][t, i] = pf.vec2("position")
            arrays["velocity"][t, i] = pf.vec2("velocity")
            arrays["health"][t, i] = pf.num("health_fraction")
            arrays["seeds"][t, i] = pf.int("seeds_carried")
            arrays["score"][t, i] = pf.num("score")
            ef = _Fields(rec["events"], line_no, "events", EVENT_NAMES)
            arrays["events"][t, i] = [ef.bool(e) for e in EVENT_NAMES]
            arrays["alive"][t, i] = pf.bool("alive")
        if len(seen) != p:
            missing = sorted(set(player_ids) - seen)[0]
            raise MalformedRecord(line_no, f"player {missing!r} missing from frame")

        crow = []
        for rec in f.list("seed_clusters"):
            cf = _Fields(rec, line_no, "seed_cluster", _CLUSTER_KEYS)
            crow.append((cf.str("cluster_id"), cf.vec2("position"), cf.int("seeds_remaining"), cf.bool("visible")))
        if len({c[0] for c in crow}) != len(crow):
            raise MalformedRecord(line_no, "duplicate cluster_id")
        cluster_rows.append(crow)
        qrow = []
        for rec in f.list("platforms"):
            qf = _Fields(rec, line_no, "platform", _PLATFORM_KEYS)
            qrow.append((qf.str("platform_id"), qf.vec2("position"), qf.bool("active")))
        if len({q[0] for q in qrow}) != len(qrow):
            raise MalformedRecord(line_no, "duplicate platform_id")
        platform_rows.append(qrow)

    cluster_ids = sorted({c[0] for row in cluster_rows for c in row})
    platform_ids = sorted({q[0] for row in platform_rows for q in row})
    ent = _empty_arrays(n, 0, len(cluster_ids), len(platform_ids))
    cslot = {c: j for j, c in enumerate(cluster_ids)}
    qslot = {q: j for j, q in enumerate(platform_ids)}
    for t, row in enumerate(cluster_rows):
        for cid, cpos, cseeds, cvis in row:
            j = cslot[cid]
            ent["cluster_present"][t, j] = True
            ent["cluster_position"][t, j] = cpos
            ent["cluster_seeds"][t, j] = cseeds
            ent["cluster_visible"][t, j] = cvis
    for t, row in enumerate(platform_rows):
        for qid, qpos, qact in row:
            j = qslot[qid]
            ent["platform_present"][t, j] = True
            ent["platform_position"][t, j] = qpos
            ent["platform_active"][t, j] = qact
    for key in ("cluster_present", "cluster_position", "cluster_seeds", "cluster_visible",
                "platform_present", "platform_position", "platform_active"):
        arrays[key] = ent[key]
    return Trajectory(meta, player_ids, cluster_ids=cluster_ids, platform_ids=platform_ids, **arrays)


def load_trajectory(path: str | Path) -> Trajectory:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return parse_trajectory(fh.read())
    return parse_trajectory(path.read_bytes())


def load_meta(path: str | Path) -> GameMeta:
    """Parse only the header line of a trajectory file."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        line = fh.readline()
    if not line.strip():
        raise MalformedRecord(1, "empty trajectory")
    try:
        text = line.decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedRecord(1, "not valid UTF-8") from None
    return _parse_meta(text, 1)


def save_trajectory(traj: Trajectory, path: str | Path) -> None:
    path = Path(path)
    data = serialize_trajectory(traj)
    if path.suffix == ".gz":
        # mtime=0 keeps the compressed bytes reproducible.
        with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as fh:
            fh.write(data)
    else:
        path.write_bytes(data)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_trajectory(traj: Trajectory) -> list[Violation]:
    """Check every invariant; returns an empty list for a valid trajectory."""
    out: list[Violation] = []
    meta = traj.meta
    roster = meta.character_roster
    if not meta.game_id:
        out.append(Violation(None, "game_id", "non_empty"))
    if isinstance(meta.tick_rate, bool) or not isinstance(meta.tick_rate, int) or meta.tick_rate < 1:
        out.append(Violation(None, "tick_rate", "range"))
    if len(roster) != PLAYERS_PER_GAME:
        out.append(Violation(None, "character_roster", "player_count"))
    for team in TEAMS:
        if sum(1 for e in roster.values() if e.team == team) != PLAYERS_PER_GAME // 2:
            out.append(Violation(None, "character_roster", "team_size", team))
    for pid, e in sorted(roster.items()):
        if e.character_class not in CLASSES:
            out.append(Violation(None, "character_class", "enum", pid))
        if e.team not in TEAMS:
            out.append(Violation(None, "team", "enum", pid))
    if tuple(sorted(roster)) != traj.player_ids:
        out.append(Violation(None, "players", "roster_mismatch"))
    if traj.n_ticks == 0:
        out.append(Violation(None, "frames", "non_empty"))
        return out

    def emit(mask: np.ndarray, fld: str, rule: str, ids: Sequence[str]) -> None:
        for t, j in zip(*np.nonzero(mask)):
            out.append(Violation(int(traj.ticks[t]), fld, rule, ids[j]))

    for t in np.nonzero(traj.ticks != np.arange(traj.n_ticks))[0]:
        out.append(Violation(int(traj.ticks[t]), "tick", "sequence"))
    for t in np.nonzero((traj.phase < 0) | (traj.phase >= len(PHASES)))[0]:
        out.append(Violation(int(traj.ticks[t]), "phase", "enum"))

    pids = traj.player_ids
    h = traj.health
    emit(~np.isfinite(h) | (h < 0.0) | (h > 1.0), "health_fraction", "range", pids)
    emit(~np.isfinite(traj.position).all(axis=2), "position", "finite", pids)
    emit(~np.isfinite(traj.velocity).all(axis=2), "velocity", "finite", pids)
    emit(~traj.alive & (traj.velocity != 0.0).any(axis=2), "velocity", "dead_moving", pids)
    emit(traj.seeds < 0, "seeds_carried", "range", pids)
    caps = np.array(
        [roster[p].carry_cap if p in roster and roster[p].carry_cap is not None else np.iinfo(np.int64).max
         for p in pids],
        dtype=np.int64,
    )
    if len(pids):
        emit(traj.seeds > caps[None, :], "seeds_carried", "carry_cap", pids)
    s = traj.score
    emit(~np.isfinite(s) | (s < 0.0), "score", "range", pids)

    cids = traj.cluster_ids
    present = traj.cluster_present
    emit(present & (traj.cluster_seeds < 0), "seeds_remaining", "range", cids)
    emit(present & (traj.cluster_visible != (traj.cluster_seeds > 0)), "visible", "visibility", cids)
    emit(present & ~np.isfinite(traj.cluster_position).all(axis=2), "position", "finite", cids)
    emit(traj.platform_present & ~np.isfinite(traj.platform_position).all(axis=2),
         "position", "finite", traj.platform_ids)
    out.sort(key=lambda v: (-1 if v.tick is None else v.tick, v.field, v.rule, v.entity or ""))
    return out

