from __future__ import annotations

import gzip
import json

import numpy as np
import pytest

from oracles import random_trajectory
from tasksets.errors import MalformedRecord
from tasksets.simulator import SimConfig, archetype_grid, make_population, simulate
from tasksets.telemetry import (
    FORMAT_VERSION, GameFrame, GameMeta, PlayerState, RosterEntry, Trajectory, Violation,
    load_trajectory, parse_trajectory, save_trajectory, serialize_trajectory, validate_trajectory,
)


def _roster():
    return {f"p{k}": RosterEntry("Daemon", "Damage", "A" if k < 4 else "B", 5) for k in range(8)}


def _meta_line(**over):
    roster = {pid: {"character_name": e.character_name, "character_class": e.character_class,
                    "team": e.team, "carry_cap": e.carry_cap} for pid, e in _roster().items()}
    rec = {"format": FORMAT_VERSION, "game_id": "hand", "map_units_note": "units", "tick_rate": 10,
           "character_roster": roster}
    rec.update(over)
    return json.dumps(rec)


def _player(k, tick):
    return {"player_id": f"p{k}", "position": [100.0 * k, -50.0 * tick], "velocity": [1.5, -2.0],
            "health_fraction": 0.5 if k % 2 else 1.0, "seeds_carried": k % 3, "score": 2.5 * tick,
            "events": {"dealt_damage": k == 1, "took_damage": k == 5, "kill_credit": False, "healed_ally": False},
            "alive": True}


def _frame_line(tick):
    return json.dumps({
        "tick": tick, "phase": "Collection" if tick == 0 else "Deposit",
        "players": [_player(k, tick) for k in range(8)],
        "seed_clusters": [{"cluster_id": "c0", "position": [10.0, 20.0], "seeds_remaining": 3, "visible": True}],
        "platforms": [{"platform_id": "q0", "position": [-5.0, 5.0], "active": tick == 1}],
    })


def _sim(ticks=200, seed=3):
    cfg = make_population(archetype_grid("aggression", (0.5,), 1),
                          SimConfig(players=(), ticks=ticks), master_seed=seed)[0]
    return simulate(cfg)


def test_hand_written_two_tick_file():
    text = "\n".join([_meta_line(), _frame_line(0), _frame_line(1)]) + "\n"
    traj = parse_trajectory(text.encode())
    assert traj.n_ticks == 2 and traj.player_ids == tuple(f"p{k}" for k in range(8))
    frames = traj.frames
    for tick, frame in enumerate(frames):
        assert frame.tick == tick
        assert frame.phase == ("Collection" if tick == 0 else "Deposit")
        for k, ps in enumerate(frame.players):
            want = _player(k, tick)
            assert ps.player_id == want["player_id"]
            assert list(ps.position) == want["position"]
            assert list(ps.velocity) == want["velocity"]
            assert ps.health_fraction == want["health_fraction"]
            assert ps.seeds_carried == want["seeds_carried"]
            assert ps.score == want["score"]
            assert ps.events.dealt_damage == want["events"]["dealt_damage"]
            assert ps.events.took_damage == want["events"]["took_damage"]
            assert ps.alive
        assert frame.seed_clusters[0].position == (10.0, 20.0)
        assert frame.platforms[0].active == (tick == 1)
    assert traj.meta.character_roster["p3"] == RosterEntry("Daemon", "Damage", "A", 5)
    assert validate_trajectory(traj) == []


def test_empty_trajectory_rejected():
    with pytest.raises(MalformedRecord, match="empty trajectory"):
        parse_trajectory((_meta_line() + "\n").encode())


def test_tick_gap_rejected():
    text = "\n".join([_meta_line(), _frame_line(0), _frame_line(2)])
    with pytest.raises(MalformedRecord, match="tick gap") as err:
        parse_trajectory(text)
    assert err.value.line_no == 3


@pytest.mark.parametrize("mutate, reason", [
    (lambda m, f: (m.replace(FORMAT_VERSION, "tasksets/0"), f), "format"),
    (lambda m, f: (m, f.replace('"alive": true', '"alive": "yes"', 1)), "alive"),
    (lambda m, f: (m, f.replace('"position": [0.0, -0.0]', '"position": [0.0]', 1)), "position"),
    (lambda m, f: (m, f.replace('"phase": "Collection"', '"phase": "Night"')), "phase"),
    (lambda m, f: (m, f[:-5]), "JSON"),
])
def test_schema_violations_raise(mutate, reason):
    meta, frame = mutate(_meta_line(), _frame_line(0))
    with pytest.raises(MalformedRecord, match=reason):
        parse_trajectory(meta + "\n" + frame)


def test_missing_player_rejected():
    rec = json.loads(_frame_line(0))
    rec["players"].pop()
    with pytest.raises(MalformedRecord, match="missing"):
        parse_trajectory(_meta_line() + "\n" + json.dumps(rec))


def test_minimal_round_trip():
    traj = parse_trajectory("\n".join([_meta_line(), _frame_line(0)]))
    assert parse_trajectory(serialize_trajectory(traj)) == traj


def test_simulator_round_trip_500_ticks():
    traj = _sim(500)
    data = serialize_trajectory(traj)
    back = parse_trajectory(data)
    assert back == traj
    assert serialize_trajectory(back) == data


def test_awkward_floats_round_trip():
    traj = _sim(5)
    traj.health[:] = 0.5
    traj.position[0, 0] = (0.1 + 0.2, 1e-300)
    traj.score[2, 3] = 1.0 / 3.0
    back = parse_trajectory(serialize_trajectory(traj))
    assert back == traj and back.health[0, 0] == 0.5


def test_random_trajectories_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(25):
        traj = random_trajectory(rng)
        assert parse_trajectory(serialize_trajectory(traj)) == traj


def test_gzip_file_round_trip(tmp_path):
    traj = _sim(20)
    path = tmp_path / "g.jsonl.gz"
    save_trajectory(traj, path)
    assert gzip.decompress(path.read_bytes()) == serialize_trajectory(traj)
    assert load_trajectory(path) == traj
    save_trajectory(traj, tmp_path / "g.jsonl")
    assert load_trajectory(tmp_path / "g.jsonl") == traj


def test_from_frames_inverts_frames():
    traj = _sim(30)
    assert Trajectory.from_frames(traj.meta, traj.frames) == traj


def test_simulator_output_is_valid():
    assert validate_trajectory(_sim(300)) == []


def test_health_out_of_range_flagged():
    traj = _sim(5)
    traj.health[2, 4] = 1.2
    assert validate_trajectory(traj) == [Violation(2, "health_fraction", "range", traj.player_ids[4])]


def test_dead_player_moving_flagged():
    traj = _sim(5)
    traj.alive[3, 1] = False
    traj.velocity[3, 1] = (1.0, 0.0)
    v = validate_trajectory(traj)
    assert len(v) == 1 and (v[0].tick, v[0].field, v[0].rule) == (3, "velocity", "dead_moving")


def test_roster_size_flagged():
    traj = _sim(2)
    roster = dict(traj.meta.character_roster)
    roster.pop(traj.player_ids[0])
    traj.meta = GameMeta(traj.meta.game_id, 10, roster)
    rules = {(v.field, v.rule) for v in validate_trajectory(traj)}
    assert ("character_roster", "player_count") in rules


# one mutation per invariant: (field to break, expected (field, rule))
FAULTS = [
    ("health_hi", ("health_fraction", "range")),
    ("health_lo", ("health_fraction", "range")),
    ("health_nan", ("health_fraction", "range")),
    ("dead_moving", ("velocity", "dead_moving")),
    ("seeds_neg", ("seeds_carried", "range")),
    ("seeds_cap", ("seeds_carried", "carry_cap")),
    ("score_neg", ("score", "range")),
    ("visible", ("visible", "visibility")),
    ("tick", ("tick", "sequence")),
    ("position_inf", ("position", "finite")),
    ("velocity_nan", ("velocity", "finite")),
]


def _inject(traj, kind, t, i, j):
    if kind == "health_hi":
        traj.health[t, i] = 1.0 + 1e-9
    elif kind == "health_lo":
        traj.health[t, i] = -0.1
    elif kind == "health_nan":
        traj.health[t, i] = np.nan
    elif kind == "dead_moving":
        traj.alive[t, i] = False
        traj.velocity[t, i] = (0.0, 3.0)
    elif kind == "seeds_neg":
        traj.seeds[t, i] = -1
    elif kind == "seeds_cap":
        traj.seeds[t, i] = 6
    elif kind == "score_neg":
        traj.score[t, i] = -1.0
    elif kind == "visible":
        traj.cluster_visible[t, j] = not traj.cluster_visible[t, j]
    elif kind == "tick":
        traj.ticks[t] += 1
    elif kind == "position_inf":
        traj.position[t, i, 0] = np.inf
    elif kind == "velocity_nan":
        traj.velocity[t, i, 1] = np.nan
        traj.alive[t, i] = True


def test_fault_injection_fuzz():
    base = _sim(40, seed=9)
    assert validate_trajectory(base) == []
    rng = np.random.default_rng(2024)
    for _ in range(300):
        kind, want = FAULTS[int(rng.integers(len(FAULTS)))]
        t, i, j = int(rng.integers(40)), int(rng.integers(8)), int(rng.integers(len(base.cluster_ids)))
        traj = base.copy()
        _inject(traj, kind, t, i, j)
        found = validate_trajectory(traj)
        assert len(found) == 1, (kind, found)
        assert (found[0].field, found[0].rule) == want
        assert found[0].tick == t + (1 if kind == "tick" else 0)
