from __future__ import annotations

import io
from functools import lru_cache

import numpy as np
import pytest

from oracles import random_trajectory
from tasksets.errors import EmptyCollection, ShapeMismatch
from tasksets.overlap import (
    AFFORDANCE, COMPLETION, CONDITIONAL, OccupancyCounts, fight_overlap_by_class, matrix_difference,
    overlap_matrix, solo_multi_occupancy, write_matrix_csv, write_occupancy_csv,
)
from tasksets.registry import DIAD_ID, MULTI_ID, SOLO_ID, EvalMask, evaluate_all
from tasksets.simulator import CHARACTERS, ArchetypeParams, PlayerSlot, SimConfig, derive_seed, iter_simulate


def mask(afforded, completed=None, ids=("i", "j", "k"), alive=None):
    a = np.asarray(afforded, dtype=bool)
    c = a.copy() if completed is None else np.asarray(completed, dtype=bool)
    alive = np.ones(len(a), bool) if alive is None else np.asarray(alive, dtype=bool)
    return EvalMask("g", "p", "Daemon", "Damage", tuple(ids), a, c, alive)


def columns(n, **sets):
    out = np.zeros((n, len(sets)), bool)
    for k, ticks in enumerate(sets.values()):
        out[sorted(ticks), k] = True
    return out


def test_jaccard_examples():
    m = mask(columns(6, i={1, 2, 3}, j={2, 3, 4}, k=set()))
    om = overlap_matrix([m], AFFORDANCE)
    assert om.values[0, 0] == 1.0 and om.values[2, 2] == 0.0
    assert om.values[0, 1] == 0.5 == om.values[1, 0]
    disjoint = overlap_matrix([mask(columns(6, i={0}, j={1}, k={2}))])
    assert disjoint.values[0, 1] == 0.0
    diff = matrix_difference(om, disjoint)
    assert diff[0, 1] == 0.5
    assert np.array_equal(diff, -matrix_difference(disjoint, om))
    assert not matrix_difference(om, om).any()


def test_conditional_measure():
    m = mask(columns(6, i={1, 2, 3, 4}, j={2, 3}, k=set()))
    om = overlap_matrix([m], COMPLETION, measure=CONDITIONAL)
    assert om.values[0, 1] == 0.5 and om.values[1, 0] == 1.0


def test_pooling_over_games_and_errors():
    m1 = mask(columns(4, i={0, 1}, j={1}, k=set()))
    m2 = mask(columns(4, i={3}, j={2, 3}, k=set()))
    assert overlap_matrix([m1, m2]).values[0, 1] == 2 / 4
    with pytest.raises(EmptyCollection):
        overlap_matrix([])
    other = overlap_matrix([mask(columns(2, a={0}, b={1}), ids=("a", "b"))])
    with pytest.raises(ShapeMismatch):
        matrix_difference(overlap_matrix([m1]), other)


def test_random_masks_symmetric_in_range():
    masks = list(evaluate_all(random_trajectory(np.random.default_rng(3), 150)).values())
    for kind in (AFFORDANCE, COMPLETION):
        v = overlap_matrix(masks, kind).values
        assert np.array_equal(v, v.T) and v.min() >= 0 and v.max() <= 1
        assert set(np.diag(v).tolist()) <= {0.0, 1.0}


def test_matrix_csv():
    buf = io.StringIO()
    write_matrix_csv(["i", "j"], np.array([[1.0, 0.5], [0.5, 1.0]]), buf)
    assert buf.getvalue().splitlines() == ["taskset_id,i,j", "i,1.0,0.5", "j,0.5,1.0"]


SM = ("Continue_To_Play_Solo", "Regroup_With_Allies", "Regroup_With_Single_Ally", "Regroup_With_Multiple_Allies")


def sm_mask(states, alive=None):
    """states: per tick one of 'solo', 'diad', 'multi', '-' (unclassified)."""
    n = len(states)
    c = np.zeros((n, 4), bool)
    for t, s in enumerate(states):
        if s == "solo":
            c[t, 0] = True
        elif s in ("diad", "multi"):
            c[t, 1] = True
            c[t, 2 if s == "diad" else 3] = True
    return mask(np.zeros((n, 4), bool), c, SM, alive)


def test_occupancy_always_grouped():
    row = solo_multi_occupancy([sm_mask(["diad"] * 6 + ["multi"] * 4)])
    assert row.solo_time == 0.0 and row.multi_time == 100.0
    assert (row.solo_pct, row.diad_pct, row.multi_pct) == (0.0, 60.0, 40.0)


def test_occupancy_excludes_dead_and_unclassified_ticks():
    states = ["solo", "solo", "diad", "-", "multi", "solo"]
    row = solo_multi_occupancy([sm_mask(states, alive=[1, 1, 1, 1, 1, 0])])
    assert row.counts.alive_ticks == 5
    assert row.solo_time == 40.0 and row.multi_time == 40.0
    assert row.solo_pct + row.diad_pct + row.multi_pct == pytest.approx(100.0)
    with pytest.raises(EmptyCollection):
        solo_multi_occupancy([])


def test_occupancy_pooling_is_tick_weighted():
    games = [sm_mask(["solo"] * 3 + ["diad"]), sm_mask(["multi"] * 6 + ["solo"] * 2)]
    pooled = solo_multi_occupancy(games)
    merged = OccupancyCounts.from_mask(games[0]).merge(OccupancyCounts.from_mask(games[1]))
    assert pooled.counts == merged
    assert pooled.solo_time == pytest.approx(100 * 5 / 12)


def test_partition_on_random_trajectories():
    rng = np.random.default_rng(9)
    for _ in range(20):
        for m in evaluate_all(random_trajectory(rng)).values():
            row = solo_multi_occupancy([m])
            if row.classified:
                assert row.solo_pct + row.diad_pct + row.multi_pct == pytest.approx(100.0, abs=1e-9)


def test_occupancy_csv_header():
    buf = io.StringIO()
    write_occupancy_csv([solo_multi_occupancy([sm_mask(["solo", "diad"])], "Daemon")], buf)
    head, row = buf.getvalue().splitlines()
    assert head.startswith("character,games,solo_time_pct,multi_time_pct")
    assert row.startswith("Daemon,1,50.0,50.0")


def test_fight_overlap_zero_without_fights():
    quiet = list(evaluate_all(random_trajectory(np.random.default_rng(4), 50)).values())
    for m in quiet:
        m.completed[:, :8] = False  # the fight-flight columns come first
    out = fight_overlap_by_class({"Tank": quiet})
    assert all(v == 0.0 for v in out["Tank"].values())
    with pytest.raises(EmptyCollection):
        fight_overlap_by_class({"Tank": []})


# -- simulator-backed analogs ------------------------------------------------

CLASS_AGGRESSION = {"Damage": 0.9, "Support": 0.3, "Tank": 0.3}


@lru_cache(maxsize=None)
def class_population(courage: float, seed: int, games: int = 12) -> dict[str, list[EvalMask]]:
    lineup = ("Daemon", "Mender", "Warden", "Vandal")
    cfgs = []
    for g in range(games):
        players = tuple(
            PlayerSlot(f"{team.lower()}{k}", team, ch,
                       ArchetypeParams(CLASS_AGGRESSION[CHARACTERS[ch].character_class], 0.3, 0.3))
            for team in "AB" for k, ch in enumerate(lineup)
        )
        cfgs.append(SimConfig(players=players, game_id=f"cls-{g:02d}", ticks=3000,
                              rng_seed=derive_seed(seed, g), courage=courage))
    by_class: dict[str, list[EvalMask]] = {}
    for traj in iter_simulate(cfgs):
        for m in evaluate_all(traj).values():
            by_class.setdefault(m.character_class, []).append(m)
    return by_class


@pytest.mark.slow
def test_damage_class_fights_most():
    table = fight_overlap_by_class(class_population(0.0, 21))
    for t in SM:
        assert table["Damage"][t] > max(table["Support"][t], table["Tank"][t]), t


@pytest.mark.slow
def test_allies_present_fight_overlap_exceeds_solo():
    table = fight_overlap_by_class(class_population(1.0, 22))
    for cls, row in table.items():
        assert row[MULTI_ID] > row[SOLO_ID], cls
        assert row[DIAD_ID] > row[SOLO_ID], cls
