"""Synthetic populations with planted behaviour, shared by the acceptance suite.

Each builder simulates in memory and runs the same reductions the CLI uses
(evaluate -> per-game tallies -> pooled players -> feature vectors), only
evaluating the focal players of each game.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from tasksets.manifold import MIN_GAMES, PlayerFeatureVector
from tasksets.overlap import OccupancyCounts
from tasksets.pipeline import PlayerGameTally, merge_all, pool_players, population_features, tally_mask
from tasksets.registry import EXPLORE_EXPLOIT, FIGHT_FLIGHT, builtin_registry, evaluate_all
from tasksets.simulator import (
    ArchetypeParams, Assignment, SimConfig, archetype_grid, iter_simulate, make_population,
)

LEVELS = tuple(round(0.1 * k, 1) for k in range(1, 10))
REPLICATES = 10
GAMES = 3
HORIZON = 150


@dataclass
class Population:
    assignments: list[Assignment]
    tallies: list[PlayerGameTally]
    n_games: int
    frame_players: int

    def features(self, theme: str) -> list[PlayerFeatureVector]:
        vectors, _ = population_features(pool_players(self.tallies), theme, min_games=MIN_GAMES)
        return vectors

    def occupancy(self, player_ids: Sequence[str] | None = None) -> OccupancyCounts:
        keep = None if player_ids is None else set(player_ids)
        return merge_all(t.occupancy for t in self.tallies if keep is None or t.player_id in keep)

    def per_player_occupancy(self) -> dict[str, OccupancyCounts]:
        out: dict[str, OccupancyCounts] = {}
        for t in self.tallies:
            out[t.player_id] = out[t.player_id].merge(t.occupancy) if t.player_id in out else t.occupancy
        return out


def run_population(
    assignments: Sequence[Assignment],
    *,
    master_seed: int,
    base: SimConfig | None = None,
    filler: ArchetypeParams = ArchetypeParams(),
) -> Population:
    registry = builtin_registry()
    configs = make_population(assignments, base or SimConfig(players=()), master_seed=master_seed, filler=filler)
    tallies = []
    work = 0
    for cfg, traj in zip(configs, iter_simulate(configs)):
        focal = cfg.players[0].player_id
        mask = evaluate_all(traj, registry, players=[focal])[focal]
        tallies.append(tally_mask(mask, registry, HORIZON))
        work += traj.alive.size
    return Population(list(assignments), tallies, len(configs), work)


# Seeds are fixed per scenario so every run of the suite sees the same games.

@lru_cache(maxsize=None)
def knob_grid(knob: str) -> Population:
    """9 levels x 10 players x 3 games, one knob varied, random scores."""
    seed = {"aggression": 101, "exploration": 202, "sociality": 303}[knob]
    assignments = archetype_grid(knob, LEVELS, REPLICATES, games=GAMES, prefix=f"{knob[:3]}")
    return run_population(assignments, master_seed=seed, base=SimConfig(players=(), score_mode="random"))


def planted(pop: Population, knob: str) -> dict[str, float]:
    return {a.player_id: getattr(a.archetype, knob) for a in pop.assignments}


@lru_cache(maxsize=None)
def fight_vs_flight(n_each: int = 20) -> Population:
    fighty = ArchetypeParams(aggression=0.9)
    flighty = ArchetypeParams(aggression=0.1)
    assignments = [Assignment(f"fighty-{k:02d}", "Daemon", fighty) for k in range(n_each)]
    assignments += [Assignment(f"flighty-{k:02d}", "Daemon", flighty) for k in range(n_each)]
    return run_population(assignments, master_seed=404)


@lru_cache(maxsize=None)
def diverse_population(n: int = 40) -> Population:
    """Archetypes drawn uniformly from the unit cube."""
    rng = np.random.default_rng(505)
    knobs = rng.uniform(0.0, 1.0, size=(n, 3))
    assignments = [Assignment(f"div-{k:02d}", "Daemon", ArchetypeParams(*map(float, row)))
                   for k, row in enumerate(knobs)]
    return run_population(assignments, master_seed=506)


UNIFORM_ARCHETYPE = ArchetypeParams(aggression=0.5, exploration=0.5, sociality=0.0)


@lru_cache(maxsize=None)
def uniform_population(n: int = 40) -> Population:
    """Every slot of every game, fillers included, runs one shared archetype."""
    assignments = [Assignment(f"uni-{k:02d}", "Daemon", UNIFORM_ARCHETYPE) for k in range(n)]
    return run_population(assignments, master_seed=606, filler=UNIFORM_ARCHETYPE)


@lru_cache(maxsize=None)
def aggression_drop(n_switch: int = 30, n_ref: int = 30, drop: float = 0.4) -> Population:
    """Switchers play Daemon at aggression a and Vandal at a - drop; single-character
    reference players spread over the whole range anchor each character's median."""
    rng = np.random.default_rng(707)
    assignments = []
    for k, a in enumerate(rng.uniform(0.5, 0.9, size=n_switch)):
        assignments.append(Assignment(f"sw-{k:02d}", "Daemon", ArchetypeParams(aggression=float(a))))
        assignments.append(Assignment(f"sw-{k:02d}", "Vandal", ArchetypeParams(aggression=float(a - drop))))
    for ch in ("Daemon", "Vandal"):
        for k, a in enumerate(rng.uniform(0.1, 0.9, size=n_ref)):
            assignments.append(Assignment(f"ref-{ch[0]}{k:02d}", ch, ArchetypeParams(aggression=float(a))))
    return run_population(assignments, master_seed=808)


THEME_OF_KNOB = {"aggression": FIGHT_FLIGHT, "exploration": EXPLORE_EXPLOIT}
