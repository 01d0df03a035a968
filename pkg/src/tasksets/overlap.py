"""Task-set overlap matrices, solo/diad/multi occupancy, and fight overlap.

Everything here is built from integer tallies that merge by addition, so
per-game results can be computed independently and pooled in any order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyCollection, ShapeMismatch
from .registry import (
    DIAD_ID, FIGHT_FLIGHT, MULTI_ID, REGROUP_ID, SOLO_ID, EvalMask, TaskSetDef, builtin_registry, theme_groups,
)

AFFORDANCE = "Affordance"
COMPLETION = "Completion"
JACCARD = "jaccard"
CONDITIONAL = "conditional"
SM_IDS = (SOLO_ID, REGROUP_ID, DIAD_ID, MULTI_ID)


def _flags(mask: EvalMask, kind: str) -> np.ndarray:
    if kind == AFFORDANCE:
        return mask.afforded
    if kind == COMPLETION:
        return mask.completed
    raise ValueError(f"unknown overlap kind {kind!r}")


# ---------------------------------------------------------------------------
# Overlap matrices
# ---------------------------------------------------------------------------


@dataclass
class OverlapCounts:
    """Pooled occurrence and co-occurrence tick counts for one kind of flag."""

    taskset_ids: tuple[str, ...]
    kind: str
    single: np.ndarray
    joint: np.ndarray
    n_games: int = 0

    @classmethod
    def empty(cls, taskset_ids: Sequence[str], kind: str) -> "OverlapCounts":
        k = len(taskset_ids)
        return cls(tuple(taskset_ids), kind, np.zeros(k, np.int64), np.zeros((k, k), np.int64))

    @classmethod
    def from_mask(cls, mask: EvalMask, kind: str) -> "OverlapCounts":
        a = _flags(mask, kind).astype(np.int64)
        return cls(mask.taskset_ids, kind, a.sum(axis=0), a.T @ a, 1)

    def merge(self, other: "OverlapCounts") -> "OverlapCounts":
        if other.taskset_ids != self.taskset_ids or other.kind != self.kind:
            raise ShapeMismatch("cannot merge overlap counts over different task-sets")
        return OverlapCounts(self.taskset_ids, self.kind, self.single + other.single,
                             self.joint + other.joint, self.n_games + other.n_games)


@dataclass
class OverlapMatrix:
    taskset_ids: tuple[str, ...]
    values: np.ndarray
    kind: str
    population: str = ""
    n_games: int = 0
    measure: str = JACCARD


def overlap_from_counts(counts: OverlapCounts, measure: str = JACCARD, population: str = "") -> OverlapMatrix:
    c = counts.single.astype(np.float64)
    inter = counts.joint.astype(np.float64)
    if measure == JACCARD:
        denom = c[:, None] + c[None, :] - inter
    elif measure == CONDITIONAL:
        # values[i][j] = P(j holds | i holds)
        denom = np.repeat(c[:, None], len(c), axis=1)
    else:
        raise ValueError(f"unknown overlap measure {measure!r}")
    vals = np.divide(inter, denom, out=np.zeros_like(inter), where=denom > 0)
    return OverlapMatrix(counts.taskset_ids, vals, counts.kind, population, counts.n_games, measure)


def overlap_counts(masks: Iterable[EvalMask], kind: str) -> OverlapCounts:
    total = None
    for m in masks:
        part = OverlapCounts.from_mask(m, kind)
        total = part if total is None else total.merge(part)
    if total is None:
        raise EmptyCollection("overlap needs at least one mask")
    return total


def overlap_matrix(
    masks: Iterable[EvalMask], kind: str = AFFORDANCE, *, measure: str = JACCARD, population: str = ""
) -> OverlapMatrix:
    """Jaccard (or conditional) overlap of task-set flags pooled over all ticks of all masks."""
    return overlap_from_counts(overlap_counts(masks, kind), measure, population)


def matrix_difference(m1: OverlapMatrix, m2: OverlapMatrix) -> np.ndarray:
    if m1.taskset_ids != m2.taskset_ids or m1.values.shape != m2.values.shape:
        raise ShapeMismatch("matrices index different task-sets")
    return m1.values - m2.values


def write_matrix_csv(ids: Sequence[str], values: np.ndarray, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["taskset_id", *ids])
    for tid, row in zip(ids, values.tolist()):
        w.writerow([tid, *map(repr, row)])


# ---------------------------------------------------------------------------
# Solo / diad / multi occupancy
# ---------------------------------------------------------------------------

_OCC_FIELDS = ("ticks", "alive_ticks", "afforded", "solo", "diad", "multi", "solo_time", "multi_time")


@dataclass
class OccupancyCounts:
    """Raw tick counts behind one occupancy row; dead ticks are not counted
    anywhere except ``ticks``."""

    ticks: int = 0
    alive_ticks: int = 0
    afforded: int = 0
    solo: int = 0
    diad: int = 0
    multi: int = 0
    solo_time: int = 0
    multi_time: int = 0
    n_games: int = 0

    @classmethod
    def from_mask(cls, mask: EvalMask) -> "OccupancyCounts":
        alive = mask.alive
        done = {t: mask.completed[:, mask.column(t)] & alive for t in SM_IDS}
        solo, diad, multi = done[SOLO_ID], done[DIAD_ID], done[MULTI_ID]
        exactly_one = (solo.astype(np.int8) + diad + multi) == 1
        return cls(
            ticks=mask.n_ticks,
            alive_ticks=int(alive.sum()),
            afforded=int((mask.afforded[:, mask.column(SOLO_ID)] & alive).sum()),
            solo=int((solo & exactly_one).sum()),
            diad=int((diad & exactly_one).sum()),
            multi=int((multi & exactly_one).sum()),
            solo_time=int(solo.sum()),
            multi_time=int(done[REGROUP_ID].sum()),
            n_games=1,
        )

    def merge(self, other: "OccupancyCounts") -> "OccupancyCounts":
        return OccupancyCounts(*(getattr(self, f) + getattr(other, f) for f in (*_OCC_FIELDS, "n_games")))


@dataclass
class OccupancyRow:
    label: str
    counts: OccupancyCounts = field(repr=False)

    @staticmethod
    def _pct(num: int, den: int) -> float:
        return 100.0 * num / den if den else 0.0

    @property
    def afford_fraction(self) -> float:
        return self._pct(self.counts.afforded, self.counts.alive_ticks)

    @property
    def classified(self) -> int:
        c = self.counts
        return c.solo + c.diad + c.multi

    @property
    def solo_pct(self) -> float:
        return self._pct(self.counts.solo, self.classified)

    @property
    def diad_pct(self) -> float:
        return self._pct(self.counts.diad, self.classified)

    @property
    def multi_pct(self) -> float:
        return self._pct(self.counts.multi, self.classified)

    @property
    def solo_time(self) -> float:
        return self._pct(self.counts.solo_time, self.counts.alive_ticks)

    @property
    def multi_time(self) -> float:
        return self._pct(self.counts.multi_time, self.counts.alive_ticks)


def occupancy_counts(masks: Iterable[EvalMask]) -> OccupancyCounts:
    total = None
    for m in masks:
        part = OccupancyCounts.from_mask(m)
        total = part if total is None else total.merge(part)
    if total is None:
        raise EmptyCollection("occupancy needs at least one mask")
    return total


def solo_multi_occupancy(masks: Iterable[EvalMask], label: str = "") -> OccupancyRow:
    """Pooled occupancy: percentages are taken over alive ticks."""
    return OccupancyRow(label, occupancy_counts(masks))


def write_occupancy_csv(rows: Sequence[OccupancyRow], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["character", "games", "solo_time_pct", "multi_time_pct", "afford_pct",
                "solo_pct", "diad_pct", "multi_pct", *_OCC_FIELDS])
    for r in rows:
        w.writerow([r.label, r.counts.n_games, repr(r.solo_time), repr(r.multi_time), repr(r.afford_fraction),
                    repr(r.solo_pct), repr(r.diad_pct), repr(r.multi_pct),
                    *(getattr(r.counts, f) for f in _OCC_FIELDS)])


# ---------------------------------------------------------------------------
# Overlap of solo/multi completions with fighting
# ---------------------------------------------------------------------------


def fight_ids(registry: Sequence[TaskSetDef] | None = None) -> list[str]:
    reg = builtin_registry() if registry is None else registry
    roles = {d.id: d.role for d in reg}
    return [t for _, ids in theme_groups(reg, FIGHT_FLIGHT) for t in ids if roles[t] == "fight"]


@dataclass
class FightOverlapCounts:
    inter: np.ndarray
    union: np.ndarray
    fight_ticks: int = 0
    n_games: int = 0

    @classmethod
    def empty(cls) -> "FightOverlapCounts":
        return cls(np.zeros(len(SM_IDS), np.int64), np.zeros(len(SM_IDS), np.int64))

    @classmethod
    def from_mask(cls, mask: EvalMask, fights: Sequence[str]) -> "FightOverlapCounts":
        alive = mask.alive
        fight = mask.completed[:, [mask.column(t) for t in fights]].any(axis=1) & alive
        sm = mask.completed[:, [mask.column(t) for t in SM_IDS]] & alive[:, None]
        return cls((sm & fight[:, None]).sum(axis=0).astype(np.int64),
                   (sm | fight[:, None]).sum(axis=0).astype(np.int64), int(fight.sum()), 1)

    def merge(self, other: "FightOverlapCounts") -> "FightOverlapCounts":
        return FightOverlapCounts(self.inter + other.inter, self.union + other.union,
                                  self.fight_ticks + other.fight_ticks, self.n_games + other.n_games)

    def values(self) -> dict[str, float]:
        return {t: (float(i) / u if u else 0.0) for t, i, u in zip(SM_IDS, self.inter.tolist(), self.union.tolist())}


def fight_overlap_by_class(
    collections: Mapping[str, Iterable[EvalMask]], registry: Sequence[TaskSetDef] | None = None
) -> dict[str, dict[str, float]]:
    """Per class, the Jaccard overlap of each solo/multi completion flag with
    the union of the fight completions (alive ticks only)."""
    fights = fight_ids(registry)
    out = {}
    for cls_name, masks in sorted(collections.items()):
        total = None
        for m in masks:
            part = FightOverlapCounts.from_mask(m, fights)
            total = part if total is None else total.merge(part)
        if total is None:
            raise EmptyCollection(f"no masks for {cls_name!r}")
        out[cls_name] = total.values()
    return out


def write_fight_overlap_csv(table: Mapping[str, Mapping[str, float]], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["class", *SM_IDS])
    for cls_name, vals in table.items():
        w.writerow([cls_name, *(repr(vals[t]) for t in SM_IDS)])
