"""Simultaneous affordance-completion curves.

For a group of task-sets, every tick at which all of them are afforded opens
one window per task-set. The window of task-set ``k`` opened at tick ``t``
runs until the next tick at which ``k`` alone is afforded again (or the end
of the game); each completion of ``k`` inside it counts once at its offset
from ``t``. Counts are pooled over games and divided by the pooled number of
simultaneous-affordance ticks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .errors import NoAffordances
from .registry import EvalMask

DEFAULT_HORIZON = 150


@dataclass
class Curve:
    taskset_id: str
    counts: np.ndarray
    denominator: int
    probabilities: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.probabilities is None:
            if self.denominator > 0:
                self.probabilities = self.counts / float(self.denominator)
            else:
                self.probabilities = np.zeros(len(self.counts))
        else:
            self.probabilities = np.asarray(self.probabilities, dtype=np.float64)

    @property
    def horizon(self) -> int:
        return len(self.counts) - 1


@dataclass(frozen=True)
class AffordanceWindow:
    taskset_id: str
    start: int
    end: int
    completion_offsets: tuple[int, ...]


@dataclass(frozen=True)
class CurveStats:
    auc: float
    max: float
    argmax: int


def simultaneous_afford_ticks(mask: EvalMask, taskset_ids: Sequence[str]) -> np.ndarray:
    cols = [mask.column(t) for t in taskset_ids]
    return np.nonzero(mask.afforded[:, cols].all(axis=1))[0]


def _next_afford(afforded: np.ndarray) -> np.ndarray:
    """For each tick t, the first tick > t where ``afforded`` holds (n if none)."""
    n = len(afforded)
    idx = np.where(afforded, np.arange(n), n)
    # suffix minimum over ticks strictly after t
    suffix = np.minimum.accumulate(idx[::-1])[::-1]
    return np.append(suffix[1:], n)


def completion_windows(mask: EvalMask, taskset_id: str, afford_ticks: Iterable[int]) -> list[AffordanceWindow]:
    k = mask.column(taskset_id)
    nxt = _next_afford(mask.afforded[:, k])
    done = mask.completed[:, k]
    out = []
    for t in afford_ticks:
        t = int(t)
        end = int(nxt[t])
        offs = tuple(int(x) for x in np.nonzero(done[t:end])[0])
        out.append(AffordanceWindow(taskset_id, t, end, offs))
    return out


def window_counts(mask: EvalMask, taskset_ids: Sequence[str], horizon: int) -> tuple[dict[str, np.ndarray], int]:
    """Raw per-offset completion counts and the simultaneous-tick count for one mask.

    Windows of one task-set never overlap, so each completion tick belongs to
    at most one window: the one opened at the latest affordance of that
    task-set at or before it, provided that affordance was simultaneous.
    """
    cols = [mask.column(t) for t in taskset_ids]
    simul = mask.afforded[:, cols].all(axis=1)
    n = len(simul)
    ticks = np.arange(n)
    counts = {}
    for tid, k in zip(taskset_ids, cols):
        aff = mask.afforded[:, k]
        last = np.maximum.accumulate(np.where(aff, ticks, -1))
        done = mask.completed[:, k] & (last >= 0)
        c = np.nonzero(done)[0]
        opener = last[c]
        c = c[simul[opener]]
        offsets = c - last[c]
        offsets = offsets[offsets <= horizon]
        counts[tid] = np.bincount(offsets, minlength=horizon + 1).astype(np.int64)
    return counts, int(simul.sum())


def completion_curve(
    masks: EvalMask | Sequence[EvalMask],
    taskset_ids: Sequence[str],
    horizon: int = DEFAULT_HORIZON,
    *,
    pooling: str = "counts",
) -> dict[str, Curve]:
    """Curves for every task-set in a group, pooled over one or more masks.

    ``pooling="counts"`` sums raw counts and denominators before dividing;
    ``pooling="mean"`` averages per-mask probabilities over masks that have
    at least one simultaneous affordance.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if isinstance(masks, EvalMask):
        masks = [masks]
    total = {t: np.zeros(horizon + 1, dtype=np.int64) for t in taskset_ids}
    denom = 0
    per_mask = []
    for m in masks:
        counts, n = window_counts(m, taskset_ids, horizon)
        for t in taskset_ids:
            total[t] += counts[t]
        denom += n
        if n:
            per_mask.append((counts, n))
    if denom == 0:
        raise NoAffordances(f"{list(taskset_ids)} never simultaneously afforded")
    if pooling == "counts":
        return {t: Curve(t, total[t], denom) for t in taskset_ids}
    if pooling == "mean":
        return {
            t: Curve(t, total[t], denom, np.mean([c[t] / n for c, n in per_mask], axis=0))
            for t in taskset_ids
        }
    raise ValueError(f"unknown pooling {pooling!r}")


def curves_from_counts(counts: Mapping[str, np.ndarray], denominator: int) -> dict[str, Curve]:
    if denominator == 0:
        raise NoAffordances("no simultaneous affordances")
    return {t: Curve(t, c, denominator) for t, c in counts.items()}


def curve_stats(curve: Curve) -> CurveStats:
    p = curve.probabilities
    if len(p) == 0:
        return CurveStats(0.0, 0.0, 0)
    k = int(np.argmax(p))  # first occurrence = smallest offset
    return CurveStats(float(p.sum()), float(p[k]), k)


def write_curves_csv(
    rows: Iterable[tuple[Sequence[object], Curve]], fh: IO[str], *, prefix_cols: Sequence[str] = ()
) -> None:
    """One CSV line per (curve, offset); ``rows`` yields (prefix values, curve)."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([*prefix_cols, "taskset_id", "offset", "count", "denominator", "probability"])
    for pre, curve in rows:
        for x, (c, p) in enumerate(zip(curve.counts.tolist(), curve.probabilities.tolist())):
            w.writerow([*pre, curve.taskset_id, x, c, curve.denominator, repr(p)])
