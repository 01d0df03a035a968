"""Per-player behaviour features, 2D embeddings, and population comparisons."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

import numpy as np
from scipy import stats

from .curves import DEFAULT_HORIZON, Curve, completion_curve, curve_stats
from .errors import (
    DataError, InsufficientGames, MalformedRecord, NoAffordances, TooFewPlayers, ZeroVarianceAllColumns,
)
from .registry import (
    EXPLORE_EXPLOIT, FIGHT_FLIGHT, EvalMask, TaskSetDef, builtin_registry, theme_groups,
)

MIN_GAMES = 3
RATIO_EPS = 1e-6
KS_ALPHA = 0.05

STAT_NAMES = {
    FIGHT_FLIGHT: ("fight_auc", "fight_max", "fight_argmax", "flight_auc", "flight_max",
                   "flight_argmax", "auc_ratio", "max_ratio", "argmax_ratio"),
    EXPLORE_EXPLOIT: ("exploit_auc", "exploit_max", "exploit_argmax", "explore_auc", "explore_max",
                      "explore_argmax", "auc_ratio", "max_ratio", "argmax_ratio"),
}
# Label for players above the population median ratio, then the one below.
STRATEGY_LABELS = {FIGHT_FLIGHT: ("Fight", "Flight"), EXPLORE_EXPLOIT: ("Exploit", "Explore")}


def theme_pair_groups(theme: str, registry: Sequence[TaskSetDef] | None = None) -> list[tuple[str, list[str]]]:
    if theme not in STAT_NAMES:
        raise ValueError(f"no feature vector defined for theme {theme!r}")
    return theme_groups(builtin_registry() if registry is None else registry, theme)


def feature_names(theme: str, registry: Sequence[TaskSetDef] | None = None) -> list[str]:
    return [f"{group}.{s}" for group, _ in theme_pair_groups(theme, registry) for s in STAT_NAMES[theme]]


@dataclass
class PlayerFeatureVector:
    player_id: str
    character_name: str
    games_used: int
    theme: str
    values: np.ndarray
    valid: tuple[bool, ...]
    color_reward: float = math.nan

    @property
    def mean_auc_ratio(self) -> float:
        """Mean AUC ratio over pairs that had at least one simultaneous affordance."""
        ratios = [self.values[9 * k + 6] for k, ok in enumerate(self.valid) if ok]
        return float(np.mean(ratios)) if ratios else 1.0


def _ratio(a: float, b: float) -> float:
    return (a + RATIO_EPS) / (b + RATIO_EPS)


def pair_block(first: Curve | None, second: Curve | None) -> list[float]:
    """The 9 features of one pair; ``None`` curves mean the pair was never afforded."""
    if first is None or second is None:
        return [0.0] * 6 + [1.0] * 3
    a, b = curve_stats(first), curve_stats(second)
    return [a.auc, a.max, float(a.argmax), b.auc, b.max, float(b.argmax),
            _ratio(a.auc, b.auc), _ratio(a.max, b.max), _ratio(a.argmax, b.argmax)]


def player_features(
    curve_sets: Mapping[str, Mapping[str, Curve] | None],
    player_id: str,
    theme: str,
    min_games: int = MIN_GAMES,
    *,
    games_used: int,
    character_name: str = "",
    color_reward: float = math.nan,
    registry: Sequence[TaskSetDef] | None = None,
) -> PlayerFeatureVector:
    """Assemble the fixed-order vector from pooled per-pair curves.

    ``curve_sets`` maps each pair's group name to its curves keyed by
    task-set id, or to ``None`` when the pair had no simultaneous affordance.
    """
    if games_used < min_games:
        raise InsufficientGames(player_id, games_used, min_games)
    values: list[float] = []
    valid = []
    for group, ids in theme_pair_groups(theme, registry):
        curves = curve_sets.get(group)
        ok = curves is not None
        valid.append(ok)
        values.extend(pair_block(curves[ids[0]] if ok else None, curves[ids[1]] if ok else None))
    return PlayerFeatureVector(player_id, character_name, games_used, theme,
                               np.array(values, dtype=np.float64), tuple(valid), color_reward)


def player_features_from_masks(
    masks: Sequence[EvalMask],
    theme: str,
    *,
    min_games: int = MIN_GAMES,
    horizon: int = DEFAULT_HORIZON,
    registry: Sequence[TaskSetDef] | None = None,
    pooling: str = "counts",
) -> PlayerFeatureVector:
    """Features for one player from its per-game masks (one mask per game)."""
    if not masks:
        raise InsufficientGames("?", 0, min_games)
    pid = masks[0].player_id
    games = len({m.game_id for m in masks})
    if games < min_games:
        raise InsufficientGames(pid, games, min_games)
    curve_sets: dict[str, Mapping[str, Curve] | None] = {}
    for group, ids in theme_pair_groups(theme, registry):
        try:
            curve_sets[group] = completion_curve(masks, ids, horizon, pooling=pooling)
        except NoAffordances:
            curve_sets[group] = None
    reward = float(np.mean([m.final_score for m in masks]))
    return player_features(curve_sets, pid, theme, min_games, games_used=games,
                           character_name=masks[0].character_name, color_reward=reward, registry=registry)


# ---------------------------------------------------------------------------
# Embedding
# ---------------------------------------------------------------------------


@dataclass
class Embedding:
    coords: np.ndarray
    kept_columns: np.ndarray
    loadings: np.ndarray | None = None
    explained_variance: np.ndarray | None = None


def standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Z-score each column (unbiased std); zero-variance columns are dropped."""
    x = np.asarray(x, dtype=np.float64)
    std = x.std(axis=0, ddof=1) if x.shape[0] > 1 else np.zeros(x.shape[1])
    keep = np.nonzero(std > 0)[0]
    if keep.size == 0:
        raise ZeroVarianceAllColumns("every feature column is constant")
    xs = x[:, keep]
    return (xs - xs.mean(axis=0)) / std[keep], keep


def fit_embedding(x: np.ndarray, method: str = "linear", seed: int = 0) -> Embedding:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise TooFewPlayers(f"need at least 3 players, got {x.shape[0] if x.ndim else 0}")
    z, keep = standardize(x)
    if method == "linear":
        return _linear(z, keep)
    if method == "neighbor":
        return _neighbor(z, keep, seed)
    raise ValueError(f"unknown embedding method {method!r}")


def embed_2d(x: np.ndarray, method: str = "linear", seed: int = 0) -> np.ndarray:
    """(n, 2) coordinates, one row per input row."""
    return fit_embedding(x, method, seed).coords


def _linear(z: np.ndarray, keep: np.ndarray) -> Embedding:
    _, s, vt = np.linalg.svd(z, full_matrices=False)
    k = min(2, vt.shape[0])
    comps = vt[:k].copy()
    for a in range(k):
        lead = np.argmax(np.abs(comps[a]))  # first index on ties
        if comps[a, lead] < 0:
            comps[a] = -comps[a]
    tol = s[0] * 1e-10 if s.size else 0.0
    # rows are projected independently so identical rows give identical points
    coords = np.zeros((z.shape[0], 2))
    coords[:, :k] = np.einsum("ij,kj->ik", z, comps)
    for a in range(k):
        if s[a] <= tol:
            coords[:, a] = 0.0
    ev = s[:k] ** 2 / max(z.shape[0] - 1, 1)
    return Embedding(coords, keep, comps, ev)


def _neighbor(z: np.ndarray, keep: np.ndarray, seed: int) -> Embedding:
    from sklearn.manifold import TSNE

    perplexity = max(1.0, min(30.0, (z.shape[0] - 1) / 3.0))
    tsne = TSNE(n_components=2, perplexity=perplexity, init="pca", random_state=seed)
    return Embedding(np.asarray(tsne.fit_transform(z), dtype=np.float64), keep)


# ---------------------------------------------------------------------------
# Spread and comparison
# ---------------------------------------------------------------------------


@dataclass
class Spread:
    std: np.ndarray
    iqr: np.ndarray


def spread_stats(x: np.ndarray, population_label: str = "") -> Spread:
    """Unbiased std and IQR (linear-interpolation quantiles) per column."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise TooFewPlayers("spread needs at least 2 points")
    q75, q25 = np.percentile(x, [75, 25], axis=0)
    return Spread(x.std(axis=0, ddof=1), q75 - q25)


def _safe_ratio(a: float, b: float) -> float:
    if a == b:
        return 1.0
    if b == 0.0:
        return math.inf
    return a / b


@dataclass
class AlignmentReport:
    feature_names: list[str]
    ks_statistic: np.ndarray
    ks_pvalue: np.ndarray
    feature_spread_ratio: np.ndarray
    axis_std_a: np.ndarray
    axis_std_b: np.ndarray
    axis_iqr_a: np.ndarray
    axis_iqr_b: np.ndarray
    axis_spread_ratio: np.ndarray
    dominant_axis: int
    mean_spread_ratio: float
    fraction_significant: float
    n_a: int
    n_b: int
    coords_a: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    coords_b: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def dominant_spread_ratio(self) -> float:
        return float(self.axis_spread_ratio[self.dominant_axis])

    def to_record(self) -> dict:
        def num(v):
            v = float(v)
            return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")

        return {
            "n_a": self.n_a,
            "n_b": self.n_b,
            "axes": [
                {"axis": a, "std_a": num(self.axis_std_a[a]), "std_b": num(self.axis_std_b[a]),
                 "iqr_a": num(self.axis_iqr_a[a]), "iqr_b": num(self.axis_iqr_b[a]),
                 "spread_ratio": num(self.axis_spread_ratio[a])}
                for a in range(len(self.axis_spread_ratio))
            ],
            "dominant_axis": self.dominant_axis,
            "features": [
                {"feature": name, "ks_statistic": num(self.ks_statistic[k]), "ks_pvalue": num(self.ks_pvalue[k]),
                 "spread_ratio": num(self.feature_spread_ratio[k])}
                for k, name in enumerate(self.feature_names)
            ],
            "summary": {"mean_spread_ratio": num(self.mean_spread_ratio),
                        "fraction_significant": num(self.fraction_significant),
                        "ks_alpha": KS_ALPHA},
        }


def _matrix(pop) -> tuple[np.ndarray, np.ndarray | None]:
    if len(pop) and isinstance(pop[0], PlayerFeatureVector):
        return np.vstack([v.values for v in pop]), np.array([v.mean_auc_ratio for v in pop])
    return np.asarray(pop, dtype=np.float64), None


def compare_populations(
    features_a: Sequence[PlayerFeatureVector] | np.ndarray,
    features_b: Sequence[PlayerFeatureVector] | np.ndarray,
    seed: int = 0,
    *,
    method: str = "linear",
    names: Sequence[str] | None = None,
) -> AlignmentReport:
    """Joint embedding of A and B, per-feature KS tests, and spread ratios A/B.

    The behaviour-dominant axis is the embedding axis whose coordinates have
    the largest absolute Spearman correlation with the players' mean AUC
    ratio (axis 0 when raw matrices are given).
    """
    xa, ra = _matrix(features_a)
    xb, rb = _matrix(features_b)
    if xa.shape[1] != xb.shape[1]:
        raise ValueError("populations have different feature counts")
    if names is None:
        if len(features_a) and isinstance(features_a[0], PlayerFeatureVector):
            names = feature_names(features_a[0].theme)
        else:
            names = [f"f{k}" for k in range(xa.shape[1])]
    joint = np.vstack([xa, xb])
    coords = embed_2d(joint, method, seed)
    ca, cb = coords[: len(xa)], coords[len(xa):]
    ks_s = np.zeros(xa.shape[1])
    ks_p = np.ones(xa.shape[1])
    for k in range(xa.shape[1]):
        res = stats.ks_2samp(xa[:, k], xb[:, k])
        ks_s[k], ks_p[k] = res.statistic, res.pvalue
    sa, sb = spread_stats(ca), spread_stats(cb)
    fa, fb = spread_stats(xa), spread_stats(xb)
    axis_ratio = np.array([_safe_ratio(sa.std[a], sb.std[a]) for a in range(2)])
    feat_ratio = np.array([_safe_ratio(fa.std[k], fb.std[k]) for k in range(xa.shape[1])])
    dominant = 0
    if ra is not None and rb is not None:
        behaviour = np.concatenate([ra, rb])
        rho = []
        for a in range(2):
            if np.ptp(coords[:, a]) == 0 or np.ptp(behaviour) == 0:
                rho.append(0.0)
            else:
                rho.append(abs(stats.spearmanr(coords[:, a], behaviour).statistic))
        dominant = int(np.argmax(rho))
    finite = axis_ratio[np.isfinite(axis_ratio)]
    return AlignmentReport(
        feature_names=list(names),
        ks_statistic=ks_s,
        ks_pvalue=ks_p,
        feature_spread_ratio=feat_ratio,
        axis_std_a=sa.std, axis_std_b=sb.std,
        axis_iqr_a=sa.iqr, axis_iqr_b=sb.iqr,
        axis_spread_ratio=axis_ratio,
        dominant_axis=dominant,
        mean_spread_ratio=float(finite.mean()) if finite.size else math.inf,
        fraction_significant=float(np.mean(ks_p < KS_ALPHA)),
        n_a=len(xa), n_b=len(xb),
        coords_a=ca, coords_b=cb,
    )


# ---------------------------------------------------------------------------
# Strategy classification and character switches
# ---------------------------------------------------------------------------


def _ratio_of(v: PlayerFeatureVector | float) -> float:
    return v.mean_auc_ratio if isinstance(v, PlayerFeatureVector) else float(v)


def classify_strategy(
    player: PlayerFeatureVector | float,
    population: Sequence[PlayerFeatureVector | float],
    theme: str = FIGHT_FLIGHT,
) -> str:
    """Median split of mean AUC ratios; exactly-at-median counts as the lower label."""
    if len(population) == 0:
        raise ValueError("population is empty")
    if isinstance(player, PlayerFeatureVector):
        theme = player.theme
    high, low = STRATEGY_LABELS[theme]
    med = float(np.median([_ratio_of(p) for p in population]))
    return high if _ratio_of(player) > med else low


@dataclass
class SwitchResult:
    character_a: str
    character_b: str
    n_players: int
    n_switched: int
    n_stayed: int
    n_filtered: int
    pct_switched_to_fight: float
    pct_switched_to_flight: float
    pct_stayed_fight: float
    pct_stayed_flight: float
    transitions: dict[str, int]

    def to_record(self) -> dict:
        return {
            "character_a": self.character_a, "character_b": self.character_b,
            "n_players": self.n_players, "n_switched": self.n_switched, "n_stayed": self.n_stayed,
            "n_filtered": self.n_filtered,
            "pct_switched_to_fight": self.pct_switched_to_fight,
            "pct_switched_to_flight": self.pct_switched_to_flight,
            "pct_stayed_fight": self.pct_stayed_fight,
            "pct_stayed_flight": self.pct_stayed_flight,
            "transitions": dict(sorted(self.transitions.items())),
        }


def switch_analysis(
    players: Sequence[PlayerFeatureVector],
    character_a: str,
    character_b: str,
    *,
    filtered_ids: Sequence[str] = (),
) -> SwitchResult:
    """Tabulate strategy transitions of players seen on both characters.

    Each character's classification uses that character's whole population
    (players seen on only one of them included). ``filtered_ids`` lists
    players dropped upstream by the min-games filter; those and players seen
    on only one character are counted as filtered.
    """
    pop_a = [v for v in players if v.character_name == character_a]
    pop_b = [v for v in players if v.character_name == character_b]
    by_a = {v.player_id: v for v in pop_a}
    by_b = {v.player_id: v for v in pop_b}
    both = sorted(set(by_a) & set(by_b))
    theme = players[0].theme if players else FIGHT_FLIGHT
    high, low = STRATEGY_LABELS[theme]
    trans = {f"{x}->{y}": 0 for x in (high, low) for y in (high, low)}
    for pid in both:
        ca = classify_strategy(by_a[pid], pop_a)
        cb = classify_strategy(by_b[pid], pop_b)
        trans[f"{ca}->{cb}"] += 1
    to_high = trans[f"{low}->{high}"]
    to_low = trans[f"{high}->{low}"]
    stay_high = trans[f"{high}->{high}"]
    stay_low = trans[f"{low}->{low}"]
    switched, stayed = to_high + to_low, stay_high + stay_low
    only_one = len((set(by_a) | set(by_b)) - set(both))
    filtered = only_one + len(set(filtered_ids) - set(by_a) - set(by_b))

    def pct(k: int, total: int) -> float:
        return 100.0 * k / total if total else 0.0

    return SwitchResult(
        character_a, character_b, len(both), switched, stayed, filtered,
        pct(to_high, switched), pct(to_low, switched), pct(stay_high, stayed), pct(stay_low, stayed), trans,
    )


# ---------------------------------------------------------------------------
# Manifold points and exports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifoldPoint:
    player_id: str
    xy: tuple[float, float]
    color_reward: float
    color_ratio: float


def manifold_points(
    vectors: Sequence[PlayerFeatureVector], method: str = "linear", seed: int = 0
) -> list[ManifoldPoint]:
    coords = embed_2d(np.vstack([v.values for v in vectors]), method, seed)
    return [
        ManifoldPoint(v.player_id, (float(x), float(y)), v.color_reward, v.mean_auc_ratio)
        for v, (x, y) in zip(vectors, coords)
    ]


def write_features_csv(
    vectors: Sequence[PlayerFeatureVector],
    fh: IO[str],
    points: Sequence[ManifoldPoint] | None = None,
) -> None:
    """Feature matrix, optionally joined with manifold coordinates."""
    if not vectors:
        raise ValueError("no feature vectors to write")
    theme = vectors[0].theme
    groups = [g for g, _ in theme_pair_groups(theme)]
    w = csv.writer(fh, lineterminator="\n")
    head = ["player_id", "character", "games_used", *feature_names(theme), *(f"{g}.valid" for g in groups),
            "color_reward"]
    if points is not None:
        head += ["x", "y", "color_ratio"]
    w.writerow(head)
    for k, v in enumerate(vectors):
        row = [v.player_id, v.character_name, v.games_used, *map(repr, v.values.tolist()), *map(int, v.valid),
               repr(float(v.color_reward))]
        if points is not None:
            p = points[k]
            row += [repr(p.xy[0]), repr(p.xy[1]), repr(p.color_ratio)]
        w.writerow(row)


def read_features_csv(fh: IO[str]) -> list[PlayerFeatureVector]:
    """Inverse of :func:`write_features_csv` (coordinates, if present, are ignored)."""
    rows = list(csv.reader(fh))
    if not rows:
        raise DataError("empty features file")
    head = rows[0]
    n_feat = sum(1 for h in head if h.endswith(("_auc", "_max", "_argmax", "_ratio")) and "." in h)
    theme = {36: FIGHT_FLIGHT, 27: EXPLORE_EXPLOIT}.get(n_feat)
    if theme is None or head[3:3 + n_feat] != feature_names(theme):
        raise DataError("features file header does not match a known theme")
    n_pairs = n_feat // 9
    out = []
    for line_no, row in enumerate(rows[1:], start=2):
        try:
            vals = np.array([float(x) for x in row[3:3 + n_feat]])
            valid = tuple(bool(int(x)) for x in row[3 + n_feat:3 + n_feat + n_pairs])
            reward = float(row[head.index("color_reward")]) if "color_reward" in head else math.nan
            games = int(row[2])
        except (ValueError, IndexError):
            raise MalformedRecord(line_no, "bad features row") from None
        if len(vals) != n_feat or len(valid) != n_pairs:
            raise MalformedRecord(line_no, "short features row")
        out.append(PlayerFeatureVector(row[0], row[1], games, theme, vals, valid, reward))
    return out


def write_report_json(report: AlignmentReport, fh: IO[str]) -> None:
    json.dump(report.to_record(), fh, indent=2, sort_keys=True)
    fh.write("\n")
