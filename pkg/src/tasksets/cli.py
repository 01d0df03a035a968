"""Command-line entry point: ``tasksets <command> ...``.

Every command that writes files writes them into one output directory
together with a ``manifest.json`` describing how they were produced.
Exit status is 0 on success, 1 for usage or configuration errors and 2 for
unusable input data.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .bench import measure_scaling, measure_throughput
from .curves import DEFAULT_HORIZON, write_curves_csv
from .errors import ConfigError, DataError, InvalidConfig
from .manifold import (
    MIN_GAMES, ManifoldPoint, compare_populations, feature_names, fit_embedding, read_features_csv,
    switch_analysis, theme_pair_groups, write_features_csv, write_report_json,
)
from .overlap import (
    AFFORDANCE, COMPLETION, CONDITIONAL, JACCARD, OccupancyRow, overlap_from_counts,
    write_fight_overlap_csv, write_matrix_csv, write_occupancy_csv,
)
from .pipeline import (
    Collection, collect, list_inputs, merge_all, parallel_map, pool_curves, pool_players, population_features,
)
from .registry import EXPLORE_EXPLOIT, FIGHT_FLIGHT, builtin_registry, registry_dump, registry_hash
from .simulator import (
    SimConfig, archetype_grid, config_to_record, iter_simulate, make_population, population_from_record,
)
from .telemetry import load_trajectory, save_trajectory

log = logging.getLogger("tasksets")

LOG_ENV = "TASKSETS_LOG"
MANIFEST = "manifest.json"
THEMES = {"fight_flight": FIGHT_FLIGHT, "explore_exploit": EXPLORE_EXPLOIT}
REGISTRY_KEYS = ("near_radius", "flee_radius", "health_split", "team_radius", "regroup_radius")
EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this contract reserves 2 for data errors."""

    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Settings: command-line flags over the config file over defaults
# ---------------------------------------------------------------------------


@dataclass
class Settings:
    jobs: int = 1
    seed: int | None = None
    horizon: int = DEFAULT_HORIZON
    min_games: int = MIN_GAMES
    fight_includes_kill: bool = True
    thresholds: dict[str, float] = field(default_factory=dict)
    config_path: Path | None = None
    config: dict[str, Any] = field(default_factory=dict)

    def registry(self):
        return builtin_registry(**self.thresholds)

    def snapshot(self) -> dict[str, Any]:
        return {
            "jobs": self.jobs, "seed": self.seed, "horizon": self.horizon, "min_games": self.min_games,
            "fight_includes_kill": self.fight_includes_kill, "thresholds": dict(sorted(self.thresholds.items())),
            "config_file": None if self.config_path is None else str(self.config_path),
            "config": self.config,
        }


def load_config(path: str | Path) -> dict[str, Any]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InvalidConfig(str(p), "no such file") from None
    except OSError as exc:
        raise InvalidConfig(str(p), exc.strerror or "unreadable") from None
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(str(p), f"not valid JSON ({exc.msg}, line {exc.lineno})") from None
    if not isinstance(rec, dict):
        raise InvalidConfig(str(p), "expected a JSON object")
    return rec


def _positive_int(rec: dict, key: str, path: str) -> int:
    v = rec[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise InvalidConfig(f"{path}.{key}", "must be a positive integer")
    return v


def resolve_settings(args: argparse.Namespace) -> Settings:
    s = Settings()
    if args.config:
        s.config_path = Path(args.config)
        s.config = load_config(args.config)
        analysis = s.config.get("analysis", {})
        if not isinstance(analysis, dict):
            raise InvalidConfig("analysis", "expected object")
        unknown = set(analysis) - {"jobs", "horizon", "min_games", "fight_includes_kill", "thresholds"}
        if unknown:
            raise InvalidConfig(f"analysis.{sorted(unknown)[0]}", "unknown field")
        for key in ("jobs", "horizon", "min_games"):
            if key in analysis:
                setattr(s, key, _positive_int(analysis, key, "analysis"))
        if "fight_includes_kill" in analysis:
            if not isinstance(analysis["fight_includes_kill"], bool):
                raise InvalidConfig("analysis.fight_includes_kill", "must be true or false")
            s.fight_includes_kill = analysis["fight_includes_kill"]
        thresholds = analysis.get("thresholds", {})
        if not isinstance(thresholds, dict) or set(thresholds) - set(REGISTRY_KEYS):
            raise InvalidConfig("analysis.thresholds", f"keys must be among {', '.join(REGISTRY_KEYS)}")
        for k, v in thresholds.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise InvalidConfig(f"analysis.thresholds.{k}", "must be a positive number")
        s.thresholds = {k: float(v) for k, v in thresholds.items()}
    for key in ("jobs", "horizon", "min_games"):
        v = getattr(args, key)
        if v is not None:
            if v < 1:
                raise InvalidConfig(f"--{key.replace('_', '-')}", "must be >= 1")
            setattr(s, key, v)
    s.seed = args.seed
    return s


# ---------------------------------------------------------------------------
# Manifest and output helpers
# ---------------------------------------------------------------------------


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.isoformat(timespec="seconds")


def write_manifest(
    out_dir: Path,
    command: str,
    settings: Settings,
    *,
    inputs: Iterable[Path] = (),
    outputs: Iterable[str] = (),
    seed: int | None = None,
    extra: dict[str, Any] | None = None,
) -> Path:
    rec = {
        "tool": "tasksets",
        "tool_version": __version__,
        "command": command,
        "registry_hash": registry_hash(settings.registry()),
        "config": settings.snapshot(),
        "inputs": {str(p): file_digest(p) for p in sorted(set(inputs))},
        "outputs": {name: file_digest(out_dir / name) for name in sorted(outputs)},
        "master_seed": seed,
        "timestamp": _timestamp(),
    }
    if extra:
        rec.update(extra)
    path = out_dir / MANIFEST
    path.write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InvalidConfig("--out", f"cannot create {out}: {exc.strerror}") from None
    return out


def _write_csv(out: Path, name: str, fn: Callable) -> str:
    with open(out / name, "w", encoding="utf-8", newline="") as fh:
        fn(fh)
    return name


def _theme(name: str) -> str:
    try:
        return THEMES[name]
    except KeyError:
        raise InvalidConfig("--theme", f"expected one of {', '.join(THEMES)}") from None


def _collect(args: argparse.Namespace, s: Settings, character=None) -> Collection:
    return collect(args.in_dir, registry=s.registry(), horizon=s.horizon, min_games=s.min_games,
                   character=character, jobs=s.jobs, fight_includes_kill=s.fight_includes_kill)


def _read_features(path: str):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return read_features_csv(fh)
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _simulate_chunk(job: tuple[list[SimConfig], list[str]]) -> list[str]:
    cfgs, paths = job
    for traj, path in zip(iter_simulate(cfgs), paths):
        save_trajectory(traj, path)
    return paths


def cmd_simulate(args: argparse.Namespace, s: Settings) -> int:
    path = args.config_path or s.config_path
    if path is None:
        raise InvalidConfig("config", "simulate needs a population config file")
    rec = load_config(path) if args.config_path else s.config
    rec = {k: v for k, v in rec.items() if k != "analysis"}
    if s.seed is not None:
        rec["master_seed"] = s.seed
    configs, master = population_from_record(rec)
    out = _out_dir(args.out)
    suffix = ".jsonl.gz" if args.gzip else ".jsonl"
    names = [f"{c.game_id}{suffix}" for c in configs]
    if len(set(names)) != len(names):
        raise InvalidConfig("config", "game ids are not unique")
    chunks = [(configs[k:k + 32], [str(out / n) for n in names[k:k + 32]]) for k in range(0, len(configs), 32)]
    parallel_map(_simulate_chunk, chunks, s.jobs)
    write_manifest(out, "simulate", s, inputs=[Path(path)], outputs=names, seed=master,
                   extra={"games": len(configs),
                          "base_config": config_to_record(replace(configs[0], players=()))})
    print(f"wrote {len(names)} trajectories to {out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, s: Settings) -> int:
    theme = _theme(args.theme)
    registry = s.registry()
    col = _collect(args, s, args.character)
    pools = pool_players(col.tallies)
    vectors, skipped = population_features(pools, theme, min_games=s.min_games, registry=registry)
    out = _out_dir(args.out)
    outputs = []

    def skips(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["player_id", "character", "games", "reason"])
        for pid, ch, n in col.dropped:
            w.writerow([pid, ch, n, f"fewer than {s.min_games} games"])
        for sk in skipped:
            w.writerow([sk.player_id, sk.character_name, "", sk.reason])

    outputs.append(_write_csv(out, "skipped.csv", skips))

    groups = theme_pair_groups(theme, registry)

    def curve_rows():
        for pool in pools:
            for group, _ in groups:
                if pool.curve_counts[group][1] == 0:
                    continue
                for curve in pool_curves(pool, group).values():
                    yield (pool.player_id, pool.character_name, group), curve

    outputs.append(_write_csv(out, "curves.csv", lambda fh: write_curves_csv(
        curve_rows(), fh, prefix_cols=("player_id", "character", "group"))))
    if vectors:
        outputs.append(_write_csv(out, "features.csv", lambda fh: write_features_csv(vectors, fh)))
    write_manifest(out, "analyze", s, inputs=col.files, outputs=outputs,
                   extra={"theme": theme, "character": args.character, "players": len(vectors),
                          "skipped": len(skipped) + len(col.dropped)})
    if not vectors:
        raise DataError("no player has enough games with simultaneous affordances")
    print(f"{len(vectors)} players, {len(feature_names(theme))} features; "
          f"{len(skipped) + len(col.dropped)} skipped")
    return EXIT_OK


def cmd_embed(args: argparse.Namespace, s: Settings) -> int:
    vectors = _read_features(args.features)
    seed = 0 if s.seed is None else s.seed
    emb = fit_embedding(np.vstack([v.values for v in vectors]), args.method, seed)
    points = [ManifoldPoint(v.player_id, (float(x), float(y)), v.color_reward, v.mean_auc_ratio)
              for v, (x, y) in zip(vectors, emb.coords)]
    out = _out_dir(args.out)
    outputs = [_write_csv(out, "embedding.csv", lambda fh: write_features_csv(vectors, fh, points))]
    if emb.loadings is not None:
        names = feature_names(vectors[0].theme)

        def loadings(fh):
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", *(f"axis_{a}" for a in range(len(emb.loadings)))])
            for j, col in enumerate(emb.kept_columns.tolist()):
                w.writerow([names[col], *(repr(float(emb.loadings[a, j])) for a in range(len(emb.loadings)))])

        outputs.append(_write_csv(out, "loadings.csv", loadings))
    write_manifest(out, "embed", s, inputs=[Path(args.features)], outputs=outputs, seed=seed,
                   extra={"method": args.method})
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, s: Settings) -> int:
    a, b = _read_features(args.features_a), _read_features(args.features_b)
    if not a or not b:
        raise DataError("both feature files need at least one player")
    if a[0].theme != b[0].theme:
        raise DataError("feature files are from different themes")
    seed = 0 if s.seed is None else s.seed
    report = compare_populations(a, b, seed, method=args.method)
    out = _out_dir(args.out)

    def report_json(fh):
        write_report_json(report, fh)

    def features(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "ks_statistic", "ks_pvalue", "spread_ratio"])
        for k, name in enumerate(report.feature_names):
            w.writerow([name, repr(float(report.ks_statistic[k])), repr(float(report.ks_pvalue[k])),
                        repr(float(report.feature_spread_ratio[k]))])

    def axes(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["axis", "std_a", "std_b", "iqr_a", "iqr_b", "spread_ratio", "dominant"])
        for ax in range(len(report.axis_spread_ratio)):
            w.writerow([ax, *(repr(float(v[ax])) for v in (report.axis_std_a, report.axis_std_b,
                                                            report.axis_iqr_a, report.axis_iqr_b,
                                                            report.axis_spread_ratio)),
                        int(ax == report.dominant_axis)])

    def coords(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["population", "player_id", "x", "y"])
        for label, pop, xy in (("A", a, report.coords_a), ("B", b, report.coords_b)):
            for v, (x, y) in zip(pop, xy.tolist()):
                w.writerow([label, v.player_id, repr(x), repr(y)])

    outputs = [_write_csv(out, "report.json", report_json), _write_csv(out, "features.csv", features),
               _write_csv(out, "axes.csv", axes), _write_csv(out, "coords.csv", coords)]
    write_manifest(out, "compare", s, inputs=[Path(args.features_a), Path(args.features_b)], outputs=outputs,
                   seed=seed, extra={"method": args.method})
    print(f"dominant axis {report.dominant_axis}: spread ratio {report.dominant_spread_ratio:.3g}; "
          f"{100 * report.fraction_significant:.0f}% of features differ (KS)")
    return EXIT_OK


def cmd_overlap(args: argparse.Namespace, s: Settings) -> int:
    col = _collect(args, s, args.character)
    if not col.tallies:
        raise DataError("no player passed the min-games filter")
    out = _out_dir(args.out)
    outputs = []
    for kind, name in ((AFFORDANCE, "affordance_overlap.csv"), (COMPLETION, "completion_overlap.csv")):
        counts = merge_all(t.afforded if kind == AFFORDANCE else t.completed for t in col.tallies)
        m = overlap_from_counts(counts, args.measure)
        outputs.append(_write_csv(out, name, lambda fh: write_matrix_csv(m.taskset_ids, m.values, fh)))
    by_class: dict[str, list] = {}
    for t in col.tallies:
        by_class.setdefault(t.character_class, []).append(t.fight)
    table = {cls: merge_all(parts).values() for cls, parts in sorted(by_class.items())}
    outputs.append(_write_csv(out, "fight_overlap.csv", lambda fh: write_fight_overlap_csv(table, fh)))
    write_manifest(out, "overlap", s, inputs=col.files, outputs=outputs,
                   extra={"measure": args.measure, "character": args.character})
    return EXIT_OK


def cmd_occupancy(args: argparse.Namespace, s: Settings) -> int:
    col = _collect(args, s, args.character)
    if not col.tallies:
        raise DataError("no player passed the min-games filter")
    groups: dict[str, list] = {}
    for t in col.tallies:
        key = t.character_class if args.by == "class" else t.character_name
        groups.setdefault(key, []).append(t.occupancy)
    rows = [OccupancyRow(label, merge_all(parts)) for label, parts in sorted(groups.items())]
    out = _out_dir(args.out)
    outputs = [_write_csv(out, "occupancy.csv", lambda fh: write_occupancy_csv(rows, fh))]
    write_manifest(out, "occupancy", s, inputs=col.files, outputs=outputs, extra={"by": args.by})
    for r in rows:
        print(f"{r.label}: solo {r.solo_time:.1f}%  multi {r.multi_time:.1f}%")
    return EXIT_OK


def cmd_switch(args: argparse.Namespace, s: Settings) -> int:
    theme = _theme(args.theme)
    col = _collect(args, s, [args.character_a, args.character_b])
    pools = pool_players(col.tallies)
    vectors, skipped = population_features(pools, theme, min_games=s.min_games, registry=s.registry())
    filtered = [pid for pid, _, _ in col.dropped] + [sk.player_id for sk in skipped]
    res = switch_analysis(vectors, args.character_a, args.character_b, filtered_ids=filtered)
    out = _out_dir(args.out)

    def as_json(fh):
        json.dump(res.to_record(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    def transitions(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["from", "to", "players"])
        for key, n in sorted(res.transitions.items()):
            a, b = key.split("->")
            w.writerow([a, b, n])

    outputs = [_write_csv(out, "switch.json", as_json), _write_csv(out, "transitions.csv", transitions)]
    write_manifest(out, "switch", s, inputs=col.files, outputs=outputs,
                   extra={"theme": theme, "character_a": args.character_a, "character_b": args.character_b})
    print(f"{res.n_players} players on both: switched to {args.character_a}->{args.character_b} "
          f"fight {res.pct_switched_to_fight:.1f}% / flight {res.pct_switched_to_flight:.1f}%")
    return EXIT_OK


def cmd_registry_dump(args: argparse.Namespace, s: Settings) -> int:
    text = registry_dump(s.registry())
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    out = _out_dir(args.out)
    (out / "registry.json").write_text(text, encoding="utf-8")
    write_manifest(out, "registry-dump", s, outputs=["registry.json"])
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, s: Settings) -> int:
    out = _out_dir(args.out)
    if args.in_dir:
        files = list_inputs(args.in_dir)
        seed = None
        games = parallel_map(load_trajectory, files, s.jobs)
    else:
        files = []
        seed = 0 if s.seed is None else s.seed
        levels = [round(0.1 * k, 1) for k in range(1, 10)]
        assignments = archetype_grid("aggression", levels, args.players_per_level)
        configs = make_population(assignments, SimConfig(players=(), ticks=args.ticks), master_seed=seed)
        games = list(iter_simulate(configs))
    tp = measure_throughput(games[: args.sample], s.registry(), repeat=args.repeat)
    sc = measure_scaling(games, args.parallel)
    rows = [
        ("games", len(games)),
        ("throughput_games", tp.games),
        ("frame_players", tp.frame_players),
        ("single_thread_seconds", tp.seconds),
        ("frame_players_per_second", tp.per_second),
        ("parallel_jobs", sc.jobs),
        ("available_cpus", sc.cpus),
        ("serial_seconds", sc.serial_seconds),
        ("parallel_seconds", sc.parallel_seconds),
        ("speedup", sc.speedup),
    ]

    def table(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "value"])
        w.writerows(rows)

    outputs = [_write_csv(out, "bench.csv", table)]
    write_manifest(out, "bench", s, inputs=files, outputs=outputs, seed=seed)
    print(f"{tp.per_second:,.0f} frame-player evaluations/s single-threaded; "
          f"{sc.speedup:.2f}x with {sc.jobs} jobs on {sc.cpus} CPU(s)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tasksets", description="Task-set analysis of multi-agent game trajectories.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default 1)")
    p.add_argument("--seed", type=int, default=None, help="master seed (simulate) or embedding seed")
    p.add_argument("--horizon", type=int, default=None, help=f"curve horizon in ticks (default {DEFAULT_HORIZON})")
    p.add_argument("--min-games", type=int, default=None, help=f"games needed per player (default {MIN_GAMES})")
    p.add_argument("--config", default=None, help="JSON config: a population and/or an 'analysis' block")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    c = sub.add_parser("simulate", help="generate synthetic trajectories")
    c.add_argument("config_path", nargs="?", default=None, help="population file (else --config)")
    c.add_argument("--out", required=True)
    c.add_argument("--gzip", action="store_true", help="write .jsonl.gz files")
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("analyze", help="pooled curves and per-player features")
    c.add_argument("in_dir")
    c.add_argument("--theme", default="fight_flight", choices=sorted(THEMES))
    c.add_argument("--character", default=None, help="character name (or class)")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_analyze)

    c = sub.add_parser("embed", help="2D embedding of a features file")
    c.add_argument("features")
    c.add_argument("--method", default="linear", choices=("linear", "neighbor"))
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_embed)

    c = sub.add_parser("compare", help="alignment report between two feature files")
    c.add_argument("features_a")
    c.add_argument("features_b")
    c.add_argument("--method", default="linear", choices=("linear", "neighbor"))
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compare)

    c = sub.add_parser("overlap", help="task-set overlap matrices")
    c.add_argument("in_dir")
    c.add_argument("--character", default=None)
    c.add_argument("--measure", default=JACCARD, choices=(JACCARD, CONDITIONAL))
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_overlap)

    c = sub.add_parser("occupancy", help="solo/diad/multi occupancy table")
    c.add_argument("in_dir")
    c.add_argument("--character", default=None)
    c.add_argument("--by", default="character", choices=("character", "class"))
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_occupancy)

    c = sub.add_parser("switch", help="strategy transitions between two characters")
    c.add_argument("in_dir")
    c.add_argument("--character-a", required=True)
    c.add_argument("--character-b", required=True)
    c.add_argument("--theme", default="fight_flight", choices=sorted(THEMES))
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_switch)

    c = sub.add_parser("registry-dump", help="print the task-set registry as JSON")
    c.add_argument("--out", default=None, help="write registry.json and a manifest here instead")
    c.set_defaults(func=cmd_registry_dump)

    c = sub.add_parser("bench", help="evaluation throughput and parallel scaling")
    c.add_argument("in_dir", nargs="?", default=None, help="trajectories (else a synthetic population)")
    c.add_argument("--out", required=True)
    c.add_argument("--parallel", type=int, default=8, help="jobs for the scaling run")
    c.add_argument("--players-per-level", type=int, default=10)
    c.add_argument("--ticks", type=int, default=6000)
    c.add_argument("--sample", type=int, default=24, help="games timed for single-thread throughput")
    c.add_argument("--repeat", type=int, default=3)
    c.set_defaults(func=cmd_bench)
    return p


def _configure_logging() -> None:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        return args.func(args, settings)
    except ConfigError as exc:
        print(f"tasksets: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"tasksets: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    run()
