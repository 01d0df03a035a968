from __future__ import annotations

import io
import math

import numpy as np
import pytest

from tasksets.curves import Curve
from tasksets.errors import DataError, InsufficientGames, MalformedRecord, TooFewPlayers, ZeroVarianceAllColumns
from tasksets.manifold import (
    MIN_GAMES, RATIO_EPS, PlayerFeatureVector, classify_strategy, compare_populations, embed_2d, fit_embedding,
    feature_names, manifold_points, pair_block, player_features, read_features_csv, spread_stats,
    switch_analysis, write_features_csv,
)
from tasksets.registry import EXPLORE_EXPLOIT, FIGHT_FLIGHT, builtin_registry, theme_groups


def curve(probs):
    p = np.asarray(probs, dtype=float)
    return Curve("x", np.zeros(len(p), np.int64), 1, p)


FIGHT = curve([0, 0, 0, 0.5, 0.5, 0.5, 0.5])  # auc 2.0, max 0.5, argmax 3
FLIGHT = curve([0, 0.8, 0.8, 0.8, 0.8, 0.8, 0])  # auc 4.0, max 0.8, argmax 1


def vec(pid, ratio, character="Daemon", theme=FIGHT_FLIGHT):
    n = 36 if theme == FIGHT_FLIGHT else 27
    v = np.zeros(n)
    v[6::9] = ratio
    return PlayerFeatureVector(pid, character, 3, theme, v, (True,) * (n // 9))


def test_min_games_default():
    assert MIN_GAMES == 3


def test_pair_block_arithmetic():
    block = pair_block(FIGHT, FLIGHT)
    assert block[:6] == pytest.approx([2.0, 0.5, 3, 4.0, 0.8, 1])
    assert block[6:] == pytest.approx([0.5, 0.625, 3.0], rel=1e-6)


def test_ratio_smoothing_is_finite():
    block = pair_block(FIGHT, curve([0] * 7))
    assert block[6] == pytest.approx((2.0 + RATIO_EPS) / RATIO_EPS)
    assert all(math.isfinite(x) for x in block)


def test_feature_vector_lengths_and_missing_pairs():
    reg = builtin_registry()
    groups = theme_groups(reg, FIGHT_FLIGHT)
    sets = {g: {ids[0]: FIGHT, ids[1]: FLIGHT} for g, ids in groups}
    sets[groups[2][0]] = None
    v = player_features(sets, "p", FIGHT_FLIGHT, games_used=3)
    assert len(v.values) == 36 and len(feature_names(FIGHT_FLIGHT)) == 36
    assert v.valid == (True, True, False, True)
    assert v.values[18:24].tolist() == [0.0] * 6 and v.values[24:27].tolist() == [1.0] * 3
    assert v.mean_auc_ratio == pytest.approx(0.5, rel=1e-6)
    ee = {g: {ids[0]: FIGHT, ids[1]: FLIGHT} for g, ids in theme_groups(reg, EXPLORE_EXPLOIT)}
    assert len(player_features(ee, "p", EXPLORE_EXPLOIT, games_used=3).values) == 27
    with pytest.raises(InsufficientGames):
        player_features(sets, "p", FIGHT_FLIGHT, games_used=2)


def test_identical_rows_identical_points():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(6, 5))
    x[4] = x[1]
    xy = embed_2d(x)
    assert np.array_equal(xy[4], xy[1])


def test_collinear_rows_have_zero_second_axis():
    x = np.array([[0.0, 0.0, 1.0], [1.0, 2.0, 1.0], [2.0, 4.0, 1.0]])
    xy = embed_2d(x)
    assert np.all(xy[:, 1] == 0.0)
    assert np.ptp(xy[:, 0]) > 0


def test_linear_embedding_sign_and_reproducibility():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(30, 8))
    a, b = embed_2d(x), embed_2d(x.copy())
    assert a.tobytes() == b.tobytes()
    emb = fit_embedding(x)
    for comp in emb.loadings:
        assert comp[np.argmax(np.abs(comp))] > 0
    # negating every column flips the data, not the sign-fixed axes
    assert np.allclose(embed_2d(-x), -a)


def test_neighbor_embedding_seeded():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(20, 4))
    a = embed_2d(x, "neighbor", seed=3)
    assert a.shape == (20, 2)
    assert np.array_equal(a, embed_2d(x, "neighbor", seed=3))


def test_embedding_errors():
    with pytest.raises(TooFewPlayers):
        embed_2d(np.zeros((2, 3)))
    with pytest.raises(ZeroVarianceAllColumns):
        embed_2d(np.ones((4, 3)))
    with pytest.raises(ValueError):
        embed_2d(np.eye(4), "umap")


def test_spread_examples():
    s = spread_stats(np.ones((5, 2)))
    assert s.std.tolist() == [0.0, 0.0] and s.iqr.tolist() == [0.0, 0.0]
    s = spread_stats(np.array([0.0, 1.0, 2.0, 3.0, 4.0]))
    assert s.iqr[0] == 2.0 and s.std[0] == pytest.approx(np.sqrt(2.5))
    with pytest.raises(TooFewPlayers):
        spread_stats(np.ones((1, 2)))


def test_compare_identical_populations_is_null():
    rng = np.random.default_rng(4)
    pop = [PlayerFeatureVector(f"p{k}", "D", 3, FIGHT_FLIGHT, rng.normal(size=36), (True,) * 4) for k in range(10)]
    r = compare_populations(pop, pop)
    assert np.all(r.ks_statistic == 0.0)
    assert np.all(r.axis_spread_ratio == 1.0) and np.all(r.feature_spread_ratio == 1.0)
    assert r.fraction_significant == 0.0 and r.mean_spread_ratio == 1.0


def test_compare_swap_inverts_ratios():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(15, 6)) * 3.0
    b = rng.normal(size=(12, 6))
    ab, ba = compare_populations(a, b), compare_populations(b, a)
    assert np.allclose(ab.axis_spread_ratio * ba.axis_spread_ratio, 1.0)
    assert np.allclose(ab.feature_spread_ratio * ba.feature_spread_ratio, 1.0)
    assert np.allclose(ab.ks_statistic, ba.ks_statistic)


def test_classify_examples():
    pop = [0.2, 0.4, 0.9]
    assert classify_strategy(0.9, pop) == "Fight"
    assert classify_strategy(0.4, pop) == "Flight"
    assert classify_strategy(0.9, [0.9]) == "Flight"
    assert classify_strategy(vec("p", 2.0, theme=EXPLORE_EXPLOIT), [vec("q", 1.0, theme=EXPLORE_EXPLOIT)]) == "Exploit"


def test_classify_invariant_under_monotone_transform():
    rng = np.random.default_rng(6)
    r = rng.uniform(0.1, 5.0, size=21)
    base = [classify_strategy(x, r) for x in r]
    for f in (lambda v: v * 10, np.log, lambda v: v ** 3 + 1):
        t = f(r)
        assert [classify_strategy(x, t) for x in t] == base


def test_switch_counting_example():
    # character A ratios: p1..p4 ; character B ratios
    a = {"p1": 5.0, "p2": 5.0, "p3": 0.1, "p4": 5.0, "r1": 0.1, "r2": 0.1, "r3": 0.1}
    b = {"p1": 0.1, "p2": 0.1, "p3": 5.0, "p4": 5.0, "s1": 0.1, "s2": 0.1, "s3": 0.1}
    players = [vec(p, x, "A") for p, x in a.items()] + [vec(p, x, "B") for p, x in b.items()]
    r = switch_analysis(players, "A", "B")
    assert r.n_players == 4 and r.n_switched == 3 and r.n_stayed == 1
    assert r.pct_switched_to_flight == pytest.approx(200 / 3)
    assert r.pct_switched_to_fight == pytest.approx(100 / 3)
    assert r.pct_stayed_fight == 100.0
    assert r.n_filtered == 6


def test_switch_no_change():
    players = [vec(f"p{k}", float(k), c) for k in range(6) for c in ("A", "B")]
    r = switch_analysis(players, "A", "B")
    assert r.n_switched == 0 and r.pct_switched_to_fight == 0.0 and r.pct_switched_to_flight == 0.0


def test_features_csv_round_trip():
    rng = np.random.default_rng(8)
    vecs = [PlayerFeatureVector(f"p{k}", "Daemon", 3 + k, FIGHT_FLIGHT, rng.normal(size=36),
                                (True, False, True, True), float(k)) for k in range(4)]
    buf = io.StringIO()
    write_features_csv(vecs, buf, manifold_points(vecs))
    back = read_features_csv(io.StringIO(buf.getvalue()))
    for v, w in zip(vecs, back):
        assert (v.player_id, v.games_used, v.valid, v.color_reward) == (w.player_id, w.games_used, w.valid, w.color_reward)
        assert np.array_equal(v.values, w.values)
    head = buf.getvalue().splitlines()[0].split(",")
    assert head[:3] == ["player_id", "character", "games_used"] and head[-3:] == ["x", "y", "color_ratio"]


def test_features_csv_errors():
    with pytest.raises(DataError):
        read_features_csv(io.StringIO(""))
    with pytest.raises(DataError):
        read_features_csv(io.StringIO("a,b,c\n1,2,3\n"))
    buf = io.StringIO()
    write_features_csv([vec("p", 1.0)], buf)
    bad = buf.getvalue().replace(",1.0,", ",oops,", 1)
    with pytest.raises(MalformedRecord):
        read_features_csv(io.StringIO(bad))
