import itertools

import numpy as np
import pytest

from mequilibrium import FormatError, ValidationError, fixtures
from mequilibrium import analysis as A
from mequilibrium import msets as M
from mequilibrium.fixtures import SynthConfig, blob_points, box_sampler

SAMPLE = """subject,round,role,game,choice,belief_1,belief_2
s1,1,row,coord,0,0.9,0.1
s1,2,row,coord,1,0.2,0.8
s2,1,column,coord,0,0.7,0.3
s2,2,column,coord,0,0.5,0.5
s3,1,row,coord,1,0.25,0.75
"""


def brute_force_error(points, k):
    """Oracle: minimum within-cluster squared error over all labelings."""
    best = np.inf
    for lab in itertools.product(range(k), repeat=len(points)):
        lab = np.array(lab)
        if len(set(lab)) != k:
            continue
        err = sum(((points[lab == j] - points[lab == j].mean(0)) ** 2).sum() for j in range(k))
        best = min(best, err)
    return best


def test_parse_five_rows(games):
    obs = A.parse_observations(SAMPLE, {"coord": games("coord")})
    assert len(obs) == 5 and not obs.errors
    assert obs[2].player == 1 and obs[2].belief == (0.7, 0.3)


def test_semicolon_delimiter():
    obs = A.parse_observations(SAMPLE.replace(",", ";"))
    assert len(obs) == 5


def test_off_simplex_row_rejected_with_line():
    text = SAMPLE + "s4,1,row,coord,0,0.52,0.50\n"
    obs = A.parse_observations(text)
    assert len(obs) == 5
    assert obs.errors[0]["line"] == 7 and "1.02" in obs.errors[0]["error"]


def test_small_drift_renormalised():
    obs = A.parse_observations(SAMPLE + "s4,1,row,coord,0,0.5004,0.5\n")
    assert abs(sum(obs[-1].belief) - 1) < 1e-15


def test_missing_columns():
    with pytest.raises(FormatError):
        A.parse_observations("subject,round,choice\n1,1,0\n")


def test_out_of_range_choice(games):
    obs = A.parse_observations(SAMPLE + "s4,1,row,coord,5,0.5,0.5\n", {"coord": games("coord")})
    assert len(obs.errors) == 1


def test_round_trip_bit_exact(games, tmp_path):
    config = SynthConfig(n_subjects=6, rounds=5, seed=3)
    path = tmp_path / "obs.csv"
    fixtures.synth_dataset(games("mondrian"), config, path, game_id="mondrian")
    obs = A.ingest(path)
    again = A.parse_observations(A.dump_observations(obs))
    assert list(obs) == list(again)
    assert list(obs) == fixtures.synth_observations(games("mondrian"), config, "mondrian")


def test_kmeans_single_cluster_identical_points():
    pts = np.tile([0.2, 0.3, 0.5], (10, 1))
    res = A.kmeans(pts, 1, restarts=3)
    assert res.total_error < 1e-28 and res.sizes == [10]


def test_kmeans_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(5):
        pts = rng.dirichlet([1, 1, 1], size=8)
        res = A.kmeans(pts, 2, restarts=200, seed=1)
        assert res.total_error == pytest.approx(brute_force_error(pts, 2), rel=1e-9)


def test_kmeans_two_blobs():
    pts = blob_points([(0.9, 0.05, 0.05), (0.05, 0.05, 0.9)], 40, 0.02, seed=2)
    res = A.kmeans(pts, 2, restarts=20)
    assert sorted(res.sizes) == [40, 40]


def test_kmeans_deterministic_and_monotone():
    pts = np.random.default_rng(5).dirichlet([1, 1, 1], size=200)
    a = A.kmeans(pts, 4, restarts=50, seed=11)
    b = A.kmeans(pts, 4, restarts=50, seed=11)
    assert np.array_equal(a.assignment, b.assignment) and a.total_error == b.total_error
    assert np.all(np.diff(a.history) <= 1e-12)


def test_kmeans_invalid_k():
    with pytest.raises(ValidationError):
        A.kmeans(np.zeros((3, 2)), 2)


SEVEN = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0.5, 0.5, 0), (0.5, 0, 0.5), (0, 0.5, 0.5),
         (1 / 3, 1 / 3, 1 / 3)]


def test_elbow_seven_blobs():
    pts = blob_points(SEVEN, 60, 0.03, seed=0)
    res = A.elbow(pts, range(2, 16), restarts=200, seed=0)
    assert res.suggested == 7
    assert all(a >= b - 1e-12 for a, b in zip(res.errors, res.errors[1:]))


def test_coordination_belief_colors(games):
    g = games("coord")
    meqs = M.enumerate_m_equilibria(g, symmetric=True)
    yellow = A.belief_color(meqs, 0, (0.9, 0.1))
    red = A.belief_color(meqs, 0, (0.6, 0.4))
    assert yellow.orderings == ((1, 0),) and red.orderings == ((0, 1),)


def test_classify_shares_match_direct_count(games):
    g = games("nl")
    meqs = M.enumerate_m_equilibria(g, symmetric=True)
    obs = fixtures.synth_observations(g, SynthConfig(n_subjects=10, rounds=20, seed=4), "nl")
    out = A.classify_into_sets(g, obs, meqs)
    counts = {}
    for o in obs:
        c = A.belief_color(meqs, o.player, o.belief)
        key = str(None if c is None else c.label([list(map(str, a)) for a in g.labels]))
        counts[key] = counts.get(key, 0) + 1
    assert out["belief_fractions"] == {k: v / len(obs) for k, v in sorted(counts.items())}
    assert abs(sum(out["choice_fractions"].values()) - 1) < 1e-12


def test_classify_with_clusters(games):
    g = games("coord")
    meqs = M.enumerate_m_equilibria(g, symmetric=True)
    config = SynthConfig(n_subjects=20, rounds=10, seed=1, belief_sampler=box_sampler((0.85, 0.85), (0.95, 0.95)))
    obs = fixtures.synth_observations(g, config, "coord")
    cl = A.kmeans(np.array([o.belief for o in obs]), 1, restarts=2)
    out = A.classify_into_sets(g, obs, meqs, cl)
    assert out["cluster_agreement"] == 1.0
    assert out["belief_fractions"] == {"B < A": 1.0}


@pytest.mark.parametrize("rate", [1.0, 0.58])
def test_best_response_rate_contract(games, rate):
    g = games("chicken")
    obs = fixtures.synth_observations(g, SynthConfig(n_subjects=200, rounds=25, best_response_rate=rate, seed=7))
    res = A.best_response_rate(g, obs)
    for role in ("row", "column"):
        assert abs(res[role]["rate"] - rate) <= 3 * max(res[role]["std_error"], 1e-12)


def test_best_response_rate_random_choices(games):
    g = games("chicken")
    obs = fixtures.synth_observations(g, SynthConfig(n_subjects=200, rounds=25, best_response_rate=0.5, seed=8))
    res = A.best_response_rate(g, obs)
    assert all(abs(res[r]["rate"] - 0.5) < 0.03 for r in res)
