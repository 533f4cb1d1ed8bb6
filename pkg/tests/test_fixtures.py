import numpy as np
import pytest

from mequilibrium import ValidationError, fixtures
from mequilibrium import msets as M
from mequilibrium.fixtures import SynthConfig


def payoff_pair(game, row, col):
    return tuple(int(game.payoffs[i][row, col]) for i in range(2))


def test_catalog_loads():
    for name in fixtures.CATALOG:
        g = fixtures.load(name)
        assert g.num_players >= 2


def test_known_entries():
    assert fixtures.load("amp1").payoffs[0].tolist() == [[20, 10], [10, 20]]
    assert fixtures.load("amp1").payoffs[1].tolist() == [[10, 60], [20, 10]]
    assert payoff_pair(fixtures.load("km"), 0, 0) == (120, 120)
    assert payoff_pair(fixtures.load("mondrian"), 0, 0) == (9, 9)


@pytest.mark.parametrize("name", sorted(fixtures.AMP_PARAMETERS))
def test_amp_parametric_matches_catalog(name):
    built = fixtures.amp_parametric(*fixtures.AMP_PARAMETERS[name])
    cat = fixtures.load(name)
    for i in range(2):
        assert built.payoffs[i].tolist() == cat.payoffs[i].tolist()


def test_ds_games_differ_by_constant_shifts():
    a, b = fixtures.load("ds1"), fixtures.load("ds2")
    row = np.array(b.payoffs[0] - a.payoffs[0], dtype=float)
    col = np.array(b.payoffs[1] - a.payoffs[1], dtype=float)
    assert np.all(row == row[0, :])          # each opponent column shifted by one constant
    assert np.all(col == col[:, [0]])
    ca = sorted(m.color.orderings for m in M.enumerate_m_equilibria(a, symmetric=True, markers=False)
                if m.colorable)
    cb = sorted(m.color.orderings for m in M.enumerate_m_equilibria(b, symmetric=True, markers=False)
                if m.colorable)
    assert ca == cb


def test_resolve_game(tmp_path):
    g = fixtures.resolve_game("coord")
    path = tmp_path / "g.json"
    path.write_text(g.dumps())
    assert fixtures.resolve_game(str(path)).payoffs[0].tolist() == g.payoffs[0].tolist()
    with pytest.raises(ValidationError):
        fixtures.resolve_game("no_such_game")


def test_synth_deterministic():
    g = fixtures.load("chicken")
    a = fixtures.synth_dataset(g, SynthConfig(seed=5))
    assert a == fixtures.synth_dataset(g, SynthConfig(seed=5))
    assert a != fixtures.synth_dataset(g, SynthConfig(seed=6))


def test_synth_rejects_bad_rate():
    with pytest.raises(ValidationError):
        fixtures.synth_observations(fixtures.load("coord"), SynthConfig(best_response_rate=1.5))


def test_blob_points_on_simplex():
    pts = fixtures.blob_points([(0.2, 0.3, 0.5), (1, 0, 0)], 50, 0.05, seed=1)
    assert pts.shape == (100, 3)
    assert np.all(pts >= 0) and np.allclose(pts.sum(1), 1)
