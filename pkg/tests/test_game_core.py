import itertools
from fractions import Fraction

import numpy as np
import pytest

from mequilibrium import Game, ShapeError, ValidationError, fixtures
from mequilibrium.game import (best_response, expected_payoffs, mu_generator, rank,
                               rank_assignment_of, rank_mu, uniform, unit_vector)

F = Fraction


def brute_expected(game, player, opp):
    """Oracle: explicit double loop over the payoff table."""
    pays = game.payoffs[player]
    k_own = game.action_counts[player]
    out = []
    for a in range(k_own):
        tot = F(0)
        for b, w in enumerate(opp):
            tot += (pays[a, b] if player == 0 else pays[b, a]) * w
        out.append(tot)
    return tuple(out)


def test_coordination_indifference_at_two_thirds(games):
    assert expected_payoffs(games("coord"), 0, (F(2, 3), F(1, 3))) == (2, 2)


def test_pure_belief_gives_payoff_column(games):
    g = games("mondrian")
    for b in range(3):
        pays = expected_payoffs(g, 0, unit_vector(3, b))
        assert pays == tuple(g.payoffs[0][a, b] for a in range(3))


def test_mondrian_uniform_belief(games):
    g = games("mondrian")
    got = expected_payoffs(g, 0, uniform(3))
    assert got == brute_expected(g, 0, uniform(3))
    assert got == (F(19, 3), F(6), F(13, 3))


def test_expected_payoffs_shape_error(games):
    with pytest.raises(ShapeError):
        expected_payoffs(games("mondrian"), 0, (F(1, 2), F(1, 2)))


def test_three_player_expected_payoffs_match_loop(games):
    g = games("three_player")
    rng = np.random.default_rng(0)
    beliefs = [None] + [tuple(F(int(v), 60) for v in rng.multinomial(60, [1 / 3] * 3)) for _ in range(2)]
    got = expected_payoffs(g, 0, beliefs)
    want = []
    for a in range(3):
        want.append(sum(g.payoffs[0][a, b, c] * beliefs[1][b] * beliefs[2][c]
                        for b, c in itertools.product(range(3), range(3))))
    assert got == tuple(want)


@pytest.mark.parametrize("pi,verts", [
    ((3, 1, 2), {(1, 0, 0)}),
    ((3, 3, 1), {(1, 0, 0), (0, 1, 0)}),
    ((5, 5, 5), {(1, 0, 0), (0, 1, 0), (0, 0, 1)}),
])
def test_best_response_examples(pi, verts):
    assert set(best_response(pi).vertices) == verts


def test_rank_examples():
    assert rank((3, 1, 2)).vertices == ((F(1, 2), F(1, 6), F(1, 3)),)
    seg = rank((2, 2, 1))
    assert seg.kind == "segment"
    assert set(seg.vertices) == {(F(1, 2), F(1, 3), F(1, 6)), (F(1, 3), F(1, 2), F(1, 6))}
    hexagon = rank((4, 4, 4))
    assert set(hexagon.vertices) == set(itertools.permutations((F(1, 6), F(1, 3), F(1, 2))))


def test_rank_mu_chicken_row_below_four_fifths():
    mu = mu_generator(2, 1)
    assert mu == (F(1, 3), F(2, 3))
    p = F(1, 2)
    value = rank_mu((6 - 6 * p, 2 - p), (mu[1], mu[0]))
    # row's payoff to A (first entry) is higher, so A gets the larger weight
    assert value.vertices == ((F(2, 3), F(1, 3)),)


def test_rank_mu_reductions():
    assert rank_mu((3, 1, 2), uniform(3)).vertices == (uniform(3),)
    assert rank_mu((3, 1, 2), unit_vector(3, 0)).vertices == ((1, 0, 0),)


def test_rank_assignment_examples():
    assert rank_assignment_of((0.2, 0.5, 0.3)) == {(0, 2, 1)}
    assert rank_assignment_of((0.5, 0.5)) == {(0, 1), (1, 0)}
    assert rank_assignment_of((F(1, 6), F(1, 3), F(1, 2))) == {(0, 1, 2)}


def test_mu_generator():
    assert mu_generator(3, 0) == uniform(3)
    v = mu_generator(3, 2)
    assert v == (F(1, 14), F(4, 14), F(9, 14))
    w = mu_generator(3, 2.5)
    assert w[0] < w[1] < w[2] and abs(sum(w) - 1) < 1e-12
    with pytest.raises(ValidationError):
        mu_generator(3, -1)


def test_game_round_trip_all_fixtures(tmp_path):
    for name in fixtures.CATALOG:
        g = fixtures.load(name)
        text = g.dumps()
        assert Game.loads(text) == g
        assert Game.loads(text).dumps() == text


def test_symmetric_flag_validation():
    with pytest.raises(ValidationError):
        Game.bimatrix([[1, 2], [3, 4]], [[1, 2], [3, 4]], symmetric=True)
    g = Game.symmetric_bimatrix([[1, 2], [3, 4]])
    assert g.symmetric


def test_shape_validation():
    with pytest.raises(ShapeError):
        Game.from_payoffs([np.zeros((2, 2)), np.zeros((2, 3))])
