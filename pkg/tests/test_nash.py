from fractions import Fraction

import pytest

from mequilibrium import fixtures, msets
from mequilibrium.game import expected_payoffs, payoff_profile
from mequilibrium.nash import (all_nash_points, beaune, is_nash, mixed_nash_bimatrix, pure_nash,
                               symmetric_nash)

F = Fraction


def verify_best_responses(game, profile):
    """Independent check: every supported action attains the maximum payoff."""
    pays = payoff_profile(game, profile)
    for s, p in zip(profile, pays):
        top = max(p)
        assert all(p[k] == top for k in range(len(s)) if s[k] > 0)


def profiles(points):
    return {tuple(tuple(s) for s in p.profile) for p in points}


def test_intro_dominance_unique_pure(games):
    g = games("intro_dominance")
    assert profiles(pure_nash(g)) == {((0, 1), (0, 1))}
    assert len(mixed_nash_bimatrix(g)) == 1


def test_mondrian_pure_and_symmetric(games):
    g = games("mondrian")
    assert len(pure_nash(g)) == 3
    sym, _ = symmetric_nash(g)
    strategies = {p.profile[0] for p in sym}
    assert len(strategies) == 5
    assert (F(2, 3), F(1, 3), F(0)) in strategies
    assert (F(1, 6), F(0), F(5, 6)) in strategies


def test_ds_family_pure(games):
    for name in ("ds1", "ds2", "nl"):
        g = games(name)
        pts = pure_nash(g)
        assert len(pts) == 1
    assert profiles(pure_nash(games("ds1"))) == {((0, 0, 1), (0, 0, 1))}


@pytest.mark.parametrize("name", ["amp1", "amp2", "amp3", "amp4", "amp5"])
def test_amp_family_same_mixed_nash(games, name):
    pts = all_nash_points(games(name))
    assert len(pts) == 1
    row, col = pts[0].profile
    # (p*, q*) = (column's A-probability, row's A-probability)
    assert (col[0], row[0]) == (F(1, 2), F(1, 6))


def test_nongeneric_left_boundary_mixed(games):
    g = games("nongeneric_3x3_left")
    sym, _ = symmetric_nash(g)
    strategies = {p.profile[0] for p in sym}
    assert (F(8, 13), F(0), F(5, 13)) in strategies
    assert (1, 0, 0) in strategies


def test_seven_symmetric_equilibria(games):
    sym, _ = symmetric_nash(games("seven_eq"))
    assert len(sym) == 7


def test_all_points_pass_best_response_check():
    for name in fixtures.CATALOG:
        g = fixtures.load(name)
        if g.num_players != 2:
            continue
        for p in all_nash_points(g):
            verify_best_responses(g, p.profile)
            assert is_nash(g, p.profile)


def test_nongeneric_continuum_flagged(games):
    pts = mixed_nash_bimatrix(games("nongeneric_2x2"))
    assert any(p.degenerate for p in pts)


def test_beaune_dominance_full_square(games):
    b = beaune(games("intro_dominance"), ((0, 1), (0, 1)))
    assert all(f.same_set(type(f).full(2)) for f in b.belief_set.factors)


def test_beaune_amp_single_point(games):
    b = beaune(games("amp"), ((F(1, 6), F(5, 6)), (F(5, 6), F(1, 6))))
    assert [f.vertices for f in b.belief_set.factors] == [((F(5, 6), F(1, 6)),), ((F(1, 6), F(5, 6)),)]


def test_beaune_trembling_hand_perfect(games):
    # p = 1 (column plays A), q = 0 (row plays B)
    b = beaune(games("nongeneric_2x2"), ((0, 1), (1, 0)))
    assert b.trembling_hand_perfect
    assert b.belief_set.factors[0].vertices == ((1, 0),)
    assert b.belief_set.factors[1].dimension == 1


def test_beaune_none_when_not_best_response(games):
    assert beaune(games("amp"), ((1, 0), (1, 0))) is None


def test_nash_in_closure_of_m_sets():
    for name in ("coord", "chicken", "amp", "nongeneric_2x2", "matching_pennies", "mondrian"):
        g = fixtures.load(name)
        meqs = msets.enumerate_m_equilibria(g, markers=False)
        for p in all_nash_points(g):
            choice = p.profile
            belief = (choice[1], choice[0])
            assert msets.in_closure(meqs, choice, belief), (name, choice)
