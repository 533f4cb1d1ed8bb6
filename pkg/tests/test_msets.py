import math
from fractions import Fraction

import numpy as np
import pytest

from mequilibrium import CapabilityError, Game, ValidationError, fixtures
from mequilibrium import msets as M
from mequilibrium.game import uniform
from mequilibrium.regions import Polytope

F = Fraction


def interval(poly):
    """First-action probability range of a 2-action factor polytope."""
    xs = [v[0] for v in poly.vertices]
    return min(xs), max(xs)


def by_color(meqs):
    return {m.color.orderings: m for m in meqs if m.colorable}


def test_rank_assignment_count():
    assert len(M.RankAssignment.all((3, 3))) == 36
    assert len(M.RankAssignment.all((2, 3))) == 12
    assert len(M.RankAssignment.all((3, 3), symmetric=True)) == 6


class TestCoordination:
    def test_sets(self, games):
        meqs = M.enumerate_m_equilibria(games("coord"))
        assert len(meqs) == 2 and all(m.colorable for m in meqs)
        sets = by_color(meqs)
        yellow = sets[((1, 0), (1, 0))]
        red = sets[((0, 1), (0, 1))]
        assert [interval(f) for f in yellow.choice_set.factors] == [(F(2, 3), 1)] * 2
        assert [interval(f) for f in yellow.belief_set.factors] == [(F(2, 3), 1)] * 2
        assert [interval(f) for f in red.choice_set.factors] == [(0, F(1, 2))] * 2
        assert [interval(f) for f in red.belief_set.factors] == [(0, F(2, 3))] * 2

    def test_measures_match_rectangle_area(self, games):
        sets = by_color(M.enumerate_m_equilibria(games("coord")))
        for m in sets.values():
            area = math.prod(hi - lo for lo, hi in map(interval, m.choice_set.factors))
            assert M.measure(m.choice_set)[0] == area
        assert sets[((1, 0), (1, 0))].choice_set.measure == F(1, 9)
        assert sets[((0, 1), (0, 1))].choice_set.measure == F(1, 4)

    def test_uniform_marker_on_red(self, games):
        sets = by_color(M.enumerate_m_equilibria(games("coord")))
        red = sets[((0, 1), (0, 1))]
        assert any(mk.kind == "uniform" for mk in red.choice_set.boundary_markers)

    def test_membership_examples(self, games):
        g = games("coord")
        r = M.membership(g, [(0.8, 0.2), (0.8, 0.2)], [(0.9, 0.1), (0.9, 0.1)])
        assert r.member and r.color.orderings == ((1, 0), (1, 0)) and not r.boundary
        r = M.membership(g, [(0.8, 0.2), (0.8, 0.2)], [(0.4, 0.6), (0.4, 0.6)])
        assert not r.member

    def test_stability_fast_path(self, games):
        rep = M.behavioral_stability(games("coord"), [(F(9, 10), F(1, 10))] * 2, [(F(9, 10), F(1, 10))] * 2)
        assert rep.stable and rep.fast_path


def test_amp_sets(games):
    meqs = M.enumerate_m_equilibria(games("amp"))
    rects = set()
    for m in meqs:
        row, col = m.choice_set.factors
        rects.add((interval(col), interval(row)))  # (p, q) = (column's A, row's A)
    assert rects == {((0, F(1, 2)), (F(1, 6), F(1, 2))), ((F(1, 2), F(5, 6)), (0, F(1, 6)))}


def test_nongeneric_2x2(games):
    meqs = M.enumerate_m_equilibria(games("nongeneric_2x2"))
    col = [m for m in meqs if m.colorable]
    assert len(col) == 1
    row, colf = col[0].choice_set.factors
    assert {interval(row), interval(colf)} == {(F(1, 2), 1), (0, F(1, 2))}
    assert all(interval(f) == (0, 1) for f in col[0].belief_set.factors)
    degenerate = [m for m in meqs if not m.colorable]
    assert [m.dimension for m in degenerate] == [1]


def test_matching_pennies_single_point(games):
    g = games("matching_pennies")
    meqs = M.enumerate_m_equilibria(g)
    assert len(meqs) == 1 and not meqs[0].colorable and meqs[0].dimension == 0
    u = (F(1, 2), F(1, 2))
    r = M.membership(g, [u, u], [u, u])
    assert r.member and r.boundary and r.color is None
    assert not M.colorability(meqs[0])


def test_mondrian_symmetric(games):
    g = games("mondrian")
    meqs = M.enumerate_m_equilibria(g, symmetric=True)
    assert len(meqs) == 3 and all(M.colorability(m) for m in meqs)
    red = next(m for m in meqs if m.color.orderings == ((2, 1, 0),))
    pts = {mk.point[0] for mk in red.choice_set.boundary_markers}
    assert (1, 0, 0) in pts and (F(2, 3), F(1, 3), 0) in pts
    nash_pts = {mk.point[0] for m in meqs for mk in m.choice_set.boundary_markers if mk.kind == "nash"}
    assert len(nash_pts) == 5
    for m in meqs:
        assert m.choice_set.measure <= F(1, 6)


def test_ds1_four_sets(games):
    assert len(M.enumerate_m_equilibria(games("ds1"), symmetric=True)) == 4


def test_nongeneric_left_components(games):
    g = games("nongeneric_3x3_left")
    meqs = M.enumerate_m_equilibria(g, symmetric=True)
    assert sorted(m.dimension for m in meqs) == [0, 0, 1, 2]
    points = {p[0].vertices for m in meqs if m.dimension == 0 for p in m.choice_set.pieces}
    assert ((F(8, 13), 0, F(5, 13)),) in points
    seg = next(m for m in meqs if m.dimension == 1)
    assert not M.colorability(seg)
    assert set(seg.choice_set.pieces[0][0].vertices) == {(0, 0, 1), (F(1, 2), 0, F(1, 2))}


def test_nongeneric_left_segment_unstable(games):
    g = games("nongeneric_3x3_left")
    x = (F(1, 4), F(0), F(3, 4))
    rep = M.behavioral_stability(g, [x, x], [x, x], trials=1000, seed=0, max_failures=1)
    assert not rep.stable and rep.failures >= 1


def test_component_without_markers(games):
    meqs = M.enumerate_m_equilibria(games("unique_mixed"), symmetric=True)
    assert any(not m.choice_set.boundary_markers for m in meqs)


def test_exact_mode_needs_two_players(games):
    with pytest.raises(CapabilityError):
        M.enumerate_m_equilibria(games("three_player"), symmetric=True)


def test_symmetric_mode_requires_symmetric_game(games):
    with pytest.raises(ValidationError):
        M.enumerate_m_equilibria(games("chicken"), symmetric=True)


def test_sampled_requires_seed(games):
    with pytest.raises(ValidationError):
        M.enumerate_m_equilibria(games("coord"), mode="sampled", samples=1000)


def test_dominance_solvable_belief_full(games):
    meqs = M.enumerate_m_equilibria(games("intro_dominance"))
    assert any(all(f.same_set(Polytope.full(2)) for f in m.belief_set.factors) for m in meqs)


def test_empty_region_measure():
    from mequilibrium.regions import RegionSet
    assert M.measure(RegionSet(space="choice"))[0] == 0


def test_color_interiors_disjoint(games):
    rng = np.random.default_rng(0)
    for name, sym in (("chicken", False), ("mondrian", True), ("ds1", True), ("coord", False)):
        g = games(name)
        meqs = [m for m in M.enumerate_m_equilibria(g, symmetric=sym, markers=False) if m.colorable]
        for a in meqs:
            for prof in a.choice_set.sample(rng, 50):
                hits = [b for b in meqs if b is not a and b.choice_set.contains(prof, tol=-1e-9)]
                assert not hits


def test_three_player_sampled(games):
    meqs = M.enumerate_m_equilibria(games("three_player"), symmetric=True, mode="sampled",
                                    samples=50_000, seed=7)
    assert meqs and all(m.choice_set.representation == "sampled" for m in meqs)
    for m in meqs:
        value, se = M.measure(m.choice_set)
        assert 0 < value <= 1 / 6 + 3 * se


def test_sampled_measure_agrees_with_exact(games):
    g = games("chicken")
    exact = by_color(M.enumerate_m_equilibria(g, markers=False))
    sampled = M.enumerate_m_equilibria(g, mode="sampled", samples=100_000, seed=3, markers=False)
    for m in sampled:
        ex = exact[m.color.orderings].choice_set.measure
        assert abs(m.choice_set.measure - float(ex)) <= 3 * m.choice_set.std_error + 1e-12


def test_sampled_membership_matches_exact(games):
    g = games("mondrian")
    exact = by_color(M.enumerate_m_equilibria(g, symmetric=True, markers=False))
    sampled = M.enumerate_m_equilibria(g, symmetric=True, mode="sampled", samples=20_000, seed=2,
                                       markers=False)
    rng = np.random.default_rng(11)
    pts = rng.dirichlet(np.ones(3), size=100_000)
    agree = 0
    for m in sampled:
        s_hit = np.asarray(m.choice_set.predicate([pts]), dtype=bool)
        poly = exact[m.color.orderings].choice_set.factors[0]
        forms = np.array([[float(c) for c in a] for a in poly.ge]) if poly.ge else np.zeros((0, 3))
        e_hit = np.all(pts @ forms.T > 0, axis=1) if len(forms) else np.ones(len(pts), bool)
        agree += int((s_hit == e_hit).sum())
    assert agree / (len(pts) * len(sampled)) >= 0.999


def test_plot_data_shapes(games):
    plot = M.plot_data(games("coord"), M.enumerate_m_equilibria(games("coord")))
    assert {s["kind"] for s in plot["shapes"]} == {"square"}
    plot = M.plot_data(games("mondrian"), M.enumerate_m_equilibria(games("mondrian"), symmetric=True))
    assert {s["kind"] for s in plot["shapes"]} == {"ternary"}


def test_result_document(games):
    doc = M.enumerate_m_equilibria(games("coord"))[0].to_dict()
    assert doc["colorable"] and doc["choice_set"]["pieces"][0][0]["H"]
    assert all("/" in v or v.lstrip("-").isdigit() for v in doc["choice_set"]["pieces"][0][0]["vertices"][0])


def test_sampled_measure_unbiased():
    """Standardized exact-vs-sampled deviations over many random games look standard normal."""
    rng = np.random.default_rng(77)
    n = 20_000
    zs = []
    for i in range(40):
        g = Game.bimatrix(rng.integers(0, 10, (2, 2)).tolist(), rng.integers(0, 10, (2, 2)).tolist()) \
            if i % 2 else Game.bimatrix(rng.integers(0, 10, (3, 3)).tolist(),
                                                 rng.integers(0, 10, (3, 3)).tolist())
        exact = {m.color: float(m.choice_set.measure) for m in M.enumerate_m_equilibria(g, markers=False)
                 if m.colorable}
        sampled = {m.color: m.choice_set.measure
                   for m in M.enumerate_m_equilibria(g, mode="sampled", samples=n, seed=i) if m.colorable}
        for c, p in exact.items():
            if p * n >= 20:
                zs.append((sampled.get(c, 0.0) - p) / math.sqrt(p * (1 - p) / n))
    zs = np.array(zs)
    assert len(zs) > 60
    assert abs(zs.mean()) < 4 / math.sqrt(len(zs))
    assert 0.6 < zs.var() < 1.5
