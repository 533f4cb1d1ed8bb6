"""mu-equilibria: fixed points of the rank-mu response, swept over the
one-parameter family mu(rho) = (1^rho, ..., K^rho) / sum_k k^rho.

For two players the fixed points are enumerated by weak-order profile: when
player i's expected payoffs have weak order W_i, rank-mu returns a polytope
H_i(W_i) (permutations of mu_i constant on tied blocks' sums), so the fixed
points with payoff orders (W_0, W_1) form a product of two polytopes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import polytope
from .errors import CapabilityError, ValidationError
from .game import Game, mu_generator, payoff_profile, rank_mu, uniform
from .msets import (MEquilibrium, RankAssignment, _payoff_rows, enumerate_m_equilibria, membership)
from .numeric import all_exact, format_rational, to_fraction
from .regions import Polytope, RegionSet

WeakOrder = tuple  # blocks of tied actions, lowest first


def weak_orders(k: int) -> list[WeakOrder]:
    """All ordered set partitions of range(k) (13 for k=3)."""
    def rec(items):
        if not items:
            yield ()
            return
        first = items[0]
        for rest in rec(items[1:]):
            # put `first` into an existing block or a new block at any position
            for i in range(len(rest)):
                yield rest[:i] + (tuple(sorted(rest[i] + (first,))),) + rest[i + 1:]
            for i in range(len(rest) + 1):
                yield rest[:i] + ((first,),) + rest[i:]
    return sorted(set(rec(list(range(k)))))


def _affine(k: int, coeffs: Sequence, rhs) -> tuple:
    """Homogeneous form of coeffs.x - rhs using sum(x) = 1."""
    return tuple(to_fraction(c) - to_fraction(rhs) for c in coeffs)


def response_polytope_forms(mu: Sequence, order: WeakOrder) -> tuple[list, list]:
    """Equalities and inequalities (>= 0) of the hull of rank-mu for payoffs
    with weak order `order`: each block receives the next |B| smallest mu
    values and every subset of a block weighs at most its top values."""
    k = len(mu)
    values = sorted(to_fraction(v) for v in mu)
    eq, ge = [], []
    pos = 0
    for block in order:
        chunk = values[pos:pos + len(block)]
        pos += len(block)
        ind = [int(a in block) for a in range(k)]
        eq.append(_affine(k, ind, sum(chunk)))
        desc = sorted(chunk, reverse=True)
        for t in range(1, len(block)):
            for sub in itertools.combinations(block, t):
                ind = [int(a in sub) for a in range(k)]
                ge.append(tuple(-c for c in _affine(k, ind, sum(desc[:t]))))
    return eq, ge


def _may_meet(corners, eq, strict) -> bool:
    """Necessary condition for the hull of `corners` to meet the order cone."""
    for form in strict:
        if max(sum(a * v for a, v in zip(form, c)) for c in corners) <= 0:
            return False
    for form in eq:
        vals = [sum(a * v for a, v in zip(form, c)) for c in corners]
        if min(vals) > 0 or max(vals) < 0:
            return False
    return True


def _response_vertices(mu: Sequence, order: WeakOrder) -> list[tuple]:
    pays = [0] * len(mu)
    for level, block in enumerate(order):
        for a in block:
            pays[a] = level
    return list(rank_mu(pays, mu).vertices)


def _payoff_order_forms(rows: Sequence[tuple], order: WeakOrder) -> tuple[list, list]:
    """Equalities inside blocks and closed inequalities between consecutive blocks."""
    eq, strict = [], []
    for block in order:
        for a, b in zip(block, block[1:]):
            eq.append(tuple(x - y for x, y in zip(rows[a], rows[b])))
    for lo, hi in zip(order, order[1:]):
        strict.append(tuple(x - y for x, y in zip(rows[hi[0]], rows[lo[0]])))
    return eq, strict


def _relatively_strict(poly: Polytope, strict: Sequence[tuple]) -> bool:
    if poly.empty:
        return False
    c = poly.interior_point()
    return all(sum(a * v for a, v in zip(f, c)) > 0 for f in strict)


@dataclass
class MuEquilibrium:
    mu: tuple
    choice: RegionSet            # closure of the fixed points with these payoff orders
    belief_set: RegionSet
    orders: tuple                # payoff weak order per player
    color: RankAssignment | None  # None when some payoff order has ties

    @property
    def kind(self) -> str:
        d = self.choice.dimension
        return "point" if d == 0 else ("segment" if d == 1 else "polytope")

    @property
    def vertices(self) -> list[tuple]:
        """Extreme profiles of the closure."""
        factors = self.choice.factors
        return [tuple(c) for c in itertools.product(*[f.vertices for f in factors])]

    @property
    def profile(self) -> tuple:
        """The fixed point (point records) or the barycenter of the closure."""
        return tuple(f.interior_point() for f in self.choice.factors)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "orders": [[list(b) for b in w] for w in self.orders],
            "color": None if self.color is None else [list(o) for o in self.color.orderings],
            "vertices": [[[_fmt(v) for v in s] for s in prof] for prof in self.vertices],
            "belief_set": self.belief_set.to_dict(),
        }


def _fmt(v) -> str:
    return format_rational(v)


def _mu_vectors(game: Game, mu) -> list[tuple]:
    ks = game.action_counts
    if len(mu) == game.num_players and all(np.ndim(m) == 1 for m in mu):
        vecs = [tuple(m) for m in mu]
    else:
        vecs = [tuple(mu)] * game.num_players
    for v, k in zip(vecs, ks):
        if len(v) != k:
            raise ValidationError("mu vector length must match the action count")
        if min(v) < 0 or abs(float(sum(v)) - 1) > 1e-9:
            raise ValidationError("mu must be a probability vector")
    # float vectors are taken at their binary value, rescaled to sum exactly to one
    out = []
    for v in vecs:
        if all_exact(v):
            out.append(tuple(to_fraction(x) for x in v))
        else:
            f = [to_fraction(float(x)) for x in v]
            tot = sum(f)
            out.append(tuple(float(x / tot) for x in f))
    return out


def mu_equilibria(game: Game, mu, strict_only: bool = False) -> list[MuEquilibrium]:
    """All mu-equilibria of a two-player game, grouped by payoff weak orders.

    `mu` is one vector shared by both players or one vector per player.
    Exact when the game and mu are rational; float mu values are used at
    their exact binary value and reported as floats.  `strict_only` keeps
    only fixed points whose payoffs are strictly ordered for both players.
    """
    if game.num_players != 2:
        raise CapabilityError("mu-equilibria are enumerated for two-player games")
    if not game.exact:
        raise CapabilityError("mu-equilibria need rational payoffs")
    vecs = _mu_vectors(game, mu)
    exact = all(all_exact(v) for v in vecs)
    vecs_q = [tuple(to_fraction(x) for x in v) for v in vecs]
    vecs_q = [tuple(x / sum(v) for x in v) for v in vecs_q]
    ks = game.action_counts
    rows = [_payoff_rows(game, i) for i in range(2)]
    orders = [weak_orders(k) for k in ks]
    factor_cache: dict = {}
    corner_cache: dict = {}

    def factor(i, own_order, opp_order):
        key = (i, own_order, opp_order)
        if key not in factor_cache:
            eq2, strict = _payoff_order_forms(rows[1 - i], opp_order)
            corners = corner_cache.setdefault((i, own_order), _response_vertices(vecs_q[i], own_order))
            if not _may_meet(corners, eq2, strict):
                factor_cache[key] = None
                return None
            eq1, ge1 = response_polytope_forms(vecs_q[i], own_order)
            if ks[i] <= 3:
                verts = polytope.clip_hull(corners, eq2, strict)
                poly = Polytope(ks[i], tuple(eq1 + eq2), tuple(ge1 + strict), vertices=tuple(verts))
            else:
                poly = Polytope(ks[i], tuple(eq1 + eq2), tuple(ge1 + strict))
            factor_cache[key] = poly if _relatively_strict(poly, strict) else None
        return factor_cache[key]

    if strict_only:
        orders = [[w for w in ws if len(w) == k] for ws, k in zip(orders, ks)]
    out = []
    for w0, w1 in itertools.product(orders[0], orders[1]):
        f0 = factor(0, w0, w1)
        if f0 is None:
            continue
        f1 = factor(1, w1, w0)
        if f1 is None:
            continue
        if not exact:
            f0, f1 = _floatify(f0), _floatify(f1)
        choice = RegionSet.product("choice", [f0, f1])
        color = None
        if all(len(w) == k for w, k in zip((w0, w1), ks)):
            color = RankAssignment(tuple(tuple(b[0] for b in w) for w in (w0, w1)))
        beliefs = _supporting_beliefs(game, (w0, w1), rows)
        out.append(MuEquilibrium(tuple(vecs), choice, beliefs, (w0, w1), color))
    # fixed points on the boundary of a larger record belong to that record
    out = [m for m in out
           if not any(o is not m and o.choice.dimension > m.choice.dimension
                      and all(o.choice.contains(v) for v in m.vertices) for o in out)]
    out.sort(key=lambda m: tuple(float(v) for s in m.profile for v in s))
    return out


def _floatify(poly: Polytope) -> Polytope:
    verts = tuple(tuple(float(v) for v in p) for p in poly.vertices)
    return Polytope(poly.k, poly.eq, poly.ge, vertices=verts)


def _supporting_beliefs(game: Game, orders, rows) -> RegionSet:
    """Beliefs under which every player's payoffs have the fixed point's weak order."""
    factors = []
    for i in range(2):
        eq, strict = _payoff_order_forms(rows[i], orders[i])
        factors.append(Polytope(game.action_counts[1 - i], tuple(eq), tuple(strict)))
    return RegionSet.product("belief", factors)


def is_fixed_point(game: Game, mu, profile: Sequence[Sequence]) -> bool:
    """Direct check that profile lies in rank-mu of its own expected payoffs."""
    vecs = _mu_vectors(game, mu)
    pays = payoff_profile(game, profile)
    return all(rank_mu(p, m).contains(s) for p, m, s in zip(pays, vecs, profile))


# ---------------------------------------------------------------------------
# rho sweeps


@dataclass
class CorrespondenceRecord:
    rho: object
    equilibria: list
    branches: list  # branch id per equilibrium

    @property
    def count(self) -> int:
        return len(self.equilibria)

    @property
    def kinds(self) -> list[str]:
        return [m.kind for m in self.equilibria]


@dataclass
class CorrespondencePath:
    grid: list
    records: list
    branch_labels: dict = field(default_factory=dict)  # branch id -> principal | paired | other
    events: list = field(default_factory=list)

    def principal(self) -> list[tuple]:
        """(rho, profile) along the principal branch."""
        pid = next((b for b, lab in self.branch_labels.items() if lab == "principal"), None)
        out = []
        for rec in self.records:
            for m, b in zip(rec.equilibria, rec.branches):
                if b == pid:
                    out.append((rec.rho, m.profile))
        return out

    def to_dict(self) -> dict:
        return {
            "grid": [_fmt_rho(r) for r in self.grid],
            "records": [{"rho": _fmt_rho(r.rho), "count": r.count,
                         "equilibria": [dict(m.to_dict(), branch=b) for m, b in zip(r.equilibria, r.branches)]}
                        for r in self.records],
            "branches": {str(k): v for k, v in self.branch_labels.items()},
            "events": self.events,
        }


def _fmt_rho(r) -> str:
    return format_rational(r) if isinstance(r, (int, Fraction)) else repr(float(r))


def _flat(profile) -> np.ndarray:
    return np.array([float(v) for s in profile for v in s])


def _gap(a: MuEquilibrium, b: MuEquilibrium) -> float:
    """Distance between the closures of two records (0 when they touch)."""
    va = [_flat(v) for v in a.vertices]
    vb = [_flat(v) for v in b.vertices]
    d = min(polytope.distance_to_hull(v, vb) for v in va)
    return min(d, min(polytope.distance_to_hull(v, va) for v in vb))


def _signature(rec: CorrespondenceRecord) -> tuple:
    return tuple(sorted(rec.kinds))


def _mu_for(game: Game, rho) -> list:
    return [mu_generator(k, rho) for k in game.action_counts]


def sweep_correspondence(game: Game, rho_grid: Sequence, threshold: float = 0.2,
                         refine: bool = True) -> CorrespondencePath:
    """mu-equilibria along a rho grid with nearest-profile branch linking."""
    grid = list(rho_grid)
    if any(float(b) <= float(a) for a, b in zip(grid, grid[1:])):
        raise ValidationError("rho grid must be strictly increasing")
    records: list[CorrespondenceRecord] = []
    next_branch = 0
    for rho in grid:
        eqs = mu_equilibria(game, _mu_for(game, rho))
        branches = []
        prev = records[-1] if records else None
        used = set()
        for m in eqs:
            best, best_d = None, threshold
            if prev is not None:
                for pm, pb in zip(prev.equilibria, prev.branches):
                    d = _gap(m, pm)
                    if d < best_d and pb not in used:
                        best, best_d = pb, d
            if best is None:
                best = next_branch
                next_branch += 1
            used.add(best)
            branches.append(best)
        records.append(CorrespondenceRecord(rho, eqs, branches))
    labels = {}
    start = records[0]
    centre = _flat(tuple(uniform(k) for k in game.action_counts))
    if start.equilibria:
        dists = [float(np.linalg.norm(_flat(m.profile) - centre)) for m in start.equilibria]
        labels[start.branches[int(np.argmin(dists))]] = "principal"
    for rec in records:
        for b in rec.branches:
            labels.setdefault(b, "paired")
    events = []
    for a, b in zip(records, records[1:]):
        if _signature(a) != _signature(b):
            ev = {"between": [_fmt_rho(a.rho), _fmt_rho(b.rho)],
                  "counts": [a.count, b.count], "kinds": [a.kinds, b.kinds]}
            if refine:
                ev["refined"] = _refine_event(game, a, b)
            events.append(ev)
    return CorrespondencePath(grid, records, labels, events)


def _refine_event(game: Game, left: CorrespondenceRecord, right: CorrespondenceRecord, steps: int = 10) -> list:
    """Signatures on a 10x finer grid between two records: (rho, kinds)."""
    lo, hi = left.rho, right.rho
    exact = isinstance(lo, (int, Fraction)) and isinstance(hi, (int, Fraction))
    out = []
    for s in range(1, steps):
        rho = Fraction(lo) + (Fraction(hi) - Fraction(lo)) * Fraction(s, steps) if exact \
            else float(lo) + (float(hi) - float(lo)) * s / steps
        eqs = mu_equilibria(game, _mu_for(game, rho))
        out.append([_fmt_rho(rho), sorted(m.kind for m in eqs)])
    return out


def parse_rho_grid(text: str) -> list:
    """'start:stop:step' (inclusive, exact rationals) or a comma list."""
    if ":" in text:
        a, b, c = (Fraction(p) for p in text.split(":"))
        if c <= 0:
            raise ValidationError("grid step must be positive")
        out, x = [], a
        while x <= b:
            out.append(x)
            x += c
        return [int(v) if v.denominator == 1 else v for v in out]
    return [int(Fraction(p)) if Fraction(p).denominator == 1 else Fraction(p) for p in text.split(",")]


def hausdorff_to(points_a: Sequence, equilibria_b: Sequence[MuEquilibrium]) -> float:
    """max over profiles in A of the distance to the closest closure in B."""
    worst = 0.0
    for p in points_a:
        x = _flat(p)
        best = float("inf")
        for m in equilibria_b:
            verts = [_flat(v) for v in m.vertices]
            best = min(best, polytope.distance_to_hull(tuple(x), [tuple(v) for v in verts]))
        worst = max(worst, best)
    return worst


# ---------------------------------------------------------------------------
# M sets as envelopes of mu-equilibria


@dataclass
class MetaInclusionReport:
    color: RankAssignment
    mu_samples: int
    fixed_points_checked: int
    violations_fixed_points: int
    interior_samples: int
    violations_interior: int

    @property
    def ok(self) -> bool:
        return self.violations_fixed_points == 0 and self.violations_interior == 0

    def to_dict(self) -> dict:
        return {"color": [list(o) for o in self.color.orderings], "mu_samples": self.mu_samples,
                "fixed_points_checked": self.fixed_points_checked,
                "violations_fixed_points": self.violations_fixed_points,
                "interior_samples": self.interior_samples,
                "violations_interior": self.violations_interior}


def _as_pair_color(color: RankAssignment) -> RankAssignment:
    if color.symmetric:
        return RankAssignment((color.orderings[0], color.orderings[0]))
    return color


def verify_meta_inclusion(game: Game, color: RankAssignment, mu_samples: int = 500, seed: int = 0,
                          meqs: Sequence[MEquilibrium] | None = None) -> MetaInclusionReport:
    """Both directions of the envelope relation for one color.

    Direction 1: for random strictly ordered mu, every mu-equilibrium whose
    own strict order is `color` lies (with its supporting beliefs) in the
    closure of the M-equilibrium of that color.  Direction 2: interior
    choice points s of that M-equilibrium are fixed points of rank-mu with
    mu = s.
    """
    pair_color = _as_pair_color(color)
    if meqs is None:
        meqs = enumerate_m_equilibria(game, markers=False)
    target = next((m for m in meqs if m.color == pair_color), None)
    if target is None:
        raise ValidationError("color has no colorable M-equilibrium")
    rng = np.random.default_rng(seed)
    ks = game.action_counts
    checked = bad1 = 0
    for _ in range(mu_samples):
        vecs = []
        for k in ks:
            raw = rng.integers(1, 10**6, size=k)
            while len(set(raw.tolist())) < k:
                raw = rng.integers(1, 10**6, size=k)
            tot = int(raw.sum())
            vecs.append(tuple(Fraction(int(v), tot) for v in raw))
        if color.symmetric:
            vecs = [vecs[0], vecs[0]]
        for eq in mu_equilibria(game, vecs, strict_only=True):
            if eq.color != pair_color:
                continue
            checked += 1
            prof = eq.profile
            res = membership(game, prof, [prof[1], prof[0]])
            belief_pt = tuple(f.interior_point() for f in eq.belief_set.pieces[0])
            inside = target.contains(prof, belief_pt) and res.member
            bad1 += int(not inside)
    pts = target.choice_set.sample(rng, mu_samples)
    bad2 = 0
    for prof in pts:
        pays = payoff_profile(game, [tuple(s) for s in prof])
        ok = all(rank_mu(p, s).contains(s, 1e-9) for p, s in zip(pays, prof))
        bad2 += int(not ok)
    return MetaInclusionReport(color, mu_samples, checked, bad1, len(pts), bad2)
