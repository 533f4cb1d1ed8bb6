"""M-equilibrium choice and belief sets.

A colorable M-equilibrium is indexed by a rank assignment: one strict
ordering of every player's actions.  For two players its choice set is a
product of polytopes: player i's factor collects the mixed strategies whose
own weights are ordered as r_i and against which the opponent's expected
payoffs are ordered as r_j.  Belief factors hold the beliefs under which the
player's own expected payoffs are ordered as r_i.

Lower-dimensional (tie) M-equilibria of two-player games are found from the
cell decomposition of each simplex cut by the facet, equal-weight and
payoff-indifference lines.  Games with three or more players are handled by
Monte Carlo sampling.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .arrangement import Arrangement
from .errors import CapabilityError, ShapeError, ValidationError
from .game import (Game, belief_row, expected_payoffs, format_ordering, payoff_profile, rank_vector,
                   uniform, weak_order)
from .nash import all_nash_points, make_point, symmetric_nash
from .numeric import EPS_TIE, all_exact, compare, format_rational, to_fraction
from .polytope import order_polygon
from .regions import Polytope, RegionSet

DEFAULT_SAMPLES = 100_000
Ordering = tuple


# ---------------------------------------------------------------------------
# colors


@dataclass(frozen=True, order=True)
class RankAssignment:
    """One strict ordering per player, lowest-ranked action first.

    Symmetric assignments carry a single ordering shared by every player.
    """

    orderings: tuple
    symmetric: bool = False

    def __post_init__(self):
        object.__setattr__(self, "orderings", tuple(tuple(int(a) for a in o) for o in self.orderings))
        for o in self.orderings:
            if sorted(o) != list(range(len(o))):
                raise ValidationError(f"{o} is not a permutation")

    @classmethod
    def all(cls, action_counts: Sequence[int], symmetric: bool = False) -> list["RankAssignment"]:
        if symmetric:
            return [cls((p,), True) for p in itertools.permutations(range(action_counts[0]))]
        return [cls(tuple(c)) for c in itertools.product(*[itertools.permutations(range(k)) for k in action_counts])]

    def ordering(self, player: int) -> tuple:
        return self.orderings[0] if self.symmetric else self.orderings[player]

    @property
    def rank_vectors(self) -> tuple:
        return tuple(rank_vector(o) for o in self.orderings)

    def label(self, labels: Sequence[Sequence[str]] | None = None) -> str:
        parts = []
        for i, o in enumerate(self.orderings):
            parts.append(format_ordering(o, None if labels is None else labels[i]))
        return " | ".join(parts)

    def to_dict(self, labels=None) -> dict:
        return {"orderings": [list(o) for o in self.orderings], "symmetric": self.symmetric,
                "label": self.label(labels),
                "rank_vectors": [[format_rational(v) for v in r] for r in self.rank_vectors]}


@dataclass(frozen=True)
class BoundaryMarker:
    point: tuple
    kind: str  # "nash" or "uniform"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "point": [[format_rational(v) for v in x] for x in self.point]}


@dataclass
class MEquilibrium:
    choice_set: RegionSet
    belief_set: RegionSet
    colorable: bool
    color: RankAssignment | None = None
    components: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return self.choice_set.dimension

    @property
    def boundary_markers(self) -> list:
        return self.choice_set.boundary_markers

    def contains(self, choice: Sequence[Sequence], belief: Sequence[Sequence] | None = None) -> bool:
        """Closure membership of a choice point (and belief point, if given),
        both listed per factor."""
        if not self.choice_set.contains(choice):
            return False
        return belief is None or self.belief_set.contains(belief)

    def to_dict(self, labels=None) -> dict:
        return {
            "color": None if self.color is None else self.color.to_dict(labels),
            "colorable": self.colorable,
            "dimension": self.dimension,
            "choice_set": self.choice_set.to_dict(),
            "belief_set": self.belief_set.to_dict(),
            "components": len(self.components) if self.components else 1,
        }


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    color: RankAssignment | None
    boundary: bool


# ---------------------------------------------------------------------------
# linear forms of a two-player game


def _payoff_rows(game: Game, player: int) -> list[tuple]:
    """Coefficient vectors (over the opponent's actions) of player's payoffs."""
    mat = game.payoffs[player]
    k = game.action_counts[player]
    return [tuple(to_fraction(v) for v in (mat[a, :] if player == 0 else mat[:, a])) for a in range(k)]


def _diff(u, v) -> tuple:
    return tuple(x - y for x, y in zip(u, v))


def _unit(k: int, a: int) -> tuple:
    return tuple(Fraction(int(j == a)) for j in range(k))


def _order_forms(vectors: Sequence[tuple], ordering: Ordering) -> list[tuple]:
    """Forms v[o[p+1]] - v[o[p]] >= 0 placing `ordering` lowest first."""
    return [_diff(vectors[b], vectors[a]) for a, b in zip(ordering, ordering[1:])]


def _require_exact_pair(game: Game) -> None:
    if game.num_players != 2:
        raise CapabilityError("exact M-set computation needs a two-player game; use sampled mode")
    if not game.exact:
        raise CapabilityError("exact mode needs rational payoffs")


def _choice_factor(game: Game, player: int, color: RankAssignment, symmetric: bool) -> Polytope:
    """Strategies of `player` ordered as its color whose induced opponent
    payoffs are ordered as the opponent's color."""
    k = game.action_counts[player]
    own = _order_forms([_unit(k, a) for a in range(k)], color.ordering(player))
    opp = 1 - player
    rows = _payoff_rows(game, opp)
    return Polytope(k, (), tuple(own + _order_forms(rows, color.ordering(opp))))


def _belief_factor(game: Game, player: int, color: RankAssignment) -> Polytope:
    k_opp = game.action_counts[1 - player]
    rows = _payoff_rows(game, player)
    return Polytope(k_opp, (), tuple(_order_forms(rows, color.ordering(player))))


def _strictly_inside(poly: Polytope) -> bool:
    if poly.empty or poly.dimension != poly.k - 1:
        return False
    x = poly.interior_point()
    return all(sum(a * v for a, v in zip(form, x)) > 0 for form in poly.ge)


# ---------------------------------------------------------------------------
# exact enumeration


class _CellModel:
    """Per-factor arrangements with the sign data needed by the M conditions."""

    def __init__(self, game: Game, symmetric: bool):
        self.game = game
        self.symmetric = symmetric
        ks = game.action_counts
        self.players = [0] if symmetric else [0, 1]
        self.nf = 1 if symmetric else 2
        self.own_factor = [0, 0] if symmetric else [0, 1]
        self.pay_factor = [0, 0] if symmetric else [1, 0]
        self.k = [ks[0]] if symmetric else list(ks)
        self.factors = []
        for f in range(self.nf):
            k = self.k[f]
            forms = {("facet", a): _unit(k, a) for a in range(k)}
            for a, b in itertools.combinations(range(k), 2):
                forms[("wall", a, b)] = _diff(_unit(k, a), _unit(k, b))
            # payoffs of the player whose payoff depends on this factor
            payer = 0 if symmetric else 1 - f
            rows = _payoff_rows(game, payer)
            for a, b in itertools.combinations(range(len(rows)), 2):
                forms[("pay", a, b)] = _diff(rows[a], rows[b])
            self.factors.append(Arrangement(k, forms))
        self.belief_arr = []
        for p in self.players:
            rows = _payoff_rows(game, p)
            k_b = len(rows[0])
            forms = {("facet", a): _unit(k_b, a) for a in range(k_b)}
            for a, b in itertools.combinations(range(len(rows)), 2):
                forms[("pay", a, b)] = _diff(rows[a], rows[b])
            self.belief_arr.append(Arrangement(k_b, forms))
        self._sig_cache = {}

    # sign signatures ------------------------------------------------------
    def own_sig(self, f: int, ci: int):
        key = ("own", f, ci)
        if key not in self._sig_cache:
            arr = self.factors[f]
            cell = arr.cells[ci]
            k = arr.k
            pos = tuple(arr.sign(cell, ("facet", a)) for a in range(k))
            wall = tuple(arr.sign(cell, ("wall", a, b)) for a, b in itertools.combinations(range(k), 2))
            self._sig_cache[key] = (pos, wall)
        return self._sig_cache[key]

    def pay_sig(self, f: int, ci: int):
        key = ("pay", f, ci)
        if key not in self._sig_cache:
            arr = self.factors[f]
            cell = arr.cells[ci]
            k = self.game.action_counts[0 if self.symmetric else 1 - f]
            self._sig_cache[key] = tuple(arr.sign(cell, ("pay", a, b)) for a, b in itertools.combinations(range(k), 2))
        return self._sig_cache[key]

    def belief_sig(self, p: int, bi: int):
        arr = self.belief_arr[p]
        cell = arr.cells[bi]
        k = self.game.action_counts[p]
        return tuple(arr.sign(cell, ("pay", a, b)) for a, b in itertools.combinations(range(k), 2))

    @staticmethod
    def _pair_ok(pos, first, second, k) -> bool:
        for idx, (a, b) in enumerate(itertools.combinations(range(k), 2)):
            s, t = first[idx], second[idx]
            if t == 0 or s * t > 0 or (pos[a] == 0 and pos[b] == 0):
                continue
            return False
        return True

    def line1_ok(self, prod: tuple, p: int) -> bool:
        pos, wall = self.own_sig(self.own_factor[p], prod[self.own_factor[p]])
        t = self.pay_sig(self.pay_factor[p], prod[self.pay_factor[p]])
        return self._pair_ok(pos, wall, t, len(pos))

    def line2_ok(self, prod: tuple, p: int, bi: int) -> bool:
        pos, _ = self.own_sig(self.own_factor[p], prod[self.own_factor[p]])
        t = self.pay_sig(self.pay_factor[p], prod[self.pay_factor[p]])
        return self._pair_ok(pos, t, self.belief_sig(p, bi), len(pos))

    def has_tie(self, prod: tuple) -> bool:
        return any(0 in self.pay_sig(self.pay_factor[p], prod[self.pay_factor[p]]) for p in self.players)

    # geometry --------------------------------------------------------------
    def cell(self, f: int, ci: int):
        return self.factors[f].cells[ci]

    def dim(self, prod: tuple) -> int:
        return sum(self.cell(f, c).dim for f, c in enumerate(prod))

    def face_of(self, small: tuple, big: tuple) -> bool:
        return all(self.factors[f].conformal(self.cell(f, small[f]).signs, self.cell(f, big[f]).signs)
                   for f in range(self.nf))

    def touching(self, a: tuple, b: tuple) -> bool:
        return all(self.cell(f, a[f]).vertices & self.cell(f, b[f]).vertices for f in range(self.nf))

    def polytope(self, arr: Arrangement, cell) -> Polytope:
        eq, ge = arr.closure_forms(cell)
        return Polytope(arr.k, tuple(eq), tuple(ge), vertices=tuple(arr.cell_vertices(cell)))

    def valid_products(self) -> list[tuple]:
        ranges = [range(len(a.cells)) for a in self.factors]
        return [prod for prod in itertools.product(*ranges)
                if all(self.line1_ok(prod, p) for p in self.players)]


def _maximal(model: _CellModel, cells: list[tuple]) -> list[tuple]:
    return [c for c in cells if not any(d != c and model.face_of(c, d) for d in cells)]


def _connected_components(model: _CellModel, cells: list[tuple]) -> list[list[tuple]]:
    remaining = set(cells)
    comps = []
    while remaining:
        seed = min(remaining)
        remaining.discard(seed)
        stack, comp = [seed], [seed]
        while stack:
            cur = stack.pop()
            near = [c for c in remaining if model.touching(cur, c)]
            for c in near:
                remaining.discard(c)
                stack.append(c)
                comp.append(c)
        comps.append(sorted(comp))
    return comps


def _spaces(symmetric: bool) -> tuple[str, str]:
    return ("symmetric-choice", "symmetric-belief") if symmetric else ("choice", "belief")


def _union_region(space: str, pieces: list[tuple], color=None, full_dims: tuple | None = None) -> RegionSet:
    dims = [sum(f.dimension for f in piece) for piece in pieces]
    dim = max(dims) if dims else -1
    measure = Fraction(0)
    if full_dims is not None and dim == sum(full_dims):
        for piece, d in zip(pieces, dims):
            if d == dim:
                m = Fraction(1)
                for f in piece:
                    m *= f.measure
                measure += m
    sizes = tuple(f.k for f in pieces[0]) if pieces else ()
    return RegionSet(space=space, color=color, pieces=list(pieces), dimension=dim, measure=measure,
                     factor_sizes=sizes)


def _degenerate_equilibria(model: _CellModel, colorable_cells: list[tuple]) -> list[MEquilibrium]:
    valid = model.valid_products()
    candidates = [c for c in valid
                  if model.has_tie(c) or not any(model.face_of(c, big) for big in colorable_cells)]
    out = []
    choice_space, belief_space = _spaces(model.symmetric)
    full = tuple(k - 1 for k in model.k)
    for comp in _connected_components(model, candidates):
        if all(any(model.face_of(c, big) for big in colorable_cells) for c in comp):
            continue
        essential = _maximal(model, comp)
        pieces = [tuple(model.polytope(model.factors[f], model.cell(f, c[f])) for f in range(model.nf))
                  for c in essential]
        choice = _union_region(choice_space, pieces, full_dims=full)
        warnings = []
        per_player = []
        for p in model.players:
            barr = model.belief_arr[p]
            allowed = [bi for bi in range(len(barr.cells)) if all(model.line2_ok(c, p, bi) for c in essential)]
            if not allowed:
                warnings.append("no common supporting belief across the component; union reported")
                allowed = [bi for bi in range(len(barr.cells)) if any(model.line2_ok(c, p, bi) for c in essential)]
            cells = [barr.cells[bi] for bi in allowed]
            top = [c for c in cells if not any(d is not c and barr.conformal(c.signs, d.signs) for d in cells)]
            per_player.append([model.polytope(barr, c) for c in top])
        belief_pieces = [tuple(combo) for combo in itertools.product(*per_player)]
        belief = _union_region(belief_space, belief_pieces)
        belief.warnings.extend(warnings)
        comps = [[tuple(model.polytope(model.factors[f], model.cell(f, c[f])) for f in range(model.nf))] for c in essential]
        out.append(MEquilibrium(choice_set=choice, belief_set=belief, colorable=False, color=None,
                                components=comps))
    return out


def _colorable_equilibria(game: Game, symmetric: bool) -> list[MEquilibrium]:
    out = []
    choice_space, belief_space = _spaces(symmetric)
    players = [0] if symmetric else [0, 1]
    for color in RankAssignment.all(game.action_counts, symmetric):
        factors = [_choice_factor(game, p, color, symmetric) for p in players]
        if not all(_strictly_inside(f) for f in factors):
            continue
        beliefs = [_belief_factor(game, p, color) for p in players]
        choice = RegionSet.product(choice_space, factors, color)
        belief = RegionSet.product(belief_space, beliefs, color)
        out.append(MEquilibrium(choice_set=choice, belief_set=belief, colorable=True, color=color,
                                components=[list(choice.pieces)]))
    return out


def _colorable_cells(model: _CellModel, meqs: list[MEquilibrium]) -> list[tuple]:
    """Full-dimensional cells matching each colorable choice set."""
    cells = []
    for m in meqs:
        point = m.choice_set.interior_point()
        prod = tuple(model.factors[f].cells.index(model.factors[f].locate(point[f])) for f in range(model.nf))
        cells.append(prod)
    return cells


def _nash_markers(game: Game, symmetric: bool) -> list[BoundaryMarker]:
    if symmetric and game.num_players == 2:
        points, _ = symmetric_nash(game)
        marks = [BoundaryMarker((p.profile[0],), "nash") for p in points]
        marks.append(BoundaryMarker((uniform(game.action_counts[0]),), "uniform"))
        return marks
    points = all_nash_points(game)
    if symmetric:
        sym = [p.profile[0] for p in points if all(x == p.profile[0] for x in p.profile)]
        marks = [BoundaryMarker((x,), "nash") for x in sym]
        marks.append(BoundaryMarker((uniform(game.action_counts[0]),), "uniform"))
        return marks
    marks = [BoundaryMarker(p.profile, "nash") for p in points]
    marks.append(BoundaryMarker(tuple(uniform(k) for k in game.action_counts), "uniform"))
    return marks


def boundary_markers(game: Game, meq: MEquilibrium) -> list[BoundaryMarker]:
    """Nash points and the uniform profile lying in the closure of the choice set."""
    symmetric = meq.choice_set.space.startswith("symmetric")
    out = []
    for mark in _nash_markers(game, symmetric):
        if meq.choice_set.representation == "sampled":
            if _sampled_marker_hit(game, meq, mark):
                out.append(mark)
        elif meq.choice_set.contains(mark.point):
            out.append(mark)
    return out


def _check_symmetric(game: Game) -> None:
    if not game.symmetric:
        raise ValidationError("symmetric mode requires a symmetric game")


def enumerate_m_equilibria(game: Game, symmetric: bool = False, mode: str = "exact",
                           samples: int = DEFAULT_SAMPLES, seed: int | None = None,
                           markers: bool = True) -> list[MEquilibrium]:
    """All M-equilibria of `game`: colorable sets first (one per color), then
    lower-dimensional tie components (exact mode only)."""
    if symmetric:
        _check_symmetric(game)
    if mode == "sampled":
        result = _sampled_equilibria(game, symmetric, samples, seed)
    elif mode == "exact":
        _require_exact_pair(game)
        result = _exact_equilibria(game, symmetric)
    else:
        raise ValidationError(f"unknown mode '{mode}'")
    if markers:
        for m in result:
            m.choice_set.boundary_markers = boundary_markers(game, m)
    return result


def _exact_equilibria(game: Game, symmetric: bool) -> list[MEquilibrium]:
    colorable = _colorable_equilibria(game, symmetric)
    model = _CellModel(game, symmetric)
    degenerate = _degenerate_equilibria(model, _colorable_cells(model, colorable))
    degenerate.sort(key=lambda m: (m.dimension, [f.vertices for f in m.choice_set.pieces[0]]))
    return colorable + degenerate


def choice_set(game: Game, color: RankAssignment, symmetric: bool = False) -> RegionSet:
    """Closure of the colorable choice set of `color` (possibly empty)."""
    _require_exact_pair(game)
    players = [0] if symmetric else [0, 1]
    factors = [_choice_factor(game, p, color, symmetric) for p in players]
    space = "symmetric-choice" if symmetric else "choice"
    if not all(_strictly_inside(f) for f in factors):
        return RegionSet(space=space, color=color, pieces=[], measure=Fraction(0))
    return RegionSet.product(space, factors, color)


def belief_set(game: Game, color: RankAssignment, symmetric: bool | None = None, mode: str = "exact",
               samples: int = DEFAULT_SAMPLES, seed: int | None = None) -> RegionSet:
    """Beliefs under which every player's expected payoffs are ordered as the color."""
    symmetric = color.symmetric if symmetric is None else symmetric
    if mode == "sampled" or game.num_players != 2:
        return _sampled_beliefs(game, color, symmetric, samples, seed)
    _require_exact_pair(game)
    players = [0] if symmetric else [0, 1]
    space = "symmetric-belief" if symmetric else "belief"
    return RegionSet.product(space, [_belief_factor(game, p, color) for p in players], color)


def colorability(meq: MEquilibrium) -> bool:
    """Full affine dimension and a single strict rank assignment inside."""
    if meq.choice_set.representation == "sampled":
        return meq.color is not None and meq.choice_set.measure > 0
    full = sum(k - 1 for k in meq.choice_set.factor_sizes)
    if meq.choice_set.dimension != full or len(meq.choice_set.pieces) != 1:
        return False
    point = meq.choice_set.interior_point()
    return all(len(weak_order(x)) == len(x) for x in point)


def measure(region: RegionSet, samples: int = 0, seed: int | None = None) -> tuple:
    """(value, standard error).  Exact regions report their rational volume
    fraction; sampled regions are re-estimated by uniform simplex sampling."""
    if region.representation == "exact":
        if region.empty:
            return Fraction(0), 0.0
        return region.measure, 0.0
    if samples <= 0:
        return region.measure, region.std_error or 0.0
    rng = np.random.default_rng(seed)
    batch = [rng.dirichlet(np.ones(k), size=samples) for k in region.factor_sizes]
    hits = np.asarray(region.predicate(batch), dtype=bool)
    p = float(hits.mean())
    return p, float(np.sqrt(p * (1 - p) / samples))


# ---------------------------------------------------------------------------
# pointwise membership


def _normalise_choice(game: Game, choice: Sequence[Sequence]) -> list[tuple]:
    if len(choice) != game.num_players:
        raise ShapeError(f"choice must list {game.num_players} strategies")
    out = []
    for x, k in zip(choice, game.action_counts):
        if len(x) != k:
            raise ShapeError("strategy length does not match the action count")
        out.append(tuple(x))
    return out


def _ordering_of(weights, payoffs, eps) -> tuple | None:
    pay_blocks = weak_order(payoffs, eps)
    if len(pay_blocks) == len(payoffs):
        return tuple(b[0] for b in pay_blocks)
    own_blocks = weak_order(weights, eps)
    if len(own_blocks) == len(weights):
        return tuple(b[0] for b in own_blocks)
    return None


def membership(game: Game, choice: Sequence[Sequence], belief: Sequence, definition: int = 2,
               eps: float = EPS_TIE) -> MembershipResult:
    """Evaluate the M conditions at one (choice, belief) pair.

    `belief[i]` is player i's belief: the opponent's vector in two-player
    games, else one vector per player with the own slot ignored.
    """
    choice = _normalise_choice(game, choice)
    n = game.num_players
    if len(belief) != n:
        raise ShapeError(f"belief must list {n} entries")
    correct = payoff_profile(game, choice)
    believed = [expected_payoffs(game, i, belief_row(game, i, belief[i])) for i in range(n)]
    member, boundary = True, False
    orderings = []
    for i in range(n):
        sig, pc, pb = choice[i], correct[i], believed[i]
        k = len(sig)
        if definition == 2:
            for a, b in itertools.permutations(range(k), 2):
                s = compare(sig[a], sig[b], eps)
                t = compare(pc[a], pc[b], eps)
                u = compare(pb[a], pb[b], eps)
                pos = compare(sig[a], 0, eps)
                if s * t <= 0:
                    if pos == 0 or t == 0:
                        boundary = True
                    else:
                        member = False
                if t * u <= 0:
                    if pos == 0 or u == 0:
                        boundary = True
                    else:
                        member = False
        elif definition == 1:
            if weak_order(pb, eps) != weak_order(pc, eps):
                member = False
            for a, b in itertools.permutations(range(k), 2):
                if compare(pb[a], pb[b], eps) > 0 and compare(sig[a], sig[b], eps) <= 0:
                    member = False
            if len(weak_order(pc, eps)) < k or len(weak_order(sig, eps)) < k:
                boundary = True
        else:
            raise ValidationError("definition must be 1 or 2")
        orderings.append(_ordering_of(sig, pc, eps))
    color = None
    if member and all(o is not None for o in orderings):
        color = RankAssignment(tuple(orderings))
    return MembershipResult(member, color, boundary)


def strict_member(game: Game, choice: Sequence[Sequence], belief: Sequence, eps: float = EPS_TIE) -> bool:
    """Membership with every condition holding through its strict branch."""
    res = membership(game, choice, belief, 2, eps)
    return res.member and not res.boundary


def _factor_points(choice, belief, symmetric: bool):
    if symmetric:
        return (tuple(choice[0]),), (tuple(belief[0]),)
    return tuple(tuple(x) for x in choice), tuple(tuple(b) for b in belief)


def in_closure(meqs: Sequence[MEquilibrium], choice, belief) -> bool:
    """Does some M-equilibrium's closure contain both the choice and belief points?"""
    for m in meqs:
        symmetric = m.choice_set.space.startswith("symmetric")
        if symmetric and (tuple(choice[0]) != tuple(choice[1]) or tuple(belief[0]) != tuple(belief[1])):
            continue
        c, b = _factor_points(choice, belief, symmetric)
        if m.contains(c, b):
            return True
    return False


# ---------------------------------------------------------------------------
# sampled mode


def batch_payoffs(game: Game, player: int, sigmas: Sequence[np.ndarray]) -> np.ndarray:
    """Expected payoffs of `player` for S profiles at once; sigmas[j] is (S, K_j)."""
    tensor = game.float_payoffs[player]
    s = next(x.shape[0] for j, x in enumerate(sigmas) if j != player and x is not None)
    out = np.broadcast_to(tensor, (s,) + tensor.shape)
    for j in reversed(range(game.num_players)):
        if j == player:
            continue
        out = np.einsum("s...k,sk->s...", np.moveaxis(out, j + 1, -1), sigmas[j])
    return out


def _profiles_for(game: Game, player: int, vectors: Sequence[np.ndarray], symmetric: bool) -> list:
    if symmetric:
        return [vectors[0]] * game.num_players
    return list(vectors)


def _sampled_predicate(game: Game, color: RankAssignment, symmetric: bool, eps: float = EPS_TIE):
    n = game.num_players
    players = [0] if symmetric else list(range(n))
    target = [kernels.code_from_ordering(color.ordering(p)) for p in players]

    def predicate(batch):
        ok = np.ones(batch[0].shape[0], dtype=bool)
        for idx, p in enumerate(players):
            sig = _profiles_for(game, p, batch, symmetric)
            own = batch[0] if symmetric else batch[p]
            ok &= kernels.order_codes(own, eps) == target[idx]
            ok &= kernels.order_codes(batch_payoffs(game, p, sig), eps) == target[idx]
        return ok
    return predicate


def _belief_predicate(game: Game, color: RankAssignment, symmetric: bool, eps: float = EPS_TIE):
    """Belief factors: factor p holds player p's belief (symmetric: one vector
    used for every opponent; otherwise a two-player opponent vector)."""
    n = game.num_players
    players = [0] if symmetric else list(range(n))

    def predicate(batch):
        ok = np.ones(batch[0].shape[0], dtype=bool)
        for idx, p in enumerate(players):
            vec = batch[idx]
            sig = [vec] * n if symmetric else [vec if j == 1 - p else None for j in range(n)]
            code = kernels.code_from_ordering(color.ordering(p))
            ok &= kernels.order_codes(batch_payoffs(game, p, sig), eps) == code
        return ok
    return predicate


def _gap_components(points: np.ndarray, rng: np.random.Generator, limit: int = 1500) -> int:
    """Single-linkage clusters after cutting gaps > 10x the median NN distance."""
    if len(points) < 3:
        return 1
    pts = points if len(points) <= limit else points[rng.choice(len(points), limit, replace=False)]
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, np.inf)
    nn = d.min(axis=1)
    cut = 10 * float(np.median(nn))
    adj = d <= cut
    label = -np.ones(len(pts), dtype=int)
    comps = 0
    for start in range(len(pts)):
        if label[start] >= 0:
            continue
        stack = [start]
        label[start] = comps
        while stack:
            cur = stack.pop()
            for nxt in np.nonzero(adj[cur] & (label < 0))[0]:
                label[nxt] = comps
                stack.append(int(nxt))
        comps += 1
    sizes = np.bincount(label)
    return int((sizes >= max(3, 0.01 * len(pts))).sum())


def _sampled_equilibria(game: Game, symmetric: bool, samples: int, seed: int | None) -> list[MEquilibrium]:
    if seed is None:
        raise ValidationError("sampled mode requires a seed")
    n = game.num_players
    ks = game.action_counts
    root = np.random.SeedSequence(seed)
    choice_seq, belief_seq, gap_seq = root.spawn(3)
    rng = np.random.default_rng(choice_seq)
    players = [0] if symmetric else list(range(n))
    if symmetric:
        draws = [rng.dirichlet(np.ones(ks[0]), size=samples)]
    else:
        draws = [rng.dirichlet(np.ones(k), size=samples) for k in ks]
    codes = []
    for p in players:
        own = draws[0] if symmetric else draws[p]
        sig = _profiles_for(game, p, draws, symmetric)
        c_own = kernels.order_codes(own, EPS_TIE)
        c_pay = kernels.order_codes(batch_payoffs(game, p, sig), EPS_TIE)
        codes.append(np.where(c_own == c_pay, c_own, -1))
    codes = np.stack(codes, axis=1)
    good = (codes >= 0).all(axis=1)
    keys, counts = np.unique(codes[good], axis=0, return_counts=True) if good.any() else (np.empty((0, len(players))), [])
    brng = np.random.default_rng(belief_seq)
    grng = np.random.default_rng(gap_seq)
    belief_draws = _belief_draws(game, symmetric, samples, brng)
    out = []
    flat = np.concatenate(draws, axis=1)
    choice_space, belief_space = _spaces(symmetric)
    sizes = tuple(ks[p] for p in players) if symmetric else tuple(ks)
    for key, count in zip(keys, counts):
        orderings = tuple(kernels.ordering_from_code(int(c), ks[p]) for c, p in zip(key, players))
        color = RankAssignment(orderings, symmetric)
        mask = good & (codes == key).all(axis=1)
        pts = flat[mask]
        p_hat = count / samples
        choice = RegionSet(space=choice_space, color=color, representation="sampled",
                           dimension=sum(k - 1 for k in sizes), measure=float(p_hat),
                           std_error=float(np.sqrt(p_hat * (1 - p_hat) / samples)), points=pts,
                           predicate=_sampled_predicate(game, color, symmetric), factor_sizes=sizes)
        n_comp = _gap_components(pts, grng)
        if n_comp > 1:
            choice.warnings.append(f"sample cloud splits into {n_comp} clusters (possible disconnected set)")
        belief = _sampled_belief_region(game, color, symmetric, belief_draws)
        out.append(MEquilibrium(choice_set=choice, belief_set=belief, colorable=True, color=color,
                                components=[None] * n_comp))
    return out


def _belief_draws(game: Game, symmetric: bool, samples: int, rng: np.random.Generator) -> list:
    """Per belief factor, sampled belief vectors and the induced payoff codes."""
    n = game.num_players
    ks = game.action_counts
    out = []
    for p in ([0] if symmetric else range(n)):
        if symmetric:
            vec = rng.dirichlet(np.ones(ks[0]), size=samples)
            sig = [vec] * n
            pts = vec
        elif n == 2:
            vec = rng.dirichlet(np.ones(ks[1 - p]), size=samples)
            sig = [vec if j == 1 - p else None for j in range(n)]
            pts = vec
        else:
            sig = [None if j == p else rng.dirichlet(np.ones(ks[j]), size=samples) for j in range(n)]
            pts = np.concatenate([s for s in sig if s is not None], axis=1)
        out.append((pts, kernels.order_codes(batch_payoffs(game, p, sig), EPS_TIE)))
    return out


def _sampled_belief_region(game: Game, color: RankAssignment, symmetric: bool, draws) -> RegionSet:
    players = [0] if symmetric else list(range(game.num_players))
    fracs, ses, factor_pts = [], [], []
    for idx, p in enumerate(players):
        pts, codes = draws[idx]
        hit = codes == kernels.code_from_ordering(color.ordering(p))
        q = float(hit.mean())
        fracs.append(q)
        ses.append(float(np.sqrt(q * (1 - q) / len(codes))))
        factor_pts.append(pts[hit])
    value = float(np.prod(fracs))
    rel = np.sqrt(sum((s / f) ** 2 for s, f in zip(ses, fracs) if f > 0))
    sizes = tuple(pts.shape[1] for pts, _ in draws)
    region = RegionSet(space="symmetric-belief" if symmetric else "belief", color=color,
                       representation="sampled", dimension=sum(k - 1 for k in sizes), measure=value,
                       std_error=float(value * rel), factor_sizes=sizes, factor_points=factor_pts,
                       points=factor_pts[0],
                       predicate=_belief_predicate(game, color, symmetric) if (symmetric or game.num_players == 2) else None)
    region.warnings.append("per-factor measures: " + ", ".join(f"{f:.6g}" for f in fracs))
    return region


def _sampled_beliefs(game: Game, color: RankAssignment, symmetric: bool, samples: int, seed) -> RegionSet:
    if seed is None:
        raise ValidationError("sampled mode requires a seed")
    rng = np.random.default_rng(seed)
    return _sampled_belief_region(game, color, symmetric, _belief_draws(game, symmetric, samples, rng))


def _sampled_marker_hit(game: Game, meq: MEquilibrium, mark: BoundaryMarker, radius: float = 0.05) -> bool:
    """A marker belongs to a sampled set when its orders are weakly those of
    the color and the cloud comes within `radius` of it."""
    if meq.color is None or meq.choice_set.points is None or not len(meq.choice_set.points):
        return False
    symmetric = meq.color.symmetric
    n = game.num_players
    profile = [mark.point[0]] * n if symmetric else list(mark.point)
    for p in ([0] if symmetric else range(n)):
        order = meq.color.ordering(p)
        pays = expected_payoffs(game, p, profile)
        own = profile[p]
        for a, b in zip(order, order[1:]):
            if compare(pays[b], pays[a]) < 0 or compare(own[b], own[a]) < 0:
                return False
    flat = np.concatenate([np.asarray([float(v) for v in x]) for x in mark.point])
    return float(np.min(np.linalg.norm(meq.choice_set.points - flat, axis=1))) <= radius


# ---------------------------------------------------------------------------
# behavioral stability


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    failures: int
    trials: int
    fast_path: bool
    margin: float | None = None

    def to_dict(self) -> dict:
        return {"stable": self.stable, "failures": self.failures, "trials": self.trials,
                "fast_path": self.fast_path, "margin": self.margin}


def strict_margin(game: Game, choice, belief) -> float | None:
    """Smallest payoff gap among conditions met through a strict branch, or
    None when some condition relies on a payoff tie among supported actions."""
    n = game.num_players
    correct = payoff_profile(game, choice)
    believed = [expected_payoffs(game, i, belief_row(game, i, belief[i])) for i in range(n)]
    gaps = []
    for i in range(n):
        sig, pc, pb = choice[i], correct[i], believed[i]
        for a, b in itertools.combinations(range(len(sig)), 2):
            if compare(sig[a], 0) == 0 and compare(sig[b], 0) == 0:
                continue
            if compare(pc[a], pc[b]) == 0 or compare(pb[a], pb[b]) == 0:
                return None
            gaps.append(abs(float(pc[a]) - float(pc[b])))
            gaps.append(abs(float(pb[a]) - float(pb[b])))
    return min(gaps) if gaps else float("inf")


def _perturbed(game: Game, epsilon: Fraction, rng: np.random.Generator, grid: int = 10**6) -> Game:
    pays = []
    for t in game.payoffs:
        steps = rng.integers(-grid, grid + 1, size=t.shape)
        noise = np.vectorize(lambda s: epsilon * Fraction(int(s), grid), otypes=[object])(steps)
        pays.append(t + noise)
    return game.with_payoffs(pays, name=f"{game.name}~")


def behavioral_stability(game: Game, choice, belief, epsilon=Fraction(1, 100), trials: int = 1000,
                         seed: int | None = 0, max_failures: int | None = None,
                         fast_path: bool = True) -> StabilityReport:
    """Sampled test of membership under payoff perturbations of size epsilon.

    A perturbed game passes when the profile is a strict M-equilibrium member
    or lies in the closure of one of its M-equilibria (exact two-player
    enumeration).  The fast path certifies stability outright when every
    strict gap exceeds epsilon times the number of opponent action profiles;
    `fast_path=False` runs the trials regardless.
    """
    res = membership(game, choice, belief)
    if not res.member:
        raise ValidationError("profile is not an M-equilibrium member of the unperturbed game")
    eps = to_fraction(str(epsilon)) if isinstance(epsilon, float) else to_fraction(epsilon)
    cells = max(int(np.prod([k for j, k in enumerate(game.action_counts) if j != i])) for i in range(game.num_players))
    margin = strict_margin(game, choice, belief)
    if fast_path and margin is not None and margin > float(eps) * cells:
        return StabilityReport(True, 0, 0, True, margin)
    rng = np.random.default_rng(seed)
    failures = run = 0
    exact_profile = all(all_exact(x) for x in choice) and all(
        all_exact(x) for b in belief for x in (b if np.ndim(b[0]) else [b]) if x is not None)
    for _ in range(trials):
        run += 1
        g2 = _perturbed(game, eps, rng)
        if strict_member(g2, choice, belief):
            continue
        ok = False
        if game.num_players == 2 and exact_profile:
            ok = in_closure(_exact_equilibria(g2, False), choice, belief)
        if not ok:
            failures += 1
            if max_failures is not None and failures >= max_failures:
                break
    return StabilityReport(failures == 0, failures, run, False, margin)


# ---------------------------------------------------------------------------
# plot data


def plot_data(game: Game, meqs: Sequence[MEquilibrium]) -> dict:
    """Polygons for 2x2 games (unit square, first-action probabilities) and
    3-action symmetric games (barycentric vertex lists)."""
    shapes = []
    for idx, m in enumerate(meqs):
        if m.choice_set.representation != "exact":
            continue
        for which, region in (("choice", m.choice_set), ("belief", m.belief_set)):
            for piece in region.pieces:
                if all(f.k == 2 for f in piece) and len(piece) == 2:
                    xs = sorted({v[0] for v in piece[1].vertices})
                    ys = sorted({v[0] for v in piece[0].vertices})
                    # x axis: column's first action, y axis: row's first action
                    if which == "belief":
                        xs = sorted({v[0] for v in piece[0].vertices})
                        ys = sorted({v[0] for v in piece[1].vertices})
                    poly = [(xs[0], ys[0]), (xs[-1], ys[0]), (xs[-1], ys[-1]), (xs[0], ys[-1])]
                    shapes.append({"set": idx, "which": which, "kind": "square", "polygon": poly})
                elif len(piece) == 1 and piece[0].k == 2:
                    # symmetric 2x2: the interval for both players spans a square
                    xs = sorted({v[0] for v in piece[0].vertices})
                    poly = [(xs[0], xs[0]), (xs[-1], xs[0]), (xs[-1], xs[-1]), (xs[0], xs[-1])]
                    shapes.append({"set": idx, "which": which, "kind": "square", "polygon": poly})
                elif len(piece) == 1 and piece[0].k == 3:
                    pts = order_polygon([tuple(v) for v in piece[0].vertices])
                    shapes.append({"set": idx, "which": which, "kind": "ternary", "polygon": pts})
    return {"game": game.name, "shapes": shapes}
