"""Reference equilibria: pure and mixed Nash equilibria of small games and
belief-augmented Nash equilibria (best responses together with every belief
that induces the same best responses)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import CapabilityError, ValidationError
from .game import Game, expected_payoffs, payoff_profile
from .numeric import to_fraction
from .polytope import solve_unique
from .regions import Polytope, RegionSet, enumerate_vertices

MAX_SUPPORT_ACTIONS = 4


@dataclass(frozen=True)
class NashPoint:
    profile: tuple
    kind: str
    support: tuple
    family: int | None = None  # index of a continuum this extreme point belongs to

    @property
    def degenerate(self) -> bool:
        return self.family is not None

    def to_dict(self) -> dict:
        from .numeric import format_rational
        doc = {"profile": [[format_rational(v) for v in s] for s in self.profile],
               "kind": self.kind, "support": [list(s) for s in self.support]}
        if self.family is not None:
            doc["family"] = self.family
        return doc


@dataclass(frozen=True, order=True)
class NashComponent:
    """Product of convex hulls of extreme equilibrium strategies."""

    row_vertices: tuple
    col_vertices: tuple

    @property
    def is_point(self) -> bool:
        return len(self.row_vertices) == 1 and len(self.col_vertices) == 1


@dataclass
class Beaune:
    choice: tuple
    belief_set: RegionSet
    trembling_hand_perfect: bool = False
    best_responses: tuple = field(default_factory=tuple)


def _support(x: Sequence) -> tuple[int, ...]:
    return tuple(k for k, v in enumerate(x) if v != 0)


def _kind(profile) -> str:
    supports = [_support(s) for s in profile]
    if all(len(s) == 1 for s in supports):
        return "pure"
    if all(len(s) == len(p) for s, p in zip(supports, profile)):
        return "mixed"
    return "degenerate-mixed"


def make_point(profile, family=None) -> NashPoint:
    profile = tuple(tuple(to_fraction(v) for v in s) for s in profile)
    return NashPoint(profile, _kind(profile), tuple(_support(s) for s in profile), family)


def is_nash(game: Game, profile: Sequence[Sequence]) -> bool:
    """Independent check: every support action attains the maximal payoff."""
    pays = payoff_profile(game, profile)
    for s, p in zip(profile, pays):
        top = max(p)
        if any(w != 0 and p[k] != top for k, w in enumerate(s)):
            return False
    return True


def pure_nash(game: Game) -> list[NashPoint]:
    """All pure-strategy equilibria by exhaustive enumeration."""
    out = []
    ks = game.action_counts
    for prof in itertools.product(*[range(k) for k in ks]):
        ok = True
        for i in range(game.num_players):
            here = game.payoffs[i][prof]
            for dev in range(ks[i]):
                alt = list(prof)
                alt[i] = dev
                if game.payoffs[i][tuple(alt)] > here:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(make_point([tuple(Fraction(int(a == c)) for a in range(k)) for c, k in zip(prof, ks)]))
    return out


def _require_bimatrix(game: Game) -> None:
    if game.num_players != 2:
        raise CapabilityError("mixed equilibria are computed for two-player games only")
    if max(game.action_counts) > MAX_SUPPORT_ACTIONS:
        raise CapabilityError(f"support enumeration is limited to {MAX_SUPPORT_ACTIONS} actions per player")
    if not game.exact:
        raise CapabilityError("mixed equilibria need exact (rational) payoffs")


def _labelled_vertices(mat, transpose: bool, offset_own: int, offset_other: int):
    """Vertices of {z >= 0, M z <= 1} with their label sets.

    For the row player's polytope M = B^T (transpose=True): own labels i for
    z_i = 0 and m + j for tight payoff rows.  The column polytope mirrors this.
    """
    rows = [list(r) for r in (list(map(list, zip(*mat))) if transpose else mat)]
    dim = len(rows[0])
    cons = []  # (coeffs, rhs, label)
    for i in range(dim):
        cons.append(([Fraction(int(i == j)) for j in range(dim)], Fraction(0), offset_own + i, "lower"))
    for r, row in enumerate(rows):
        cons.append((row, Fraction(1), offset_other + r, "upper"))
    verts = {}
    for subset in itertools.combinations(range(len(cons)), dim):
        a = [cons[c][0] for c in subset]
        b = [cons[c][1] for c in subset]
        z = solve_unique(a, b)
        if z is None:
            continue
        if any(v < 0 for v in z):
            continue
        if any(sum(c * v for c, v in zip(row, z)) > 1 for row in rows):
            continue
        labels = set()
        for coeffs, rhs, lab, kind in cons:
            val = sum(c * v for c, v in zip(coeffs, z))
            if val == rhs:
                labels.add(lab)
        verts[tuple(z)] = frozenset(labels)
    return verts


def extreme_equilibria(game: Game) -> list[tuple[tuple, tuple]]:
    """All extreme equilibria of a bimatrix game as normalised strategy pairs."""
    _require_bimatrix(game)
    a = [[to_fraction(v) for v in row] for row in game.payoffs[0].tolist()]
    b = [[to_fraction(v) for v in row] for row in game.payoffs[1].tolist()]
    m, n = len(a), len(a[0])
    shift_a = 1 - min(min(r) for r in a)
    shift_b = 1 - min(min(r) for r in b)
    a = [[v + shift_a for v in r] for r in a]
    b = [[v + shift_b for v in r] for r in b]
    px = _labelled_vertices(b, transpose=True, offset_own=0, offset_other=m)
    qy = _labelled_vertices(a, transpose=False, offset_own=m, offset_other=0)
    full = frozenset(range(m + n))
    pairs = []
    for x, lx in px.items():
        if all(v == 0 for v in x):
            continue
        for y, ly in qy.items():
            if all(v == 0 for v in y):
                continue
            if lx | ly == full:
                sx, sy = sum(x), sum(y)
                pairs.append((tuple(v / sx for v in x), tuple(v / sy for v in y)))
    return sorted(set(pairs))


def nash_components(game: Game) -> list[NashComponent]:
    """Maximal bicliques of compatible extreme strategies; each is a convex
    set of equilibria.  Components with a single extreme point are isolated."""
    pairs = extreme_equilibria(game)
    xs = sorted({p[0] for p in pairs})
    ys = sorted({p[1] for p in pairs})
    compat = {x: {y for (xx, y) in pairs if xx == x} for x in xs}
    cliques = set()
    for r in range(1, len(xs) + 1):
        for sub in itertools.combinations(xs, r):
            common = set.intersection(*(compat[x] for x in sub))
            if not common:
                continue
            closure_x = tuple(x for x in xs if common <= compat[x])
            cliques.add((closure_x, tuple(sorted(common))))
    maximal = [c for c in cliques
               if not any(c != d and set(c[0]) <= set(d[0]) and set(c[1]) <= set(d[1]) for d in cliques)]
    return sorted(NashComponent(cx, cy) for cx, cy in maximal)


def mixed_nash_bimatrix(game: Game) -> list[NashPoint]:
    """Extreme Nash equilibria of a two-player game with exact arithmetic.

    In nondegenerate games this is the full equilibrium list.  Extreme points
    that belong to a continuum carry the index of their family (see
    :func:`nash_components`), so a one-parameter family is reported through
    its two endpoints.
    """
    pairs = extreme_equilibria(game)
    comps = [c for c in nash_components(game) if not c.is_point]
    out = []
    for x, y in pairs:
        fam = next((i for i, c in enumerate(comps) if x in c.row_vertices and y in c.col_vertices), None)
        out.append(make_point((x, y), fam))
    return out


def symmetric_nash(game: Game) -> tuple[list[NashPoint], list[tuple[int, ...]]]:
    """Symmetric equilibria (sigma, sigma) of a symmetric two-player game by
    support enumeration.  Returns the points and the supports whose
    indifference system was singular (possible continua)."""
    if not game.symmetric or game.num_players != 2:
        raise ValidationError("symmetric equilibria need a symmetric two-player game")
    if not game.exact:
        raise CapabilityError("symmetric equilibria need exact payoffs")
    a = [[to_fraction(v) for v in row] for row in game.payoffs[0].tolist()]
    k = len(a)
    points, singular = [], []
    for size in range(1, k + 1):
        for supp in itertools.combinations(range(k), size):
            rows = [[a[i][j] for j in supp] + [Fraction(-1)] for i in supp]
            rows.append([Fraction(1)] * size + [Fraction(0)])
            rhs = [Fraction(0)] * size + [Fraction(1)]
            sol = solve_unique(rows, rhs)
            if sol is None:
                singular.append(supp)
                continue
            weights, value = sol[:-1], sol[-1]
            if any(w <= 0 for w in weights):
                continue
            sigma = [Fraction(0)] * k
            for i, w in zip(supp, weights):
                sigma[i] = w
            pays = [sum(a[i][j] * sigma[j] for j in range(k)) for i in range(k)]
            if max(pays) != value:
                continue
            points.append(make_point((tuple(sigma), tuple(sigma))))
    return points, singular


# ---------------------------------------------------------------------------
# belief-augmented Nash equilibria


def _argmax_set(values) -> tuple[int, ...]:
    top = max(values)
    return tuple(k for k, v in enumerate(values) if v == top)


def best_response_region(game: Game, player: int, targets: Sequence[int]) -> Polytope:
    """Closure of the beliefs of `player` (about the opponent) whose set of
    maximising actions is exactly `targets`."""
    j = 1 - player
    mat = game.payoffs[player]
    rows = [tuple(to_fraction(v) for v in (mat[k, :] if player == 0 else mat[:, k])) for k in range(game.action_counts[player])]
    t = list(targets)
    eq = [tuple(x - y for x, y in zip(rows[t[0]], rows[s])) for s in t[1:]]
    ge = [tuple(x - y for x, y in zip(rows[t[0]], rows[m])) for m in range(len(rows)) if m not in t]
    return Polytope(game.action_counts[j], tuple(eq), tuple(ge))


def beaune(game: Game, choice: Sequence[Sequence]) -> Beaune | None:
    """The choice profile with the closure of all beliefs giving the same best
    responses as the choice itself; None unless every player's choice is a
    best response to the others' choices."""
    if game.num_players != 2:
        raise CapabilityError("exact belief sets are available for two-player games")
    choice = tuple(tuple(to_fraction(v) for v in s) for s in choice)
    pays = payoff_profile(game, choice)
    targets = []
    for s, p in zip(choice, pays):
        t = _argmax_set(p)
        if any(s[k] != 0 and k not in t for k in range(len(s))):
            return None
        targets.append(t)
    factors = [best_response_region(game, i, targets[i]) for i in range(2)]
    region = RegionSet.product("belief", factors)
    thp = all(_supports_interior_belief(game, i, choice[i]) for i in range(2))
    return Beaune(choice=choice, belief_set=region, trembling_hand_perfect=thp,
                  best_responses=tuple(targets))


def _supports_interior_belief(game: Game, player: int, strategy) -> bool:
    """Is `strategy` a best response to some completely mixed opponent belief?
    The region of such beliefs is a polytope; it has a strictly positive
    point iff the barycenter of its vertices is strictly positive."""
    supp = _support(strategy)
    mat = game.payoffs[player]
    k_own = game.action_counts[player]
    rows = [tuple(to_fraction(v) for v in (mat[k, :] if player == 0 else mat[:, k])) for k in range(k_own)]
    s0 = supp[0]
    eq = [tuple(x - y for x, y in zip(rows[s0], rows[s])) for s in supp[1:]]
    ge = [tuple(x - y for x, y in zip(rows[s0], rows[m])) for m in range(k_own) if m not in supp]
    verts = enumerate_vertices(game.action_counts[1 - player], eq, ge)
    if not verts:
        return False
    centre = [sum(v[c] for v in verts) / len(verts) for c in range(len(verts[0]))]
    return all(c > 0 for c in centre)


def all_nash_points(game: Game) -> list[NashPoint]:
    """Pure equilibria for n >= 3, extreme equilibria for two players."""
    if game.num_players == 2 and game.exact and max(game.action_counts) <= MAX_SUPPORT_ACTIONS:
        return mixed_nash_bimatrix(game)
    return pure_nash(game)
