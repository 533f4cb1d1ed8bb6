"""Normal-form games, expected payoffs, and the best-response, rank and
rank-mu correspondences.

Payoff tensors are indexed by the players' actions in player order, so the
row player's action is the first axis.  Games built from integers or
Fractions keep exact object arrays; expected payoffs computed from exact
beliefs stay exact.  Any float input switches to float arithmetic with the
scale-aware tie rule from :mod:`mequilibrium.numeric`.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import polytope
from .errors import FormatError, ShapeError, ValidationError
from .numeric import EPS_TIE, all_exact, format_rational, is_exact_scalar, tied, to_fraction

Ordering = tuple  # action indices listed from lowest to highest weight


def _as_object_array(data) -> np.ndarray:
    arr = np.array(data, dtype=object)
    flat = [to_fraction(v) for v in arr.ravel()]
    out = np.empty(arr.shape, dtype=object)
    out.ravel()[:] = flat
    return out


@dataclass(frozen=True, eq=False)
class Game:
    """Finite n-player normal-form game.

    ``payoffs[i]`` is player i's payoff tensor of shape ``action_counts``.
    ``symmetric`` marks games whose payoffs are invariant under relabelling
    the players (for two players: ``payoffs[1] == payoffs[0].T``).
    """

    payoffs: tuple
    labels: tuple | None = None
    name: str = ""
    symmetric: bool = False

    def __post_init__(self):
        pays = tuple(self.payoffs)
        if len(pays) < 2:
            raise ShapeError("a game needs at least two players")
        shape = np.shape(pays[0])
        if len(shape) != len(pays):
            raise ShapeError(f"payoff tensors must have {len(pays)} axes, got {len(shape)}")
        if any(k < 2 for k in shape):
            raise ShapeError("every player needs at least two actions")
        for p in pays:
            if np.shape(p) != shape:
                raise ShapeError("payoff tensor shapes differ between players")
        object.__setattr__(self, "payoffs", pays)
        if self.labels is None:
            labels = tuple(tuple(chr(ord("A") + k) for k in range(K)) for K in shape)
            object.__setattr__(self, "labels", labels)
        else:
            labels = tuple(tuple(str(a) for a in row) for row in self.labels)
            if tuple(len(row) for row in labels) != shape:
                raise ShapeError("action labels do not match payoff shape")
            object.__setattr__(self, "labels", labels)
        if self.symmetric and not _payoffs_symmetric(pays):
            raise ValidationError("symmetric=True but the payoff tensors are not symmetric")

    # construction -------------------------------------------------------
    @classmethod
    def from_payoffs(cls, payoffs, labels=None, name: str = "", symmetric: bool | None = None) -> "Game":
        arrays = []
        for p in payoffs:
            arr = np.array(p, dtype=object)
            if all(is_exact_scalar(v) or isinstance(v, str) for v in arr.ravel()):
                arrays.append(_as_object_array(p))
            else:
                arrays.append(np.array(p, dtype=float))
        if symmetric is None:
            symmetric = _payoffs_symmetric(arrays)
        return cls(tuple(arrays), labels=labels, name=name, symmetric=symmetric)

    @classmethod
    def bimatrix(cls, row, col, labels=None, name: str = "", symmetric: bool | None = None) -> "Game":
        return cls.from_payoffs([row, col], labels=labels, name=name, symmetric=symmetric)

    @classmethod
    def symmetric_bimatrix(cls, row, labels=None, name: str = "") -> "Game":
        col = np.array(row, dtype=object).T
        lab = None if labels is None else (tuple(labels), tuple(labels))
        return cls.from_payoffs([row, col], labels=lab, name=name, symmetric=True)

    # basic properties ---------------------------------------------------
    @property
    def num_players(self) -> int:
        return len(self.payoffs)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(np.shape(self.payoffs[0]))

    @property
    def exact(self) -> bool:
        return all(p.dtype == object for p in self.payoffs)

    @cached_property
    def float_payoffs(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array(p, dtype=float) for p in self.payoffs)

    def payoff(self, player: int, profile: Sequence[int]):
        return self.payoffs[player][tuple(profile)]

    def opponents(self, player: int) -> list[int]:
        return [j for j in range(self.num_players) if j != player]

    def with_payoffs(self, payoffs, name: str | None = None) -> "Game":
        return Game.from_payoffs(payoffs, labels=self.labels,
                                 name=self.name if name is None else name, symmetric=None)

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        doc = {
            "players": self.num_players,
            "actions": [list(r) for r in self.labels],
            "payoffs": [_tensor_to_list(p) for p in self.payoffs],
            "symmetric": bool(self.symmetric),
        }
        if self.name:
            doc["name"] = self.name
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Game":
        for key in ("players", "actions", "payoffs"):
            if key not in doc:
                raise FormatError(f"game document lacks field '{key}'")
        n = doc["players"]
        if not isinstance(n, int) or n < 2 or len(doc["actions"]) != n or len(doc["payoffs"]) != n:
            raise FormatError("players, actions and payoffs disagree on the number of players")
        pays = [_tensor_from_list(p) for p in doc["payoffs"]]
        try:
            return cls(tuple(pays), labels=doc["actions"], name=doc.get("name", ""),
                       symmetric=bool(doc.get("symmetric", False)))
        except (ShapeError, ValidationError) as exc:
            raise FormatError(str(exc)) from exc

    def dumps(self) -> str:
        """Canonical text form; ``Game.loads(g.dumps()).dumps() == g.dumps()``."""
        doc = self.to_dict()
        lines = ["{"]
        keys = list(doc)
        for i, key in enumerate(keys):
            comma = "," if i < len(keys) - 1 else ""
            if key == "payoffs":
                inner = ",\n".join("    " + json.dumps(p, separators=(", ", ": ")) for p in doc[key])
                lines.append(f'  "payoffs": [\n{inner}\n  ]{comma}')
            else:
                lines.append(f"  {json.dumps(key)}: {json.dumps(doc[key])}{comma}")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Game":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not a game document: {exc}") from exc
        return cls.from_dict(doc)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "Game":
        return cls.loads(Path(path).read_text())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Game):
            return NotImplemented
        return (self.labels == other.labels and self.symmetric == other.symmetric
                and self.action_counts == other.action_counts
                and all(np.array_equal(a, b) for a, b in zip(self.payoffs, other.payoffs)))

    __hash__ = None


def _tensor_to_list(arr):
    def conv(v):
        if is_exact_scalar(v):
            f = to_fraction(v)
            return f.numerator if f.denominator == 1 else format_rational(f)
        return float(v)
    return np.vectorize(conv, otypes=[object])(arr).tolist()


def _tensor_from_list(data):
    arr = np.array(data, dtype=object)
    if any(isinstance(v, float) for v in arr.ravel()):
        return np.array(data, dtype=float)
    return _as_object_array(data)


def _payoffs_symmetric(pays) -> bool:
    n = len(pays)
    shape = np.shape(pays[0])
    if len(set(shape)) != 1:
        return False
    base = np.asarray(pays[0])
    for perm in itertools.permutations(range(1, n)):
        if not np.array_equal(base, np.transpose(base, (0,) + perm)):
            return False
    for i in range(1, n):
        if not np.array_equal(np.asarray(pays[i]), np.moveaxis(base, 0, i)):
            return False
    return True


# ---------------------------------------------------------------------------
# profiles and expected payoffs


def uniform(k: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, k) for _ in range(k))


def unit_vector(k: int, index: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(j == index)) for j in range(k))


def check_simplex_point(x: Sequence, k: int | None = None, tol: float = 1e-12) -> None:
    if k is not None and len(x) != k:
        raise ShapeError(f"expected {k} weights, got {len(x)}")
    if all_exact(x):
        if any(v < 0 for v in x) or sum(x) != 1:
            raise ValidationError(f"{x} is not in the simplex")
    else:
        arr = np.asarray(x, dtype=float)
        if arr.min() < -tol or abs(arr.sum() - 1) > tol:
            raise ValidationError(f"{x} is not in the simplex")


def belief_row(game: Game, player: int, belief) -> list:
    """Normalise one player's belief to a length-n list with the own slot None.

    Two-player games also accept the bare opponent vector.
    """
    n = game.num_players
    ks = game.action_counts
    if n == 2 and len(belief) == ks[1 - player] and all(np.ndim(v) == 0 for v in belief):
        row = [None, None]
        row[1 - player] = tuple(belief)
        return row
    if len(belief) != n:
        raise ShapeError(f"belief must give one vector per player ({n}), got {len(belief)}")
    row = []
    for j, b in enumerate(belief):
        if j == player:
            row.append(None)
            continue
        if b is None or np.ndim(b) != 1 or len(b) != ks[j]:
            raise ShapeError(f"belief about player {j} must have {ks[j]} weights")
        row.append(tuple(b))
    return row


def expected_payoffs(game: Game, player: int, belief) -> tuple:
    """Expected payoff of each of `player`'s actions against `belief`.

    `belief` lists one probability vector per player (own slot ignored).
    The result is exact whenever the game and the belief are exact.
    """
    row = belief_row(game, player, belief)
    vectors = [b for j, b in enumerate(row) if j != player]
    exact = game.exact and all(all_exact(b) for b in vectors)
    tensor = game.payoffs[player] if exact else game.float_payoffs[player]
    for j in reversed(range(game.num_players)):
        if j == player:
            continue
        vec = np.array([to_fraction(v) for v in row[j]], dtype=object) if exact \
            else np.array(row[j], dtype=float)
        tensor = np.tensordot(tensor, vec, axes=([j], [0]))
    if exact:
        return tuple(to_fraction(v) for v in tensor)
    return tuple(float(v) for v in tensor)


def payoff_profile(game: Game, choice: Sequence[Sequence]) -> tuple[tuple, ...]:
    """Expected payoffs of every player when beliefs equal the choice profile."""
    return tuple(expected_payoffs(game, i, list(choice)) for i in range(game.num_players))


def belief_payoffs(game: Game, beliefs: Sequence) -> tuple[tuple, ...]:
    """Expected payoffs of every player under a belief profile."""
    return tuple(expected_payoffs(game, i, beliefs[i]) for i in range(game.num_players))


def correct_beliefs(choice: Sequence[Sequence]) -> list[list]:
    n = len(choice)
    return [[None if j == i else tuple(choice[j]) for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# orders and correspondences


def weak_order(values: Sequence, eps: float = EPS_TIE) -> tuple[tuple[int, ...], ...]:
    """Blocks of tied indices listed from lowest to highest value."""
    idx = sorted(range(len(values)), key=lambda k: (values[k], k))
    blocks: list[list[int]] = []
    for k in idx:
        if blocks and tied(values[blocks[-1][-1]], values[k], eps):
            blocks[-1].append(k)
        else:
            blocks.append([k])
    return tuple(tuple(sorted(b)) for b in blocks)


def linear_extensions(blocks: Sequence[Sequence[int]]) -> list[Ordering]:
    per_block = [list(itertools.permutations(b)) for b in blocks]
    return [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*per_block)]


def rank_vector(ordering: Ordering) -> tuple[Fraction, ...]:
    """Normalised rank vector placing weight (p+1)/(K(K+1)/2) on position p."""
    k = len(ordering)
    total = Fraction(k * (k + 1), 2)
    out = [Fraction(0)] * k
    for pos, action in enumerate(ordering):
        out[action] = (pos + 1) / total
    return tuple(out)


def base_rank_vector(k: int) -> tuple[Fraction, ...]:
    return rank_vector(tuple(range(k)))


def format_ordering(ordering: Ordering, labels: Sequence[str] | None = None) -> str:
    names = [str(a + 1) for a in ordering] if labels is None else [labels[a] for a in ordering]
    return " < ".join(names)


def parse_ordering(text: str, labels: Sequence[str] | None = None) -> Ordering:
    parts = [p.strip() for p in text.split("<")]
    if labels is not None and all(p in labels for p in parts):
        return tuple(list(labels).index(p) for p in parts)
    return tuple(int(p) - 1 for p in parts)


@dataclass(frozen=True)
class CorrespondenceValue:
    """Convex hull of a finite vertex set in a simplex."""

    vertices: tuple
    kind: str = field(init=False)

    def __post_init__(self):
        verts = tuple(sorted(set(tuple(v) for v in self.vertices)))
        if not verts:
            raise ValidationError("a correspondence value needs at least one vertex")
        object.__setattr__(self, "vertices", verts)
        dim = polytope.affine_dimension(verts)
        if dim == 0:
            kind = "point"
        elif dim == 1 and len(verts) == 2:
            kind = "segment"
        elif all(sorted(v) == [0] * (len(v) - 1) + [1] for v in verts):
            kind = "face"
        else:
            kind = "hull"
        object.__setattr__(self, "kind", kind)

    @property
    def dimension(self) -> int:
        return polytope.affine_dimension(self.vertices)

    @property
    def barycenter(self) -> tuple:
        return polytope.barycenter(self.vertices)

    def contains(self, point: Sequence, tol: float = polytope.ABS_TOL) -> bool:
        return polytope.in_convex_hull(tuple(point), self.vertices, tol)

    def __len__(self) -> int:
        return len(self.vertices)


def rank_mu(payoffs: Sequence, mu: Sequence, eps: float = EPS_TIE) -> CorrespondenceValue:
    """Hull of the permutations of `mu` whose order agrees with `payoffs`.

    A permutation s qualifies when s_k > s_l implies payoff_k >= payoff_l; the
    qualifying permutations hand the smallest entries of mu to the lowest
    payoff block and permute freely inside tied blocks.
    """
    if len(payoffs) != len(mu):
        raise ShapeError("payoff vector and mu differ in length")
    blocks = weak_order(payoffs, eps)
    values = sorted(mu)
    choices = []
    pos = 0
    for block in blocks:
        chunk = values[pos:pos + len(block)]
        pos += len(block)
        arrangements = sorted(set(itertools.permutations(chunk)))
        choices.append([dict(zip(block, arr)) for arr in arrangements])
    vertices = []
    for combo in itertools.product(*choices):
        merged = {}
        for part in combo:
            merged.update(part)
        vertices.append(tuple(merged[k] for k in range(len(mu))))
    return CorrespondenceValue(tuple(vertices))


def best_response(payoffs: Sequence, eps: float = EPS_TIE) -> CorrespondenceValue:
    k = len(payoffs)
    return rank_mu(payoffs, unit_vector(k, k - 1), eps)


def rank(payoffs: Sequence, eps: float = EPS_TIE) -> CorrespondenceValue:
    return rank_mu(payoffs, base_rank_vector(len(payoffs)), eps)


def rank_assignment_of(point: Sequence, eps: float = EPS_TIE) -> set[Ordering]:
    """Every strict ordering (lowest weight first) compatible with `point`."""
    return set(linear_extensions(weak_order(point, eps)))


def order_consistent(weights: Sequence, payoffs: Sequence, eps: float = EPS_TIE) -> bool:
    """True when weights_k > weights_l implies payoffs_k >= payoffs_l."""
    k = len(weights)
    for a in range(k):
        for b in range(k):
            if a != b and not tied(weights[a], weights[b], eps) and weights[a] > weights[b]:
                if not (payoffs[a] >= payoffs[b] or tied(payoffs[a], payoffs[b], eps)):
                    return False
    return True


def mu_generator(k: int, rho) -> tuple:
    """mu(rho) = (1^rho, ..., k^rho) / sum_j j^rho; exact for integer rho."""
    if rho < 0:
        raise ValidationError("rho must be nonnegative")
    r = to_fraction(rho) if is_exact_scalar(rho) or (isinstance(rho, float) and float(rho).is_integer()) else None
    if r is not None and r.denominator == 1:
        powers = [Fraction(j) ** int(r) for j in range(1, k + 1)]
        total = sum(powers)
        return tuple(p / total for p in powers)
    powers = np.arange(1, k + 1, dtype=float) ** float(rho)
    return tuple(float(v) for v in powers / powers.sum())
