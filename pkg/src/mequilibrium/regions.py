"""Region containers: exact polytopes on a simplex factor and product regions.

A factor polytope lives in the probability simplex of one player and is cut
out by homogeneous linear forms a.x (on the simplex every affine form can be
written this way because the coordinates sum to one).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import polytope
from .numeric import EPS_TIE, all_exact, format_rational, to_fraction

Form = tuple  # coefficient vector


def _dot(a, x):
    return sum(ai * xi for ai, xi in zip(a, x))


def enumerate_vertices(k: int, eq: Sequence[Form], ge: Sequence[Form]) -> list[tuple[Fraction, ...]]:
    """Vertices of {x in simplex_k : a.x = 0 for a in eq, a.x >= 0 for a in ge}."""
    facets = [tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k)]
    ge_all = list(ge) + facets
    ones = tuple(Fraction(1) for _ in range(k))
    eq = [tuple(map(to_fraction, a)) for a in eq]
    ge_all = [tuple(map(to_fraction, a)) for a in ge_all]
    verts = set()
    base_rank = polytope.matrix_rank([ones] + eq) if eq else 1
    need = k - base_rank
    if need < 0:
        return []
    for subset in itertools.combinations(ge_all, need):
        rows = [ones] + eq + list(subset)
        if polytope.matrix_rank(rows) != k:
            continue
        m, piv = polytope.rref([list(r) + [Fraction(1 if i == 0 else 0)] for i, r in enumerate(rows)])
        if k in piv:
            continue
        x = [Fraction(0)] * k
        for i, c in enumerate(piv):
            x[c] = m[i][k]
        if all(_dot(a, x) >= 0 for a in ge_all):
            verts.add(tuple(x))
    return sorted(verts)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Closed polytope inside one player's simplex, in H- and V-form."""

    k: int
    eq: tuple = ()
    ge: tuple = ()
    vertices: tuple = field(default=None)

    def __post_init__(self):
        eq = tuple(tuple(to_fraction(v) for v in a) for a in self.eq)
        ge = tuple(tuple(to_fraction(v) for v in a) for a in self.ge)
        object.__setattr__(self, "eq", eq)
        object.__setattr__(self, "ge", ge)
        if self.vertices is None:
            object.__setattr__(self, "vertices", tuple(enumerate_vertices(self.k, eq, ge)))
        else:
            object.__setattr__(self, "vertices", tuple(sorted(set(tuple(v) for v in self.vertices))))

    @classmethod
    def full(cls, k: int) -> "Polytope":
        return cls(k)

    @property
    def empty(self) -> bool:
        return not self.vertices

    @property
    def dimension(self) -> int:
        return -1 if self.empty else polytope.affine_dimension(self.vertices)

    @property
    def measure(self):
        if self.empty:
            return Fraction(0)
        if self.k > 3:
            return None
        return polytope.simplex_measure(self.vertices, self.k)

    def contains(self, x: Sequence, tol: float = EPS_TIE) -> bool:
        if len(x) != self.k:
            return False
        if all_exact(x):
            xs = tuple(to_fraction(v) for v in x)
            if sum(xs) != 1 or min(xs) < 0:
                return False
            return all(_dot(a, xs) == 0 for a in self.eq) and all(_dot(a, xs) >= 0 for a in self.ge)
        xf = np.array([float(v) for v in x])
        if abs(xf.sum() - 1) > tol or xf.min() < -tol:
            return False
        for a in self.eq:
            if abs(float(_dot([float(c) for c in a], xf))) > tol * max(1.0, float(np.abs(np.array(a, dtype=float)).sum())):
                return False
        for a in self.ge:
            if float(_dot([float(c) for c in a], xf)) < -tol * max(1.0, float(np.abs(np.array(a, dtype=float)).sum())):
                return False
        return True

    def interior_point(self) -> tuple:
        return polytope.barycenter(self.vertices)

    def distance(self, x: Sequence) -> float:
        return polytope.distance_to_hull(x, self.vertices)

    def same_set(self, other: "Polytope") -> bool:
        return self.k == other.k and set(self.vertices) == set(other.vertices)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Random points inside the hull (Dirichlet weights over vertices)."""
        v = np.array([[float(c) for c in p] for p in self.vertices])
        w = rng.dirichlet(np.ones(len(v)), size=n)
        return w @ v

    def to_dict(self) -> dict:
        ones = [1] * self.k
        h = [{"coeffs": [format_rational(c) for c in ones], "sense": "=", "rhs": "1"}]
        h += [{"coeffs": [format_rational(c) for c in a], "sense": "=", "rhs": "0"} for a in self.eq]
        h += [{"coeffs": [format_rational(c) for c in a], "sense": ">=", "rhs": "0"} for a in self.ge]
        h += [{"coeffs": [format_rational(int(i == j)) for j in range(self.k)], "sense": ">=", "rhs": "0"}
              for i in range(self.k)]
        m = self.measure
        return {
            "actions": self.k,
            "dimension": self.dimension,
            "vertices": [[format_rational(c) for c in v] for v in self.vertices],
            "H": h,
            "measure": None if m is None else format_rational(m),
        }


@dataclass(eq=False)
class RegionSet:
    """A choice or belief region: a union of products of factor polytopes
    (exact) or a sampled point cloud with a containment predicate.

    For choice regions the factors are the players' simplices (one factor in
    symmetric spaces).  For belief regions factor i holds player i's belief
    about the opponent (two-player games).
    """

    space: str
    color: tuple | None = None
    pieces: list = field(default_factory=list)
    representation: str = "exact"
    dimension: int = -1
    measure: object = Fraction(0)
    std_error: float | None = None
    boundary_markers: list = field(default_factory=list)
    points: np.ndarray | None = None
    predicate: Callable | None = None  # batch test: list of (S, K_f) arrays -> bool array
    warnings: list = field(default_factory=list)
    factor_sizes: tuple = ()
    factor_points: list | None = None

    @classmethod
    def product(cls, space: str, factors: Sequence[Polytope], color=None) -> "RegionSet":
        factors = tuple(factors)
        sizes = tuple(f.k for f in factors)
        dim = sum(f.dimension for f in factors) if all(not f.empty for f in factors) else -1
        meas = Fraction(1)
        for f in factors:
            m = f.measure
            meas = None if (m is None or meas is None) else meas * m
        return cls(space=space, color=color, pieces=[factors], dimension=dim, measure=meas,
                   factor_sizes=sizes)

    @property
    def factors(self) -> tuple:
        """Factor polytopes of a single-piece (product) region."""
        if len(self.pieces) != 1:
            raise ValueError("region is not a single product")
        return self.pieces[0]

    @property
    def empty(self) -> bool:
        if self.representation == "sampled":
            return self.points is None or len(self.points) == 0
        return not self.pieces

    def factor_measures(self) -> list:
        return [f.measure for f in self.factors]

    def contains(self, point: Sequence[Sequence], tol: float = EPS_TIE) -> bool:
        """Closure membership; `point` holds one vector per factor."""
        if self.representation == "sampled":
            if self.predicate is None:
                return False
            batch = [np.asarray([float(v) for v in x], dtype=float)[None, :] for x in point]
            return bool(self.predicate(batch)[0])
        return any(all(f.contains(x, tol) for f, x in zip(piece, point)) for piece in self.pieces)

    def distance(self, point: Sequence[Sequence]) -> float:
        if self.representation == "sampled":
            if self.points is None or not len(self.points):
                return float("inf")
            flat = np.concatenate([np.asarray(p, dtype=float) for p in point])
            return float(np.min(np.linalg.norm(self.points - flat, axis=1)))
        best = float("inf")
        for piece in self.pieces:
            d2 = sum(f.distance(x) ** 2 for f, x in zip(piece, point))
            best = min(best, d2 ** 0.5)
        return best

    def interior_point(self) -> tuple:
        return tuple(f.interior_point() for f in self.pieces[0])

    def sample(self, rng: np.random.Generator, n: int) -> list:
        """Random points of the region (exact pieces: uniform piece choice)."""
        if self.representation == "sampled":
            idx = rng.integers(len(self.points), size=n)
            return [self.points[i] for i in idx]
        out = []
        for _ in range(n):
            piece = self.pieces[int(rng.integers(len(self.pieces)))]
            out.append(tuple(tuple(f.sample(rng, 1)[0]) for f in piece))
        return out

    def to_dict(self) -> dict:
        doc = {
            "space": self.space,
            "representation": self.representation,
            "dimension": self.dimension,
            "measure": None if self.measure is None else format_rational(self.measure),
        }
        if self.std_error is not None:
            doc["std_error"] = self.std_error
        if self.representation == "exact":
            doc["pieces"] = [[f.to_dict() for f in piece] for piece in self.pieces]
        else:
            doc["sample_count"] = 0 if self.points is None else int(len(self.points))
        if self.boundary_markers:
            doc["boundary_markers"] = [m.to_dict() for m in self.boundary_markers]
        if self.warnings:
            doc["warnings"] = list(self.warnings)
        return doc
