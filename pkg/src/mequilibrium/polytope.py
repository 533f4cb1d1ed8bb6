"""Exact rational linear algebra and small-polytope geometry on simplices.

Everything here works on tuples of Fractions when given exact input and falls
back to float arithmetic with a tolerance otherwise.  Dimensions are tiny
(at most four coordinates), so plain Gaussian elimination is adequate.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .numeric import all_exact, to_fraction

ABS_TOL = 1e-9

Vector = tuple


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals."""
    m = [[to_fraction(v) for v in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def matrix_rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    if all(all_exact(r) for r in rows):
        return len(rref(rows)[1])
    return int(np.linalg.matrix_rank(np.array(rows, dtype=float), tol=1e-9))


def solve_unique(a: Sequence[Sequence], b: Sequence) -> tuple[Fraction, ...] | None:
    """Unique solution of a x = b (exact), or None when singular/inconsistent."""
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    n = len(a[0])
    m, piv = rref(aug)
    if n in piv:
        return None
    if len(piv) < n:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(piv):
        x[c] = m[i][n]
    return tuple(x)


def affine_dimension(points: Sequence[Sequence]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    return matrix_rank(diffs)


def barycenter(points: Sequence[Sequence]) -> tuple:
    n = len(points)
    if all(all_exact(p) for p in points):
        return tuple(sum((to_fraction(p[k]) for p in points), Fraction(0)) / n
                     for k in range(len(points[0])))
    return tuple(float(np.mean([float(p[k]) for p in points])) for k in range(len(points[0])))


def in_convex_hull(point: Sequence, vertices: Sequence[Sequence], tol: float = ABS_TOL) -> bool:
    """Linear-feasibility test: is `point` a convex combination of `vertices`?

    Exact input is decided by Caratheodory: some affinely independent subset of
    at most dim+1 vertices carries nonnegative barycentric weights.
    """
    verts = [tuple(v) for v in vertices]
    exact = all_exact(point) and all(all_exact(v) for v in verts)
    if not exact:
        return _in_hull_float(point, verts, tol)
    x = tuple(to_fraction(v) for v in point)
    if any(x == v for v in verts):
        return True
    d = affine_dimension(verts)
    for size in range(2, d + 2):
        for subset in itertools.combinations(verts, size):
            if affine_dimension(subset) != size - 1:
                continue
            a = [[v[k] for v in subset] for k in range(len(x))] + [[Fraction(1)] * size]
            b = list(x) + [Fraction(1)]
            aug = [row + [rhs] for row, rhs in zip(a, b)]
            m, piv = rref(aug)
            if size in piv:
                continue
            lam = [Fraction(0)] * size
            for i, c in enumerate(piv):
                lam[c] = m[i][size]
            if all(l >= 0 for l in lam):
                return True
    return False


def _in_hull_float(point, verts, tol) -> bool:
    x = np.array([float(v) for v in point])
    v = np.array([[float(c) for c in p] for p in verts])
    if np.any(np.max(np.abs(v - x), axis=1) <= tol):
        return True
    d = affine_dimension([tuple(float(c) for c in p) for p in verts])
    for size in range(2, d + 2):
        for idx in itertools.combinations(range(len(verts)), size):
            a = np.vstack([v[list(idx)].T, np.ones(size)])
            b = np.concatenate([x, [1.0]])
            lam, *_ = np.linalg.lstsq(a, b, rcond=None)
            if np.max(np.abs(a @ lam - b)) <= tol and lam.min() >= -tol:
                return True
    return False


def order_polygon(points2d: Sequence[tuple]) -> list[tuple]:
    """Counter-clockwise order of the vertices of a convex polygon."""
    cx = sum(float(p[0]) for p in points2d) / len(points2d)
    cy = sum(float(p[1]) for p in points2d) / len(points2d)
    return sorted(points2d, key=lambda p: math.atan2(float(p[1]) - cy, float(p[0]) - cx))


def polygon_area(points2d: Sequence[tuple]):
    """Shoelace area of a convex polygon given in any order (exact if input is)."""
    pts = order_polygon(points2d)
    if len(pts) < 3:
        return Fraction(0) if all(all_exact(p) for p in pts) else 0.0
    s = 0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        s += x1 * y2 - x2 * y1
    return abs(s) / 2


def simplex_measure(vertices: Sequence[Sequence], k: int):
    """Measure of the convex hull of `vertices` inside the (k-1)-simplex,
    normalised so that the whole simplex has measure 1.  Lower-dimensional
    hulls have measure 0.  Supports k <= 3 exactly.
    """
    exact = all(all_exact(v) for v in vertices)
    zero = Fraction(0) if exact else 0.0
    if not vertices:
        return zero
    if affine_dimension(vertices) < k - 1:
        return zero
    if k == 1:
        return Fraction(1) if exact else 1.0
    if k == 2:
        xs = [v[0] for v in vertices]
        return max(xs) - min(xs)
    if k == 3:
        return 2 * polygon_area([(v[0], v[1]) for v in vertices])
    raise ValueError("exact measure is implemented for at most 3 actions")


def simplex_vertices(k: int) -> list[tuple[Fraction, ...]]:
    return [tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k)]


def distance_to_hull(point: Sequence, vertices: Sequence[Sequence]) -> float:
    """Euclidean distance from a point to a hull of dimension <= 2."""
    x = np.array([float(v) for v in point])
    verts = [np.array([float(c) for c in v]) for v in vertices]
    if in_convex_hull(tuple(float(c) for c in point), [tuple(v) for v in verts]):
        return 0.0
    best = min(float(np.linalg.norm(x - v)) for v in verts)
    for a, b in itertools.combinations(verts, 2):
        d = b - a
        dd = float(d @ d)
        if dd == 0:
            continue
        t = min(1.0, max(0.0, float((x - a) @ d) / dd))
        best = min(best, float(np.linalg.norm(x - (a + t * d))))
    return best


def _dot(a, x):
    return sum(ai * xi for ai, xi in zip(a, x))


def _clip(ring: list, form) -> list:
    """Part of a cyclic convex vertex ring where form.x >= 0."""
    if not ring:
        return []
    out = []
    vals = [_dot(form, p) for p in ring]
    n = len(ring)
    for i in range(n):
        p, q = ring[i], ring[(i + 1) % n]
        fp, fq = vals[i], vals[(i + 1) % n]
        if fp >= 0:
            out.append(p)
        if (fp > 0 > fq) or (fp < 0 < fq):
            t = fp / (fp - fq)
            out.append(tuple(a + t * (b - a) for a, b in zip(p, q)))
    dedup = []
    for p in out:
        if not dedup or dedup[-1] != p:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def clip_hull(vertices: Sequence[Sequence], eq: Sequence = (), ge: Sequence = ()) -> list[tuple]:
    """Vertices of hull(vertices) intersected with {a.x = 0} and {a.x >= 0}.

    Exact for rational input.  The hull must have affine dimension <= 2 and
    its points must be determined by their first two coordinates (true for
    points of a simplex with at most 3 coordinates).
    """
    pts = sorted(set(tuple(to_fraction(c) for c in v) for v in vertices))
    if len(pts) > 2:
        ring = order_polygon(pts)
        # order_polygon may keep collinear points; they are harmless for clipping
    else:
        ring = pts
    for form in ge:
        ring = _clip(ring, [to_fraction(c) for c in form])
    for form in eq:
        f = [to_fraction(c) for c in form]
        ring = _clip(ring, f)
        ring = _clip(ring, [-c for c in f])
    return sorted(set(ring))
