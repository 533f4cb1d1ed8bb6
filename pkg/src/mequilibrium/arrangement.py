"""Cells of a line arrangement on a probability simplex (at most 3 actions).

Each named linear form a.x contributes the hyperplane a.x = 0.  Every cell of
the arrangement restricted to the simplex is a relatively open polytope on
which all forms have constant sign, identified by its sign vector.  Cells are
found bottom-up: vertices from pairwise intersections, edges between
consecutive vertices on each line, faces by flipping an edge's zero sign.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from . import polytope
from .errors import CapabilityError
from .numeric import to_fraction


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class Cell:
    signs: tuple          # sign of every distinct line
    point: tuple          # exact relative-interior point
    dim: int
    vertices: frozenset   # indices into Arrangement.vertex_points


class Arrangement:
    """Sign-vector cell decomposition of the simplex for a set of named forms."""

    def __init__(self, k: int, forms: Mapping[Hashable, Sequence]):
        if k > 3:
            raise CapabilityError("exact cell enumeration supports at most 3 actions per player")
        self.k = k
        self.lines: list[tuple[Fraction, ...]] = []
        self.ref: dict = {}
        index = {}
        for name, vec in forms.items():
            vec = tuple(to_fraction(v) for v in vec)
            if all(v == 0 for v in vec):
                self.ref[name] = ("zero", 0, 0)
            elif all(v == vec[0] for v in vec):
                self.ref[name] = ("const", _sgn(vec[0]), 0)
            else:
                lead = next(v for v in vec if v != 0)
                norm = tuple(v / lead for v in vec)
                if norm not in index:
                    index[norm] = len(self.lines)
                    self.lines.append(norm)
                self.ref[name] = ("line", index[norm], _sgn(lead))
        self.vertex_points: list[tuple] = []
        self.cells: list[Cell] = []
        self._build()

    # ------------------------------------------------------------------
    def signs_at(self, x: Sequence) -> tuple:
        return tuple(_sgn(sum(a * v for a, v in zip(line, x))) for line in self.lines)

    def sign(self, cell: Cell, name) -> int:
        kind, a, b = self.ref[name]
        if kind == "zero":
            return 0
        if kind == "const":
            return a
        return cell.signs[a] * b

    def conformal(self, small: tuple, big: tuple) -> bool:
        """True when the cell with signs `small` lies in the closure of `big`."""
        return all(s == 0 or s == t for s, t in zip(small, big))

    def _vertices_of(self, signs: tuple) -> frozenset:
        return frozenset(i for i, p in enumerate(self.vertex_points)
                         if self.conformal(self._vsigns[i], signs))

    def _build(self) -> None:
        k = self.k
        ones = [Fraction(1)] * k
        pts = set()
        if k == 1:
            pts.add((Fraction(1),))
        for combo in itertools.combinations(self.lines, k - 1):
            x = polytope.solve_unique([ones] + [list(c) for c in combo], [Fraction(1)] + [Fraction(0)] * (k - 1))
            if x is not None and all(v >= 0 for v in x):
                pts.add(x)
        self.vertex_points = sorted(pts)
        self._vsigns = [self.signs_at(p) for p in self.vertex_points]
        by_signs: dict[tuple, Cell] = {}
        for i, p in enumerate(self.vertex_points):
            by_signs[self._vsigns[i]] = Cell(self._vsigns[i], p, 0, frozenset([i]))
        edges = []
        if k == 2:
            groups = [sorted(range(len(self.vertex_points)), key=lambda i: self.vertex_points[i][0])]
        elif k == 3:
            groups = []
            for li in range(len(self.lines)):
                on = [i for i in range(len(self.vertex_points)) if self._vsigns[i][li] == 0]
                on.sort(key=lambda i: self.vertex_points[i])
                groups.append(on)
        else:
            groups = []
        for on in groups:
            for a, b in zip(on, on[1:]):
                mid = tuple((u + v) / 2 for u, v in zip(self.vertex_points[a], self.vertex_points[b]))
                s = self.signs_at(mid)
                if s not in by_signs:
                    cell = Cell(s, mid, 1, self._vertices_of(s))
                    by_signs[s] = cell
                    edges.append(cell)
        if k == 3:
            for edge in edges:
                zeros = [i for i, s in enumerate(edge.signs) if s == 0]
                for flip in (1, -1):
                    cand = tuple(flip if i in zeros else s for i, s in enumerate(edge.signs))
                    if cand in by_signs:
                        continue
                    verts = self._vertices_of(cand)
                    if len(verts) < 3:
                        continue
                    centre = polytope.barycenter([self.vertex_points[i] for i in verts])
                    if self.signs_at(centre) == cand:
                        by_signs[cand] = Cell(cand, centre, 2, verts)
        self.cells = sorted(by_signs.values(), key=lambda c: (c.dim, c.point))

    # ------------------------------------------------------------------
    def closure_forms(self, cell: Cell) -> tuple[list, list]:
        """(equalities, inequalities >= 0) describing the closure of `cell`."""
        eq, ge = [], []
        for line, s in zip(self.lines, cell.signs):
            if s == 0:
                eq.append(line)
            else:
                ge.append(tuple(s * v for v in line))
        return eq, ge

    def cell_vertices(self, cell: Cell) -> list[tuple]:
        return [self.vertex_points[i] for i in sorted(cell.vertices)]

    def locate(self, x: Sequence) -> Cell | None:
        s = self.signs_at(tuple(to_fraction(v) for v in x))
        for c in self.cells:
            if c.signs == s:
                return c
        return None
