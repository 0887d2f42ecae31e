"""Strictly convex rational cones, full dimensional in their own chart.

A ``Cone`` lives in the chart Z^dim of its own lattice. Rays are primitive
integer vectors in lexicographic order; facet normals are primitive integer
covectors computed by double description.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

from .errors import NotSimplicial, NotStrictlyConvex, RankMismatch
from .lattice import Lattice, snf
from .linalg import dot, frac_vector, inverse, primitive_integer, rank, rref, solve, solve_columns, vec_sum
from .polyhedra import extreme_rays, hrep

__all__ = [
    "Cone",
    "Face",
    "Location",
    "make_cone",
    "faces",
    "contains",
    "multiplicity",
    "is_nonsingular",
    "is_simplicial",
    "gorenstein_functional",
    "cone_generators",
    "triangulate",
    "parallelepiped_points",
]


@dataclass(frozen=True)
class Cone:
    dim: int
    rays: tuple
    _facets: tuple | None = field(default=None, compare=False, repr=False, hash=False)

    @cached_property
    def facets(self) -> tuple:
        """Primitive inward facet normals, sorted."""
        if self._facets is not None:
            return self._facets
        if self.dim == 0:
            return ()
        return tuple(extreme_rays(self.rays, self.dim))

    @cached_property
    def incidence(self) -> tuple:
        """For each facet, the frozenset of indices of the rays on it."""
        return tuple(
            frozenset(i for i, r in enumerate(self.rays) if dot(m, r) == 0) for m in self.facets
        )

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    def interior_point(self) -> tuple:
        return vec_sum(self.rays, self.dim)

    def holds(self, v: Sequence) -> bool:
        return all(dot(m, v) >= 0 for m in self.facets)

    def __repr__(self) -> str:
        return f"Cone(dim={self.dim}, rays={list(self.rays)})"


class Face(NamedTuple):
    """A face given by the indices of the parent rays it contains."""

    indices: frozenset
    rays: tuple
    covector: tuple
    dim: int


class Location(NamedTuple):
    kind: str
    face: Face | None = None


INTERIOR = "interior"
BOUNDARY = "boundary"
OUTSIDE = "outside"


def make_cone(generators: Sequence[Sequence], lattice: Lattice | None = None, dim: int | None = None) -> Cone:
    """Canonical cone generated by ``generators``.

    With ``lattice`` the generators are ambient vectors and are rewritten in
    the lattice's coordinates, which then form the cone's chart.
    """
    gens = [frac_vector(g) for g in generators]
    if lattice is not None:
        coords = []
        for g in gens:
            c = lattice.coordinates(g)
            if c is None:
                raise RankMismatch(f"{g} lies outside the span of the lattice")
            coords.append(c)
        gens = coords
        dim = lattice.rank
    elif dim is None:
        if not gens:
            raise RankMismatch("chart dimension required for an empty generator list")
        dim = len(gens[0])
    if any(len(g) != dim for g in gens):
        raise RankMismatch("generator length differs from the chart rank")
    gens = sorted({primitive_integer(g) for g in gens if any(g)})
    if dim == 0:
        return Cone(0, ())
    k = rank(gens) if gens else 0
    if k < dim:
        if k and _has_line(gens, k):
            raise NotStrictlyConvex("the generators span a cone containing a line")
        raise RankMismatch("generators do not span the chart; pass the cone's own chart")
    facets = extreme_rays(gens, dim)
    if rank(facets) < dim:
        raise NotStrictlyConvex("the generators span a cone containing a line")
    if dim == 1:
        rays = gens
    else:
        rays = [g for g in gens if rank([m for m in facets if dot(m, g) == 0]) == dim - 1]
    return Cone(dim, tuple(rays), tuple(facets))


def _has_line(gens: list, k: int) -> bool:
    basis, _ = rref(gens)
    basis = basis[:k]
    coords = [solve_columns(basis, g) for g in gens]
    return rank(extreme_rays(coords, k)) < k


def faces(c: Cone) -> list[Face]:
    """All faces, ordered by dimension and then by ray indices."""
    n = len(c.rays)
    full = frozenset(range(n))
    found = {full: ()}
    frontier = [full]
    while frontier:
        nxt = []
        for s in frontier:
            for inc in c.incidence:
                t = s & inc
                if t != s and t not in found:
                    found[t] = ()
                    nxt.append(t)
        frontier = nxt
    if c.dim == 0:
        found = {frozenset(): ()}
    out = []
    for s in found:
        on = [m for m, inc in zip(c.facets, c.incidence) if s <= inc]
        covector = vec_sum(on, c.dim) if on else tuple(0 for _ in range(c.dim))
        rays = tuple(c.rays[i] for i in sorted(s))
        out.append(Face(s, rays, covector, rank(rays) if rays else 0))
    out.sort(key=lambda f: (f.dim, sorted(f.indices)))
    return out


def face_of_point(c: Cone, v: Sequence) -> Face | None:
    """The minimal face containing ``v``, or None when ``v`` is outside."""
    vals = [dot(m, v) for m in c.facets]
    if any(x < 0 for x in vals):
        return None
    s = frozenset(range(len(c.rays)))
    on = []
    for m, inc, x in zip(c.facets, c.incidence, vals):
        if x == 0:
            s &= inc
            on.append(m)
    covector = vec_sum(on, c.dim) if on else tuple(0 for _ in range(c.dim))
    rays = tuple(c.rays[i] for i in sorted(s))
    return Face(s, rays, covector, rank(rays) if rays else 0)


def contains(c: Cone, v: Sequence) -> Location:
    f = face_of_point(c, v)
    if f is None:
        return Location(OUTSIDE)
    if f.dim == c.dim:
        return Location(INTERIOR)
    return Location(BOUNDARY, f)


def is_simplicial(c: Cone) -> bool:
    return len(c.rays) == c.dim


def multiplicity(c: Cone) -> int:
    """Index of the subgroup generated by the rays in the chart lattice."""
    if not is_simplicial(c):
        raise NotSimplicial(f"{len(c.rays)} rays in a rank-{c.dim} cone")
    if c.dim == 0:
        return 1
    d, _, _ = snf([list(r) for r in c.rays])
    out = 1
    for i in range(c.dim):
        out *= d[i][i]
    return abs(out)


def is_nonsingular(c: Cone) -> bool:
    return is_simplicial(c) and multiplicity(c) == 1


def gorenstein_functional(c: Cone) -> tuple | None:
    """Integral covector taking the value -1 on every ray, if one exists."""
    if c.dim == 0:
        return ()
    m = solve([list(r) for r in c.rays], [-1] * len(c.rays))
    if m is None or any(x.denominator != 1 for x in m):
        return None
    return tuple(int(x) for x in m)


def cone_generators(gens: Sequence[Sequence], dim: int) -> tuple:
    """Sorted primitive extreme rays of cone(gens) in Q^dim; the cone may be lower dimensional."""
    gens = sorted({primitive_integer(g) for g in gens if any(g)})
    if not gens:
        return ()
    k = rank(gens)
    if k == dim:
        return make_cone(gens).rays
    basis, _ = rref(gens)
    basis = [tuple(row) for row in basis[:k]]
    coords = [solve_columns(basis, g) for g in gens]
    local = make_cone(coords)
    out = []
    for r in local.rays:
        v = tuple(sum(r[j] * basis[j][i] for j in range(k)) for i in range(dim))
        out.append(primitive_integer(v))
    return tuple(sorted(out))


def triangulate(c: Cone, order: Sequence[int] | None = None) -> list[tuple]:
    """Pulling triangulation as sorted index tuples.

    Rays are pulled in ``order`` (ray indices), by default in canonical order.
    """
    if c.dim == 0:
        return [()]
    rank_of = {i: k for k, i in enumerate(order if order is not None else range(len(c.rays)))}

    def pull(indices: tuple) -> list[tuple]:
        vecs = [c.rays[i] for i in indices]
        k = rank(vecs)
        if len(indices) == k:
            return [indices]
        apex = min(indices, key=rank_of.__getitem__)
        normals = _facet_normals_within(vecs, c.dim)
        out = []
        for m in normals:
            facet = tuple(i for i in indices if dot(m, c.rays[i]) == 0)
            if apex in facet:
                continue
            for simplex in pull(facet):
                out.append(tuple(sorted((apex,) + simplex)))
        return out

    return sorted(pull(tuple(range(len(c.rays)))))


def _facet_normals_within(vecs: Sequence[Sequence], dim: int) -> list[tuple]:
    facets, _ = hrep(vecs, dim)
    return facets


def parallelepiped_points(rays: Sequence[Sequence]) -> list[tuple]:
    """Nonzero lattice points sum(l_i r_i), 0 <= l_i < 1, for a basis ``rays`` of Q^d."""
    d = len(rays)
    if d == 0:
        return []
    a = [[rays[j][i] for j in range(d)] for i in range(d)]
    diag, u, _ = snf(a)
    u_inv = inverse(u)
    a_inv = inverse(a)
    points = set()
    ranges = [range(abs(diag[i][i])) for i in range(d)]
    for t in itertools.product(*ranges):
        y = [sum(u_inv[i][k] * t[k] for k in range(d)) for i in range(d)]
        lam = [sum(a_inv[i][k] * y[k] for k in range(d)) for i in range(d)]
        lam = [x - math.floor(x) for x in lam]
        p = tuple(int(sum(a[i][k] * lam[k] for k in range(d))) for i in range(d))
        if any(p):
            points.add(p)
    return sorted(points)


def barycentric(rays: Sequence[Sequence], v: Sequence) -> tuple:
    """Coefficients of ``v`` in the basis ``rays``."""
    return solve_columns(rays, v)
