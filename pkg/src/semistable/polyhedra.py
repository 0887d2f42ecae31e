"""Double description for pointed rational cones.

``extreme_rays`` converts an inequality description {x : A x >= 0} into
generators; ``hrep`` goes the other way by dualising.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import NotStrictlyConvex
from .linalg import (
    dot,
    frac_vector,
    inverse,
    nullspace,
    primitive_integer,
    rank,
    rref,
)


def _independent_rows(rows: Sequence[Sequence], dim: int) -> list[int]:
    chosen: list[int] = []
    basis: list = []
    for i, row in enumerate(rows):
        if not any(row):
            continue
        if rank(basis + [list(row)]) > len(basis):
            basis.append(list(row))
            chosen.append(i)
            if len(chosen) == dim:
                break
    return chosen


def extreme_rays(ineqs: Sequence[Sequence], dim: int) -> list[tuple]:
    """Primitive extreme rays of {x in Q^dim : a.x >= 0 for every a in ineqs}.

    The system must have full column rank (a pointed cone); otherwise
    NotStrictlyConvex is raised.
    """
    if dim == 0:
        return []
    a = [frac_vector(r) for r in ineqs]
    basis_rows = _independent_rows(a, dim)
    if len(basis_rows) < dim:
        raise NotStrictlyConvex("inequality system has a nontrivial lineality space")
    inv = inverse([list(a[i]) for i in basis_rows])
    rays = []
    for j in range(dim):
        r = tuple(inv[i][j] for i in range(dim))
        zeros = frozenset(basis_rows[k] for k in range(dim) if k != j)
        rays.append((primitive_integer(r), zeros))
    in_basis = set(basis_rows)
    for idx, row in enumerate(a):
        if idx in in_basis:
            continue
        pos, neg, new = [], [], []
        for r, z in rays:
            v = dot(row, r)
            if v > 0:
                pos.append((r, z, v))
                new.append((r, z))
            elif v < 0:
                neg.append((r, z, v))
            else:
                new.append((r, z | {idx}))
        for p, zp, vp in pos:
            for n, zn, vn in neg:
                common = zp & zn
                if len(common) < dim - 2:
                    continue
                if dim > 2 and rank([list(a[c]) for c in common]) != dim - 2:
                    continue
                if dim == 2 and any(any(a[c]) for c in common):
                    continue
                r = tuple(vp * y - vn * x for x, y in zip(p, n))
                new.append((primitive_integer(r), common | {idx}))
        rays = new
    return sorted({r for r, _ in rays})


def _left_inverse(basis_cols: Sequence[Sequence], dim: int) -> list:
    """k x dim matrix L with L @ B = I for the dim x k matrix B of ``basis_cols``."""
    k = len(basis_cols)
    b_rows = [[basis_cols[j][i] for j in range(k)] for i in range(dim)]
    _, pivots = rref([list(col) for col in basis_cols])
    # pivot positions of the transposed system pick k independent rows of B
    rows = pivots
    sub_inv = inverse([b_rows[i] for i in rows])
    left = [[Fraction(0)] * dim for _ in range(k)]
    for jj, i in enumerate(rows):
        for r in range(k):
            left[r][i] = sub_inv[r][jj]
    return left


def span_equations(vectors: Sequence[Sequence], dim: int) -> list[tuple]:
    """Primitive integer covectors cutting out span(vectors)."""
    if not vectors:
        return [tuple(int(i == j) for i in range(dim)) for j in range(dim)]
    return [primitive_integer(v) for v in nullspace([list(v) for v in vectors], dim)]


def hrep(rays: Sequence[Sequence], dim: int) -> tuple[list[tuple], list[tuple]]:
    """(facet normals, equations) of cone(rays) inside Q^dim.

    Facet normals are nonnegative on the cone; equations vanish on its span.
    For a cone that is not full dimensional the facet normals are lifted
    through a fixed left inverse of a span basis.
    """
    rays = [frac_vector(r) for r in rays if any(r)]
    equations = span_equations(rays, dim)
    if not rays:
        return [], equations
    k = dim - len(equations)
    if k == dim:
        return extreme_rays(rays, dim), equations
    span_rows, _ = rref([list(r) for r in rays])
    basis = [tuple(row) for row in span_rows[:k]]
    left = _left_inverse(basis, dim)
    coords = [tuple(sum(left[i][j] * r[j] for j in range(dim)) for i in range(k)) for r in rays]
    normals = extreme_rays(coords, k)
    lifted = []
    for nu in normals:
        m = tuple(sum(nu[i] * left[i][j] for i in range(k)) for j in range(dim))
        lifted.append(primitive_integer(m))
    return lifted, equations


def cone_constraints(rays: Sequence[Sequence], dim: int) -> list[tuple]:
    """Inequalities (equations doubled) describing cone(rays) in Q^dim."""
    facets, equations = hrep(rays, dim)
    out = list(facets)
    for e in equations:
        out.append(tuple(e))
        out.append(tuple(-x for x in e))
    return out


def in_cone(constraints: Sequence[Sequence], v: Sequence) -> bool:
    return all(dot(c, v) >= 0 for c in constraints)


def intersect(rays_a: Sequence[Sequence], rays_b: Sequence[Sequence], dim: int) -> list[tuple]:
    """Extreme rays of cone(rays_a) ∩ cone(rays_b); both cones pointed."""
    cons = cone_constraints(rays_a, dim) + cone_constraints(rays_b, dim)
    return extreme_rays(cons, dim)
