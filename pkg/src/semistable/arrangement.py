"""Projective refinements through hyperplane arrangements.

For every maximal cone sigma with a set of cutting hyperplanes H, the
function -sum |l| over H is concave on sigma and linear exactly on the
chambers. It is extended cone by cone (by increasing dimension) to the whole
complex: linearly where the boundary data allow it, otherwise by coning the
boundary cells over an interior apex whose value is chosen just large enough
to keep every new wall strictly concave. The sum of these summands is a good
function whose domains of linearity refine every hyperplane.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .complex import PolyhedralComplex
from .cone import cone_generators, face_of_point, make_cone
from .errors import SemistableError
from .linalg import dot, mat_vec, primitive_integer, rank, solve, vec_sum
from .polyhedra import extreme_rays, hrep
from .subdivide import (
    GoodFunction,
    Subdivision,
    ray_vector,
    subdivision_from_cells,
    verify_good_function,
)

__all__ = ["refine_common", "projectivize", "arrangement_subdivision"]


def _cutting(covectors: Sequence[Sequence], rays: Sequence[Sequence]) -> list[tuple]:
    """Distinct hyperplanes (up to sign) taking both signs on the given rays."""
    out = set()
    for l in covectors:
        if not any(l):
            continue
        vals = [dot(l, r) for r in rays]
        if min(vals) < 0 < max(vals):
            p = primitive_integer(l)
            if p < tuple(-x for x in p):
                p = tuple(-x for x in p)
            out.add(p)
    return sorted(out)


def _split(cells: list[tuple], l: Sequence, dim: int) -> list[tuple]:
    out = []
    neg = tuple(-x for x in l)
    for cell in cells:
        vals = [dot(l, r) for r in cell]
        if min(vals) < 0 < max(vals):
            facets = make_cone(cell, dim=dim).facets
            for side in (l, neg):
                out.append(tuple(extreme_rays(list(facets) + [side], dim)))
        else:
            out.append(cell)
    return out


def _chambers(rays: Sequence[Sequence], hyperplanes: Sequence[Sequence], dim: int) -> list[tuple]:
    cells = [tuple(rays)]
    for l in _cutting(hyperplanes, rays):
        cells = _split(cells, l, dim)
    return cells


def _abs_sum_pieces(rays: Sequence, hyperplanes: Sequence[Sequence], dim: int) -> list[tuple]:
    """Cells and covectors of -sum |l| on cone(rays) in Q^dim."""
    pieces = []
    for cell in _chambers(rays, hyperplanes, dim):
        q = vec_sum(cell, dim)
        m = [0] * dim
        for l in hyperplanes:
            v = dot(l, q)
            if v:
                sign = 1 if v > 0 else -1
                m = [a - sign * b for a, b in zip(m, l)]
        pieces.append((tuple(sorted(cell)), tuple(m)))
    return pieces


def _solve_cell(rays: Sequence[Sequence], values: Sequence) -> tuple | None:
    return solve([list(r) for r in rays], [Fraction(v) for v in values])


def _extend(c: PolyhedralComplex, eta: str, table: dict) -> list[tuple]:
    """Concave extension to eta of the function already known on its facets."""
    cone = c.cones[eta]
    dim = cone.dim
    boundary = []
    for rho in c.faces_of(eta):
        if c.cones[rho].dim != dim - 1:
            continue
        e = c.embedding(rho, eta)
        for cell, m in table[rho]:
            pts = [tuple(mat_vec(e, r)) for r in cell]
            boundary.append((tuple(pts), [dot(m, r) for r in cell]))
    rows = {}
    for pts, vals in boundary:
        for p, v in zip(pts, vals):
            rows[p] = v
    points = sorted(rows)
    linear = _solve_cell(points, [rows[p] for p in points])
    if linear is not None:
        return [(tuple(cone.rays), tuple(linear))]
    apex = primitive_integer(vec_sum(cone.rays, dim))
    parts = []
    for pts, vals in boundary:
        base = _solve_cell(list(pts) + [apex], list(vals) + [0])
        slope = _solve_cell(list(pts) + [apex], [0] * len(pts) + [1])
        parts.append((frozenset(pts), base, slope))
    lower, upper = 1, None
    for i, (pa, ba, sa) in enumerate(parts):
        for j, (pb, bb, sb) in enumerate(parts):
            if i == j:
                continue
            shared = pa & pb
            if len(shared) < dim - 2 or (dim > 2 and rank(list(shared)) != dim - 2):
                continue
            for v in pb - shared:
                a = dot(sa, v) - dot(sb, v)
                b = dot(ba, v) - dot(bb, v)
                if a > 0:
                    lower = max(lower, math.floor(-b / a) + 1)
                elif a < 0:
                    bound = math.ceil(-b / a) - 1
                    upper = bound if upper is None else min(upper, bound)
                elif b <= 0:
                    raise SemistableError(f"no concave extension over cone {eta}")
    if upper is not None and upper < lower:
        raise SemistableError(f"no concave extension over cone {eta}")
    out = []
    for pts, base, slope in parts:
        m = tuple(x + lower * y for x, y in zip(base, slope))
        out.append((tuple(sorted(pts | {apex})), m))
    return out


def _summand(c: PolyhedralComplex, sigma: str, hyperplanes: list) -> dict:
    """Cone id -> [(cell rays, covector)] for the extension of -sum |l| off sigma."""
    table: dict = {}
    for eta in c.by_dimension():
        cone = c.cones[eta]
        if cone.dim == 0:
            table[eta] = [((), ())]
        elif c.is_face(eta, sigma):
            e = c.embedding(eta, sigma)
            pulled = [tuple(sum(l[i] * e[i][j] for i in range(len(e))) for j in range(cone.dim)) for l in hyperplanes]
            table[eta] = _abs_sum_pieces(cone.rays, pulled, cone.dim)
        elif cone.dim == 1:
            table[eta] = [(tuple(cone.rays), (0,))]
        else:
            table[eta] = _extend(c, eta, table)
    return table


def _add(a: list, b: list, dim: int) -> list:
    out = []
    for ca, ma in a:
        fa = make_cone(ca, dim=dim).facets
        for cb, mb in b:
            fb = make_cone(cb, dim=dim).facets
            rays = extreme_rays(list(fa) + list(fb), dim)
            if rays and rank(rays) == dim:
                out.append((tuple(rays), tuple(x + y for x, y in zip(ma, mb))))
    return out


def _merge(pieces: list, dim: int) -> list:
    groups: dict = {}
    for cell, m in pieces:
        groups.setdefault(m, set()).update(cell)
    return [(make_cone(sorted(rays), dim=dim).rays, m) for m, rays in groups.items()]


def arrangement_subdivision(c: PolyhedralComplex, hyperplanes: dict) -> tuple[Subdivision, GoodFunction]:
    """Coarsest output of the construction: cells are the linearity domains of the sum."""
    summands = []
    for sigma in c.maximal():
        cone = c.cones[sigma]
        hs = _cutting(hyperplanes.get(sigma, []), cone.rays)
        if hs:
            summands.append(_summand(c, sigma, hs))
    totals = {}
    for sigma in c.maximal():
        cone = c.cones[sigma]
        total = [(tuple(cone.rays), tuple(0 for _ in range(cone.dim)))]
        for table in summands:
            total = _merge(_add(total, table[sigma], cone.dim), cone.dim)
        totals[sigma] = total
    cells = {sigma: [cell for cell, _ in total] for sigma, total in totals.items()}
    s = subdivision_from_cells(c, cells)
    values = {}
    for r in s.refined.ray_ids():
        beta = s.carrier[r][0]
        v = ray_vector(s, r)
        sigma = next(x for x in c.maximal() if c.is_face(beta, x))
        w = mat_vec(c.embedding(beta, sigma), v)
        values[r] = Fraction(min(dot(m, w) for _, m in totals[sigma]))
    psi = GoodFunction(s, values)
    ok, witness = verify_good_function(s, psi)
    if not ok:
        raise SemistableError(f"arrangement function failed verification: {witness}")
    return s, psi


def _walls_of(rays: Sequence[Sequence], dim: int) -> list[tuple]:
    facets, equations = hrep(rays, dim)
    return list(facets) + list(equations)


def _is_face(cone, pts: Sequence[Sequence]) -> bool:
    f = face_of_point(cone, vec_sum(pts, cone.dim))
    return f is not None and set(cone_generators(pts, cone.dim)) == set(f.rays)


def refine_common(c: PolyhedralComplex, pieces: dict) -> Subdivision:
    """Projective subdivision refining every given piece.

    ``pieces[beta]`` lists cones (ray lists in the chart of beta) inside
    cone beta; each must become a union of cells.
    """
    return refine_common_with_function(c, pieces)[0]


def refine_common_with_function(c: PolyhedralComplex, pieces: dict) -> tuple[Subdivision, GoodFunction]:
    hyperplanes: dict = {sigma: [] for sigma in c.maximal()}
    for beta, plist in pieces.items():
        for sigma in c.maximal():
            if not c.is_face(beta, sigma):
                continue
            e = c.embedding(beta, sigma)
            dim = c.cones[sigma].dim
            for piece in plist:
                pts = [tuple(mat_vec(e, r)) for r in piece]
                if any(any(p) for p in pts) and not _is_face(c.cones[sigma], pts):
                    hyperplanes[sigma].extend(_walls_of(pts, dim))
    return arrangement_subdivision(c, hyperplanes)


def projectivize(c: PolyhedralComplex, s: Subdivision) -> tuple[Subdivision, GoodFunction]:
    """A projective subdivision refining s, with its good function."""
    if s.base != c:
        raise SemistableError("subdivision is not of the given complex")
    hyperplanes = {}
    for sigma, cells in s.cells().items():
        dim = c.cones[sigma].dim
        hyperplanes[sigma] = [m for cell in cells for m in make_cone(cell, dim=dim).facets]
    return arrangement_subdivision(c, hyperplanes)
