"""Subdivisions of complexes, good functions, and refinement algorithms.

A subdivision is stored by its refined complex plus, for every refined cone,
its carrier: the minimal base cone containing it and the integral chart map
into that base cone. Subdivisions are built from their maximal cells, given
per maximal base cone in that cone's chart; refined cones equal to a base
cone keep the base id, the others are named ``<carrier>.<k>``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .complex import (
    ComplexMorphism,
    PolyhedralComplex,
    Violation,
    id_key,
    make_morphism,
    pull_back,
    solve_matrix,
    sorted_ids,
    span_chart,
    validate_complex,
)
from .cone import (
    INTERIOR,
    OUTSIDE,
    Cone,
    contains,
    face_of_point,
    faces,
    is_simplicial,
    make_cone,
    multiplicity,
    parallelepiped_points,
    triangulate,
)
from .errors import InvalidComplex, PointOnBoundary, PointOutside, SemistableError
from .lattice import snf
from .linalg import (
    dot,
    from_columns,
    identity,
    inverse,
    mat_mul,
    mat_vec,
    primitive_integer,
    rank,
    solve,
    solve_columns,
    vec_sum,
)
from .polyhedra import extreme_rays

__all__ = [
    "Subdivision",
    "GoodFunction",
    "subdivision_from_cells",
    "identity_subdivision",
    "check_subdivision",
    "verify_good_function",
    "star_subdivision",
    "pull_simplicialize",
    "nonsingular_subdivision",
    "compose",
    "compose_good",
    "induced_subdivision",
    "lift_morphism",
    "pull_back_good",
    "ray_vector",
    "zero_function",
]


@dataclass
class Subdivision:
    base: PolyhedralComplex
    refined: PolyhedralComplex
    carrier: dict
    keys: dict

    def __post_init__(self):
        self._by_carrier: dict = {}
        for rid, (beta, _) in self.carrier.items():
            self._by_carrier.setdefault(beta, []).append(rid)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subdivision)
            and self.base == other.base
            and self.refined == other.refined
            and self.carrier == other.carrier
        )

    def refined_in(self, beta: str) -> list[str]:
        """Refined cones whose relative interior lies in that of ``beta``."""
        return self._by_carrier.get(beta, [])

    def to_base(self, rid: str, sigma: str) -> tuple:
        """Matrix chart(rid) -> chart(sigma) for a base cone sigma containing rid."""
        beta, c = self.carrier[rid]
        e = self.base.embedding(beta, sigma)
        return tuple(tuple(r) for r in mat_mul(e, c, self.refined.cones[rid].dim)) if c else c

    def cells(self) -> dict:
        """Maximal cells per maximal base cone, as sorted ray tuples in its chart."""
        out = {}
        for sigma in self.base.maximal():
            dim = self.base.cones[sigma].dim
            cells = []
            for rid in self.refined_in(sigma):
                cone = self.refined.cones[rid]
                if cone.dim == dim:
                    c = self.carrier[rid][1]
                    cells.append(tuple(sorted(tuple(mat_vec(c, r)) for r in cone.rays)))
            out[sigma] = sorted(cells)
        return out

    def locate(self, beta: str, v: Sequence) -> tuple[str, tuple]:
        """Refined cone whose relative interior holds ``v`` (chart of beta), with coordinates."""
        gamma = self.base.minimal_face(beta, v)
        if gamma is None:
            raise PointOutside(f"{tuple(v)} is outside cone {beta}")
        y = pull_back(self.base.embedding(gamma, beta), v) if gamma != beta else tuple(v)
        for rid in self.refined_in(gamma):
            cone = self.refined.cones[rid]
            c = self.carrier[rid][1]
            z = pull_back(c, y) if cone.dim else (() if not any(y) else None)
            if z is None:
                continue
            if cone.dim == 0 or contains(cone, z).kind == INTERIOR:
                return rid, z
        raise InvalidComplex(f"no refined cone of {gamma} holds {tuple(v)}")

    def is_identity(self) -> bool:
        return set(self.refined.cones) == set(self.base.cones) and all(
            beta == rid for rid, (beta, _) in self.carrier.items()
        )


def _face_key(base: PolyhedralComplex, sigma: str, rays: Sequence) -> tuple:
    cs = base.cones[sigma]
    if not rays:
        return (base.zero_id, frozenset())
    beta = base.minimal_face(sigma, vec_sum(rays, cs.dim))
    if beta is None:
        raise InvalidComplex(f"cell ray outside base cone {sigma}")
    e = base.embedding(beta, sigma)
    coords = []
    for r in rays:
        y = pull_back(e, r) if beta != sigma else tuple(r)
        if y is None or any(getattr(x, "denominator", 1) != 1 for x in y):
            raise InvalidComplex(f"ray {tuple(r)} is not a lattice point of {beta}")
        coords.append(tuple(int(x) for x in y))
    return (beta, frozenset(coords))


def subdivision_from_cells(base: PolyhedralComplex, cells: dict) -> Subdivision:
    """Canonical subdivision whose maximal cells over each maximal base cone are given.

    ``cells[sigma]`` lists ray lists in the chart of sigma; missing entries
    keep sigma whole.
    """
    keys: dict = {}
    pairs: set = set()
    for sigma in base.maximal():
        cs = base.cones[sigma]
        for cell in cells.get(sigma, [cs.rays]):
            cc = make_cone(cell, dim=cs.dim) if cs.dim else cs
            fkeys = []
            for face in faces(cc):
                key = _face_key(base, sigma, face.rays)
                keys.setdefault(key, None)
                fkeys.append((face.indices, key))
            for (i1, k1), (i2, k2) in itertools.permutations(fkeys, 2):
                if i1 < i2:
                    pairs.add((k1, k2))
    names: dict = {}
    charts: dict = {}
    cones: dict = {}
    by_beta: dict = {}
    for key in keys:
        by_beta.setdefault(key[0], []).append(key)
    for beta in sorted_ids(by_beta):
        bdim = base.cones[beta].dim
        brays = set(base.cones[beta].rays)
        ordered = sorted(by_beta[beta], key=lambda k: (rank(sorted(k[1])) if k[1] else 0, sorted(k[1])))
        counter = 0
        for key in ordered:
            rays = sorted(key[1])
            k = rank(rays) if rays else 0
            if k == bdim:
                chart = tuple(tuple(r) for r in identity(bdim))
                cone = make_cone(rays, dim=bdim) if bdim else base.cones[beta]
            else:
                cols = span_chart(rays, bdim)
                chart = tuple(tuple(row) for row in from_columns(cols, bdim))
                cone = make_cone([solve_columns(cols, r) for r in rays], dim=k)
            if k == bdim and set(rays) == brays:
                name = beta
            else:
                name = f"{beta}.{counter}"
                counter += 1
            names[key] = name
            charts[name] = (beta, chart)
            cones[name] = cone
    embeddings = {}
    for k1, k2 in pairs:
        n1, n2 = names[k1], names[k2]
        b1, c1 = charts[n1]
        b2, c2 = charts[n2]
        into = mat_mul(base.embedding(b1, b2), c1, cones[n1].dim) if cones[n1].dim else []
        if cones[n1].dim:
            e = solve_matrix(c2, into, cones[n1].dim)
            if e is None:
                raise InvalidComplex(f"cell {n1} is not a lattice face of {n2}")
        else:
            e = tuple(() for _ in range(cones[n2].dim))
        embeddings[(n1, n2)] = e
    refined = PolyhedralComplex(cones, embeddings)
    carrier = {n: charts[n] for n in refined.cones}
    return Subdivision(base, refined, carrier, {names[k]: k for k in names})


def identity_subdivision(c: PolyhedralComplex) -> Subdivision:
    return subdivision_from_cells(c, {})


def check_subdivision(s: Subdivision) -> list[Violation]:
    """Structural, lattice and cover/disjointness invariants."""
    out = list(validate_complex(s.refined))
    if out:
        return out
    for rid, (beta, c) in s.carrier.items():
        cone = s.refined.cones[rid]
        bcone = s.base.cones[beta]
        if cone.dim:
            d, _, _ = snf(c)
            if any(abs(d[i][i]) != 1 for i in range(cone.dim)):
                out.append(Violation("lattice", (rid,), "refined lattice is not the saturated base lattice"))
            pt = mat_vec(c, cone.interior_point())
            f = face_of_point(bcone, pt)
            if f is None or f.dim != bcone.dim or not all(bcone.holds(mat_vec(c, r)) for r in cone.rays):
                out.append(Violation("carrier", (rid, beta), "refined cone is not carried by its base cone"))
    for (rho, pi), e in s.refined.embeddings.items():
        lhs = mat_mul(s.to_base(pi, s.carrier[pi][0]), e, s.refined.cones[rho].dim) if s.refined.cones[rho].dim else None
        if lhs is None:
            continue
        rhs = s.to_base(rho, s.carrier[pi][0]) if s.base.is_face(s.carrier[rho][0], s.carrier[pi][0]) else None
        if rhs is None or [list(r) for r in lhs] != [list(r) for r in rhs]:
            out.append(Violation("carrier-compatibility", (rho, pi), "embedding disagrees with carriers"))
    for sigma in s.base.maximal():
        out.extend(_check_cover(s, sigma))
    return out


def _check_cover(s: Subdivision, sigma: str) -> list[Violation]:
    cs = s.base.cones[sigma]
    if cs.dim == 0:
        return []
    cells = [(rid, tuple(tuple(mat_vec(s.carrier[rid][1], r)) for r in s.refined.cones[rid].rays)) for rid in s.refined_in(sigma) if s.refined.cones[rid].dim == cs.dim]
    out = []
    if not cells:
        return [Violation("cover", (sigma,), "no cells over base cone")]
    cones = {rid: make_cone(rays, dim=cs.dim) for rid, rays in cells}
    for (a, ra), (b, rb) in itertools.combinations(cells, 2):
        meet = extreme_rays(list(cones[a].facets) + list(cones[b].facets), cs.dim)
        if meet and rank(meet) == cs.dim:
            out.append(Violation("overlap", (a, b), "cells overlap in their interiors"))
    facet_owners: dict = {}
    for rid, rays in cells:
        cone = cones[rid]
        for inc in cone.incidence:
            fr = frozenset(cone.rays[i] for i in inc)
            on_boundary = any(all(dot(m, r) == 0 for r in fr) for m in cs.facets)
            if not on_boundary:
                facet_owners.setdefault(fr, []).append(rid)
    for fr, owners in facet_owners.items():
        if len(owners) != 2:
            out.append(Violation("cover", tuple(owners), f"interior facet {sorted(fr)} has {len(owners)} cells"))
    return out


@dataclass
class GoodFunction:
    """Piecewise linear function given by its values on the refined rays."""

    subdivision: Subdivision
    values: dict

    def covector(self, rid: str) -> tuple | None:
        """The linear function on refined cone ``rid`` in its own chart."""
        ref = self.subdivision.refined
        cone = ref.cones[rid]
        if cone.dim == 0:
            return ()
        rows, rhs = [], []
        for ray_id, v in ref.rays_in(rid):
            rows.append(list(v))
            rhs.append(Fraction(self.values[ray_id]))
        m = solve(rows, rhs)
        if m is None:
            return None
        return tuple(m)

    def covector_on_base(self, rid: str, sigma: str) -> tuple | None:
        """Covector of the full dimensional piece ``rid`` in the chart of base cone sigma."""
        m = self.covector(rid)
        if m is None:
            return None
        return _through(m, self.subdivision.to_base(rid, sigma))

    def value_at(self, beta: str, v: Sequence) -> Fraction:
        rid, z = self.subdivision.locate(beta, v)
        m = self.covector(rid)
        if m is None:
            raise InvalidComplex(f"good function is not linear on {rid}")
        return Fraction(dot(m, z))

    def pieces(self) -> dict:
        """Per maximal base cone: (cell id, covector in the base chart)."""
        out = {}
        for sigma in self.subdivision.base.maximal():
            dim = self.subdivision.base.cones[sigma].dim
            rows = []
            for rid in self.subdivision.refined_in(sigma):
                if self.subdivision.refined.cones[rid].dim == dim:
                    rows.append((rid, self.covector_on_base(rid, sigma)))
            out[sigma] = sorted(rows, key=lambda t: id_key(t[0]))
        return out


def _through(m: Sequence, a: Sequence[Sequence]) -> tuple:
    """The covector m . a^-1 for a square chart map a."""
    if not a:
        return ()
    a_inv = inverse([list(r) for r in a])
    return tuple(sum(m[k] * a_inv[k][j] for k in range(len(m))) for j in range(len(a)))


def ray_vector(s: Subdivision, r: str) -> tuple:
    """A refined ray as a vector in the chart of its carrier."""
    return tuple(mat_vec(s.carrier[r][1], s.refined.cones[r].rays[0]))


def zero_function(s: Subdivision) -> GoodFunction:
    return GoodFunction(s, {r: Fraction(0) for r in s.refined.ray_ids()})


def verify_good_function(s: Subdivision, psi: GoodFunction) -> tuple[bool, dict | None]:
    """Exact check that psi is a good function whose linear pieces are the cells of s."""
    ref = s.refined
    for r in ref.ray_ids():
        if r not in psi.values:
            return False, {"reason": "missing value", "ray": r}
        if not isinstance(psi.values[r], (int, Fraction)):
            return False, {"reason": "non-rational value", "ray": r}
    covectors = {}
    for rid in ref.cones:
        m = psi.covector(rid)
        if m is None:
            return False, {"reason": "not linear on cell", "cell": rid}
        covectors[rid] = m
    for beta in s.base.cones:
        bdim = s.base.cones[beta].dim
        if bdim < 2:
            continue
        cells = [r for r in s.refined_in(beta) if ref.cones[r].dim == bdim]
        walls = [r for r in s.refined_in(beta) if ref.cones[r].dim == bdim - 1]
        for w in walls:
            sides = [p for p in ref.parents_of(w) if p in cells]
            if len(sides) != 2:
                return False, {"reason": "wall without two cells", "base": beta, "wall": w}
            c1, c2 = sides
            m1 = _through(covectors[c1], s.carrier[c1][1])
            m2 = _through(covectors[c2], s.carrier[c2][1])
            wall_rays = {tuple(mat_vec(s.carrier[w][1], r)) for r in ref.cones[w].rays}
            for here, there, mh, mt in ((c1, c2, m1, m2), (c2, c1, m2, m1)):
                for r in ref.cones[there].rays:
                    v = tuple(mat_vec(s.carrier[there][1], r))
                    if v in wall_rays:
                        continue
                    if dot(mh, v) - dot(mt, v) <= 0:
                        return False, {"reason": "not strictly concave across wall", "base": beta, "wall": w, "cells": [here, there]}
    return True, None


def _check_point(c: PolyhedralComplex, cone_id: str, point: Sequence) -> tuple:
    if cone_id not in c.cones:
        raise PointOutside(f"unknown cone {cone_id}")
    cone = c.cones[cone_id]
    if len(point) != cone.dim or cone.dim == 0 or not any(point):
        raise PointOutside(f"{tuple(point)} is not a nonzero point of the chart of {cone_id}")
    loc = contains(cone, point)
    if loc.kind == OUTSIDE:
        raise PointOutside(f"{tuple(point)} is outside {cone_id}")
    if loc.kind != INTERIOR:
        raise PointOnBoundary(f"{tuple(point)} lies on a proper face of {cone_id}; name that face")
    return primitive_integer(point)


def star_subdivision(c: PolyhedralComplex, cone_id: str, point: Sequence) -> tuple[Subdivision, GoodFunction]:
    """Star subdivision at the ray through a relative-interior point of ``cone_id``."""
    p = _check_point(c, cone_id, point)
    cells = {}
    for sigma in c.maximal():
        cs = c.cones[sigma]
        if not c.is_face(cone_id, sigma):
            continue
        ps = tuple(mat_vec(c.embedding(cone_id, sigma), p))
        new = []
        for m, inc in zip(cs.facets, cs.incidence):
            if dot(m, ps) > 0:
                new.append(tuple(cs.rays[i] for i in sorted(inc)) + (ps,))
        cells[sigma] = new
    s = subdivision_from_cells(c, cells)
    new_ray, _ = s.locate(cone_id, p)
    values = {r: Fraction(int(r == new_ray)) for r in s.refined.ray_ids()}
    return s, GoodFunction(s, values)


def compose(outer: Subdivision, inner: Subdivision) -> Subdivision:
    """The subdivision of inner.base whose cells are those of ``outer``."""
    if outer.base != inner.refined:
        raise InvalidComplex("outer subdivision does not refine the inner one")
    outer_cells = outer.cells()
    cells = {}
    for sigma in inner.base.maximal():
        dim = inner.base.cones[sigma].dim
        out = []
        for rid in inner.refined_in(sigma):
            if inner.refined.cones[rid].dim != dim:
                continue
            a = inner.carrier[rid][1]
            for cell in outer_cells.get(rid, []):
                out.append([tuple(mat_vec(a, r)) for r in cell])
        cells[sigma] = out
    return subdivision_from_cells(inner.base, cells)


def compose_good(
    inner: Subdivision,
    psi_inner: GoodFunction,
    outer: Subdivision,
    psi_outer: GoodFunction,
    composite: Subdivision,
    max_halvings: int = 64,
) -> GoodFunction:
    """psi_inner + eps * psi_outer on the composite, halving eps until it verifies."""
    first, second = {}, {}
    for r in composite.refined.ray_ids():
        beta = composite.carrier[r][0]
        v = ray_vector(composite, r)
        first[r] = psi_inner.value_at(beta, v)
        mid, z = inner.locate(beta, v)
        second[r] = psi_outer.value_at(mid, z)
    eps = Fraction(1)
    for _ in range(max_halvings):
        psi = GoodFunction(composite, {r: first[r] + eps * second[r] for r in first})
        if verify_good_function(composite, psi)[0]:
            return psi
        eps /= 2
    raise SemistableError("could not combine good functions")


def pull_simplicialize(c: PolyhedralComplex, max_halvings: int = 64) -> tuple[Subdivision, GoodFunction]:
    """Triangulate without new rays by pulling rays in canonical order.

    Pulling every ray in turn is local to each cone, so the cells are the
    pulling triangulations of the maximal cones with the induced order. The
    good function is sum eps^i over the pulled rays, with eps halved until it
    verifies.
    """
    order = {r: i for i, r in enumerate(sorted_ids(c.ray_ids()))}
    cells = {}
    pulled = set()
    for sigma in c.maximal():
        cone = c.cones[sigma]
        if is_simplicial(cone):
            continue
        ids = {v: r for r, v in c.rays_in(sigma)}
        ranks = [order[ids[v]] for v in cone.rays]
        by_rank = sorted(range(len(cone.rays)), key=ranks.__getitem__)
        cells[sigma] = [[cone.rays[i] for i in simplex] for simplex in triangulate(cone, by_rank)]
        pulled.update(ids.values())
    s = subdivision_from_cells(c, cells)
    if not pulled:
        return s, zero_function(s)
    steps = {r: i for i, r in enumerate(sorted_ids(pulled))}
    eps = Fraction(1, 2)
    for _ in range(max_halvings):
        values = {}
        for r in s.refined.ray_ids():
            beta = s.carrier[r][0]
            values[r] = eps ** steps[beta] if beta in steps else Fraction(0)
        psi = GoodFunction(s, values)
        if verify_good_function(s, psi)[0]:
            return s, psi
        eps /= 2
    raise SemistableError("could not certify the pulling triangulation")


def _resolution_point(cone: Cone) -> tuple:
    best = None
    for p in parallelepiped_points(cone.rays):
        lam = solve_columns(cone.rays, p)
        key = (sum(lam), p)
        if best is None or key < best:
            best = key
    return best[1]


def nonsingular_subdivision(c: PolyhedralComplex, max_steps: int = 10_000) -> tuple[Subdivision, GoodFunction]:
    """Pull to a triangulation, then star singular cells at minimal parallelepiped points."""
    sub, psi = pull_simplicialize(c)
    for _ in range(max_steps):
        singular = [
            rid for rid, cone in sub.refined.cones.items() if cone.dim > 1 and multiplicity(cone) > 1
        ]
        if not singular:
            return sub, psi
        rid = min(singular, key=lambda r: (sub.refined.cones[r].dim, id_key(r)))
        p = _resolution_point(sub.refined.cones[rid])
        step, step_psi = star_subdivision(sub.refined, rid, p)
        comp = compose(step, sub)
        psi = compose_good(sub, psi, step, step_psi, comp)
        sub = comp
    raise SemistableError("resolution did not terminate")


def _target_cells(s: Subdivision, tau: str) -> list[Cone]:
    dim = s.base.cones[tau].dim
    out = []
    for rid in s.refined_in(tau):
        cone = s.refined.cones[rid]
        if cone.dim == dim:
            c = s.carrier[rid][1]
            out.append(make_cone([tuple(mat_vec(c, r)) for r in cone.rays], dim=dim))
    return out


def induced_subdivision(f: ComplexMorphism, s: Subdivision) -> tuple[Subdivision, ComplexMorphism]:
    """Source cells sigma ∩ f^-1(tau') for the cells tau' of a target subdivision."""
    if s.base != f.target:
        raise InvalidComplex("subdivision does not refine the morphism's target")
    cells = {}
    for sigma in f.source.maximal():
        cs = f.source.cones[sigma]
        tau = f.assignment[sigma]
        if f.target.cones[tau].dim == 0 or cs.dim == 0:
            continue
        m = f.matrices[sigma]
        pieces = []
        for cell in _target_cells(s, tau):
            pulled = [tuple(sum(l[i] * m[i][j] for i in range(len(m))) for j in range(cs.dim)) for l in cell.facets]
            rays = extreme_rays(list(cs.facets) + pulled, cs.dim)
            if rays and rank(rays) == cs.dim:
                pieces.append(tuple(sorted(rays)))
        cells[sigma] = sorted(set(pieces))
    src = subdivision_from_cells(f.source, cells)
    return src, lift_morphism(f, src, s)


def lift_morphism(f: ComplexMorphism, source_sub: Subdivision, target_sub: Subdivision) -> ComplexMorphism:
    """The morphism between refined complexes induced by f, if cells map into cells."""
    assignment, matrices = {}, {}
    for rid, cone in source_sub.refined.cones.items():
        beta, c = source_sub.carrier[rid]
        tau = f.assignment[beta]
        a = mat_mul(f.matrices[beta], c, cone.dim) if cone.dim else [[] for _ in range(f.target.cones[tau].dim)]
        images = [tuple(mat_vec(a, r)) for r in cone.rays]
        point = vec_sum(images, f.target.cones[tau].dim)
        tid, _ = target_sub.locate(tau, point)
        gamma, d = target_sub.carrier[tid]
        k = target_sub.base.embedding(gamma, tau)
        kd = mat_mul(k, d, target_sub.refined.cones[tid].dim) if target_sub.refined.cones[tid].dim else []
        mat = solve_matrix(kd, a, cone.dim) if cone.dim else ()
        if mat is None:
            raise InvalidComplex(f"image of {rid} is not a lattice map into {tid}")
        assignment[rid] = tid
        matrices[rid] = mat
    return make_morphism(source_sub.refined, target_sub.refined, assignment, matrices)


def pull_back_good(f: ComplexMorphism, source_sub: Subdivision, psi: GoodFunction) -> GoodFunction:
    """psi composed with f, as a function on the source subdivision."""
    values = {}
    for r in source_sub.refined.ray_ids():
        beta = source_sub.carrier[r][0]
        v = ray_vector(source_sub, r)
        values[r] = psi.value_at(f.assignment[beta], tuple(mat_vec(f.matrices[beta], v)))
    return GoodFunction(source_sub, values)
