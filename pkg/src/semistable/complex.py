"""Abstract polyhedral complexes, morphisms between them, and their checkers.

A complex is a set of cones, each full dimensional in its own chart, glued by
integral face embeddings ``(face, parent) -> matrix``. Embeddings are stored
for every proper face pair, including the zero cone, so composition is a
lookup.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .cone import (
    Cone,
    cone_generators,
    face_of_point,
    faces,
    is_nonsingular,
    is_simplicial,
    make_cone,
    multiplicity,
    parallelepiped_points,
    triangulate,
)
from .errors import InvalidComplex, NotAFan, PreconditionFailed, RankMismatch
from .lattice import Lattice, integer_solutions, lattice_index, saturated_basis, snf
from .linalg import (
    dot,
    identity,
    inverse,
    mat_mul,
    mat_vec,
    normalize_matrix,
    primitive_integer,
    rank,
    rref,
    solve,
    solve_columns,
    vec_sum,
)
from .polyhedra import intersect

ZERO_ID = "o"

LEVELS = (
    "not-equidimensional",
    "equidimensional",
    "weakly-semistable",
    "almost-semistable",
    "semistable",
)


def id_key(cone_id: str) -> tuple:
    """Natural sort key: digit runs compare numerically."""
    parts = re.split(r"(\d+)", cone_id)
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts if p)


def sorted_ids(ids: Iterable[str]) -> list[str]:
    return sorted(ids, key=id_key)


def int_mat(m: Sequence[Sequence], rows: int) -> tuple:
    """Immutable integer matrix; ``rows`` fixes the shape of column-less matrices."""
    out = normalize_matrix(m)
    if not out and rows:
        return tuple(() for _ in range(rows))
    for row in out:
        for x in row:
            if not isinstance(x, int):
                raise InvalidComplex(f"non-integral matrix entry {x}")
    return out


def solve_matrix(e: Sequence[Sequence], m: Sequence[Sequence], ncols: int) -> tuple | None:
    """Integer Y with e Y = m, column by column; None if impossible."""
    cols = []
    for j in range(ncols):
        col = [row[j] for row in m]
        y = solve(e, col) if e else ()
        if y is None or (e and tuple(mat_vec(e, y)) != tuple(col)):
            return None
        if any(x.denominator != 1 for x in y):
            return None
        cols.append([int(x) for x in y])
    k = len(e[0]) if e and e[0] else 0
    if not cols:
        return tuple(() for _ in range(k))
    return tuple(tuple(cols[j][i] for j in range(ncols)) for i in range(k))


def pull_back(e: Sequence[Sequence], v: Sequence) -> tuple | None:
    """Rational y with e y = v, or None when v is outside the image of e."""
    if not e or not e[0]:
        return () if not any(v) else None
    y = solve(e, v)
    if y is None or tuple(mat_vec(e, y)) != tuple(v):
        return None
    return y


class Violation(NamedTuple):
    code: str
    ids: tuple
    message: str


@dataclass
class Check:
    """Outcome of a checker; falsy when the property fails."""

    ok: bool
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.ok


class PolyhedralComplex:
    """Cones keyed by id plus face embeddings chart(face) -> chart(parent).

    ``charts`` optionally records, for complexes built by ``fan``, the
    ambient basis columns of each cone's chart.
    """

    def __init__(
        self,
        cones: dict,
        embeddings: dict,
        charts: dict | None = None,
        ambient_dim: int | None = None,
    ):
        self.cones = {k: cones[k] for k in sorted_ids(cones)}
        self.embeddings = {
            key: int_mat(m, self.cones[key[1]].dim) for key, m in sorted(embeddings.items(), key=lambda kv: (id_key(kv[0][1]), id_key(kv[0][0])))
        }
        self.charts = charts
        self.ambient_dim = ambient_dim
        self._faces: dict = {k: [] for k in self.cones}
        self._parents: dict = {k: [] for k in self.cones}
        for (rho, sigma) in self.embeddings:
            self._faces[sigma].append(rho)
            self._parents[rho].append(sigma)
        self._lookup: dict | None = None

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolyhedralComplex)
            and self.cones == other.cones
            and self.embeddings == other.embeddings
        )

    def __hash__(self):
        return hash(tuple(self.cones.items()))

    def __repr__(self) -> str:
        return f"PolyhedralComplex({len(self.cones)} cones)"

    @property
    def zero_id(self) -> str:
        zeros = [k for k, c in self.cones.items() if c.dim == 0]
        if len(zeros) != 1:
            raise InvalidComplex("complex needs exactly one zero cone")
        return zeros[0]

    def faces_of(self, sigma: str) -> list[str]:
        """Proper faces of ``sigma``."""
        return sorted_ids(self._faces[sigma])

    def parents_of(self, rho: str) -> list[str]:
        return sorted_ids(self._parents[rho])

    def is_face(self, rho: str, sigma: str) -> bool:
        return rho == sigma or (rho, sigma) in self.embeddings

    def embedding(self, rho: str, sigma: str) -> tuple:
        if rho == sigma:
            return tuple(tuple(r) for r in identity(self.cones[sigma].dim))
        return self.embeddings[(rho, sigma)]

    def maximal(self) -> list[str]:
        return [k for k in self.cones if not self._parents[k]]

    def ray_ids(self) -> list[str]:
        return [k for k, c in self.cones.items() if c.dim == 1]

    def by_dimension(self) -> list[str]:
        return sorted(self.cones, key=lambda k: (self.cones[k].dim, id_key(k)))

    def _build_lookup(self) -> dict:
        lookup: dict = {}
        for sigma, c in self.cones.items():
            table = {frozenset(range(len(c.rays))): sigma}
            for rho in self._faces[sigma]:
                e = self.embeddings[(rho, sigma)]
                images = [tuple(mat_vec(e, r)) for r in self.cones[rho].rays]
                idx = frozenset(c.rays.index(v) for v in images if v in c.rays)
                if len(idx) == len(images):
                    table[idx] = rho
            lookup[sigma] = table
        return lookup

    def face_id(self, sigma: str, indices: frozenset) -> str:
        """Id of the face of ``sigma`` spanned by the given ray indices."""
        if self._lookup is None:
            self._lookup = self._build_lookup()
        try:
            return self._lookup[sigma][frozenset(indices)]
        except KeyError:
            raise InvalidComplex(f"face {sorted(indices)} of {sigma} is not a cone of the complex") from None

    def minimal_face(self, sigma: str, v: Sequence) -> str | None:
        """Id of the face of ``sigma`` whose relative interior holds ``v``."""
        f = face_of_point(self.cones[sigma], v)
        if f is None:
            return None
        return self.face_id(sigma, f.indices)

    def rays_in(self, sigma: str) -> list[tuple[str, tuple]]:
        """(ray id, primitive vector in the chart of sigma) for each ray of sigma."""
        out = []
        for rho in self.faces_of(sigma) + [sigma]:
            if self.cones[rho].dim == 1:
                e = self.embedding(rho, sigma)
                out.append((rho, tuple(mat_vec(e, (1,)))))
        return out


def complete_embeddings(cones: dict, embeddings: dict) -> dict:
    """Add zero-cone embeddings and close the face relation under composition."""
    emb = dict(embeddings)
    zeros = [k for k, c in cones.items() if c.dim == 0]
    if len(zeros) == 1:
        z = zeros[0]
        for k, c in cones.items():
            if k != z and (z, k) not in emb:
                emb[(z, k)] = tuple(() for _ in range(c.dim))
    changed = True
    while changed:
        changed = False
        by_face: dict = {}
        for (rho, pi) in emb:
            by_face.setdefault(rho, []).append(pi)
        for (rho, pi), e1 in list(emb.items()):
            for sigma in by_face.get(pi, []):
                if (rho, sigma) not in emb and rho != sigma:
                    e2 = emb[(pi, sigma)]
                    emb[(rho, sigma)] = int_mat(mat_mul(e2, e1, cones[rho].dim), cones[sigma].dim)
                    changed = True
    return emb


def build_complex(cones: dict, embeddings: dict, **kwargs) -> PolyhedralComplex:
    return PolyhedralComplex(cones, complete_embeddings(cones, embeddings), **kwargs)


def validate_complex(c: PolyhedralComplex) -> list[Violation]:
    """Every broken invariant, as data; an empty list means valid."""
    out: list[Violation] = []
    zeros = [k for k, cone in c.cones.items() if cone.dim == 0]
    if len(zeros) != 1:
        out.append(Violation("zero-cone", tuple(zeros), "complex needs exactly one zero cone"))
    for (rho, sigma), e in c.embeddings.items():
        if rho not in c.cones or sigma not in c.cones:
            out.append(Violation("unknown-id", (rho, sigma), "embedding names an unknown cone"))
            continue
        if rho == sigma:
            out.append(Violation("self-embedding", (rho, sigma), "a cone is not a proper face of itself"))
            continue
        cr, cs = c.cones[rho], c.cones[sigma]
        if len(e) != cs.dim or any(len(row) != cr.dim for row in e):
            out.append(Violation("shape", (rho, sigma), f"embedding must be {cs.dim}x{cr.dim}"))
            continue
        if cr.dim >= cs.dim:
            out.append(Violation("dimension", (rho, sigma), "face must have smaller dimension"))
            continue
        if cr.dim and rank(e) != cr.dim:
            out.append(Violation("rank", (rho, sigma), "embedding is not injective"))
            continue
        images = [primitive_integer(mat_vec(e, r)) for r in cr.rays]
        f = face_of_point(cs, vec_sum(images, cs.dim)) if cr.dim else None
        if cr.dim and (f is None or set(images) != set(f.rays)):
            out.append(Violation("not-a-face", (rho, sigma), "rays do not map onto the rays of a face"))
            continue
        if cr.dim:
            d, _, _ = snf(e)
            if any(abs(d[i][i]) != 1 for i in range(cr.dim)):
                out.append(Violation("saturation", (rho, sigma), "image lattice is not saturated in the parent"))
    if out:
        return out
    for sigma, cs in c.cones.items():
        seen: dict = {}
        for rho in c.faces_of(sigma):
            e = c.embeddings[(rho, sigma)]
            images = frozenset(tuple(mat_vec(e, r)) for r in c.cones[rho].rays)
            seen.setdefault(images, []).append(rho)
        for face in faces(cs):
            if face.dim == cs.dim:
                continue
            key = frozenset(face.rays)
            reps = seen.get(key, [])
            if not reps:
                out.append(Violation("face-missing", (sigma,), f"face spanned by {sorted(face.rays)} has no cone"))
            elif len(reps) > 1:
                out.append(Violation("face-duplicate", tuple(reps) + (sigma,), "face represented more than once"))
    for (rho, pi), e1 in c.embeddings.items():
        for sigma in c.parents_of(pi):
            if (rho, sigma) not in c.embeddings:
                out.append(Violation("transitivity", (rho, pi, sigma), "composite face relation missing"))
                continue
            e2 = c.embeddings[(pi, sigma)]
            if int_mat(mat_mul(e2, e1, c.cones[rho].dim), c.cones[sigma].dim) != c.embeddings[(rho, sigma)]:
                out.append(Violation("composition", (rho, pi, sigma), "embeddings do not commute"))
    return out


def fan(rank_: int, maximal_cones: Sequence[Sequence[Sequence]], lattice=None) -> PolyhedralComplex:
    """Complex of all faces of the given cones in a common ambient lattice.

    ``lattice`` is either a ``Lattice`` or a list of basis vectors; generators
    are rewritten in that basis, which becomes the ambient chart.
    """
    basis = None
    if lattice is not None:
        basis = [tuple(b) for b in (lattice.basis if isinstance(lattice, Lattice) else lattice)]
        if rank(basis) != len(basis):
            raise RankMismatch("lattice basis vectors are dependent")
    n = len(basis) if basis is not None else rank_
    max_rays = []
    for gens in maximal_cones:
        pts = []
        for g in gens:
            if len(g) != rank_:
                raise RankMismatch(f"generator {tuple(g)} does not have length {rank_}")
            if basis is not None:
                y = solve_columns(basis, g)
                if y is None:
                    raise RankMismatch(f"{tuple(g)} lies outside the lattice span")
                pts.append(y)
            else:
                pts.append(tuple(g))
        chart = saturated_basis([p for p in pts if any(p)], n) if any(any(p) for p in pts) else ()
        if not chart:
            max_rays.append(frozenset())
            continue
        coords = [solve_columns(chart, p) for p in pts]
        local = make_cone(coords, dim=len(chart))
        rays = frozenset(
            tuple(sum(chart[j][i] * r[j] for j in range(len(chart))) for i in range(n)) for r in local.rays
        )
        max_rays.append(rays)
    all_faces: dict = {}
    for rays in max_rays:
        for f in _global_faces(rays, n):
            all_faces.setdefault(f, None)
    for a, b in itertools.combinations(sorted(set(max_rays), key=sorted), 2):
        if not a or not b:
            continue
        meet = frozenset(intersect(sorted(a), sorted(b), n))
        fa, fb = _global_faces(a, n), _global_faces(b, n)
        if meet not in fa or meet not in fb:
            raise NotAFan(f"cones {sorted(a)} and {sorted(b)} meet improperly")
    ray_list = sorted({r for f in all_faces for r in f})
    index = {r: i for i, r in enumerate(ray_list)}

    def name(f: frozenset) -> str:
        if not f:
            return ZERO_ID
        return "r" + ",".join(str(i) for i in sorted(index[r] for r in f))

    cones, charts = {}, {}
    for f in all_faces:
        chart = span_chart(sorted(f), n)
        coords = [solve_columns(chart, r) for r in sorted(f)]
        cones[name(f)] = make_cone(coords, dim=len(chart))
        charts[name(f)] = tuple(chart)
    embeddings = {}
    for f in all_faces:
        for g in all_faces:
            if f < g:
                sf, sg = charts[name(f)], charts[name(g)]
                cols = [solve_columns(sg, col) for col in sf]
                e = tuple(tuple(int(cols[j][i]) for j in range(len(sf))) for i in range(len(sg)))
                embeddings[(name(f), name(g))] = e
    return PolyhedralComplex(cones, embeddings, charts=charts, ambient_dim=n)


def span_chart(vectors: Sequence[Sequence], n: int) -> tuple:
    """Saturated basis of span(vectors) in Z^n; a ray is charted by its primitive."""
    if not vectors:
        return ()
    if len(vectors) == 1:
        return (primitive_integer(vectors[0]),)
    return tuple(saturated_basis(vectors, n))


def _global_faces(rays: frozenset, n: int) -> set:
    if not rays:
        return {frozenset()}
    vecs = sorted(rays)
    chart = saturated_basis(vecs, n)
    coords = [solve_columns(chart, r) for r in vecs]
    local = make_cone(coords, dim=len(chart))
    lookup = {tuple(int(x) for x in solve_columns(chart, r)): r for r in vecs}
    return {frozenset(lookup[r] for r in f.rays) for f in faces(local)}


class ComplexMorphism:
    """Per-cone integral maps chart(sigma) -> chart(assignment[sigma])."""

    def __init__(self, source: PolyhedralComplex, target: PolyhedralComplex, assignment: dict, matrices: dict):
        self.source = source
        self.target = target
        self.assignment = {k: assignment[k] for k in sorted_ids(assignment)}
        self.matrices = {
            k: int_mat(matrices[k], target.cones[assignment[k]].dim) for k in sorted_ids(matrices)
        }

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ComplexMorphism)
            and self.source == other.source
            and self.target == other.target
            and self.assignment == other.assignment
            and self.matrices == other.matrices
        )

    def __repr__(self) -> str:
        return f"ComplexMorphism({self.source!r} -> {self.target!r})"

    def images(self, sigma: str) -> list[tuple]:
        m = self.matrices[sigma]
        return [tuple(mat_vec(m, r)) for r in self.source.cones[sigma].rays]


def make_morphism(
    source: PolyhedralComplex, target: PolyhedralComplex, assignment: dict, matrices: dict
) -> ComplexMorphism:
    """Morphism with each cone reassigned to the minimal target face holding its image."""
    new_assign, new_mats = {}, {}
    for sigma in source.cones:
        if sigma not in assignment or sigma not in matrices:
            raise InvalidComplex(f"no target assigned to cone {sigma}")
        tau = assignment[sigma]
        if tau not in target.cones:
            raise InvalidComplex(f"unknown target cone {tau}")
        ct = target.cones[tau]
        m = int_mat(matrices[sigma], ct.dim)
        cs = source.cones[sigma]
        if len(m) != ct.dim or any(len(row) != cs.dim for row in m):
            raise InvalidComplex(f"matrix for {sigma} must be {ct.dim}x{cs.dim}")
        images = [tuple(mat_vec(m, r)) for r in cs.rays]
        if not all(ct.holds(v) for v in images):
            raise InvalidComplex(f"cone {sigma} is not mapped into {tau}")
        rho = target.minimal_face(tau, vec_sum(images, ct.dim))
        if rho != tau:
            m = solve_matrix(target.embedding(rho, tau), m, cs.dim)
            if m is None:
                raise InvalidComplex(f"image of {sigma} is not integral in the chart of {rho}")
        new_assign[sigma] = rho
        new_mats[sigma] = m
    return ComplexMorphism(source, target, new_assign, new_mats)


def morphism_from_matrix(source: PolyhedralComplex, target: PolyhedralComplex, f: Sequence[Sequence]) -> ComplexMorphism:
    """Morphism of fan-built complexes induced by a global matrix on ambient charts."""
    if source.charts is None or target.charts is None:
        raise InvalidComplex("a global matrix needs complexes built by fan()")
    assignment, matrices = {}, {}
    by_dim = target.by_dimension()
    for sigma, cs in source.cones.items():
        chart = source.charts[sigma]
        n = source.ambient_dim
        amb_rays = [tuple(sum(chart[j][i] * r[j] for j in range(cs.dim)) for i in range(n)) for r in cs.rays]
        images = [tuple(mat_vec(f, v)) for v in amb_rays]
        found = None
        for tau in by_dim:
            tchart = target.charts[tau]
            coords = [solve_columns(tchart, v) if tchart else (() if not any(v) else None) for v in images]
            if any(y is None for y in coords):
                continue
            if all(target.cones[tau].holds(y) for y in coords):
                found = tau
                break
        if found is None:
            raise InvalidComplex(f"cone {sigma} is not mapped into a single target cone")
        tchart = target.charts[found]
        cols = []
        for col in (chart if cs.dim else []):
            y = solve_columns(tchart, mat_vec(f, col)) if tchart else ()
            if y is None or any(x.denominator != 1 for x in y):
                raise InvalidComplex(f"map is not integral on the chart of {sigma}")
            cols.append(y)
        k = target.cones[found].dim
        m = tuple(tuple(int(cols[j][i]) for j in range(cs.dim)) for i in range(k))
        assignment[sigma] = found
        matrices[sigma] = m
    return make_morphism(source, target, assignment, matrices)


def validate_morphism(f: ComplexMorphism) -> list[Violation]:
    out = list(validate_complex(f.source)) + list(validate_complex(f.target))
    if out:
        return out
    for sigma, cs in f.source.cones.items():
        tau = f.assignment.get(sigma)
        if tau not in f.target.cones:
            out.append(Violation("assignment", (sigma,), "missing or unknown target cone"))
            continue
        m = f.matrices.get(sigma)
        ct = f.target.cones[tau]
        if m is None or len(m) != ct.dim or any(len(row) != cs.dim for row in m):
            out.append(Violation("shape", (sigma,), "matrix shape does not match the charts"))
            continue
        if not all(ct.holds(v) for v in f.images(sigma)):
            out.append(Violation("containment", (sigma, tau), "cone not mapped into its target"))
    if out:
        return out
    for (rho, sigma), e in f.source.embeddings.items():
        t_rho, t_sigma = f.assignment[rho], f.assignment[sigma]
        if not f.target.is_face(t_rho, t_sigma):
            out.append(Violation("face-compatibility", (rho, sigma), f"{t_rho} is not a face of {t_sigma}"))
            continue
        lhs = int_mat(mat_mul(f.matrices[sigma], e, f.source.cones[rho].dim), f.target.cones[t_sigma].dim)
        e_t = f.target.embedding(t_rho, t_sigma)
        rhs = int_mat(mat_mul(e_t, f.matrices[rho], f.source.cones[rho].dim), f.target.cones[t_sigma].dim)
        if lhs != rhs:
            out.append(Violation("commutation", (rho, sigma), "square with face embeddings does not commute"))
    return out


class ImageCone(NamedTuple):
    target: str
    rays: tuple
    dim: int


def image_cone(f: ComplexMorphism, sigma: str) -> ImageCone:
    """f(sigma) inside the chart of its assigned target cone."""
    tau = f.assignment[sigma]
    k = f.target.cones[tau].dim
    rays = cone_generators(f.images(sigma), k)
    return ImageCone(tau, rays, rank(rays) if rays else 0)


def has_no_horizontal(f: ComplexMorphism) -> Check:
    """f^-1(0) = {0}. Images lie in pointed cones, so it suffices that no ray maps to 0."""
    for sigma in f.source.cones:
        for r, v in zip(f.source.cones[sigma].rays, f.images(sigma)):
            if not any(v):
                return Check(False, {"cone": sigma, "ray": list(r)})
    return Check(True)


def is_equidimensional(f: ComplexMorphism) -> Check:
    for sigma in f.source.cones:
        tau = f.assignment[sigma]
        ct = f.target.cones[tau]
        images = f.images(sigma)
        ok = ct.dim == 0 or (rank(images) == ct.dim and _covers(images, ct))
        if not ok:
            return Check(False, {"cone": sigma, "target": tau, "image_rays": [list(v) for v in cone_generators(images, ct.dim)]})
    return Check(True)


def _covers(images: list, ct: Cone) -> bool:
    img = make_cone(images, dim=ct.dim)
    return all(img.holds(u) for u in ct.rays)


def _require_equidimensional(f: ComplexMorphism, need_no_horizontal: bool = True) -> None:
    if need_no_horizontal:
        h = has_no_horizontal(f)
        if not h:
            raise PreconditionFailed("morphism has a horizontal part", h.witness)
    e = is_equidimensional(f)
    if not e:
        raise PreconditionFailed("morphism is not equidimensional", e.witness)


def semigroup_generators(c: Cone) -> list[tuple]:
    """A generating set of the semigroup of lattice points of ``c``."""
    gens = set(c.rays)
    for simplex in triangulate(c):
        gens.update(parallelepiped_points([c.rays[i] for i in simplex]))
    return sorted(gens)


def preimage_point(cs: Cone, m: Sequence[Sequence], h: Sequence, positive: Sequence) -> tuple | None:
    """A lattice point x of ``cs`` with m x = h, or None.

    ``positive`` is a covector strictly positive on every nonzero image of
    ``cs``; it bounds the search region.
    """
    sol = integer_solutions([list(r) for r in m], list(h))
    if sol is None:
        return None
    x0, kernel = sol
    if not kernel:
        return x0 if cs.holds(x0) else None
    level = dot(positive, h)
    images = [mat_vec(m, r) for r in cs.rays]
    caps = [level / dot(positive, v) for v in images]
    n = cs.dim
    lo = [sum(min(0, r[j]) * c for r, c in zip(cs.rays, caps)) for j in range(n)]
    hi = [sum(max(0, r[j]) * c for r, c in zip(cs.rays, caps)) for j in range(n)]
    kmat = [[kv[i] for kv in kernel] for i in range(n)]
    rows, piv = _left_inverse_rows(kmat, len(kernel))
    bounds = []
    for row in rows:
        a = sum(min(w * (lo[i] - x0[i]), w * (hi[i] - x0[i])) for i, w in enumerate(row))
        b = sum(max(w * (lo[i] - x0[i]), w * (hi[i] - x0[i])) for i, w in enumerate(row))
        bounds.append(range(_ceil(a), _floor(b) + 1))
    for z in itertools.product(*bounds):
        x = tuple(x0[i] + sum(kernel[j][i] * z[j] for j in range(len(kernel))) for i in range(n))
        if cs.holds(x):
            return x
    return None


def _floor(x) -> int:
    return x.numerator // x.denominator if hasattr(x, "numerator") else int(x // 1)


def _ceil(x) -> int:
    return -_floor(-x)


def _left_inverse_rows(kmat: list, k: int) -> tuple[list, list]:
    _, piv = rref([[kmat[i][j] for i in range(len(kmat))] for j in range(k)])
    sub = inverse([kmat[i] for i in piv])
    rows = []
    for j in range(k):
        row = [0] * len(kmat)
        for jj, i in enumerate(piv):
            row[i] = sub[j][jj]
        rows.append(row)
    return rows, piv


def cone_has_reduced_fibers(cs: Cone, ct: Cone, m: Sequence[Sequence]) -> tuple | None:
    """None when m(cs ∩ Z^n) = ct ∩ Z^k, else a missing target point.

    Assumes m(cs) = ct.
    """
    if ct.dim == 0:
        return None
    images = {tuple(mat_vec(m, r)) for r in cs.rays}
    if is_nonsingular(ct) and all(u in images for u in ct.rays):
        return None
    positive = vec_sum(ct.facets, ct.dim)
    for h in semigroup_generators(ct):
        if h in images:
            continue
        if preimage_point(cs, m, h, positive) is None:
            return h
    return None


def has_reduced_fibers(f: ComplexMorphism) -> Check:
    """f(N_sigma ∩ sigma) = N_tau ∩ tau for every source cone."""
    _require_equidimensional(f)
    for sigma, cs in f.source.cones.items():
        tau = f.assignment[sigma]
        missing = cone_has_reduced_fibers(cs, f.target.cones[tau], f.matrices[sigma])
        if missing is not None:
            return Check(False, {"cone": sigma, "target": tau, "missing": list(missing)})
    return Check(True)


def lattice_image_surjective(f: ComplexMorphism) -> Check:
    """The lattice of every source cone maps onto the lattice of its image."""
    _require_equidimensional(f, need_no_horizontal=False)
    for sigma, cs in f.source.cones.items():
        tau = f.assignment[sigma]
        k = f.target.cones[tau].dim
        if k == 0:
            continue
        m = f.matrices[sigma]
        image = Lattice(k, tuple(tuple(row[j] for row in m) for j in range(cs.dim)))
        full = Lattice.standard(k)
        if image != full:
            return Check(False, {"cone": sigma, "target": tau, "index": _index_repr(lattice_index(image, full))})
    return Check(True)


def _index_repr(x):
    return "inf" if x == float("inf") else x


def primitive_images(f: ComplexMorphism) -> Check:
    """Every source ray primitive maps to a target ray primitive."""
    for sigma in f.source.ray_ids():
        tau = f.assignment[sigma]
        if f.target.cones[tau].dim != 1 or tuple(f.images(sigma)) != f.target.cones[tau].rays:
            return Check(False, {"cone": sigma, "target": tau, "image": [list(r) for r in f.matrices[sigma]]})
    return Check(True)


def complex_nonsingular(c: PolyhedralComplex) -> Check:
    for k, cone in c.cones.items():
        if not is_simplicial(cone):
            return Check(False, {"cone": k, "reason": "not simplicial", "rays": len(cone.rays)})
        mult = multiplicity(cone)
        if mult != 1:
            return Check(False, {"cone": k, "multiplicity": mult})
    return Check(True)


def complex_simplicial(c: PolyhedralComplex) -> Check:
    for k, cone in c.cones.items():
        if not is_simplicial(cone):
            return Check(False, {"cone": k, "rays": len(cone.rays), "dim": cone.dim})
    return Check(True)


@dataclass
class Classification:
    flags: dict
    level: str
    witnesses: dict = field(default_factory=dict)
    discrepancy: bool = False

    def at_least(self, level: str) -> bool:
        return LEVELS.index(self.level) >= LEVELS.index(level)

    def to_json(self) -> dict:
        return {
            "flags": dict(sorted(self.flags.items())),
            "level": self.level,
            "witnesses": dict(sorted(self.witnesses.items())),
            "discrepancy": self.discrepancy,
        }


def classify(f: ComplexMorphism) -> Classification:
    checks: dict = {}
    checks["noHorizontal"] = has_no_horizontal(f)
    checks["equidimensional"] = is_equidimensional(f)
    if checks["noHorizontal"] and checks["equidimensional"]:
        checks["reducedFibers"] = has_reduced_fibers(f)
    else:
        checks["reducedFibers"] = Check(False, {"reason": "requires equidimensional input without horizontal part"})
    if checks["equidimensional"]:
        checks["latticeSurjective"] = lattice_image_surjective(f)
    else:
        checks["latticeSurjective"] = Check(False, {"reason": "requires equidimensional input"})
    checks["baseNonsingular"] = complex_nonsingular(f.target)
    checks["sourceSimplicial"] = complex_simplicial(f.source)
    checks["sourceIndexOne"] = complex_nonsingular(f.source)
    checks["primitiveImages"] = primitive_images(f)
    flags = {k: bool(v) for k, v in checks.items()}
    witnesses = {k: v.witness for k, v in checks.items() if not v}
    weak = all(flags[k] for k in ("noHorizontal", "equidimensional", "reducedFibers", "latticeSurjective", "baseNonsingular"))
    if not flags["equidimensional"]:
        level = "not-equidimensional"
    elif not weak:
        level = "equidimensional"
    elif flags["sourceIndexOne"]:
        level = "semistable"
    elif flags["sourceSimplicial"] and flags["primitiveImages"]:
        level = "almost-semistable"
    else:
        level = "weakly-semistable"
    discrepancy = flags["equidimensional"] and flags["noHorizontal"] and flags["reducedFibers"] != flags["latticeSurjective"]
    return Classification(flags, level, witnesses, discrepancy)


def identity_morphism(c: PolyhedralComplex) -> ComplexMorphism:
    return ComplexMorphism(
        c, c, {k: k for k in c.cones}, {k: identity(cone.dim) for k, cone in c.cones.items()}
    )
