"""Seeded random instances shared by the property and acceptance tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from semistable.complex import fan, morphism_from_matrix, pull_back
from semistable.cone import make_cone
from semistable.errors import NotStrictlyConvex, RankMismatch
from semistable.linalg import mat_vec, primitive_integer, rank
from semistable.subdivide import compose, identity_subdivision, lift_morphism, star_subdivision

TARGETS = {
    "line": (1, [[(1,)]]),
    "quadrant": (2, [[(1, 0), (0, 1)]]),
    "singular": (2, [[(1, 0), (1, 2)]]),
}


def _unit(k: int, j: int) -> tuple:
    return tuple(int(i == j) for i in range(k))


def random_map(rng: random.Random, k: int, d: int, target_rays: list) -> list:
    """F = T G with G >= 0, entries in [0, 3], nonzero columns, every unit column present."""
    cols = [_unit(k, j) for j in range(k)]
    while len(cols) < d:
        c = tuple(rng.randint(0, 3) for _ in range(k))
        if any(c):
            cols.append(c)
    rng.shuffle(cols)
    t = [[target_rays[j][i] for j in range(k)] for i in range(k)]
    return [[sum(t[i][l] * cols[j][l] for l in range(k)) for j in range(d)] for i in range(k)]


def random_source(rng: random.Random, d: int):
    """An orthant, or (rank 3) a cone over a square, possibly star-subdivided."""
    if d == 3 and rng.random() < 0.25:
        return fan(3, [[(1, 0, 1), (0, 1, 1), (1, 1, 1), (0, 0, 1)]]), None
    base = fan(d, [[_unit(d, i) for i in range(d)]])
    if d == 1 or rng.random() < 0.3:
        return base, None
    sub = identity_subdivision(base)
    current = base
    for _ in range(rng.randint(1, 2)):
        sigma = current.maximal()[rng.randrange(len(current.maximal()))]
        cone = current.cones[sigma]
        # a relative interior point of a random face of sigma with at least two rays
        face_rays = [r for r in cone.rays if rng.random() < 0.7]
        if len(face_rays) < 2:
            face_rays = list(cone.rays)
        p = [0] * cone.dim
        for r in face_rays:
            w = rng.randint(1, 2)
            p = [a + w * b for a, b in zip(p, r)]
        rho = current.minimal_face(sigma, p)
        q = pull_back(current.embedding(rho, sigma), p) if rho != sigma else tuple(p)
        step, _ = star_subdivision(current, rho, q)
        if len(step.refined.maximal()) > 6:
            break
        sub = compose(step, sub) if current is not base else step
        current = sub.refined
    return base, sub


def random_morphism(rng: random.Random):
    """A valid morphism with no horizontal part onto one of the small targets."""
    while True:
        name = rng.choice(sorted(TARGETS))
        k, cones = TARGETS[name]
        d = rng.randint(k, 4)
        target = fan(k, cones)
        base, sub = random_source(rng, d)
        rays = make_cone(cones[0]).rays
        f_mat = random_map(rng, k, d, list(rays))
        try:
            f = morphism_from_matrix(base, target, f_mat)
        except Exception:
            continue
        if not _covers(f, target):
            continue
        if sub is not None:
            f = lift_morphism(f, sub, identity_subdivision(target))
        return f


def _covers(f, target) -> bool:
    tau = target.maximal()[0]
    ct = target.cones[tau]
    images = []
    for sigma in f.source.maximal():
        if f.assignment[sigma] == tau:
            images.extend(f.images(sigma))
    if not images or rank(images) < ct.dim:
        return False
    img = make_cone(images, dim=ct.dim)
    return all(img.holds(u) for u in ct.rays)


def random_cone_map(rng: random.Random):
    """(source cone, target cone, matrix) with M(source) = target, ranks <= 3 and <= 2.

    Target rays have total coordinate sum <= 6, so every semigroup generator
    of the target (a ray or a parallelepiped point) has coordinate sum <= 6.
    """
    while True:
        n = rng.randint(1, 3)
        k = rng.randint(1, min(n, 2))
        nrays = rng.randint(n, n + 1) if n == 3 else n
        gens = [tuple(rng.randint(-1, 2) for _ in range(n)) for _ in range(nrays)]
        try:
            cs = make_cone(gens, dim=n)
        except (NotStrictlyConvex, RankMismatch):
            continue
        if len(cs.rays) != len(gens) and n < 3:
            continue
        m = [[rng.randint(0, 3) if rng.random() < 0.8 else rng.randint(-1, 0) for _ in range(n)] for _ in range(k)]
        images = [tuple(mat_vec(m, r)) for r in cs.rays]
        if any(not any(v) for v in images) or rank(images) < k:
            continue
        try:
            ct = make_cone(images, dim=k)
        except (NotStrictlyConvex, RankMismatch):
            continue
        if sum(sum(map(abs, u)) for u in ct.rays) > 6:
            continue
        return cs, ct, m


def random_matrix(rng: random.Random, max_dim: int = 4, lo: int = -5, hi: int = 5) -> list:
    rows = rng.randint(1, max_dim)
    cols = rng.randint(1, max_dim)
    return [[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)]


def lattice_points(cone, bound: int):
    """All lattice points of a cone in the box [-bound, bound]^dim (brute force)."""
    for x in itertools.product(range(-bound, bound + 1), repeat=cone.dim):
        if cone.holds(x):
            yield x


def _angle_fan(rng: random.Random):
    """A fan filling the first quadrant, cut along random primitive rays."""
    rays = {(1, 0), (0, 1)}
    while len(rays) < rng.randint(3, 5):
        v = (rng.randint(1, 4), rng.randint(1, 4))
        rays.add(primitive_integer(v))
    ordered = sorted(rays, key=lambda v: Fraction(v[1], v[0]) if v[0] else Fraction(10**6))
    return fan(2, [[a, b] for a, b in zip(ordered, ordered[1:])])


def random_complex(rng: random.Random):
    """Small fans of rank 2 or 3, simplicial or not, singular or not."""
    kind = rng.choice(["source", "source", "angle", "singular2", "cone3"])
    if kind == "source":
        base, sub = random_source(rng, rng.randint(2, 3))
        return base if sub is None else sub.refined
    if kind == "angle":
        return _angle_fan(rng)
    if kind == "singular2":
        return fan(2, [[(1, 0), (rng.randint(1, 3), rng.randint(2, 5))]])
    while True:
        gens = [tuple(rng.randint(0, 2) for _ in range(3)) for _ in range(rng.randint(3, 5))]
        try:
            return fan(3, [gens])
        except (NotStrictlyConvex, RankMismatch):
            continue


def random_interior_point(rng: random.Random, c, cone_id: str) -> tuple:
    cone = c.cones[cone_id]
    p = [0] * cone.dim
    for r in cone.rays:
        w = rng.randint(1, 3)
        p = [a + w * b for a, b in zip(p, r)]
    return tuple(p)
