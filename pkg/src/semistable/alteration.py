"""Lattice alterations: same cones, finite-index sublattices chosen per cone.

The sublattice of each cone is stored as an integer basis matrix B (columns
in the cone's chart). The altered complex uses the coordinates of B as its
chart, so its rays are the primitive vectors of B^-1 r and its embeddings
are B_parent^-1 E B_face.
"""

from __future__ import annotations

from dataclasses import dataclass

from .complex import (
    ComplexMorphism,
    PolyhedralComplex,
    Violation,
    make_morphism,
)
from .cone import is_simplicial, make_cone
from .errors import InvalidComplex, NotSimplicial
from .lattice import Lattice, lattice_index, preimage_lattice, snf
from .linalg import det, identity, inverse, mat_mul, mat_vec

__all__ = [
    "LatticeAlteration",
    "Alteration",
    "alteration_from_bases",
    "identity_alteration",
    "check_alteration",
    "index_one_alteration",
    "induced_lattice_alteration",
    "canonical_basis",
]


def canonical_basis(generators, dim: int) -> tuple:
    """Hermite basis matrix (columns) of the lattice generated by ``generators``."""
    lat = Lattice(dim, tuple(tuple(g) for g in generators))
    return tuple(tuple(int(b[i]) for b in lat.basis) for i in range(dim))


@dataclass
class LatticeAlteration:
    base: PolyhedralComplex
    altered: PolyhedralComplex
    bases: dict

    def index(self, sigma: str) -> int:
        b = self.bases[sigma]
        return abs(int(det([list(r) for r in b]))) if b else 1

    def is_identity(self) -> bool:
        return all(self.index(k) == 1 for k in self.bases)


@dataclass
class Alteration:
    """A lattice alteration of the refined complex of a subdivision."""

    lattice: LatticeAlteration
    subdivision: object


def _integral(m) -> tuple | None:
    out = []
    for row in m:
        if any(getattr(x, "denominator", 1) != 1 for x in row):
            return None
        out.append(tuple(int(x) for x in row))
    return tuple(out)


def alteration_from_bases(c: PolyhedralComplex, bases: dict) -> LatticeAlteration:
    """Altered complex for per-cone sublattice bases; missing cones keep their lattice."""
    full = {}
    cones = {}
    for sigma, cone in c.cones.items():
        b = bases.get(sigma)
        if b is None:
            b = tuple(tuple(r) for r in identity(cone.dim))
        b = tuple(tuple(int(x) for x in row) for row in b)
        if len(b) != cone.dim or any(len(row) != cone.dim for row in b):
            raise InvalidComplex(f"sublattice basis for {sigma} must be {cone.dim}x{cone.dim}")
        full[sigma] = b
        if cone.dim == 0:
            cones[sigma] = cone
            continue
        if det([list(r) for r in b]) == 0:
            raise InvalidComplex(f"sublattice of {sigma} has infinite index")
        b_inv = inverse([list(r) for r in b])
        cones[sigma] = make_cone([mat_vec(b_inv, r) for r in cone.rays], dim=cone.dim)
    embeddings = {}
    for (rho, sigma), e in c.embeddings.items():
        k = c.cones[rho].dim
        if k == 0:
            embeddings[(rho, sigma)] = tuple(() for _ in range(c.cones[sigma].dim))
            continue
        b_inv = inverse([list(r) for r in full[sigma]])
        new = _integral(mat_mul(b_inv, mat_mul(e, full[rho], k), k))
        if new is None:
            raise InvalidComplex(f"sublattice of {rho} is not inside that of {sigma}")
        embeddings[(rho, sigma)] = new
    return LatticeAlteration(c, PolyhedralComplex(cones, embeddings), full)


def identity_alteration(c: PolyhedralComplex) -> LatticeAlteration:
    return alteration_from_bases(c, {})


def check_alteration(a: LatticeAlteration) -> list[Violation]:
    """Finite index and face consistency: N'_rho = N'_sigma ∩ span(rho)."""
    out = []
    for sigma, cone in a.base.cones.items():
        b = a.bases.get(sigma)
        if b is None or (cone.dim and det([list(r) for r in b]) == 0):
            out.append(Violation("index", (sigma,), "sublattice is missing or of infinite index"))
    if out:
        return out
    for (rho, sigma), e in a.altered.embeddings.items():
        k = a.base.cones[rho].dim
        if k == 0:
            continue
        d, _, _ = snf([list(r) for r in e])
        if any(abs(d[i][i]) != 1 for i in range(k)):
            out.append(Violation("consistency", (rho, sigma), "face sublattice is not the restriction of the parent's"))
    return out


def index_one_alteration(c: PolyhedralComplex) -> LatticeAlteration:
    """Per cone, the sublattice generated by its primitive ray vectors."""
    bases = {}
    for sigma, cone in c.cones.items():
        if not is_simplicial(cone):
            raise NotSimplicial(f"cone {sigma} is not simplicial")
        if cone.dim:
            bases[sigma] = canonical_basis(cone.rays, cone.dim)
    return alteration_from_bases(c, bases)


def induced_lattice_alteration(f: ComplexMorphism, a: LatticeAlteration) -> tuple[LatticeAlteration, ComplexMorphism]:
    """Source lattices N_sigma ∩ f^-1(N'_tau) and the lifted morphism."""
    if a.base != f.target:
        raise InvalidComplex("alteration is not of the morphism's target")
    bases = {}
    for sigma, cone in f.source.cones.items():
        tau = f.assignment[sigma]
        k = f.target.cones[tau].dim
        if cone.dim == 0:
            continue
        if k == 0:
            bases[sigma] = tuple(tuple(r) for r in identity(cone.dim))
            continue
        bt = a.bases[tau]
        sub = Lattice(k, tuple(tuple(bt[i][j] for i in range(k)) for j in range(k)))
        pre = preimage_lattice([list(r) for r in f.matrices[sigma]], Lattice.standard(cone.dim), sub)
        if lattice_index(pre, Lattice.standard(cone.dim)) == float("inf"):
            raise InvalidComplex(f"preimage lattice of {sigma} has infinite index")
        bases[sigma] = canonical_basis(pre.basis, cone.dim)
    src = alteration_from_bases(f.source, bases)
    matrices = {}
    for sigma, cone in f.source.cones.items():
        tau = f.assignment[sigma]
        k = f.target.cones[tau].dim
        if cone.dim == 0 or k == 0:
            matrices[sigma] = tuple(() for _ in range(k)) if cone.dim == 0 else ()
            continue
        bt_inv = inverse([list(r) for r in a.bases[tau]])
        m = mat_mul(bt_inv, mat_mul(f.matrices[sigma], src.bases[sigma], cone.dim), cone.dim)
        m = _integral(m)
        if m is None:
            raise InvalidComplex(f"lifted map on {sigma} is not integral")
        matrices[sigma] = m
    lifted = make_morphism(src.altered, a.altered, dict(f.assignment), matrices)
    return src, lifted
