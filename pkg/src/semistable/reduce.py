"""Reduction pipeline: equidimensionalization, fiber reduction, certificates.

Every stage that changes the morphism records a certificate holding the
digests of its input and output plus a witness from which the stage can be
rebuilt and re-verified independently (``replay``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import io
from .alteration import (
    LatticeAlteration,
    alteration_from_bases,
    canonical_basis,
    check_alteration,
    induced_lattice_alteration,
)
from .arrangement import refine_common_with_function
from .complex import (
    LEVELS,
    Classification,
    ComplexMorphism,
    PolyhedralComplex,
    classify,
    complex_nonsingular,
    complex_simplicial,
    has_no_horizontal,
    has_reduced_fibers,
    id_key,
    image_cone,
    is_equidimensional,
    pull_back,
)
from .cone import face_of_point, gorenstein_functional
from .errors import PreconditionFailed, SchemaError, SemistableError
from .linalg import dot, lcm
from .subdivide import (
    GoodFunction,
    Subdivision,
    check_subdivision,
    compose,
    compose_good,
    identity_subdivision,
    induced_subdivision,
    lift_morphism,
    nonsingular_subdivision,
    pull_simplicialize,
    star_subdivision,
    subdivision_from_cells,
    verify_good_function,
)

__all__ = [
    "CoveringData",
    "Certificate",
    "PipelineResult",
    "EquidimensionalResult",
    "covering_data",
    "reduce_fibers",
    "equidimensionalize",
    "gorenstein_certificate",
    "simplicialize_source",
    "weak_semistable_pipeline",
    "semistabilize_8_2",
    "replay",
]


@dataclass
class CoveringData:
    """Per target ray: the source rays over it, their multiplicities, and the lcm."""

    rays: dict

    def multiplier(self, ray: str) -> int:
        return self.rays[ray]["m"]

    def is_trivial(self) -> bool:
        return all(entry["m"] == 1 for entry in self.rays.values())

    def to_json(self) -> dict:
        return {
            u: {"m": e["m"], "sources": {v: m for v, m in e["sources"]}}
            for u, e in sorted(self.rays.items(), key=lambda kv: id_key(kv[0]))
        }


@dataclass
class Certificate:
    stage: str
    input_digest: str
    output_digest: str
    witness: dict

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "input_digest": self.input_digest,
            "output_digest": self.output_digest,
            "witness": io.encode(self.witness),
        }


@dataclass
class PipelineResult:
    source: ComplexMorphism
    morphism: ComplexMorphism
    certificates: list
    classification: Classification

    def bundle(self) -> dict:
        return {
            "kind": "certificates",
            "version": io.VERSION,
            "input_digest": io.digest(self.source),
            "output_digest": io.digest(self.morphism),
            "stages": [c.to_json() for c in self.certificates],
            "classification": io.encode(self.classification.to_json()),
        }


@dataclass
class EquidimensionalResult:
    target_subdivision: Subdivision
    good_function: GoodFunction
    source_subdivision: Subdivision
    morphism: ComplexMorphism
    certificates: list = field(default_factory=list)


def _require(check, message: str) -> None:
    if not check:
        raise PreconditionFailed(message, check.witness)


def _require_reducible(f: ComplexMorphism) -> None:
    _require(has_no_horizontal(f), "morphism has a horizontal part")
    _require(is_equidimensional(f), "morphism is not equidimensional")
    _require(complex_nonsingular(f.target), "target complex is not nonsingular")


def covering_data(f: ComplexMorphism) -> CoveringData:
    """u_i, v_ij, m_ij with f(v_ij) = m_ij u_i, and m_i = lcm_j m_ij."""
    _require_reducible(f)
    rays = {u: {"m": 1, "sources": []} for u in f.target.ray_ids()}
    for v in f.source.ray_ids():
        u = f.assignment[v]
        (image,) = f.images(v)
        (unit,) = f.target.cones[u].rays
        m = Fraction(image[0], unit[0])
        if m.denominator != 1 or m < 1:
            raise SemistableError(f"ray {v} maps to a non-multiple of the primitive of {u}")
        rays[u]["sources"].append((v, int(m)))
        rays[u]["m"] = lcm(rays[u]["m"], int(m))
    return CoveringData(rays)


def _reduction_bases(f: ComplexMorphism, cov: CoveringData) -> dict:
    bases = {}
    for tau, cone in f.target.cones.items():
        if cone.dim:
            gens = [tuple(cov.multiplier(u) * x for x in v) for u, v in f.target.rays_in(tau)]
            bases[tau] = canonical_basis(gens, cone.dim)
    return bases


def reduce_fibers(f: ComplexMorphism) -> tuple[LatticeAlteration, LatticeAlteration, ComplexMorphism, Certificate]:
    """Alter the target to <m_i u_i> and the source to the preimage lattices."""
    cov = covering_data(f)
    target = alteration_from_bases(f.target, _reduction_bases(f, cov))
    source, lifted = induced_lattice_alteration(f, target)
    check = has_reduced_fibers(lifted)
    if not check:
        raise SemistableError(f"fiber reduction left non-reduced fibers: {check.witness}")
    witness = {
        "covering": cov.to_json(),
        "target_bases": _bases_json(target),
        "source_bases": _bases_json(source),
        "index": {k: target.index(k) for k in target.bases if f.target.cones[k].dim},
    }
    return target, source, lifted, Certificate("reduce-fibers", io.digest(f), io.digest(lifted), witness)


def _bases_json(a: LatticeAlteration) -> dict:
    return {k: [list(r) for r in b] for k, b in a.bases.items() if a.base.cones[k].dim}


def _image_pieces(f: ComplexMorphism) -> dict:
    pieces: dict = {}
    for sigma in f.source.cones:
        img = image_cone(f, sigma)
        if img.rays:
            pieces.setdefault(img.target, [])
            if list(img.rays) not in pieces[img.target]:
                pieces[img.target].append(list(img.rays))
    return pieces


def _subdivision_witness(s: Subdivision, psi: GoodFunction, **flags) -> dict:
    pieces = {
        sigma: [[rid, list(m)] for rid, m in rows] for sigma, rows in psi.pieces().items()
    }
    witness = {
        "cells": {k: [[list(r) for r in cell] for cell in cells] for k, cells in s.cells().items()},
        "good_function": dict(sorted(psi.values.items(), key=lambda kv: id_key(kv[0]))),
        "pieces": pieces,
    }
    witness.update(flags)
    return witness


def equidimensionalize(f: ComplexMorphism) -> EquidimensionalResult:
    """Refine the target by all image cones, resolve it, and pull the cells back."""
    _require(has_no_horizontal(f), "morphism has a horizontal part")
    s1, psi1 = refine_common_with_function(f.target, _image_pieces(f))
    s2, psi2 = nonsingular_subdivision(s1.refined)
    s = compose(s2, s1)
    psi = compose_good(s1, psi1, s2, psi2, s)
    src, lifted = induced_subdivision(f, s)
    cert = Certificate(
        "subdivide-target", io.digest(f), io.digest(lifted), _subdivision_witness(s, psi, nonsingular=True)
    )
    return EquidimensionalResult(s, psi, src, lifted, [cert])


def gorenstein_certificate(f: ComplexMorphism) -> dict:
    """Covectors equal to -1 on all rays: per target cone, and pulled back per source cone."""
    _require_reducible(f)
    _require(has_reduced_fibers(f), "morphism does not have reduced fibers")
    target = {}
    for tau, cone in f.target.cones.items():
        target[tau] = gorenstein_functional(cone)
        if target[tau] is None:
            raise SemistableError(f"nonsingular cone {tau} has no Gorenstein functional")
    source = {}
    for sigma, cone in f.source.cones.items():
        psi = target[f.assignment[sigma]]
        m = f.matrices[sigma]
        pulled = tuple(sum(psi[i] * m[i][j] for i in range(len(m))) for j in range(cone.dim))
        for r in cone.rays:
            if dot(pulled, r) != -1:
                raise SemistableError(f"pulled-back functional on {sigma} pairs to {dot(pulled, r)} with {r}")
        source[sigma] = pulled
    return {"target": {k: list(v) for k, v in target.items()}, "source": {k: list(v) for k, v in source.items()}}


def simplicialize_source(f: ComplexMorphism) -> tuple[Subdivision, GoodFunction, ComplexMorphism, Certificate]:
    sub, psi = pull_simplicialize(f.source)
    lifted = lift_morphism(f, sub, identity_subdivision(f.target))
    cert = Certificate("subdivide-source", io.digest(f), io.digest(lifted), _subdivision_witness(sub, psi))
    return sub, psi, lifted, cert


def _rank(level: str) -> int:
    return LEVELS.index(level)


def _finish(f: ComplexMorphism, cur: ComplexMorphism, certs: list) -> PipelineResult:
    cls = classify(cur)
    if cls.at_least("weakly-semistable"):
        table = gorenstein_certificate(cur)
        certs.append(Certificate("gorenstein", io.digest(cur), io.digest(cur), table))
    return PipelineResult(f, cur, certs, cls)


def weak_semistable_pipeline(f: ComplexMorphism, attempt_almost: bool = True) -> PipelineResult:
    """Equidimensionalize, reduce fibers, then optionally triangulate the source."""
    _require(has_no_horizontal(f), "morphism has a horizontal part")
    certs = []
    cur = f
    eq = equidimensionalize(cur)
    if not eq.target_subdivision.is_identity():
        certs.extend(eq.certificates)
        cur = eq.morphism
    target, source, lifted, cert = reduce_fibers(cur)
    if not (target.is_identity() and source.is_identity()):
        certs.append(cert)
        cur = lifted
    if attempt_almost and not complex_simplicial(cur.source):
        before = classify(cur)
        sub, _, lifted, cert = simplicialize_source(cur)
        if _rank(classify(lifted).level) >= _rank(before.level):
            certs.append(cert)
            cur = lifted
    return _finish(f, cur, certs)


def _locate(c: PolyhedralComplex, v: Sequence, cone_id: str | None) -> tuple[str, tuple] | None:
    """The cone whose relative interior holds v, with v in its chart; None for v = 0."""
    v = tuple(v)
    if not any(v):
        return None
    candidates = [cone_id] if cone_id is not None else c.maximal()
    for sigma in candidates:
        if sigma not in c.cones:
            raise PreconditionFailed(f"unknown cone {sigma}")
        cone = c.cones[sigma]
        if len(v) != cone.dim or face_of_point(cone, v) is None:
            continue
        rho = c.minimal_face(sigma, v)
        return rho, tuple(pull_back(c.embedding(rho, sigma), v)) if rho != sigma else v
    raise PreconditionFailed(f"point {list(v)} lies in no cone of the complex")


def semistabilize_8_2(
    f: ComplexMorphism,
    barycenter: Sequence | None,
    center: Sequence | None,
    barycenter_cone: str | None = None,
    center_cone: str | None = None,
) -> PipelineResult:
    """Star the target at the barycenter, pull back, star the source at the center, triangulate."""
    before = classify(f)
    if not before.at_least("weakly-semistable"):
        raise PreconditionFailed("the recipe expects a weakly semistable morphism", {"level": before.level})
    certs = []
    cur = f
    src = None
    hit = _locate(f.target, barycenter, barycenter_cone) if barycenter is not None else None
    if hit is not None:
        s, psi = star_subdivision(f.target, *hit)
        if not s.is_identity():
            src, cur = induced_subdivision(f, s)
            certs.append(Certificate("subdivide-target", io.digest(f), io.digest(cur), _subdivision_witness(s, psi)))
    hit = _locate(f.source, center, center_cone) if center is not None else None
    if hit is not None:
        rid, z = src.locate(*hit) if src is not None else hit
        s1, psi1 = star_subdivision(cur.source, rid, z)
        s2, psi2 = pull_simplicialize(s1.refined)
        s = compose(s2, s1)
        psi = compose_good(s1, psi1, s2, psi2, s)
        if not s.is_identity():
            lifted = lift_morphism(cur, s, identity_subdivision(cur.target))
            certs.append(Certificate("subdivide-source", io.digest(cur), io.digest(lifted), _subdivision_witness(s, psi)))
            cur = lifted
    return _finish(f, cur, certs)


# replay

def _fail(message: str) -> None:
    raise SemistableError(f"certificate rejected: {message}")


def _rebuild(c: PolyhedralComplex, witness: dict, path: str) -> tuple[Subdivision, GoodFunction]:
    for key in ("cells", "good_function", "pieces"):
        if key not in witness:
            raise SchemaError(f"{path}.{key}", "missing field")
    s = subdivision_from_cells(c, io.cells_from(witness["cells"], c, f"{path}.cells"))
    violations = check_subdivision(s)
    if violations:
        _fail(f"{path}: subdivision invalid: {violations[0].message}")
    values = io.values_from(witness["good_function"], f"{path}.good_function")
    if set(values) != set(s.refined.ray_ids()):
        _fail(f"{path}: good function is not given on exactly the refined rays")
    psi = GoodFunction(s, values)
    ok, bad = verify_good_function(s, psi)
    if not ok:
        _fail(f"{path}: good function fails verification: {bad}")
    pieces = io.encode({k: [[rid, list(m)] for rid, m in rows] for k, rows in psi.pieces().items()})
    if pieces != witness["pieces"]:
        _fail(f"{path}: recorded linear pieces disagree with the good function")
    return s, psi


def _replay_stage(cur: ComplexMorphism, stage: dict, path: str) -> ComplexMorphism:
    name, w = stage["stage"], stage["witness"]
    if not isinstance(w, dict):
        raise SchemaError(f"{path}.witness", "expected an object")
    if name == "subdivide-target":
        s, _ = _rebuild(cur.target, w, f"{path}.witness")
        if w.get("nonsingular") is True and not complex_nonsingular(s.refined):
            _fail(f"{path}: target subdivision is not nonsingular")
        return induced_subdivision(cur, s)[1]
    if name == "subdivide-source":
        s, _ = _rebuild(cur.source, w, f"{path}.witness")
        return lift_morphism(cur, s, identity_subdivision(cur.target))
    if name == "reduce-fibers":
        target, source, lifted, cert = reduce_fibers(cur)
        if io.encode(cert.witness) != w:
            _fail(f"{path}: recorded lattices or covering data disagree with the recomputation")
        for a in (target, source):
            if check_alteration(a):
                _fail(f"{path}: inconsistent sublattices")
        return lifted
    if name == "gorenstein":
        if io.encode(gorenstein_certificate(cur)) != w:
            _fail(f"{path}: recorded Gorenstein functionals disagree")
        return cur
    raise SchemaError(f"{path}.stage", f"unknown stage {name!r}")


def replay(f: ComplexMorphism, bundle: dict) -> ComplexMorphism:
    """Rebuild every stage from its witness; raise SemistableError on any mismatch."""
    if not isinstance(bundle, dict):
        raise SchemaError("", "expected a certificate bundle")
    io.require_fields(bundle, "", {"kind", "input_digest", "output_digest", "stages", "classification"}, {"version"})
    if bundle["kind"] != "certificates":
        raise SchemaError(".kind", "expected a certificate bundle")
    if bundle["input_digest"] != io.digest(f):
        _fail("input digest does not match the given morphism")
    cur = f
    for i, stage in enumerate(io.require_list(bundle["stages"], ".stages")):
        path = f".stages[{i}]"
        io.require_fields(stage, path, {"stage", "input_digest", "output_digest", "witness"})
        if stage["input_digest"] != io.digest(cur):
            _fail(f"{path}: input digest mismatch")
        cur = _replay_stage(cur, stage, path)
        if stage["output_digest"] != io.digest(cur):
            _fail(f"{path}: output digest mismatch")
    if bundle["output_digest"] != io.digest(cur):
        _fail("final output digest mismatch")
    if io.encode(classify(cur).to_json()) != bundle["classification"]:
        _fail("recorded classification differs from the recomputed one")
    return cur
