"""JSON documents (format version 1) with canonical serialization.

Numbers are written as decimal strings, rationals as reduced ``"p/q"``.
Complexes are always written in abstract mode with cones in id order and
only the covering face relations; fan mode is accepted on input. Parsing
rejects unknown fields with a SchemaError carrying the offending path.
"""

from __future__ import annotations

import hashlib
import json
import re
from fractions import Fraction
from typing import Any

from .alteration import LatticeAlteration, alteration_from_bases
from .complex import (
    ComplexMorphism,
    PolyhedralComplex,
    complete_embeddings,
    fan,
    id_key,
    make_morphism,
    morphism_from_matrix,
)
from .cone import make_cone
from .errors import SchemaError, SemistableError
from .linalg import mat_mul
from .subdivide import GoodFunction, Subdivision, subdivision_from_cells

__all__ = [
    "VERSION",
    "encode",
    "decode_number",
    "to_document",
    "from_document",
    "serialize",
    "parse",
    "digest",
    "load",
    "dump_text",
    "require_fields",
    "require_list",
    "cells_from",
    "values_from",
]

VERSION = "1"
_NUMBER = re.compile(r"^-?\d+(/\d+)?$")


def encode(x: Any) -> Any:
    """Recursively write numbers as strings; containers keep their shape."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return "inf" if x == float("inf") else repr(x)
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if isinstance(x, frozenset):
        return [encode(v) for v in sorted(x)]
    raise TypeError(f"cannot encode {type(x).__name__}")


def decode_number(x: Any, path: str, integral: bool = True):
    if isinstance(x, bool):
        raise SchemaError(path, "expected a number")
    if isinstance(x, int):
        return x
    if isinstance(x, str) and _NUMBER.match(x.strip()):
        q = Fraction(x.strip())
        if integral and q.denominator != 1:
            raise SchemaError(path, "expected an integer")
        return int(q) if q.denominator == 1 else q
    raise SchemaError(path, "expected an integer or a 'p/q' string")


def require_fields(d: Any, path: str, required: set, optional: set = frozenset()) -> dict:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    extra = set(d) - required - set(optional)
    if extra:
        raise SchemaError(f"{path}.{sorted(extra)[0]}", "unknown field")
    missing = required - set(d)
    if missing:
        raise SchemaError(f"{path}.{sorted(missing)[0]}", "missing field")
    return d


def require_list(d: Any, path: str) -> list:
    if not isinstance(d, list):
        raise SchemaError(path, "expected a list")
    return d


def _str(d: Any, path: str) -> str:
    if not isinstance(d, str):
        raise SchemaError(path, "expected a string")
    return d


def _vector(v: Any, path: str, length: int | None = None) -> tuple:
    v = require_list(v, path)
    if length is not None and len(v) != length:
        raise SchemaError(path, f"expected length {length}")
    return tuple(decode_number(x, f"{path}[{i}]") for i, x in enumerate(v))


def _matrix(m: Any, path: str, rows: int | None = None, cols: int | None = None) -> tuple:
    m = require_list(m, path)
    if rows is not None and len(m) != rows:
        raise SchemaError(path, f"expected {rows} rows")
    return tuple(_vector(r, f"{path}[{i}]", cols) for i, r in enumerate(m))


def _version(d: dict, path: str) -> None:
    if "version" in d and str(d["version"]) != VERSION:
        raise SchemaError(f"{path}.version", f"unsupported version {d['version']!r}")


# complexes

def complex_to_document(c: PolyhedralComplex) -> dict:
    cones = [{"id": k, "rank": cone.dim, "rays": [list(r) for r in cone.rays]} for k, cone in c.cones.items()]
    faces = []
    for (rho, sigma), e in c.embeddings.items():
        if c.cones[rho].dim == 0 or c.cones[sigma].dim != c.cones[rho].dim + 1:
            continue
        faces.append({"face": rho, "parent": sigma, "embedding": [list(r) for r in e]})
    faces.sort(key=lambda f: (id_key(f["parent"]), id_key(f["face"])))
    return encode({"kind": "complex", "version": VERSION, "mode": "abstract", "cones": cones, "faces": faces})


def complex_from_document(d: Any, path: str = "") -> PolyhedralComplex:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected a complex object")
    mode = d.get("mode")
    if mode == "fan":
        require_fields(d, path, {"mode", "rank", "maximal_cones"}, {"lattice", "kind", "version"})
        _version(d, path)
        n = decode_number(d["rank"], f"{path}.rank")
        if n < 0:
            raise SchemaError(f"{path}.rank", "rank must be nonnegative")
        cones = [
            [_vector(g, f"{path}.maximal_cones[{i}][{j}]", n) for j, g in enumerate(require_list(gens, f"{path}.maximal_cones[{i}]"))]
            for i, gens in enumerate(require_list(d["maximal_cones"], f"{path}.maximal_cones"))
        ]
        lattice = None
        if "lattice" in d:
            lattice = [
                tuple(decode_number(x, f"{path}.lattice[{i}][{j}]", integral=False) for j, x in enumerate(require_list(b, f"{path}.lattice[{i}]")))
                for i, b in enumerate(require_list(d["lattice"], f"{path}.lattice"))
            ]
            if any(len(b) != n for b in lattice):
                raise SchemaError(f"{path}.lattice", f"basis vectors must have length {n}")
        return fan(n, cones, lattice=lattice)
    if mode == "abstract":
        require_fields(d, path, {"mode", "cones"}, {"faces", "kind", "version"})
        _version(d, path)
        cones = {}
        for i, entry in enumerate(require_list(d["cones"], f"{path}.cones")):
            p = f"{path}.cones[{i}]"
            require_fields(entry, p, {"id", "rank", "rays"})
            cid = _str(entry["id"], f"{p}.id")
            if cid in cones:
                raise SchemaError(f"{p}.id", f"duplicate cone id {cid!r}")
            k = decode_number(entry["rank"], f"{p}.rank")
            rays = [_vector(r, f"{p}.rays[{j}]", k) for j, r in enumerate(require_list(entry["rays"], f"{p}.rays"))]
            cones[cid] = make_cone(rays, dim=k) if k else make_cone([], dim=0)
        embeddings = {}
        for i, entry in enumerate(require_list(d.get("faces", []), f"{path}.faces")):
            p = f"{path}.faces[{i}]"
            require_fields(entry, p, {"face", "parent", "embedding"})
            rho, sigma = _str(entry["face"], f"{p}.face"), _str(entry["parent"], f"{p}.parent")
            for cid, q in ((rho, "face"), (sigma, "parent")):
                if cid not in cones:
                    raise SchemaError(f"{p}.{q}", f"unknown cone id {cid!r}")
            rows, cols = cones[sigma].dim, cones[rho].dim
            e = _matrix(entry["embedding"], f"{p}.embedding", rows, cols)
            embeddings[(rho, sigma)] = e if cols else tuple(() for _ in range(rows))
        zeros = [k for k, c in cones.items() if c.dim == 0]
        if len(zeros) != 1:
            raise SchemaError(f"{path}.cones", "exactly one rank-0 cone is required")
        return PolyhedralComplex(cones, complete_embeddings(cones, embeddings))
    raise SchemaError(f"{path}.mode", "expected 'fan' or 'abstract'")


# morphisms

def morphism_to_document(f: ComplexMorphism) -> dict:
    return {
        "kind": "morphism",
        "version": VERSION,
        "source": complex_to_document(f.source),
        "target": complex_to_document(f.target),
        "assignment": dict(f.assignment),
        "matrices": {k: encode([list(r) for r in m]) for k, m in f.matrices.items()},
    }


def morphism_from_document(d: Any, path: str = "") -> ComplexMorphism:
    require_fields(d, path, {"source", "target"}, {"assignment", "matrices", "matrix", "kind", "version"})
    _version(d, path)
    source = complex_from_document(d["source"], f"{path}.source")
    target = complex_from_document(d["target"], f"{path}.target")
    if "matrix" in d:
        if "assignment" in d or "matrices" in d:
            raise SchemaError(f"{path}.matrix", "give either a global matrix or per-cone matrices")
        if source.charts is None or target.charts is None:
            raise SchemaError(f"{path}.matrix", "a global matrix requires fan-mode complexes")
        m = _matrix(d["matrix"], f"{path}.matrix", target.ambient_dim, source.ambient_dim)
        return morphism_from_matrix(source, target, m)
    if "assignment" not in d or "matrices" not in d:
        raise SchemaError(path, "missing assignment/matrices (or a global matrix)")
    assign_doc = require_fields(d["assignment"], f"{path}.assignment", set(), set(d["assignment"]) if isinstance(d["assignment"], dict) else set())
    mats_doc = require_fields(d["matrices"], f"{path}.matrices", set(), set(d["matrices"]) if isinstance(d["matrices"], dict) else set())
    assignment, matrices = {}, {}
    for sigma, tau in assign_doc.items():
        p = f"{path}.assignment.{sigma}"
        if sigma not in source.cones:
            raise SchemaError(p, f"unknown source cone {sigma!r}")
        tau = _str(tau, p)
        if tau not in target.cones:
            raise SchemaError(p, f"unknown target cone {tau!r}")
        if sigma not in mats_doc:
            raise SchemaError(f"{path}.matrices.{sigma}", "missing matrix")
        rows, cols = target.cones[tau].dim, source.cones[sigma].dim
        m = _matrix(mats_doc[sigma], f"{path}.matrices.{sigma}", rows, cols)
        assignment[sigma] = tau
        matrices[sigma] = m if cols else tuple(() for _ in range(rows))
    for sigma in mats_doc:
        if sigma not in assign_doc:
            raise SchemaError(f"{path}.matrices.{sigma}", "matrix without an assignment")
    _fill_faces(source, target, assignment, matrices)
    return make_morphism(source, target, assignment, matrices)


def _fill_faces(source: PolyhedralComplex, target: PolyhedralComplex, assignment: dict, matrices: dict) -> None:
    """Cones left out of the document inherit the restriction of a given parent."""
    for rho in sorted(source.cones, key=lambda k: -source.cones[k].dim):
        if rho in assignment:
            continue
        parents = [s for s in source.parents_of(rho) if s in assignment]
        if not parents:
            raise SemistableError(f"no map given for cone {rho} or any cone containing it")
        sigma = parents[0]
        tau = assignment[sigma]
        k = source.cones[rho].dim
        m = mat_mul(matrices[sigma], source.embedding(rho, sigma), k) if k else [() for _ in range(target.cones[tau].dim)]
        assignment[rho] = tau
        matrices[rho] = tuple(tuple(r) for r in m)


# subdivisions, good functions, alterations

def _cells_doc(s: Subdivision) -> dict:
    return {k: [[list(r) for r in cell] for cell in cells] for k, cells in s.cells().items()}


def subdivision_to_document(s: Subdivision, psi: GoodFunction | None = None) -> dict:
    doc = {
        "kind": "subdivision",
        "version": VERSION,
        "base": complex_to_document(s.base),
        "refined": complex_to_document(s.refined),
        "cells": encode(_cells_doc(s)),
    }
    if psi is not None:
        doc["good_function"] = encode(dict(sorted(psi.values.items(), key=lambda kv: id_key(kv[0]))))
    return doc


def cells_from(d: Any, base: PolyhedralComplex, path: str) -> dict:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    cells = {}
    for sigma, lst in d.items():
        if sigma not in base.cones:
            raise SchemaError(f"{path}.{sigma}", "unknown base cone")
        n = base.cones[sigma].dim
        cells[sigma] = [
            [_vector(r, f"{path}.{sigma}[{i}][{j}]", n) for j, r in enumerate(require_list(cell, f"{path}.{sigma}[{i}]"))]
            for i, cell in enumerate(require_list(lst, f"{path}.{sigma}"))
        ]
    return cells


def values_from(d: Any, path: str) -> dict:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    return {k: Fraction(decode_number(v, f"{path}.{k}", integral=False)) for k, v in d.items()}


def subdivision_from_document(d: Any, path: str = ""):
    require_fields(d, path, {"base", "cells"}, {"refined", "good_function", "kind", "version"})
    _version(d, path)
    base = complex_from_document(d["base"], f"{path}.base")
    s = subdivision_from_cells(base, cells_from(d["cells"], base, f"{path}.cells"))
    if "refined" in d and complex_from_document(d["refined"], f"{path}.refined") != s.refined:
        raise SchemaError(f"{path}.refined", "refined complex does not match the cells")
    if "good_function" in d:
        values = values_from(d["good_function"], f"{path}.good_function")
        if set(values) != set(s.refined.ray_ids()):
            raise SchemaError(f"{path}.good_function", "values must be given on exactly the refined rays")
        return GoodFunction(s, values)
    return s


def alteration_to_document(a: LatticeAlteration) -> dict:
    return {
        "kind": "alteration",
        "version": VERSION,
        "base": complex_to_document(a.base),
        "altered": complex_to_document(a.altered),
        "bases": {k: encode([list(r) for r in b]) for k, b in a.bases.items() if a.base.cones[k].dim},
    }


def alteration_from_document(d: Any, path: str = "") -> LatticeAlteration:
    require_fields(d, path, {"base", "bases"}, {"altered", "kind", "version"})
    _version(d, path)
    base = complex_from_document(d["base"], f"{path}.base")
    bases = bases_from(d["bases"], base, f"{path}.bases")
    a = alteration_from_bases(base, bases)
    if "altered" in d and complex_from_document(d["altered"], f"{path}.altered") != a.altered:
        raise SchemaError(f"{path}.altered", "altered complex does not match the bases")
    return a


def bases_from(d: Any, base: PolyhedralComplex, path: str) -> dict:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    out = {}
    for k, m in d.items():
        if k not in base.cones:
            raise SchemaError(f"{path}.{k}", "unknown cone")
        n = base.cones[k].dim
        out[k] = _matrix(m, f"{path}.{k}", n, n)
    return out


# dispatch

def to_document(obj: Any) -> dict:
    if isinstance(obj, PolyhedralComplex):
        return complex_to_document(obj)
    if isinstance(obj, ComplexMorphism):
        return morphism_to_document(obj)
    if isinstance(obj, GoodFunction):
        return subdivision_to_document(obj.subdivision, obj)
    if isinstance(obj, Subdivision):
        return subdivision_to_document(obj)
    if isinstance(obj, LatticeAlteration):
        return alteration_to_document(obj)
    if isinstance(obj, dict) and "kind" in obj:
        return encode(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


_READERS = {
    "complex": complex_from_document,
    "morphism": morphism_from_document,
    "subdivision": subdivision_from_document,
    "alteration": alteration_from_document,
}


def from_document(d: Any):
    if not isinstance(d, dict):
        raise SchemaError("", "expected a JSON object")
    kind = d.get("kind")
    if kind is None:
        kind = "complex" if "mode" in d else "morphism" if "source" in d else None
    if kind in _READERS:
        return _READERS[kind](d)
    if kind in ("certificates", "pipeline-result"):
        _version(d, "")
        return d
    raise SchemaError(".kind", f"unknown document kind {kind!r}")


def dump_text(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def serialize(obj: Any) -> str:
    return dump_text(to_document(obj))


def parse(text: str):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"malformed JSON: {exc.msg} at line {exc.lineno}") from None
    return from_document(d)


def load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError:
        raise SchemaError("", "file is not UTF-8") from None
    return parse(text)


def digest(obj: Any) -> str:
    return hashlib.sha256(serialize(obj).encode("utf-8")).hexdigest()
