"""Command-line front end.

Exit codes: 0 success or property holds, 1 property fails (witness printed
as JSON on stdout), 2 bad input, schema error or failed precondition.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction

from . import io
from .alteration import check_alteration
from .complex import (
    ComplexMorphism,
    PolyhedralComplex,
    classify,
    has_no_horizontal,
    has_reduced_fibers,
    is_equidimensional,
    validate_complex,
    validate_morphism,
)
from .errors import PreconditionFailed, SchemaError, SemistableError
from .reduce import (
    PipelineResult,
    equidimensionalize,
    gorenstein_certificate,
    reduce_fibers,
    replay,
    semistabilize_8_2,
    weak_semistable_pipeline,
)
from .subdivide import (
    GoodFunction,
    Subdivision,
    check_subdivision,
    nonsingular_subdivision,
    pull_simplicialize,
    star_subdivision,
    verify_good_function,
)

PROPERTIES = ("no-horizontal", "equidimensional", "reduced", "weak", "almost", "semistable", "gorenstein")
LEVEL_OF = {"weak": "weakly-semistable", "almost": "almost-semistable", "semistable": "semistable"}


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    print(json.dumps(io.encode(obj), sort_keys=True))


def _write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _vector(text: str) -> tuple:
    parts = text.strip().strip("[]()").replace(" ", "").split(",")
    try:
        out = tuple(Fraction(p) for p in parts if p)
    except ValueError:
        raise UsageError(f"cannot read vector {text!r}") from None
    if not out:
        raise UsageError(f"empty vector {text!r}")
    return tuple(int(x) if x.denominator == 1 else x for x in out)


def _load(path: str, kind: type | tuple):
    obj = io.load(path)
    if not isinstance(obj, kind):
        names = kind.__name__ if isinstance(kind, type) else " or ".join(k.__name__ for k in kind)
        raise UsageError(f"{path}: expected a {names} document")
    return obj


def _load_complex(path: str) -> PolyhedralComplex:
    obj = _load(path, (PolyhedralComplex, ComplexMorphism))
    return obj.source if isinstance(obj, ComplexMorphism) else obj


def cmd_validate(args) -> int:
    obj = io.load(args.input)
    if isinstance(obj, PolyhedralComplex):
        violations = validate_complex(obj)
    elif isinstance(obj, ComplexMorphism):
        violations = validate_morphism(obj)
    elif isinstance(obj, GoodFunction):
        violations = check_subdivision(obj.subdivision)
        ok, bad = verify_good_function(obj.subdivision, obj)
        if not violations and not ok:
            _emit({"valid": False, "violations": [{"code": "good-function", "witness": bad}]})
            return 1
    elif isinstance(obj, Subdivision):
        violations = check_subdivision(obj)
    elif isinstance(obj, dict):
        raise UsageError("use verify-cert for certificate bundles")
    else:
        violations = check_alteration(obj)
    report = [{"code": v.code, "ids": list(v.ids), "message": v.message} for v in violations]
    _emit({"valid": not violations, "violations": report})
    return 0 if not violations else 1


def cmd_classify(args) -> int:
    f = _load(args.input, ComplexMorphism)
    _emit(classify(f).to_json())
    return 0


def cmd_check(args) -> int:
    f = _load(args.input, ComplexMorphism)
    prop = args.property
    if prop == "no-horizontal":
        check = has_no_horizontal(f)
        result = {"property": prop, "holds": bool(check), "witness": check.witness}
    elif prop == "equidimensional":
        check = is_equidimensional(f)
        result = {"property": prop, "holds": bool(check), "witness": check.witness}
    elif prop == "reduced":
        check = has_reduced_fibers(f)
        result = {"property": prop, "holds": bool(check), "witness": check.witness}
    elif prop == "gorenstein":
        table = gorenstein_certificate(f)
        result = {"property": prop, "holds": True, "witness": table}
    else:
        cls = classify(f)
        holds = cls.at_least(LEVEL_OF[prop])
        result = {"property": prop, "holds": holds, "level": cls.level, "witness": None if holds else cls.witnesses}
    _emit(result)
    return 0 if result["holds"] else 1


def _write_subdivision(args, s: Subdivision, psi: GoodFunction) -> int:
    _write(args.output, io.serialize(psi))
    _emit({"cones": len(s.refined.cones), "rays": len(s.refined.ray_ids()), "output": args.output})
    return 0


def cmd_subdivide(args) -> int:
    c = _load_complex(args.input)
    s, psi = star_subdivision(c, args.star, _vector(args.at))
    return _write_subdivision(args, s, psi)


def cmd_simplicialize(args) -> int:
    c = _load_complex(args.input)
    return _write_subdivision(args, *pull_simplicialize(c))


def cmd_resolve(args) -> int:
    c = _load_complex(args.input)
    return _write_subdivision(args, *nonsingular_subdivision(c))


def _write_result(args, result: PipelineResult) -> None:
    _write(args.output, io.serialize(result.morphism))
    if getattr(args, "cert", None):
        _write(args.cert, io.dump_text(result.bundle()))


def cmd_equidimensionalize(args) -> int:
    f = _load(args.input, ComplexMorphism)
    eq = equidimensionalize(f)
    certs = [] if eq.target_subdivision.is_identity() else eq.certificates
    morphism = f if not certs else eq.morphism
    result = PipelineResult(f, morphism, certs, classify(morphism))
    _write_result(args, result)
    _emit({"level": result.classification.level, "stages": [c.stage for c in certs]})
    return 0


def cmd_reduce_fibers(args) -> int:
    f = _load(args.input, ComplexMorphism)
    target, source, lifted, cert = reduce_fibers(f)
    trivial = target.is_identity() and source.is_identity()
    certs = [] if trivial else [cert]
    morphism = f if trivial else lifted
    result = PipelineResult(f, morphism, certs, classify(morphism))
    _write_result(args, result)
    _emit({"level": result.classification.level, "covering": cert.witness["covering"]})
    return 0


def cmd_pipeline(args) -> int:
    f = _load(args.input, ComplexMorphism)
    result = weak_semistable_pipeline(f, attempt_almost=not args.no_simplicial)
    _write_result(args, result)
    _emit({"level": result.classification.level, "stages": [c.stage for c in result.certificates]})
    return 0 if result.classification.at_least("weakly-semistable") else 1


def cmd_verify_cert(args) -> int:
    f = _load(args.input, ComplexMorphism)
    with open(args.cert, encoding="utf-8") as fh:
        try:
            bundle = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"malformed JSON: {exc.msg}") from None
    try:
        out = replay(f, bundle)
    except SchemaError:
        raise
    except SemistableError as exc:
        _emit({"verified": False, "reason": str(exc)})
        return 1
    _emit({"verified": True, "output_digest": io.digest(out), "stages": len(bundle["stages"])})
    return 0


def cmd_recipe(args) -> int:
    f = _load(args.input, ComplexMorphism)
    result = semistabilize_8_2(
        f,
        _vector(args.barycenter) if args.barycenter else None,
        _vector(args.center) if args.center else None,
        args.barycenter_cone,
        args.center_cone,
    )
    _write_result(args, result)
    cls = result.classification
    reached = cls.at_least(args.level)
    _emit({"level": cls.level, "reached": reached, "witnesses": cls.witnesses})
    return 0 if reached else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semistable", description="Exact polyhedral complexes and semistable reduction.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, output=False, cert=False):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("input")
        if output:
            sp.add_argument("-o", "--output", required=True)
        if cert:
            sp.add_argument("--cert")
        sp.set_defaults(func=func)
        return sp

    add("validate", cmd_validate, "check structural invariants of any document")
    add("classify", cmd_classify, "print the classification of a morphism")
    sp = add("check", cmd_check, "test one property of a morphism")
    sp.add_argument("--property", required=True, choices=PROPERTIES)
    sp = add("subdivide", cmd_subdivide, "star subdivision at a point", output=True)
    sp.add_argument("--star", required=True, metavar="CONE_ID")
    sp.add_argument("--at", required=True, metavar="VECTOR")
    add("simplicialize", cmd_simplicialize, "triangulate without new rays", output=True)
    add("resolve", cmd_resolve, "nonsingular projective subdivision", output=True)
    add("equidimensionalize", cmd_equidimensionalize, "make a morphism equidimensional", output=True, cert=True)
    add("reduce-fibers", cmd_reduce_fibers, "lattice alteration giving reduced fibers", output=True, cert=True)
    sp = add("pipeline", cmd_pipeline, "full weak semistable reduction", output=True, cert=True)
    sp.add_argument("--no-simplicial", action="store_true", help="skip the source triangulation stage")
    sp = sub.add_parser("verify-cert", help="replay a certificate bundle against its input")
    sp.add_argument("input")
    sp.add_argument("cert")
    sp.set_defaults(func=cmd_verify_cert)
    sp = add("recipe-8-2", cmd_recipe, "target barycentric star, source star, triangulation", output=True, cert=True)
    sp.add_argument("--barycenter", metavar="VECTOR")
    sp.add_argument("--center", metavar="VECTOR")
    sp.add_argument("--barycenter-cone", metavar="CONE_ID")
    sp.add_argument("--center-cone", metavar="CONE_ID")
    sp.add_argument("--level", default="semistable", choices=("weakly-semistable", "almost-semistable", "semistable"))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionFailed as exc:
        print(json.dumps({"error": "PreconditionFailed", "message": str(exc), "witness": io.encode(exc.witness)}, sort_keys=True), file=sys.stderr)
        return 2
    except (SemistableError, UsageError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
