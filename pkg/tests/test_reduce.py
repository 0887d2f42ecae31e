import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_morphism
from semistable import io
from semistable.alteration import (
    alteration_from_bases,
    check_alteration,
    identity_alteration,
    index_one_alteration,
    induced_lattice_alteration,
)
from semistable.complex import classify, fan, identity_morphism, morphism_from_matrix, validate_morphism
from semistable.cone import is_nonsingular
from semistable.errors import InvalidComplex, PreconditionFailed, SemistableError
from semistable.lattice import Lattice, lattice_index
from semistable.reduce import (
    covering_data,
    equidimensionalize,
    gorenstein_certificate,
    reduce_fibers,
    replay,
    semistabilize_8_2,
    weak_semistable_pipeline,
)


def line():
    return fan(1, [[(1,)]])


def doubling():
    return morphism_from_matrix(line(), line(), [[2]])


def example():
    return io.load("fixtures/example_8_2.json")


def test_index_one_alteration_of_singular_cone():
    c = fan(2, [[(1, 0), (1, 2)]])
    a = index_one_alteration(c)
    assert a.index("r0,1") == 2
    assert is_nonsingular(a.altered.cones["r0,1"])
    assert check_alteration(a) == []
    assert index_one_alteration(fan(2, [[(1, 0), (0, 1)]])).is_identity()


def test_index_one_alteration_of_example_source():
    f = example()
    sigma = f.source.maximal()[0]
    a = index_one_alteration(f.source)
    assert a.index(sigma) == 2
    rays = f.source.cones[sigma].rays
    sub = Lattice.from_generators(rays, 4)
    assert lattice_index(sub, Lattice.standard(4)) == 2


def test_inconsistent_alteration_is_rejected():
    c = fan(2, [[(1, 0), (0, 1)]])
    # 2Z^2 on the 2-cone but the full lattice on its rays
    with pytest.raises(InvalidComplex):
        alteration_from_bases(c, {"r0,1": ((2, 0), (0, 2))})
    # r0 is the ray (0, 1), where <(1,0),(0,2)> restricts to 2Z
    a = alteration_from_bases(c, {"r0,1": ((1, 0), (0, 2)), "r0": ((2,),), "r1": ((1,),)})
    assert check_alteration(a) == []


def test_induced_lattice_alterations():
    f = identity_morphism(fan(2, [[(1, 0), (0, 1)]]))
    src, _ = induced_lattice_alteration(f, identity_alteration(f.target))
    assert src.is_identity()
    target = alteration_from_bases(line(), {"r0": ((2,),)})
    src, lifted = induced_lattice_alteration(doubling(), target)
    assert src.is_identity() and lifted.matrices["r0"] == ((1,),)
    plane = fan(2, [[(1, 0), (0, 1)]])
    g = morphism_from_matrix(plane, line(), [[1, 1]])
    src, _ = induced_lattice_alteration(g, target)
    assert src.bases["r0,1"] == ((1, 0), (1, 2))


def test_covering_data_examples():
    assert covering_data(doubling()).multiplier("r0") == 2
    lcm_case = io.load("fixtures/lcm_cover.json")
    assert covering_data(lcm_case).multiplier("r0") == 6
    assert covering_data(example()).is_trivial()


def test_reduce_fibers_doubling():
    target, source, lifted, cert = reduce_fibers(doubling())
    assert target.bases["r0"] == ((2,),) and source.is_identity()
    assert lifted.matrices["r0"] == ((1,),)
    assert classify(lifted).level == "semistable"


def test_reduce_fibers_lcm():
    f = io.load("fixtures/lcm_cover.json")
    target, source, lifted, _ = reduce_fibers(f)
    assert target.bases["r0"] == ((6,),)
    assert source.bases["a"] == ((3,),) and source.bases["b"] == ((2,),)
    assert lifted.matrices["a"] == ((1,),) and lifted.matrices["b"] == ((1,),)


def test_reduce_fibers_identity_when_reduced():
    target, source, _, cert = reduce_fibers(example())
    assert target.is_identity() and source.is_identity()
    assert all(e["m"] == 1 for e in cert.witness["covering"].values())


def test_gorenstein_examples():
    table = gorenstein_certificate(identity_morphism(fan(2, [[(1, 0), (0, 1)]])))
    assert table["target"]["r0,1"] == [-1, -1] and table["source"]["r0,1"] == [-1, -1]
    with pytest.raises(PreconditionFailed):
        gorenstein_certificate(doubling())


def test_equidimensionalize_blowup():
    f = io.load("fixtures/blowup.json")
    eq = equidimensionalize(f)
    assert eq.target_subdivision.cells() == {"r0,1": [((0, 1), (1, 1)), ((1, 0), (1, 1))]}
    assert classify(eq.morphism).level == "semistable"


def test_equidimensionalize_is_identity_on_example():
    eq = equidimensionalize(example())
    assert eq.target_subdivision.is_identity() and eq.source_subdivision.is_identity()


def test_pipeline_examples():
    r = weak_semistable_pipeline(io.load("fixtures/blowup.json"))
    assert r.classification.level == "semistable"
    assert [c.stage for c in r.certificates] == ["subdivide-target", "gorenstein"]
    r = weak_semistable_pipeline(doubling())
    assert r.classification.level == "semistable"
    assert [c.stage for c in r.certificates] == ["reduce-fibers", "gorenstein"]
    r = weak_semistable_pipeline(example())
    assert r.classification.level == "almost-semistable"
    assert [c.stage for c in r.certificates] == ["gorenstein"]


def test_recipe_on_example():
    r = semistabilize_8_2(example(), (1, 1), (0, 0, 0, 1))
    assert r.classification.level == "semistable"
    assert replay(example(), r.bundle()) == r.morphism


def test_recipe_trivial_points():
    f = identity_morphism(fan(2, [[(1, 0), (0, 1)]]))
    r = semistabilize_8_2(f, (0, 0), (0, 0))
    assert r.morphism == f and r.classification.level == "semistable"
    _, _, lifted, _ = reduce_fibers(doubling())
    r = semistabilize_8_2(lifted, None, None)
    assert r.morphism == lifted and r.classification.level == "semistable"


def test_recipe_rejects_non_weak_input():
    with pytest.raises(PreconditionFailed):
        semistabilize_8_2(doubling(), (1,), None)


def test_horizontal_input_is_rejected():
    f = morphism_from_matrix(fan(2, [[(1, 0), (0, 1)]]), line(), [[1, 0]])
    with pytest.raises(PreconditionFailed):
        weak_semistable_pipeline(f)


def _reload(bundle):
    return json.loads(io.dump_text(bundle))


def test_replay_rejects_tampering():
    f = io.load("fixtures/double_cover.json")
    bundle = _reload(weak_semistable_pipeline(f).bundle())
    assert replay(f, bundle) is not None
    bad = _reload(bundle)
    bad["stages"][0]["witness"]["target_bases"]["r0"] = [["3"]]
    with pytest.raises(SemistableError):
        replay(f, bad)
    bad = _reload(bundle)
    bad["output_digest"] = "0" * 64
    with pytest.raises(SemistableError):
        replay(f, bad)


@pytest.mark.parametrize(
    "name", ["tampered_lattice_cert.json", "tampered_good_function_cert.json", "tampered_piece_cert.json"]
)
def test_shipped_negative_certificates(name):
    with open(f"fixtures/{name}", encoding="utf-8") as fh:
        bundle = json.load(fh)
    source = "double_cover" if "lattice" in name else "blowup"
    f = io.load(f"fixtures/{source}.json")
    with pytest.raises(SemistableError, match="certificate rejected"):
        replay(f, bundle)


@pytest.mark.parametrize("name", ["blowup", "double_cover"])
def test_shipped_certificates_verify(name):
    with open(f"fixtures/{name}_cert.json", encoding="utf-8") as fh:
        bundle = json.load(fh)
    replay(io.load(f"fixtures/{name}.json"), bundle)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_pipeline_properties(seed):
    f = random_morphism(random.Random(seed))
    r = weak_semistable_pipeline(f)
    assert validate_morphism(r.morphism) == []
    assert r.classification.at_least("weakly-semistable")
    assert classify(r.morphism).level == r.classification.level
    assert replay(f, _reload(r.bundle())) == r.morphism
