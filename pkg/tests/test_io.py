import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_complex, random_interior_point, random_morphism
from semistable import io
from semistable.alteration import index_one_alteration
from semistable.complex import ComplexMorphism, PolyhedralComplex, fan
from semistable.errors import SchemaError
from semistable.subdivide import GoodFunction, star_subdivision, verify_good_function


def roundtrip(obj):
    return io.parse(io.serialize(obj))


def test_fan_mode_quadrant():
    c = io.parse(json.dumps({"mode": "fan", "rank": 2, "maximal_cones": [[[1, 0], [0, 1]]]}))
    assert isinstance(c, PolyhedralComplex) and len(c.cones) == 4


def test_example_fixture_parses():
    f = io.load("fixtures/example_8_2.json")
    assert isinstance(f, ComplexMorphism)
    assert f.source.cones[f.source.maximal()[0]].dim == 4


def test_complex_roundtrip():
    c = fan(2, [[(1, 0), (1, 1)], [(1, 1), (0, 1)]])
    assert roundtrip(c) == c


def test_subdivision_roundtrip_keeps_good_function():
    s, psi = star_subdivision(fan(2, [[(1, 0), (0, 1)]]), "r0,1", (1, 1))
    back = roundtrip(psi)
    assert isinstance(back, GoodFunction)
    assert back.values == psi.values
    assert back.subdivision.cells() == s.cells()
    assert verify_good_function(back.subdivision, back)[0]


def test_alteration_roundtrip():
    a = index_one_alteration(fan(2, [[(1, 0), (1, 2)]]))
    b = roundtrip(a)
    assert b.bases == a.bases


@pytest.mark.parametrize(
    "text",
    [
        '{"mode": "fan", "rank": 2, "maximal_cones": [[[1, 0], [0, 1]]',
        "[1, 2]",
        '{"mode": "fan", "rank": 2, "maximal_cones": [[[1, 0]]], "colour": "red"}',
        '{"mode": "fan", "rank": 2, "maximal_cones": [[[1, 0, 0]]]}',
        '{"mode": "fan", "rank": "x", "maximal_cones": []}',
        '{"mode": "circle"}',
        '{"kind": "sandwich"}',
        '{"mode": "abstract", "cones": []}',
    ],
)
def test_malformed_documents_raise_schema_error(text):
    with pytest.raises(SchemaError):
        io.parse(text)


def test_unknown_morphism_field_is_rejected():
    with open("fixtures/double_cover.json", encoding="utf-8") as fh:
        d = json.load(fh)
    d["extra"] = 1
    with pytest.raises(SchemaError):
        io.from_document(d)


def test_serialization_is_canonical():
    f = io.load("fixtures/example_8_2.json")
    text = io.serialize(f)
    assert io.serialize(io.parse(text)) == text
    assert io.digest(f) == io.digest(io.parse(text))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_roundtrips(seed):
    rng = random.Random(seed)
    f = random_morphism(rng)
    assert roundtrip(f) == f
    c = random_complex(rng)
    assert roundtrip(c) == c
    cone_id = rng.choice([k for k, cone in c.cones.items() if cone.dim >= 2])
    _, psi = star_subdivision(c, cone_id, random_interior_point(rng, c, cone_id))
    text = io.serialize(psi)
    assert io.serialize(io.parse(text)) == text
