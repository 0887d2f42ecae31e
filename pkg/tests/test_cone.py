import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import leibniz_det
from semistable.cone import (
    BOUNDARY,
    INTERIOR,
    OUTSIDE,
    contains,
    faces,
    gorenstein_functional,
    is_nonsingular,
    make_cone,
    multiplicity,
    triangulate,
)
from semistable.errors import NotSimplicial, NotStrictlyConvex, RankMismatch
from semistable.lattice import Lattice
from semistable.linalg import dot

SQUARE = [(1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)]


def _cone_or_skip(gens, dim):
    try:
        return make_cone(gens, dim=dim)
    except (NotStrictlyConvex, RankMismatch):
        assume(False)


cone_inputs = st.integers(1, 3).flatmap(
    lambda d: st.tuples(
        st.just(d),
        st.lists(st.tuples(*[st.integers(-2, 3)] * d), min_size=d, max_size=d + 2),
    )
)


def test_redundant_generator_dropped():
    assert make_cone([(1, 0), (0, 1), (1, 1)]).rays == ((0, 1), (1, 0))


def test_generators_are_primitivized():
    assert make_cone([(2,)]).rays == ((1,),)


def test_line_is_rejected():
    with pytest.raises(NotStrictlyConvex):
        make_cone([(1, 0), (-1, 0)])


def test_cone_in_rational_lattice_chart():
    half = Lattice.from_generators([(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), ("1/2", "1/2", "1/2", "1/2")], 4)
    units = [tuple(int(i == j) for i in range(4)) for j in range(4)]
    c = make_cone(units, lattice=half)
    assert len(c.rays) == 4 and multiplicity(c) == 2
    # in the chart basis (e1, e2, e3, w) the last ray is e4 = 2w - e1 - e2 - e3
    chart = make_cone([(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (-1, -1, -1, 2)])
    assert multiplicity(chart) == 2


def test_face_counts():
    assert len(faces(make_cone([(1, 0), (0, 1)]))) == 4
    assert len(faces(make_cone([(1,)]))) == 2
    by_dim = [0] * 4
    for f in faces(make_cone(SQUARE)):
        by_dim[f.dim] += 1
    assert by_dim == [1, 4, 4, 1]


def test_contains_locations():
    q = make_cone([(1, 0), (0, 1)])
    assert contains(q, (1, 1)).kind == INTERIOR
    loc = contains(q, (1, 0))
    assert loc.kind == BOUNDARY and loc.face.rays == ((1, 0),)
    assert contains(q, (-1, 2)).kind == OUTSIDE


def test_multiplicity_examples():
    assert multiplicity(make_cone([(1, 0), (1, 2)])) == 2
    assert multiplicity(make_cone([(1, 0), (0, 1)])) == 1
    assert not is_nonsingular(make_cone([(1, 0), (1, 2)]))
    assert not is_nonsingular(make_cone(SQUARE))
    with pytest.raises(NotSimplicial):
        multiplicity(make_cone(SQUARE))


def test_gorenstein_examples():
    assert gorenstein_functional(make_cone([(1, 0), (0, 1)])) == (-1, -1)
    assert gorenstein_functional(make_cone([(1, 0), (2, 3)])) is None
    assert gorenstein_functional(make_cone(SQUARE)) == (-1, -1, 0)


@settings(max_examples=150, deadline=None)
@given(cone_inputs)
def test_generators_inside_and_rays_extreme(data):
    d, gens = data
    c = _cone_or_skip(gens, d)
    for g in gens:
        assert c.holds(g)
    for i, r in enumerate(c.rays):
        assert contains(c, tuple(-x for x in r)).kind == OUTSIDE
        if d > 1:
            assert contains(c, r).kind == BOUNDARY
    assert contains(c, c.interior_point()).kind == INTERIOR


@settings(max_examples=150, deadline=None)
@given(cone_inputs)
def test_euler_relation_on_faces(data):
    # the face poset of a pointed cone of dim >= 1 has alternating count 0
    d, gens = data
    c = _cone_or_skip(gens, d)
    assert sum((-1) ** f.dim for f in faces(c)) == 0


@settings(max_examples=150, deadline=None)
@given(cone_inputs)
def test_multiplicity_is_determinant(data):
    d, gens = data
    c = _cone_or_skip(gens, d)
    assume(len(c.rays) == d)
    assert multiplicity(c) == abs(leibniz_det([list(r) for r in c.rays]))


@settings(max_examples=150, deadline=None)
@given(cone_inputs)
def test_gorenstein_pairings(data):
    d, gens = data
    c = _cone_or_skip(gens, d)
    g = gorenstein_functional(c)
    if g is not None:
        assert all(dot(g, r) == -1 for r in c.rays)


@settings(max_examples=100, deadline=None)
@given(cone_inputs)
def test_triangulation_covers_without_overlap(data):
    d, gens = data
    c = _cone_or_skip(gens, d)
    simplices = triangulate(c)
    cells = []
    for s in simplices:
        assert len(s) == d
        assert leibniz_det([list(c.rays[i]) for i in s]) != 0
        cells.append(make_cone([c.rays[i] for i in s]))
    if len(c.rays) == d:
        assert simplices == [tuple(range(d))]
    # generators and ray sums lie in some cell; no cell's centre is inside another cell
    for v in list(gens) + [c.interior_point()]:
        if any(v):
            assert any(cell.holds(v) for cell in cells)
    for i, a in enumerate(cells):
        for j, b in enumerate(cells):
            if i != j:
                assert contains(b, a.interior_point()).kind != INTERIOR
