import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_complex, random_interior_point, random_morphism
from semistable import io
from semistable.arrangement import projectivize, refine_common
from semistable.complex import fan, identity_morphism, morphism_from_matrix, pull_back, validate_morphism
from semistable.cone import is_nonsingular, is_simplicial, make_cone
from semistable.errors import PointOnBoundary, PointOutside
from semistable.linalg import mat_vec
from semistable.subdivide import (
    GoodFunction,
    check_subdivision,
    compose,
    identity_subdivision,
    induced_subdivision,
    nonsingular_subdivision,
    pull_simplicialize,
    star_subdivision,
    verify_good_function,
)

E1, E2 = (1, 0), (0, 1)


def quadrant():
    return fan(2, [[E1, E2]])


def cell_set(s):
    return {sigma: set(cells) for sigma, cells in s.cells().items()}


def refines(fine, coarse) -> bool:
    """Every maximal cell of ``fine`` sits inside one cell of ``coarse``."""
    for sigma, cells in fine.cells().items():
        dim = fine.base.cones[sigma].dim
        big = [make_cone(c, dim=dim) for c in coarse.cells()[sigma]]
        for c in cells:
            if not any(all(b.holds(r) for r in c) for b in big):
                return False
    return True


def test_star_of_quadrant():
    s, psi = star_subdivision(quadrant(), "r0,1", (1, 1))
    assert cell_set(s) == {"r0,1": {((0, 1), (1, 1)), ((1, 0), (1, 1))}}
    assert verify_good_function(s, psi)[0]
    assert check_subdivision(s) == []


def test_star_at_existing_ray_of_simplicial_fan_is_identity():
    c = quadrant()
    s, _ = star_subdivision(c, "r0", (1,))
    assert s.is_identity()


def test_star_rejects_bad_points():
    c = quadrant()
    with pytest.raises(PointOnBoundary):
        star_subdivision(c, "r0,1", (1, 0))
    with pytest.raises(PointOutside):
        star_subdivision(c, "r0,1", (-1, 1))


def test_star_of_example_source_at_w():
    f = io.load("fixtures/example_8_2.json")
    sigma = f.source.maximal()[0]
    s, psi = star_subdivision(f.source, sigma, (0, 0, 0, 1))
    assert verify_good_function(s, psi)[0]
    cells = s.cells()[sigma]
    assert len(cells) == 4
    assert all((0, 0, 0, 1) in c for c in cells)


def test_pull_square_cone():
    c = fan(3, [[(1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)]])
    s, psi = pull_simplicialize(c)
    first = (0, 1, 0)  # r0, the least ray
    cells = s.cells()[c.maximal()[0]]
    assert {tuple(sorted(x)) for x in cells} == {
        tuple(sorted([first, (1, 0, 1), (1, 0, 0)])),
        tuple(sorted([first, (1, 0, 1), (0, 1, 1)])),
    }
    assert verify_good_function(s, psi)[0]


def test_pull_on_simplicial_is_identity():
    assert pull_simplicialize(quadrant())[0].is_identity()
    assert pull_simplicialize(fan(3, [[(1, 0, 0), (0, 1, 0), (0, 0, 1)]]))[0].is_identity()


def test_nonsingular_examples():
    s, psi = nonsingular_subdivision(fan(2, [[E1, (1, 2)]]))
    assert cell_set(s) == {"r0,1": {((1, 0), (1, 1)), ((1, 1), (1, 2))}}
    assert verify_good_function(s, psi)[0]
    assert nonsingular_subdivision(quadrant())[0].is_identity()
    s, psi = nonsingular_subdivision(fan(2, [[E1, (1, 3)]]))
    rays = {r for cells in s.cells().values() for c in cells for r in c}
    assert rays == {(1, 0), (1, 1), (1, 2), (1, 3)}
    assert verify_good_function(s, psi)[0]


def test_good_function_sign_and_maximality():
    s, _ = star_subdivision(quadrant(), "r0,1", (1, 1))
    new = [r for r in s.refined.ray_ids() if r not in s.base.cones][0]
    # -|x1 - x2| is 0 on the new ray (1,1) and -1 on e1, e2
    values = {r: Fraction(0) if r == new else Fraction(-1) for r in s.refined.ray_ids()}
    assert verify_good_function(s, GoodFunction(s, values))[0]
    flipped = {r: -v for r, v in values.items()}
    assert not verify_good_function(s, GoodFunction(s, flipped))[0]
    # x1 + x2 is linear across the wall, so the wall is not a crease
    linear = {r: Fraction(2) if r == new else Fraction(1) for r in s.refined.ray_ids()}
    assert not verify_good_function(s, GoodFunction(s, linear))[0]


def test_refine_common_examples():
    c = quadrant()
    assert refine_common(c, {"r0,1": [[E1, E2]]}).is_identity()
    s = refine_common(c, {"r0,1": [[E1, (1, 1)]]})
    assert cell_set(s) == cell_set(star_subdivision(c, "r0,1", (1, 1))[0])
    s3 = refine_common(c, {"r0,1": [[E1, (1, 1)], [E1, (2, 1)]]})
    assert cell_set(s3) == {"r0,1": {((1, 0), (2, 1)), ((1, 1), (2, 1)), ((0, 1), (1, 1))}}


def test_compose_matches_refine_common():
    c = quadrant()
    s1, _ = star_subdivision(c, "r0,1", (1, 1))

    def base_rays(rid):
        return {tuple(mat_vec(s1.to_base(rid, "r0,1"), r)) for r in s1.refined.cones[rid].rays}

    half = next(rid for rid in s1.refined_in("r0,1") if s1.refined.cones[rid].dim == 2 and E1 in base_rays(rid))
    s2, _ = star_subdivision(s1.refined, half, pull_back(s1.carrier[half][1], (2, 1)))
    composite = compose(s2, s1)
    assert cell_set(composite) == cell_set(refine_common(c, {"r0,1": [[E1, (1, 1)], [E1, (2, 1)]]}))
    assert compose(identity_subdivision(s1.refined), s1) == s1
    assert compose(s1, identity_subdivision(c)) == s1


def test_projectivize_examples():
    c = quadrant()
    s, _ = star_subdivision(c, "r0,1", (1, 1))
    out, psi = projectivize(c, s)
    assert out == s
    new = [r for r in out.refined.ray_ids() if r not in c.cones][0]
    assert psi.values[new] == 0
    assert all(psi.values[r] == -1 for r in ("r0", "r1"))
    trivial, zero = projectivize(c, identity_subdivision(c))
    assert trivial.is_identity() and set(zero.values.values()) == {0}


def test_projectivize_two_cone_extension():
    c = fan(2, [[E1, (1, 1)], [(1, 1), E2]])
    s, _ = star_subdivision(c, "r1,2", (2, 1))
    out, psi = projectivize(c, s)
    assert verify_good_function(out, psi)[0]
    assert refines(out, s)


def test_induced_subdivision_examples():
    c = quadrant()
    s, _ = star_subdivision(c, "r0,1", (1, 1))
    src, lifted = induced_subdivision(identity_morphism(c), s)
    assert cell_set(src) == cell_set(s)
    cube = fan(3, [[(1, 0, 0), (0, 1, 0), (0, 0, 1)]])
    f = morphism_from_matrix(cube, c, [[1, 1, 0], [0, 0, 1]])
    src, lifted = induced_subdivision(f, s)
    assert check_subdivision(src) == [] and validate_morphism(lifted) == []
    sigma = cube.maximal()[0]
    for cell in src.cells()[sigma]:
        signs = {(r[0] + r[1] > r[2]) - (r[0] + r[1] < r[2]) for r in cell}
        assert signs <= {0, 1} or signs <= {0, -1}
    assert len(src.cells()[sigma]) >= 2


seeds = st.integers(0, 10**6)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_star_subdivision_properties(seed):
    rng = random.Random(seed)
    c = random_complex(rng)
    cone_id = rng.choice([k for k, cone in c.cones.items() if cone.dim >= 2])
    s, psi = star_subdivision(c, cone_id, random_interior_point(rng, c, cone_id))
    assert check_subdivision(s) == []
    assert verify_good_function(s, psi)[0]
    assert len(s.refined.ray_ids()) == len(c.ray_ids()) + 1


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_pull_properties(seed):
    c = random_complex(random.Random(seed))
    s, psi = pull_simplicialize(c)
    assert check_subdivision(s) == []
    assert verify_good_function(s, psi)[0]
    assert len(s.refined.ray_ids()) == len(c.ray_ids())
    assert all(is_simplicial(cone) for cone in s.refined.cones.values())


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_nonsingular_properties(seed):
    c = random_complex(random.Random(seed))
    s, psi = nonsingular_subdivision(c)
    assert check_subdivision(s) == []
    assert verify_good_function(s, psi)[0]
    assert all(is_nonsingular(cone) for cone in s.refined.cones.values())


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_projectivize_properties(seed):
    rng = random.Random(seed)
    c = random_complex(rng)
    cone_id = rng.choice([k for k, cone in c.cones.items() if cone.dim >= 2])
    s, _ = star_subdivision(c, cone_id, random_interior_point(rng, c, cone_id))
    out, psi = projectivize(c, s)
    assert check_subdivision(out) == []
    assert verify_good_function(out, psi)[0]
    assert refines(out, s)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_induced_subdivision_properties(seed):
    rng = random.Random(seed)
    f = random_morphism(rng)
    tau = f.target.maximal()[0]
    if f.target.cones[tau].dim < 2:
        s, _ = nonsingular_subdivision(f.target)
    else:
        s, _ = star_subdivision(f.target, tau, random_interior_point(rng, f.target, tau))
    src, lifted = induced_subdivision(f, s)
    assert check_subdivision(src) == []
    assert validate_morphism(lifted) == []
    assert lifted.target == s.refined
