"""Exact rational polyhedral complexes, their morphisms, and semistable reduction.

All arithmetic is over ``int`` and ``fractions.Fraction``.
"""

from .alteration import (
    LatticeAlteration,
    alteration_from_bases,
    check_alteration,
    index_one_alteration,
    induced_lattice_alteration,
)
from .arrangement import projectivize, refine_common
from .complex import (
    LEVELS,
    Classification,
    ComplexMorphism,
    PolyhedralComplex,
    build_complex,
    classify,
    fan,
    has_no_horizontal,
    has_reduced_fibers,
    is_equidimensional,
    lattice_image_surjective,
    make_morphism,
    morphism_from_matrix,
    validate_complex,
    validate_morphism,
)
from .cone import Cone, contains, faces, gorenstein_functional, is_nonsingular, make_cone, multiplicity
from .errors import *  # noqa: F401,F403
from .lattice import Lattice, hnf, lattice_index, snf
from .reduce import (
    covering_data,
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
    compose,
    induced_subdivision,
    nonsingular_subdivision,
    pull_simplicialize,
    star_subdivision,
    verify_good_function,
)

__version__ = "0.1.0"
